#include <string>
#include <vector>

#include "qflab/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return qflab::cli::run(args);
}
