#pragma once

#include <string>
#include <vector>

namespace qflab::cli {

inline constexpr const char* kVersion = "0.1.0";

/**
 * Dispatches one subcommand and writes a JSON report (stdout or --out).
 *
 * Exit codes:
 *   0  computation succeeded and every assertion passed
 *   1  computation succeeded, at least one assertion failed
 *   2  invalid input (bad flags, bad config, unwritable output)
 *   3  numerical failure (no sign change, singular step matrix, ...)
 */
int run(const std::vector<std::string>& args);

}  // namespace qflab::cli
