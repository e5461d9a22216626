#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace qflab {

/**
 * Machine-readable failure codes. Every error thrown by the library carries
 * one of these; the CLI maps invalid-input codes to exit 2 and numerical
 * codes to exit 3.
 */
enum class Errc {
    InvalidBounds,
    TooFewPoints,
    NonFiniteSample,
    GridMismatch,
    MarginExceedsGrid,
    NoSignChange,
    MaxIterations,
    ZeroRate,
    DegeneratePotential,
    NontrivialVacuumRequired,
    SingularStepMatrix,
    NonFiniteValues,
    InvalidInputs,
    StrikeOutsideGrid,
    IoError,
};

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    Errc code() const noexcept { return code_; }

    /// Stable kebab-case name, e.g. "no-sign-change". Used in CLI error objects.
    const char* code_name() const noexcept;

    /// True for failures of the numerics (root bracketing, singular solves, ...)
    /// as opposed to rejected inputs.
    bool numerical() const noexcept;

private:
    Errc code_;
};

/**
 * Black-Scholes market parameters in log-price coordinates.
 *
 * `stable()` reports whether sigma^2 <= 2r; the library evaluates everything
 * either way, callers decide what to do with the flag.
 */
struct BsParams {
    double r;      // risk-free rate, >= 0
    double sigma;  // volatility, > 0

    BsParams(double r_, double sigma_);

    double sigma2() const { return sigma * sigma; }
    bool stable() const { return sigma * sigma <= 2.0 * r; }
};

/**
 * Merton-Garman parameters. The volatility is stochastic with
 * sigma^2 = e^y; lambda/mu drive the drift of y, zeta its noise,
 * alpha the noise exponent and rho the price-volatility correlation.
 */
struct MgParams {
    double r;       // risk-free rate, >= 0
    double lambda;  // volatility drift offset
    double mu;      // volatility drift slope
    double zeta;    // volatility-of-volatility, >= 0
    double alpha;   // volatility exponent
    double rho;     // price-volatility correlation, in [-1, 1]

    MgParams(double r_, double lambda_, double mu_, double zeta_, double alpha_, double rho_);
};

/**
 * Uniform 1D grid over a truncated domain. All integrals and operators in
 * this library are relative to such a truncation; there is no representation
 * of the infinite line.
 */
struct Grid1D {
    double x_min = 0.0;
    double x_max = 0.0;
    int n = 0;        // point count, >= 5
    double dx = 0.0;  // (x_max - x_min) / (n - 1)

    double x(int i) const { return x_min + i * dx; }

    friend bool operator==(const Grid1D&, const Grid1D&) = default;
};

/// Tensor grid in (x, y) = (log-price, log-variance).
struct Grid2D {
    Grid1D gx;
    Grid1D gy;

    int nx() const { return gx.n; }
    int ny() const { return gy.n; }
    std::size_t size() const { return static_cast<std::size_t>(gx.n) * gy.n; }

    // Row-major with x as the slow axis: flat = ix * ny + iy.
    std::size_t index(int ix, int iy) const {
        return static_cast<std::size_t>(ix) * gy.n + iy;
    }

    friend bool operator==(const Grid2D&, const Grid2D&) = default;
};

using Grid = std::variant<Grid1D, Grid2D>;

bool grids_equal(const Grid& a, const Grid& b);
std::size_t grid_size(const Grid& g);

Grid1D make_grid_1d(double x_min, double x_max, int n);
Grid2D make_grid_2d(const Grid1D& gx, const Grid1D& gy);

/**
 * Scalar field sampled on a grid. Immutable after construction; the
 * constructor rejects fields whose length does not match the grid or that
 * contain non-finite values.
 */
class Field {
public:
    Field(Grid grid, std::vector<double> values);

    const Grid& grid() const { return grid_; }
    bool is_2d() const { return std::holds_alternative<Grid2D>(grid_); }
    const Grid1D& grid1() const;
    const Grid2D& grid2() const;

    const std::vector<double>& values() const { return values_; }
    std::size_t size() const { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }

private:
    Grid grid_;
    std::vector<double> values_;
};

/// Pointwise sampling; throws NonFiniteSample if f produces NaN/Inf anywhere.
Field sample(const Grid1D& g, const std::function<double(double)>& f);
Field sample(const Grid2D& g, const std::function<double(double, double)>& f);

/**
 * Trapezoidal quadrature of a*b over the truncated domain (tensor-product
 * weights in 2D). Exact for affine integrands; second-order otherwise.
 */
double inner_product(const Field& a, const Field& b);

/// Trapezoid weight of node i on a 1D grid.
double trapezoid_weight(const Grid1D& g, int i);

}  // namespace qflab
