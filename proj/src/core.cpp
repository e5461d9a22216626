#include "qflab/core.hpp"

#include <limits>

namespace qflab {

const char* Error::code_name() const noexcept {
    switch (code_) {
        case Errc::InvalidBounds: return "invalid-bounds";
        case Errc::TooFewPoints: return "too-few-points";
        case Errc::NonFiniteSample: return "non-finite-sample";
        case Errc::GridMismatch: return "grid-mismatch";
        case Errc::MarginExceedsGrid: return "margin-exceeds-grid";
        case Errc::NoSignChange: return "no-sign-change";
        case Errc::MaxIterations: return "max-iterations";
        case Errc::ZeroRate: return "zero-rate";
        case Errc::DegeneratePotential: return "degenerate-potential";
        case Errc::NontrivialVacuumRequired: return "nontrivial-vacuum-required";
        case Errc::SingularStepMatrix: return "singular-step-matrix";
        case Errc::NonFiniteValues: return "non-finite-values";
        case Errc::InvalidInputs: return "invalid-inputs";
        case Errc::StrikeOutsideGrid: return "strike-outside-grid";
        case Errc::IoError: return "io-error";
    }
    return "unknown";
}

bool Error::numerical() const noexcept {
    switch (code_) {
        case Errc::NoSignChange:
        case Errc::MaxIterations:
        case Errc::SingularStepMatrix:
        case Errc::NonFiniteValues:
        case Errc::NonFiniteSample:
            return true;
        default:
            return false;
    }
}

BsParams::BsParams(double r_, double sigma_) : r(r_), sigma(sigma_) {
    if (!std::isfinite(r) || !std::isfinite(sigma))
        throw Error(Errc::InvalidInputs, "BsParams: non-finite parameter");
    if (r < 0.0)
        throw Error(Errc::InvalidInputs, "BsParams: r must be >= 0");
    if (sigma <= 0.0)
        throw Error(Errc::InvalidInputs, "BsParams: sigma must be > 0");
}

MgParams::MgParams(double r_, double lambda_, double mu_, double zeta_, double alpha_, double rho_)
    : r(r_), lambda(lambda_), mu(mu_), zeta(zeta_), alpha(alpha_), rho(rho_) {
    if (!std::isfinite(r) || !std::isfinite(lambda) || !std::isfinite(mu) ||
        !std::isfinite(zeta) || !std::isfinite(alpha) || !std::isfinite(rho))
        throw Error(Errc::InvalidInputs, "MgParams: non-finite parameter");
    if (r < 0.0)
        throw Error(Errc::InvalidInputs, "MgParams: r must be >= 0");
    if (zeta < 0.0)
        throw Error(Errc::InvalidInputs, "MgParams: zeta must be >= 0");
    if (rho < -1.0 || rho > 1.0)
        throw Error(Errc::InvalidInputs, "MgParams: rho must lie in [-1, 1]");
}

Grid1D make_grid_1d(double x_min, double x_max, int n) {
    if (!std::isfinite(x_min) || !std::isfinite(x_max) || x_min >= x_max)
        throw Error(Errc::InvalidBounds, "make_grid_1d: require x_min < x_max");
    if (n < 5)
        throw Error(Errc::TooFewPoints, "make_grid_1d: require n >= 5");
    Grid1D g;
    g.x_min = x_min;
    g.x_max = x_max;
    g.n = n;
    g.dx = (x_max - x_min) / (n - 1);
    return g;
}

Grid2D make_grid_2d(const Grid1D& gx, const Grid1D& gy) {
    if (gx.n < 5 || gy.n < 5 || gx.dx <= 0.0 || gy.dx <= 0.0)
        throw Error(Errc::InvalidBounds, "make_grid_2d: invalid axis grid");
    return Grid2D{gx, gy};
}

bool grids_equal(const Grid& a, const Grid& b) { return a == b; }

std::size_t grid_size(const Grid& g) {
    if (const auto* g1 = std::get_if<Grid1D>(&g)) return static_cast<std::size_t>(g1->n);
    return std::get<Grid2D>(g).size();
}

Field::Field(Grid grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
    if (values_.size() != grid_size(grid_))
        throw Error(Errc::GridMismatch, "Field: value count does not match grid");
    for (double v : values_) {
        if (!std::isfinite(v))
            throw Error(Errc::NonFiniteValues, "Field: non-finite value");
    }
}

const Grid1D& Field::grid1() const {
    if (const auto* g = std::get_if<Grid1D>(&grid_)) return *g;
    throw Error(Errc::GridMismatch, "Field: expected a 1D grid");
}

const Grid2D& Field::grid2() const {
    if (const auto* g = std::get_if<Grid2D>(&grid_)) return *g;
    throw Error(Errc::GridMismatch, "Field: expected a 2D grid");
}

Field sample(const Grid1D& g, const std::function<double(double)>& f) {
    std::vector<double> v(static_cast<std::size_t>(g.n));
    for (int i = 0; i < g.n; ++i) {
        const double fi = f(g.x(i));
        if (!std::isfinite(fi))
            throw Error(Errc::NonFiniteSample, "sample: non-finite value at x=" + std::to_string(g.x(i)));
        v[static_cast<std::size_t>(i)] = fi;
    }
    return Field(Grid(g), std::move(v));
}

Field sample(const Grid2D& g, const std::function<double(double, double)>& f) {
    std::vector<double> v(g.size());
    for (int ix = 0; ix < g.nx(); ++ix) {
        const double x = g.gx.x(ix);
        for (int iy = 0; iy < g.ny(); ++iy) {
            const double fij = f(x, g.gy.x(iy));
            if (!std::isfinite(fij))
                throw Error(Errc::NonFiniteSample, "sample: non-finite value");
            v[g.index(ix, iy)] = fij;
        }
    }
    return Field(Grid(g), std::move(v));
}

double trapezoid_weight(const Grid1D& g, int i) {
    return (i == 0 || i == g.n - 1) ? 0.5 * g.dx : g.dx;
}

double inner_product(const Field& a, const Field& b) {
    if (!grids_equal(a.grid(), b.grid()))
        throw Error(Errc::GridMismatch, "inner_product: fields live on different grids");
    double acc = 0.0;
    if (!a.is_2d()) {
        const Grid1D& g = a.grid1();
        for (int i = 0; i < g.n; ++i)
            acc += trapezoid_weight(g, i) * a[static_cast<std::size_t>(i)] * b[static_cast<std::size_t>(i)];
    } else {
        const Grid2D& g = a.grid2();
        for (int ix = 0; ix < g.nx(); ++ix) {
            const double wx = trapezoid_weight(g.gx, ix);
            for (int iy = 0; iy < g.ny(); ++iy) {
                const std::size_t k = g.index(ix, iy);
                acc += wx * trapezoid_weight(g.gy, iy) * a[k] * b[k];
            }
        }
    }
    return acc;
}

}  // namespace qflab
