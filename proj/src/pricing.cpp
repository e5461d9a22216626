#include "qflab/pricing.hpp"

#include <algorithm>
#include <cmath>

namespace qflab {

BandedLU::BandedLU(std::size_t n, int half_bandwidth)
    : n_(n), b_(half_bandwidth), data_(n * (2 * static_cast<std::size_t>(half_bandwidth) + 1), 0.0) {
    if (half_bandwidth < 0 || static_cast<std::size_t>(half_bandwidth) >= n)
        throw Error(Errc::InvalidInputs, "BandedLU: bad bandwidth");
}

double& BandedLU::at(std::size_t row, long col) {
    const long off = col - static_cast<long>(row);
    if (off < -b_ || off > b_)
        throw Error(Errc::InvalidInputs, "BandedLU: entry outside band");
    return data_[row * (2 * b_ + 1) + static_cast<std::size_t>(off + b_)];
}

double BandedLU::get(std::size_t row, long col) const {
    const long off = col - static_cast<long>(row);
    if (off < -b_ || off > b_) return 0.0;
    return data_[row * (2 * b_ + 1) + static_cast<std::size_t>(off + b_)];
}

void BandedLU::factor() {
    for (std::size_t k = 0; k < n_; ++k) {
        const double pivot = get(k, static_cast<long>(k));
        if (std::abs(pivot) < 1e-300)
            throw Error(Errc::SingularStepMatrix, "BandedLU: vanishing pivot at row " + std::to_string(k));
        const std::size_t last = std::min(n_ - 1, k + static_cast<std::size_t>(b_));
        for (std::size_t i = k + 1; i <= last; ++i) {
            const double l = get(i, static_cast<long>(k)) / pivot;
            at(i, static_cast<long>(k)) = l;
            if (l == 0.0) continue;
            for (std::size_t j = k + 1; j <= last; ++j)
                at(i, static_cast<long>(j)) -= l * get(k, static_cast<long>(j));
        }
    }
    factored_ = true;
}

void BandedLU::solve_in_place(std::vector<double>& rhs) const {
    if (!factored_ || rhs.size() != n_)
        throw Error(Errc::InvalidInputs, "BandedLU: solve before factor or size mismatch");
    for (std::size_t i = 0; i < n_; ++i) {
        const std::size_t first = (i > static_cast<std::size_t>(b_)) ? i - b_ : 0;
        double acc = rhs[i];
        for (std::size_t j = first; j < i; ++j) acc -= get(i, static_cast<long>(j)) * rhs[j];
        rhs[i] = acc;
    }
    for (std::size_t ii = n_; ii-- > 0;) {
        const std::size_t last = std::min(n_ - 1, ii + static_cast<std::size_t>(b_));
        double acc = rhs[ii];
        for (std::size_t j = ii + 1; j <= last; ++j) acc -= get(ii, static_cast<long>(j)) * rhs[j];
        rhs[ii] = acc / get(ii, static_cast<long>(ii));
    }
}

const char* to_string(Scheme s) {
    return s == Scheme::ImplicitEuler ? "implicit-euler" : "crank-nicolson";
}

namespace {

struct FlatShape {
    int nx;
    int ny;
    bool two_d;
};

FlatShape flat_shape(const Grid& g) {
    if (const auto* g1 = std::get_if<Grid1D>(&g)) return {g1->n, 1, false};
    const auto& g2 = std::get<Grid2D>(g);
    return {g2.nx(), g2.ny(), true};
}

}  // namespace

Field evolve(const BandedOperator& h, const Field& terminal, const EvolutionConfig& cfg) {
    if (!grids_equal(h.grid(), terminal.grid()) || !grids_equal(h.grid(), cfg.grid))
        throw Error(Errc::GridMismatch, "evolve: operator, terminal field and config grids differ");
    if (cfg.steps < 1)
        throw Error(Errc::InvalidInputs, "evolve: steps must be >= 1");
    if (!(cfg.maturity > 0.0) || !std::isfinite(cfg.maturity))
        throw Error(Errc::InvalidInputs, "evolve: maturity must be > 0");

    const FlatShape s = flat_shape(h.grid());
    const std::size_t n = terminal.size();
    const double dt = cfg.maturity / cfg.steps;
    const double theta = (cfg.scheme == Scheme::ImplicitEuler) ? 1.0 : 0.5;
    const int margin = h.interior_margin();

    std::vector<bool> pinned(n, false);
    for (std::size_t row = 0; row < n; ++row) pinned[row] = !h.row_is_interior(row, margin);

    // Flattened half-bandwidth of the non-pinned rows. Interior rows only use
    // offsets within the operator's bandwidth, so this stays small.
    const int bw = h.bandwidth();
    const int flat_bw = s.two_d ? bw * s.ny + bw : bw;

    BandedLU lhs(n, flat_bw);
    for (std::size_t row = 0; row < n; ++row) lhs.at(row, static_cast<long>(row)) = 1.0;
    for (const auto& [k, c] : h.bands()) {
        const long flat = static_cast<long>(k.dx) * s.ny + k.dy;
        for (std::size_t row = 0; row < n; ++row) {
            if (pinned[row] || c[row] == 0.0) continue;
            lhs.at(row, static_cast<long>(row) + flat) += theta * dt * c[row];
        }
    }
    lhs.factor();

    std::vector<double> v(terminal.values());
    std::vector<double> rhs(n);
    for (int step = 0; step < cfg.steps; ++step) {
        if (cfg.scheme == Scheme::CrankNicolson) {
            const Field hv = h.apply(Field(h.grid(), v));
            for (std::size_t row = 0; row < n; ++row)
                rhs[row] = pinned[row] ? terminal[row] : v[row] - 0.5 * dt * hv[row];
        } else {
            for (std::size_t row = 0; row < n; ++row) rhs[row] = pinned[row] ? terminal[row] : v[row];
        }
        lhs.solve_in_place(rhs);
        v.swap(rhs);
        for (double x : v) {
            if (!std::isfinite(x))
                throw Error(Errc::NonFiniteValues, "evolve: non-finite values after step " + std::to_string(step));
        }
    }
    return Field(h.grid(), std::move(v));
}

double norm_cdf(double x) {
    // Abramowitz & Stegun 26.2.17, |error| < 7.5e-8.
    constexpr double kP = 0.2316419;
    constexpr double b1 = 0.319381530;
    constexpr double b2 = -0.356563782;
    constexpr double b3 = 1.781477937;
    constexpr double b4 = -1.821255978;
    constexpr double b5 = 1.330274429;
    constexpr double kInvSqrt2Pi = 0.3989422804014326779;
    const double ax = std::abs(x);
    const double t = 1.0 / (1.0 + kP * ax);
    const double pdf = kInvSqrt2Pi * std::exp(-0.5 * ax * ax);
    const double poly = t * (b1 + t * (b2 + t * (b3 + t * (b4 + t * b5))));
    const double tail = pdf * poly;
    return x >= 0.0 ? 1.0 - tail : tail;
}

double bs_closed_form(double s0, double strike, const BsParams& p, double maturity) {
    if (!(s0 > 0.0) || !(strike > 0.0) || !(maturity > 0.0))
        throw Error(Errc::InvalidInputs, "bs_closed_form: require s0, strike, maturity > 0");
    const double vol_sqrt_t = p.sigma * std::sqrt(maturity);
    const double d1 = (std::log(s0 / strike) + (p.r + 0.5 * p.sigma * p.sigma) * maturity) / vol_sqrt_t;
    const double d2 = d1 - vol_sqrt_t;
    return s0 * norm_cdf(d1) - strike * std::exp(-p.r * maturity) * norm_cdf(d2);
}

PricingResult price_european_call(const BsParams& p, const Grid1D& g, double strike,
                                  const EvolutionConfig& cfg, double x0) {
    if (!(strike > 0.0) || std::log(strike) < g.x_min || std::log(strike) > g.x_max)
        throw Error(Errc::StrikeOutsideGrid, "price_european_call: ln(strike) must lie inside the grid");
    if (x0 < g.x_min || x0 > g.x_max)
        throw Error(Errc::InvalidInputs, "price_european_call: x0 outside the grid");

    const Field payoff = sample(g, [&](double x) { return std::max(std::exp(x) - strike, 0.0); });
    const BandedOperator h = build_bs_hamiltonian(p, g);
    const Field evolved = evolve(h, payoff, cfg);

    // linear interpolation at x0 (grids are chosen so x0 is usually a node)
    int i = static_cast<int>(std::floor((x0 - g.x_min) / g.dx));
    i = std::clamp(i, 0, g.n - 2);
    const double w = (x0 - g.x(i)) / g.dx;
    const double spot = (1.0 - w) * evolved[static_cast<std::size_t>(i)] +
                        w * evolved[static_cast<std::size_t>(i + 1)];

    const double oracle = bs_closed_form(std::exp(x0), strike, p, cfg.maturity);
    PricingResult out{evolved, spot, oracle, 0.0};
    out.rel_error = std::abs(spot - oracle) / std::max(std::abs(oracle), 1e-300);
    return out;
}

double martingale_evolution_check(const BandedOperator& h, const Field& vacuum,
                                  const EvolutionConfig& cfg) {
    const Field evolved = evolve(h, vacuum, cfg);
    const int margin = h.interior_margin();
    double worst = 0.0;
    for (std::size_t row = 0; row < vacuum.size(); ++row) {
        if (!h.row_is_interior(row, margin)) continue;
        const double denom = std::abs(vacuum[row]);
        if (denom == 0.0)
            throw Error(Errc::InvalidInputs, "martingale_evolution_check: vacuum vanishes on the interior");
        worst = std::max(worst, std::abs(evolved[row] - vacuum[row]) / denom);
    }
    return worst;
}

}  // namespace qflab
