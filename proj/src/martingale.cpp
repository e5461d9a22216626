#include "qflab/martingale.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace qflab {

double bs_martingale_residual(const BsParams& p, const Grid1D& g) {
    const BandedOperator h = build_bs_hamiltonian(p, g);
    const Field ex = sample(g, [](double x) { return std::exp(x); });
    const Field res = h.apply(ex);
    double worst = 0.0;
    for (int i = h.interior_margin(); i < g.n - h.interior_margin(); ++i) {
        const std::size_t k = static_cast<std::size_t>(i);
        worst = std::max(worst, std::abs(res[k]) / ex[k]);
    }
    return worst;
}

double extended_martingale_gap(const MgParams& p, double y) {
    return p.lambda * std::exp(-y) + p.mu + 0.5 * p.zeta * p.zeta * std::exp(2.0 * y * (p.alpha - 1.0)) +
           p.rho * p.zeta * std::exp(y * (p.alpha - 0.5));
}

Field extended_martingale_residual(const MgParams& p, const Grid2D& g) {
    const BandedOperator h = build_mg_hamiltonian(p, g);
    const Field s = sample(g, [](double x, double y) { return std::exp(x + y); });
    const Field hs = h.apply(s);
    std::vector<double> r(g.size());
    for (int ix = 0; ix < g.nx(); ++ix) {
        for (int iy = 0; iy < g.ny(); ++iy) {
            const std::size_t k = g.index(ix, iy);
            r[k] = hs[k] / s[k] + extended_martingale_gap(p, g.gy.x(iy));
        }
    }
    return Field(Grid(g), std::move(r));
}

ConstraintResidual martingale_constraint_residual(const MgParams& p, double y) {
    if (!std::isfinite(y))
        throw Error(Errc::InvalidInputs, "martingale_constraint_residual: y must be finite");
    const double res = p.lambda +
                       std::exp(y) * (p.mu + 0.5 * p.zeta * p.zeta * std::exp(2.0 * y * (p.alpha - 1.0)) +
                                      p.rho * p.zeta * std::exp(y * (p.alpha - 0.5)));
    if (!std::isfinite(res))
        throw Error(Errc::NonFiniteValues, "martingale_constraint_residual: overflow at y=" + std::to_string(y));
    return ConstraintResidual{y, res};
}

double martingale_constraint_scale(const MgParams& p, double y) {
    const double s = std::abs(p.lambda) +
                     std::exp(y) * (std::abs(p.mu) + 0.5 * p.zeta * p.zeta * std::exp(2.0 * y * (p.alpha - 1.0)) +
                                    std::abs(p.rho * p.zeta) * std::exp(y * (p.alpha - 0.5)));
    return std::max(1.0, s);
}

double solve_constraint_y(const MgParams& p, double y_lo, double y_hi) {
    if (!(y_lo < y_hi))
        throw Error(Errc::InvalidInputs, "solve_constraint_y: require y_lo < y_hi");
    double a = y_lo, b = y_hi;
    double fa = martingale_constraint_residual(p, a).residual;
    double fb = martingale_constraint_residual(p, b).residual;
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if ((fa > 0.0) == (fb > 0.0))
        throw Error(Errc::NoSignChange, "solve_constraint_y: bracket endpoints have the same sign");

    constexpr int kMaxIter = 200;
    for (int it = 0; it < kMaxIter; ++it) {
        // secant proposal, bisection fallback when it leaves the bracket
        double c = (fb != fa) ? b - fb * (b - a) / (fb - fa) : 0.5 * (a + b);
        const double mid = 0.5 * (a + b);
        if (!(c > a && c < b)) c = mid;
        const double fc = martingale_constraint_residual(p, c).residual;
        if (std::abs(fc) <= 1e-12 * martingale_constraint_scale(p, c) || c == a || c == b) return c;
        if ((fc > 0.0) == (fa > 0.0)) {
            a = c;
            fa = fc;
        } else {
            b = c;
            fb = fc;
        }
        // keep the interval shrinking geometrically
        if (b - a > 0.5 * std::abs(y_hi - y_lo) * std::pow(0.75, it)) {
            const double m = 0.5 * (a + b);
            const double fm = martingale_constraint_residual(p, m).residual;
            if (std::abs(fm) <= 1e-12 * martingale_constraint_scale(p, m)) return m;
            if ((fm > 0.0) == (fa > 0.0)) {
                a = m;
                fa = fm;
            } else {
                b = m;
                fb = fm;
            }
        }
        if (b - a <= 4.0 * std::numeric_limits<double>::epsilon() * std::max({1.0, std::abs(a), std::abs(b)}))
            return std::abs(fa) < std::abs(fb) ? a : b;
    }
    throw Error(Errc::MaxIterations, "solve_constraint_y: no convergence after 200 iterations");
}

SymmetryReport broken_generator_report(const BandedOperator& h, const BandedOperator& gen,
                                       const Field& vacuum, const std::string& generator_name) {
    if (!grids_equal(h.grid(), gen.grid()) || !grids_equal(h.grid(), vacuum.grid()))
        throw Error(Errc::GridMismatch, "broken_generator_report: grids differ");

    const int comm_margin = h.interior_margin() + gen.interior_margin();
    const BandedOperator comm = commutator(h, gen);
    const double comm_norm = interior_norm(comm, comm_margin);
    const double scale =
        std::max(1.0, interior_norm(h, comm_margin) * interior_norm(gen, comm_margin));

    const int act_margin = std::max(1, gen.interior_margin());
    const double vac_norm = interior_norm(vacuum, act_margin);
    if (vac_norm == 0.0)
        throw Error(Errc::InvalidInputs, "broken_generator_report: vacuum vanishes on the interior");
    const double act_norm = interior_norm(gen.apply(vacuum), act_margin);

    SymmetryReport rep;
    rep.generator_name = generator_name;
    rep.commutator_norm = comm_norm;
    rep.commutator_scale = scale;
    rep.commutes_with_h = comm_norm <= kCommuteTolerance * scale;
    rep.action_norm_ratio = act_norm / vac_norm;
    rep.broken = rep.commutes_with_h && rep.action_norm_ratio > kBrokenActionThreshold;
    return rep;
}

CommutatorExpectation commutator_expectation(const Field& S, const Field& phibar,
                                             const Field& phibar_deriv_analytic) {
    if (!grids_equal(S.grid(), phibar.grid()) || !grids_equal(S.grid(), phibar_deriv_analytic.grid()))
        throw Error(Errc::GridMismatch, "commutator_expectation: grids differ");
    if (S.is_2d())
        throw Error(Errc::InvalidInputs, "commutator_expectation: 1D fields expected");
    const Grid1D& g = S.grid1();

    CommutatorExpectation out;
    out.i1 = inner_product(S, d_dx(g).apply(phibar));
    out.i2 = inner_product(S, phibar_deriv_analytic);

    const Field ones = sample(g, [](double) { return 1.0; });
    const double s_mass = inner_product(S, ones);
    out.ng_shift = inner_product(S, phibar) / s_mass;
    std::vector<double> shifted(phibar.values());
    for (double& v : shifted) v -= out.ng_shift;
    out.centered = inner_product(S, Field(S.grid(), std::move(shifted)));
    return out;
}

}  // namespace qflab
