#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "qflab/core.hpp"
#include "qflab/operators.hpp"

using namespace qflab;

namespace {

double interior_max_rel(const BandedOperator& op, const Field& f, const Field& ref, int margin) {
    const Field r = op.apply(f);
    double worst = 0.0;
    for (std::size_t row = 0; row < r.size(); ++row) {
        if (!op.row_is_interior(row, margin)) continue;
        worst = std::max(worst, std::abs(r[row]) / std::abs(ref[row]));
    }
    return worst;
}

}  // namespace

TEST_CASE("first derivative stencil") {
    const Grid1D g = make_grid_1d(-1.0, 1.0, 201);
    const BandedOperator d1 = d_dx(g);
    CHECK(d1.interior_margin() == 1);
    CHECK(d1.bandwidth() == 1);

    const Field c = sample(g, [](double) { return 3.25; });
    const Field dc = d1.apply(c);
    for (int i = 1; i < g.n - 1; ++i) CHECK(std::abs(dc[i]) <= 1e-12);

    const Field lin = sample(g, [](double x) { return x; });
    const Field dl = d1.apply(lin);
    for (int i = 1; i < g.n - 1; ++i) CHECK(dl[i] == doctest::Approx(1.0).epsilon(1e-12));

    // Taylor remainder oracle: |D1 e^x - e^x| <= e^x * dx^2/6 * 1.1
    const Field ex = sample(g, [](double x) { return std::exp(x); });
    const Field de = d1.apply(ex);
    const double bound = g.dx * g.dx / 6.0 * 1.1;
    for (int i = 1; i < g.n - 1; ++i) CHECK(std::abs(de[i] / ex[i] - 1.0) <= bound);
}

TEST_CASE("second and mixed derivative stencils") {
    const Grid1D g = make_grid_1d(-1.0, 1.0, 201);
    const BandedOperator d2 = d2_dx2(g);
    const Field q = sample(g, [](double x) { return x * x; });
    const Field dq = d2.apply(q);
    for (int i = 1; i < g.n - 1; ++i) CHECK(dq[i] == doctest::Approx(2.0).epsilon(1e-10));

    const Field c = sample(g, [](double) { return -7.0; });
    const Field dc = d2.apply(c);
    for (int i = 1; i < g.n - 1; ++i) CHECK(std::abs(dc[i]) <= 1e-10);

    const Grid2D g2 = make_grid_2d(make_grid_1d(-1.0, 1.0, 41), make_grid_1d(-1.0, 1.0, 41));
    const BandedOperator dxy = d2_dxdy(g2);
    CHECK(dxy.interior_margin() == 2);
    const Field xy = sample(g2, [](double x, double y) { return x * y; });
    const Field dxyv = dxy.apply(xy);
    for (std::size_t row = 0; row < dxyv.size(); ++row) {
        if (!dxy.row_is_interior(row, 2)) continue;
        CHECK(dxyv[row] == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("BS Hamiltonian on reference fields") {
    const BsParams p(0.05, 0.2);
    const Grid1D g = make_grid_1d(-2.0, 2.0, 401);
    const BandedOperator h = build_bs_hamiltonian(p, g);
    CHECK(h.interior_margin() == 1);

    // annihilation of e^x up to truncation
    const Field ex = sample(g, [](double x) { return std::exp(x); });
    CHECK(interior_max_rel(h, ex, ex, 1) <= g.dx * g.dx);

    // constants are pure discounting rows: H c = r c
    const Field c = sample(g, [](double) { return 4.0; });
    const Field hc = h.apply(c);
    for (int i = 0; i < g.n; ++i) CHECK(hc[i] == doctest::Approx(p.r * 4.0).epsilon(1e-12));

    // hand evaluation on a linear field: (sigma^2/2 - r) + r x
    const Field lin = sample(g, [](double x) { return x; });
    const Field hl = h.apply(lin);
    for (int i = 1; i < g.n - 1; ++i) {
        const double expected = (0.5 * p.sigma * p.sigma - p.r) + p.r * g.x(i);
        CHECK(hl[i] == doctest::Approx(expected).epsilon(1e-10).scale(1.0));
    }
}

TEST_CASE("BS Hamiltonian interior residual converges at second order") {
    const BsParams p(0.05, 0.2);
    auto resid = [&](int n) {
        const Grid1D g = make_grid_1d(-2.0, 2.0, n);
        const BandedOperator h = build_bs_hamiltonian(p, g);
        const Field ex = sample(g, [](double x) { return std::exp(x); });
        return interior_max_rel(h, ex, ex, 1);
    };
    const double ratio = resid(201) / resid(401);
    CHECK(ratio > 3.5);
    CHECK(ratio < 4.5);
}

TEST_CASE("MG Hamiltonian on reference fields") {
    const MgParams p(0.05, 0.01, 0.02, 0.1, 1.0, 0.0);
    const Grid2D g = make_grid_2d(make_grid_1d(-1.0, 1.0, 101), make_grid_1d(-1.0, 1.0, 101));
    const BandedOperator h = build_mg_hamiltonian(p, g);
    CHECK(h.interior_margin() == 2);

    // e^x has no y-dependence: x-coefficients cancel analytically
    const Field ex = sample(g, [](double x, double) { return std::exp(x); });
    CHECK(interior_max_rel(h, ex, ex, 2) <= g.gx.dx * g.gx.dx);

    const Field c = sample(g, [](double, double) { return 2.5; });
    const Field hc = h.apply(c);
    for (std::size_t row = 0; row < hc.size(); ++row)
        CHECK(hc[row] == doctest::Approx(p.r * 2.5).epsilon(1e-11));
}

TEST_CASE("MG Hamiltonian sends e^{x+y} to -G(y) e^{x+y}") {
    const MgParams p(0.05, 0.01, 0.02, 0.1, 1.0, 0.3);
    const Grid2D g = make_grid_2d(make_grid_1d(-1.0, 1.0, 101), make_grid_1d(-1.0, 1.0, 101));
    const BandedOperator h = build_mg_hamiltonian(p, g);
    const Field s = sample(g, [](double x, double y) { return std::exp(x + y); });
    const Field hs = h.apply(s);
    const double tol = g.gx.dx * g.gx.dx + g.gy.dx * g.gy.dx;
    for (int ix = 2; ix < g.nx() - 2; ++ix) {
        for (int iy = 2; iy < g.ny() - 2; ++iy) {
            const double y = g.gy.x(iy);
            const double zeta2 = p.zeta * p.zeta;
            const double gap = p.lambda * std::exp(-y) + p.mu + 0.5 * zeta2 * std::exp(2.0 * y * (p.alpha - 1.0)) +
                               p.rho * p.zeta * std::exp(y * (p.alpha - 0.5));
            const std::size_t k = g.index(ix, iy);
            CHECK(std::abs(hs[k] / s[k] + gap) <= tol);
        }
    }
}

TEST_CASE("apply: identity, zeros and mismatches") {
    const Grid1D g = make_grid_1d(-1.0, 1.0, 21);
    const Field f = sample(g, [](double x) { return std::sin(3.0 * x); });

    const Field idf = BandedOperator::identity(Grid(g)).apply(f);
    for (int i = 0; i < g.n; ++i) CHECK(idf[i] == f[i]);

    const Field zf = BandedOperator::zeros(Grid(g)).apply(f);
    for (int i = 0; i < g.n; ++i) CHECK(zf[i] == 0.0);

    const Field other = sample(make_grid_1d(-1.0, 1.0, 22), [](double) { return 1.0; });
    CHECK_THROWS_AS(d_dx(g).apply(other), Error);
}

TEST_CASE("apply is linear") {
    const Grid1D g = make_grid_1d(-2.0, 2.0, 101);
    const BandedOperator h = build_bs_hamiltonian(BsParams(0.03, 0.4), g);
    const Field f = sample(g, [](double x) { return std::exp(x) * std::sin(x); });
    const Field gfield = sample(g, [](double x) { return std::cos(2.0 * x); });
    const double a = 1.37, b = -0.61;

    std::vector<double> combo(f.size());
    for (std::size_t i = 0; i < combo.size(); ++i) combo[i] = a * f[i] + b * gfield[i];
    const Field lhs = h.apply(Field(Grid(g), std::move(combo)));
    const Field hf = h.apply(f);
    const Field hg = h.apply(gfield);
    for (std::size_t i = 0; i < lhs.size(); ++i) {
        const double rhs = a * hf[i] + b * hg[i];
        CHECK(std::abs(lhs[i] - rhs) <= 1e-12 * std::max(1.0, std::abs(rhs)));
    }
}

TEST_CASE("compose matches dense multiplication") {
    const Grid1D g = make_grid_1d(-1.0, 1.0, 21);
    const BandedOperator a = build_bs_hamiltonian(BsParams(0.05, 0.2), g);
    const BandedOperator b = d_dx(g);
    const BandedOperator ab = compose(a, b);

    const auto dense = oracles::matmul(oracles::densify(a), oracles::densify(b));
    const auto got = oracles::densify(ab);
    for (std::size_t i = 0; i < dense.size(); ++i)
        for (std::size_t j = 0; j < dense.size(); ++j)
            CHECK(got[i][j] == doctest::Approx(dense[i][j]).epsilon(1e-12).scale(std::abs(dense[i][j]) + 1.0));
}

TEST_CASE("commutators: exact zeros and dense oracle") {
    const Grid1D g = make_grid_1d(-1.0, 1.0, 21);
    const BandedOperator d1 = d_dx(g);

    // [D1, D1] is the zero operator, bitwise
    const BandedOperator self = commutator(d1, d1);
    CHECK(self.bands().empty());

    const BandedOperator h = build_bs_hamiltonian(BsParams(0.05, 0.2), g);
    const BandedOperator hp = commutator(h, d1);
    CHECK(hp.interior_margin() == 2);
    CHECK(interior_norm(hp, 2) <= 1e-12);

    // Toeplitz-commutation oracle: dense product difference has zero interior rows
    const auto da = oracles::densify(h);
    const auto db = oracles::densify(d1);
    const auto ab = oracles::matmul(da, db);
    const auto ba = oracles::matmul(db, da);
    for (std::size_t i = 2; i + 2 < ab.size(); ++i)
        for (std::size_t j = 0; j < ab.size(); ++j)
            CHECK(std::abs(ab[i][j] - ba[i][j]) <= 1e-12);
}

TEST_CASE("MG commutators distinguish p_x from p_y") {
    const MgParams p(0.05, 0.01, 0.02, 0.1, 1.0, 0.0);
    const Grid2D g = make_grid_2d(make_grid_1d(-1.0, 1.0, 21), make_grid_1d(-1.0, 1.0, 21));
    const BandedOperator h = build_mg_hamiltonian(p, g);

    const BandedOperator hx = commutator(h, d_dx(g));
    CHECK(interior_norm(hx, hx.interior_margin()) <= 1e-12);

    const BandedOperator hy = commutator(h, d_dy(g));
    CHECK(interior_norm(hy, hy.interior_margin()) > 1e-6);
}

TEST_CASE("interior_norm margins") {
    const Grid1D g = make_grid_1d(-1.0, 1.0, 11);
    const Field zero = sample(g, [](double) { return 0.0; });
    CHECK(interior_norm(zero, 1) == 0.0);

    const Field lin = sample(g, [](double x) { return x; });
    CHECK(interior_norm(lin, 0) == doctest::Approx(1.0));
    CHECK(interior_norm(lin, 1) == doctest::Approx(0.8).epsilon(1e-12));

    CHECK_THROWS_AS(interior_norm(lin, 6), Error);
    try {
        interior_norm(lin, 6);
    } catch (const Error& e) {
        CHECK(e.code() == Errc::MarginExceedsGrid);
    }
}
