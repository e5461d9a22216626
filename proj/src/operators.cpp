#include "qflab/operators.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

namespace qflab {

namespace {

struct Shape {
    int nx;
    int ny;  // 1 for 1D grids
    bool two_d;
};

Shape shape_of(const Grid& g) {
    if (const auto* g1 = std::get_if<Grid1D>(&g)) return {g1->n, 1, false};
    const auto& g2 = std::get<Grid2D>(g);
    return {g2.nx(), g2.ny(), true};
}

}  // namespace

BandedOperator::BandedOperator(Grid grid, int interior_margin)
    : grid_(std::move(grid)), margin_(interior_margin) {}

BandedOperator BandedOperator::zeros(const Grid& g) { return BandedOperator(g, 0); }

BandedOperator BandedOperator::identity(const Grid& g) {
    BandedOperator op(g, 0);
    op.band(Offset{0, 0}).assign(grid_size(g), 1.0);
    return op;
}

std::vector<double>& BandedOperator::band(const Offset& k) {
    auto it = bands_.find(k);
    if (it == bands_.end())
        it = bands_.emplace(k, std::vector<double>(rows(), 0.0)).first;
    return it->second;
}

void BandedOperator::drop_zero_bands() {
    for (auto it = bands_.begin(); it != bands_.end();) {
        const auto& c = it->second;
        const bool all_zero = std::all_of(c.begin(), c.end(), [](double v) { return v == 0.0; });
        it = all_zero ? bands_.erase(it) : std::next(it);
    }
}

bool BandedOperator::row_is_interior(std::size_t row, int margin) const {
    const Shape s = shape_of(grid_);
    const int ix = static_cast<int>(row) / s.ny;
    const int iy = static_cast<int>(row) % s.ny;
    if (ix < margin || ix >= s.nx - margin) return false;
    if (s.two_d && (iy < margin || iy >= s.ny - margin)) return false;
    return true;
}

int BandedOperator::bandwidth() const {
    const Shape s = shape_of(grid_);
    const bool has_interior = (s.nx - 2 * margin_ > 0) && (!s.two_d || s.ny - 2 * margin_ > 0);
    int bw = 0;
    for (const auto& [k, c] : bands_) {
        const int reach = std::max(std::abs(k.dx), std::abs(k.dy));
        if (reach <= bw) continue;
        for (std::size_t row = 0; row < c.size(); ++row) {
            if (c[row] == 0.0) continue;
            if (!has_interior || row_is_interior(row, margin_)) {
                bw = reach;
                break;
            }
        }
    }
    return bw;
}

Field BandedOperator::apply(const Field& f) const {
    if (!grids_equal(grid_, f.grid()))
        throw Error(Errc::GridMismatch, "apply: operator and field grids differ");
    const Shape s = shape_of(grid_);
    const std::size_t n = rows();
    std::vector<double> out(n, 0.0);
    for (const auto& [k, c] : bands_) {
        const long flat = static_cast<long>(k.dx) * s.ny + k.dy;
        for (std::size_t row = 0; row < n; ++row) {
            const double cr = c[row];
            if (cr == 0.0) continue;
            const int ix = static_cast<int>(row) / s.ny;
            const int iy = static_cast<int>(row) % s.ny;
            if (ix + k.dx < 0 || ix + k.dx >= s.nx) continue;
            if (iy + k.dy < 0 || iy + k.dy >= s.ny) continue;
            out[row] += cr * f[row + static_cast<std::size_t>(flat)];
        }
    }
    return Field(grid_, std::move(out));
}

Field apply(const BandedOperator& op, const Field& f) { return op.apply(f); }

BandedOperator& BandedOperator::operator+=(const BandedOperator& rhs) {
    if (!grids_equal(grid_, rhs.grid_))
        throw Error(Errc::GridMismatch, "operator+=: grids differ");
    for (const auto& [k, c] : rhs.bands_) {
        auto& target = band(k);
        for (std::size_t row = 0; row < c.size(); ++row) target[row] += c[row];
    }
    margin_ = std::max(margin_, rhs.margin_);
    return *this;
}

BandedOperator& BandedOperator::operator*=(double s) {
    for (auto& [k, c] : bands_)
        for (double& v : c) v *= s;
    return *this;
}

BandedOperator operator+(BandedOperator a, const BandedOperator& b) {
    a += b;
    return a;
}

BandedOperator operator*(double s, BandedOperator op) {
    op *= s;
    return op;
}

BandedOperator compose(const BandedOperator& a, const BandedOperator& b) {
    if (!grids_equal(a.grid(), b.grid()))
        throw Error(Errc::GridMismatch, "compose: grids differ");
    const Shape s = shape_of(a.grid());
    const std::size_t n = a.rows();
    BandedOperator out(a.grid(), a.interior_margin() + b.interior_margin());
    for (const auto& [ka, ca] : a.bands()) {
        const long flat_a = static_cast<long>(ka.dx) * s.ny + ka.dy;
        for (const auto& [kb, cb] : b.bands()) {
            auto& target = out.band(Offset{ka.dx + kb.dx, ka.dy + kb.dy});
            for (std::size_t row = 0; row < n; ++row) {
                const double cr = ca[row];
                if (cr == 0.0) continue;
                const int ix = static_cast<int>(row) / s.ny;
                const int iy = static_cast<int>(row) % s.ny;
                if (ix + ka.dx < 0 || ix + ka.dx >= s.nx) continue;
                if (iy + ka.dy < 0 || iy + ka.dy >= s.ny) continue;
                target[row] += cr * cb[row + static_cast<std::size_t>(flat_a)];
            }
        }
    }
    out.drop_zero_bands();
    return out;
}

BandedOperator commutator(const BandedOperator& a, const BandedOperator& b) {
    if (!grids_equal(a.grid(), b.grid()))
        throw Error(Errc::GridMismatch, "commutator: grids differ");
    const Shape s = shape_of(a.grid());
    const std::size_t n = a.rows();
    BandedOperator out(a.grid(), a.interior_margin() + b.interior_margin());
    for (const auto& [ka, ca] : a.bands()) {
        const long flat_a = static_cast<long>(ka.dx) * s.ny + ka.dy;
        for (const auto& [kb, cb] : b.bands()) {
            const long flat_b = static_cast<long>(kb.dx) * s.ny + kb.dy;
            auto& target = out.band(Offset{ka.dx + kb.dx, ka.dy + kb.dy});
            for (std::size_t row = 0; row < n; ++row) {
                const int ix = static_cast<int>(row) / s.ny;
                const int iy = static_cast<int>(row) % s.ny;
                // a o b term: a_ka[row] * b_kb[row + ka]
                double t1 = 0.0;
                if (ix + ka.dx >= 0 && ix + ka.dx < s.nx && iy + ka.dy >= 0 && iy + ka.dy < s.ny)
                    t1 = ca[row] * cb[row + static_cast<std::size_t>(flat_a)];
                // b o a term: b_kb[row] * a_ka[row + kb]
                double t2 = 0.0;
                if (ix + kb.dx >= 0 && ix + kb.dx < s.nx && iy + kb.dy >= 0 && iy + kb.dy < s.ny)
                    t2 = cb[row] * ca[row + static_cast<std::size_t>(flat_b)];
                // Paired so that constant-coefficient rows cancel bitwise.
                if (t1 != t2) target[row] += t1 - t2;
            }
        }
    }
    out.drop_zero_bands();
    return out;
}

BandedOperator row_scale(const Field& c, const BandedOperator& op) {
    if (!grids_equal(c.grid(), op.grid()))
        throw Error(Errc::GridMismatch, "row_scale: grids differ");
    BandedOperator out(op.grid(), op.interior_margin());
    for (const auto& [k, coeffs] : op.bands()) {
        auto& target = out.band(k);
        for (std::size_t row = 0; row < coeffs.size(); ++row) target[row] = c[row] * coeffs[row];
    }
    out.drop_zero_bands();
    return out;
}

namespace {

// Writes the 1D first/second derivative stencil along one axis of a possibly
// 2D grid. `along_x` selects the axis; `m` is the number of points on it.
void assemble_d1(BandedOperator& op, const Shape& s, bool along_x, double h) {
    const double inv2h = 1.0 / (2.0 * h);
    const int m = along_x ? s.nx : s.ny;
    auto off = [&](int k) { return along_x ? Offset{k, 0} : Offset{0, k}; };
    auto& lo = op.band(off(-1));
    auto& hi = op.band(off(1));
    auto& diag = op.band(off(0));
    auto& two = op.band(off(2));
    auto& mtwo = op.band(off(-2));
    for (int ix = 0; ix < s.nx; ++ix) {
        for (int iy = 0; iy < s.ny; ++iy) {
            const std::size_t row = static_cast<std::size_t>(ix) * s.ny + iy;
            const int i = along_x ? ix : iy;
            if (i == 0) {
                // second-order forward: (-3 f0 + 4 f1 - f2) / 2h
                diag[row] = -3.0 * inv2h;
                hi[row] = 4.0 * inv2h;
                two[row] = -inv2h;
            } else if (i == m - 1) {
                diag[row] = 3.0 * inv2h;
                lo[row] = -4.0 * inv2h;
                mtwo[row] = inv2h;
            } else {
                lo[row] = -inv2h;
                hi[row] = inv2h;
            }
        }
    }
    op.drop_zero_bands();
    op.set_interior_margin(1);
}

void assemble_d2(BandedOperator& op, const Shape& s, bool along_x, double h) {
    const double invh2 = 1.0 / (h * h);
    const int m = along_x ? s.nx : s.ny;
    auto off = [&](int k) { return along_x ? Offset{k, 0} : Offset{0, k}; };
    auto& lo = op.band(off(-1));
    auto& hi = op.band(off(1));
    auto& diag = op.band(off(0));
    auto& f2 = op.band(off(2));
    auto& f3 = op.band(off(3));
    auto& b2 = op.band(off(-2));
    auto& b3 = op.band(off(-3));
    for (int ix = 0; ix < s.nx; ++ix) {
        for (int iy = 0; iy < s.ny; ++iy) {
            const std::size_t row = static_cast<std::size_t>(ix) * s.ny + iy;
            const int i = along_x ? ix : iy;
            if (i == 0) {
                // second-order one-sided: (2 f0 - 5 f1 + 4 f2 - f3) / h^2
                diag[row] = 2.0 * invh2;
                hi[row] = -5.0 * invh2;
                f2[row] = 4.0 * invh2;
                f3[row] = -invh2;
            } else if (i == m - 1) {
                diag[row] = 2.0 * invh2;
                lo[row] = -5.0 * invh2;
                b2[row] = 4.0 * invh2;
                b3[row] = -invh2;
            } else {
                lo[row] = invh2;
                diag[row] = -2.0 * invh2;
                hi[row] = invh2;
            }
        }
    }
    op.drop_zero_bands();
    op.set_interior_margin(1);
}

}  // namespace

BandedOperator d_dx(const Grid1D& g) {
    BandedOperator op{Grid(g)};
    assemble_d1(op, shape_of(op.grid()), true, g.dx);
    return op;
}

BandedOperator d_dx(const Grid2D& g) {
    BandedOperator op{Grid(g)};
    assemble_d1(op, shape_of(op.grid()), true, g.gx.dx);
    return op;
}

BandedOperator d_dy(const Grid2D& g) {
    BandedOperator op{Grid(g)};
    assemble_d1(op, shape_of(op.grid()), false, g.gy.dx);
    return op;
}

BandedOperator d2_dx2(const Grid1D& g) {
    BandedOperator op{Grid(g)};
    assemble_d2(op, shape_of(op.grid()), true, g.dx);
    return op;
}

BandedOperator d2_dx2(const Grid2D& g) {
    BandedOperator op{Grid(g)};
    assemble_d2(op, shape_of(op.grid()), true, g.gx.dx);
    return op;
}

BandedOperator d2_dy2(const Grid2D& g) {
    BandedOperator op{Grid(g)};
    assemble_d2(op, shape_of(op.grid()), false, g.gy.dx);
    return op;
}

BandedOperator d2_dxdy(const Grid2D& g) { return compose(d_dx(g), d_dy(g)); }

BandedOperator build_bs_hamiltonian(const BsParams& p, const Grid1D& g) {
    const double half_sigma2 = 0.5 * p.sigma * p.sigma;
    BandedOperator h = (-half_sigma2) * d2_dx2(g);
    h += (half_sigma2 - p.r) * d_dx(g);
    h += p.r * BandedOperator::identity(Grid(g));
    h.drop_zero_bands();
    return h;
}

BandedOperator build_mg_hamiltonian(const MgParams& p, const Grid2D& g) {
    const double zeta2 = p.zeta * p.zeta;
    auto cxx = sample(g, [&](double, double y) { return -0.5 * std::exp(y); });
    auto cx = sample(g, [&](double, double y) { return -(p.r - 0.5 * std::exp(y)); });
    auto cy = sample(g, [&](double, double y) {
        return -(p.lambda * std::exp(-y) + p.mu - 0.5 * zeta2 * std::exp(2.0 * y * (p.alpha - 1.0)));
    });
    auto cxy = sample(g, [&](double, double y) { return -p.rho * p.zeta * std::exp(y * (p.alpha - 0.5)); });
    auto cyy = sample(g, [&](double, double y) { return -zeta2 * std::exp(2.0 * y * (p.alpha - 1.0)); });

    BandedOperator h = row_scale(cxx, d2_dx2(g));
    h += row_scale(cx, d_dx(g));
    h += row_scale(cy, d_dy(g));
    h += row_scale(cxy, d2_dxdy(g));
    h += row_scale(cyy, d2_dy2(g));
    h += p.r * BandedOperator::identity(Grid(g));
    h.drop_zero_bands();
    return h;
}

namespace {

void check_margin(const Shape& s, int margin) {
    if (margin < 0)
        throw Error(Errc::InvalidInputs, "interior_norm: margin must be >= 0");
    const bool empty = (s.nx - 2 * margin <= 0) || (s.two_d && s.ny - 2 * margin <= 0);
    if (empty)
        throw Error(Errc::MarginExceedsGrid, "interior_norm: margin leaves no interior rows");
}

}  // namespace

double interior_norm(const Field& f, int margin) {
    const Shape s = shape_of(f.grid());
    check_margin(s, margin);
    double best = 0.0;
    for (std::size_t row = 0; row < f.size(); ++row) {
        const int ix = static_cast<int>(row) / s.ny;
        const int iy = static_cast<int>(row) % s.ny;
        if (ix < margin || ix >= s.nx - margin) continue;
        if (s.two_d && (iy < margin || iy >= s.ny - margin)) continue;
        best = std::max(best, std::abs(f[row]));
    }
    return best;
}

double interior_norm(const BandedOperator& op, int margin) {
    const Shape s = shape_of(op.grid());
    check_margin(s, margin);
    const std::size_t n = op.rows();
    std::vector<double> row_sum(n, 0.0);
    for (const auto& [k, c] : op.bands()) {
        for (std::size_t row = 0; row < n; ++row) {
            const int ix = static_cast<int>(row) / s.ny;
            const int iy = static_cast<int>(row) % s.ny;
            if (ix + k.dx < 0 || ix + k.dx >= s.nx) continue;
            if (iy + k.dy < 0 || iy + k.dy >= s.ny) continue;
            row_sum[row] += std::abs(c[row]);
        }
    }
    double best = 0.0;
    for (std::size_t row = 0; row < n; ++row) {
        if (op.row_is_interior(row, margin)) best = std::max(best, row_sum[row]);
    }
    return best;
}

}  // namespace qflab
