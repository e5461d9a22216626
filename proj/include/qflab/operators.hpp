#pragma once

#include <map>
#include <string>
#include <vector>

#include "qflab/core.hpp"

namespace qflab {

/**
 * Stencil offset of a banded operator entry. For 1D operators dy is always 0.
 * Ordering is lexicographic so band iteration is deterministic.
 */
struct Offset {
    int dx = 0;
    int dy = 0;

    friend auto operator<=>(const Offset&, const Offset&) = default;
};

/**
 * Discrete differential operator in banded (stencil) form.
 *
 * A band maps an offset k to a per-row coefficient array c, and row i of the
 * operator applied to a field f computes sum_k c_k[i] * f[i+k] over offsets
 * with i+k inside the grid. Rows within `interior_margin` of any boundary use
 * one-sided stencils (or inherit composition artifacts) and are excluded from
 * every residual and commutator statement made by this library; interior rows
 * reach at most `bandwidth()` neighbours per axis.
 *
 * Operators are immutable once assembled (assembly helpers are only used by
 * the builder functions below) and application is pure, so sharing one
 * operator across threads is safe.
 */
class BandedOperator {
public:
    explicit BandedOperator(Grid grid, int interior_margin = 0);

    static BandedOperator zeros(const Grid& g);
    static BandedOperator identity(const Grid& g);

    const Grid& grid() const { return grid_; }
    bool is_2d() const { return std::holds_alternative<Grid2D>(grid_); }
    std::size_t rows() const { return grid_size(grid_); }
    int interior_margin() const { return margin_; }

    /// Max |offset| (Chebyshev in 2D) carried by any interior row.
    int bandwidth() const;

    const std::map<Offset, std::vector<double>>& bands() const { return bands_; }

    Field apply(const Field& f) const;

    // -- assembly ------------------------------------------------------------
    std::vector<double>& band(const Offset& k);
    void set_interior_margin(int m) { margin_ = m; }
    void drop_zero_bands();

    BandedOperator& operator+=(const BandedOperator& rhs);
    BandedOperator& operator*=(double s);

    /// True when the flattened row index lies at distance >= margin from every boundary.
    bool row_is_interior(std::size_t row, int margin) const;

private:
    Grid grid_;
    int margin_;
    std::map<Offset, std::vector<double>> bands_;
};

Field apply(const BandedOperator& op, const Field& f);

BandedOperator operator+(BandedOperator a, const BandedOperator& b);
BandedOperator operator*(double s, BandedOperator op);

/// a applied after b, margins add.
BandedOperator compose(const BandedOperator& a, const BandedOperator& b);

/**
 * a o b - b o a assembled term by term, so that for rows where both factors
 * have constant coefficients the cancellation is exact in floating point
 * (the two products of each cross term are bitwise equal).
 */
BandedOperator commutator(const BandedOperator& a, const BandedOperator& b);

/// diag(c) * op: multiplies row i of op by c[i]. Margin is unchanged.
BandedOperator row_scale(const Field& c, const BandedOperator& op);

// First derivatives; central second-order stencils in the interior, one-sided
// second-order stencils on boundary rows. These realize the generators
// p = d/dx (and p_x, p_y on 2D grids).
BandedOperator d_dx(const Grid1D& g);
BandedOperator d_dx(const Grid2D& g);
BandedOperator d_dy(const Grid2D& g);

// Second derivatives (3-point interior stencils); the mixed derivative is the
// composition of the two central first-derivative stencils.
BandedOperator d2_dx2(const Grid1D& g);
BandedOperator d2_dx2(const Grid2D& g);
BandedOperator d2_dy2(const Grid2D& g);
BandedOperator d2_dxdy(const Grid2D& g);

/**
 * Black-Scholes Hamiltonian in log-price coordinates,
 *   H = -(sigma^2/2) D2 + (sigma^2/2 - r) D1 + r I,
 * with the momentum realized as a plain d/dx (no factor i).
 */
BandedOperator build_bs_hamiltonian(const BsParams& p, const Grid1D& g);

/**
 * Merton-Garman Hamiltonian on a (log-price, log-variance) grid:
 *   H = -(e^y/2) Dxx - (r - e^y/2) Dx
 *       - (lambda e^-y + mu - (zeta^2/2) e^{2y(alpha-1)}) Dy
 *       - rho zeta e^{y(alpha-1/2)} Dxy - zeta^2 e^{2y(alpha-1)} Dyy + r I.
 * Coefficients vary along y only, so rows at equal iy share coefficients
 * bitwise and [H, Dx] vanishes exactly on interior rows.
 */
BandedOperator build_mg_hamiltonian(const MgParams& p, const Grid2D& g);

/// Max-abs over rows at distance >= margin from every boundary.
double interior_norm(const Field& f, int margin);

/// Max absolute row sum over rows at distance >= margin from every boundary.
double interior_norm(const BandedOperator& op, int margin);

}  // namespace qflab
