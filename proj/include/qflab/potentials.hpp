#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qflab/core.hpp"

namespace qflab {

/**
 * Coefficients of the fixed-norm extension V_new(S) = mu2 S^2 + lam4 S^4.
 * Named mu2/lam4 to keep them apart from the Merton-Garman drift parameters
 * mu and lambda, which are unrelated quantities.
 */
struct QuarticParams {
    double mu2 = 0.0;
    double lam4 = 0.0;

    bool nontrivial_vacuum() const { return lam4 < 0.0; }
};

enum class VacuumKind { BsQuadratic, MgStationary, QuarticFixedNorm };
enum class VacuumClass { Trivial, NonTrivial, PriceTrivial, VolTrivial };

const char* to_string(VacuumKind k);
const char* to_string(VacuumClass c);

/**
 * A vacuum (stationary point) of one of the field-space potentials. `values`
 * carries the solved field components: "phi" for the quadratic case,
 * "phi_x"/"phi_y"/"S" for the stationary Merton-Garman case,
 * "S"/"s_plus"/"s_minus" for the fixed-norm case ("S" is the positive,
 * financially admissible root).
 */
struct VacuumSolution {
    VacuumKind kind = VacuumKind::BsQuadratic;
    std::map<std::string, double> values;
    VacuumClass classification = VacuumClass::Trivial;
    std::optional<double> ratio;  // MgStationary only: A/B where defined
};

/// One point of the fixed-norm vacuum manifold e^{x+y} = s_norm.
struct VacuumManifoldPoint {
    double y = 0.0;
    double x = 0.0;
    double s_norm = 0.0;
};

/// Quadratic truncation of the Black-Scholes potential: 2(sigma^2/2 - r) phi + r phi^2.
double bs_potential(const BsParams& p, double phi);

/// d/dphi of bs_potential.
double bs_potential_gradient(const BsParams& p, double phi);

/// Minimum of the quadratic potential, phi_vac = 1 - sigma^2 / (2r). Requires r > 0.
VacuumSolution bs_vacuum(const BsParams& p);

/// Drift coefficient A(y) = lambda e^-y + mu - (zeta^2/2) e^{2y(alpha-1)}.
double mg_coefficient_a(const MgParams& p, double y);

/// Drift coefficient B(y) = r - e^y / 2.
double mg_coefficient_b(const MgParams& p, double y);

/**
 * Cubic/quartic truncation of the Merton-Garman potential at log-variance y:
 *   V = -2 B phi_x phi_y^2 - 2 A phi_x^2 phi_y + r phi_x^2 phi_y^2.
 */
double mg_potential(const MgParams& p, double y, double phi_x, double phi_y);

/// Gradient (dV/dphi_x, dV/dphi_y) of mg_potential.
std::pair<double, double> mg_potential_gradient(const MgParams& p, double y, double phi_x, double phi_y);

/**
 * Stationary point of mg_potential. Away from the trivial cases the unique
 * nontrivial stationary point is located by damped Newton iteration from
 * (1, 1) with a coarse multi-start fallback, and satisfies
 * B phi_y = A phi_x. B = 0 classifies as PriceTrivial (phi_x = 0, phi_y
 * free; the representative (0, 1) is returned), A = 0 as VolTrivial
 * (representative (1, 0)). Requires r > 0.
 */
VacuumSolution mg_vacuum(const MgParams& p, double y);

/**
 * Zero set of V_new: S = +-sqrt(-mu2/lam4) when lam4 < 0 and mu2 > 0, else
 * the trivial S = 0. lam4 = 0 with mu2 != 0 has no stationary structure and
 * is rejected.
 */
VacuumSolution quartic_vacuum(const QuarticParams& q);

/**
 * Fixed-norm vacuum manifold: for each y, the x with e^{x+y} = sqrt(-mu2/lam4)
 * (positive branch), i.e. x = ln(s_norm) - y. Requires lam4 < 0, mu2 > 0 and
 * strictly increasing ys; the resulting xs are strictly decreasing.
 */
std::vector<VacuumManifoldPoint> vacuum_manifold(const QuarticParams& q, const std::vector<double>& ys);

/// Residual of the L_x symmetry condition: A(y). Zero means the price-fixing
/// rotation generator commutes with H_MG.
double lx_symmetry_residual(const MgParams& p, double y);

/// Residual of the L_y symmetry condition: r - e^y / 2.
double ly_symmetry_residual(const MgParams& p, double y);

}  // namespace qflab
