#pragma once

#include <string>

#include "qflab/core.hpp"
#include "qflab/operators.hpp"

namespace qflab {

/**
 * Outcome of probing one candidate symmetry generator against a Hamiltonian
 * and a vacuum field. A generator is only reported broken when it actually
 * commutes with the Hamiltonian AND acts nontrivially on the vacuum; the
 * report keeps both raw facts so callers can see near-misses (e.g. p_y for
 * the Merton-Garman Hamiltonian, whose coefficients depend on y).
 */
struct SymmetryReport {
    std::string generator_name;
    bool commutes_with_h = false;
    double action_norm_ratio = 0.0;  // ||gen vacuum|| / ||vacuum|| over interior rows
    bool broken = false;             // commutes_with_h && action_norm_ratio > threshold
    double commutator_norm = 0.0;    // interior norm of [H, gen]
    double commutator_scale = 0.0;   // scale the commute tolerance was applied to
};

/// Exact evaluation of the extended-martingale constraint at one y.
struct ConstraintResidual {
    double y = 0.0;
    double residual = 0.0;  // lambda + e^y (mu + (zeta^2/2) e^{2y(a-1)} + rho zeta e^{y(a-1/2)})
};

/// Quadrature identities behind the order-parameter statement.
struct CommutatorExpectation {
    double i1 = 0.0;        // <S, D1 phibar>
    double i2 = 0.0;        // <S, phi> with phi supplied analytically
    double centered = 0.0;  // <S, phibar - shift> after mean-centering (== 0 up to rounding)
    double ng_shift = 0.0;  // the centering constant <S, phibar> / <S, 1>
};

/// Action-norm ratio above which a commuting generator counts as broken.
inline constexpr double kBrokenActionThreshold = 1e-6;

/// Relative tolerance on the interior commutator norm for "commutes with H".
inline constexpr double kCommuteTolerance = 1e-10;

/**
 * Interior max of |H_BS e^x| / e^x. The discrete Hamiltonian annihilates the
 * exponential up to stencil truncation, so this is O(dx^2) for every
 * parameter choice.
 */
double bs_martingale_residual(const BsParams& p, const Grid1D& g);

/**
 * Pointwise defect of the extended martingale candidate e^{x+y}:
 *   R(x, y) = [H_MG e^{x+y}] / e^{x+y} + G(y),
 *   G(y) = lambda e^-y + mu + (zeta^2/2) e^{2y(a-1)} + rho zeta e^{y(a-1/2)}.
 * Interior rows satisfy |R| = O(dx^2 + dy^2); e^y G(y) is exactly the
 * constraint residual below.
 */
Field extended_martingale_residual(const MgParams& p, const Grid2D& g);

/// G(y) as defined above.
double extended_martingale_gap(const MgParams& p, double y);

ConstraintResidual martingale_constraint_residual(const MgParams& p, double y);

/// Magnitude the constraint residual is judged against (sum of absolute terms, floored at 1).
double martingale_constraint_scale(const MgParams& p, double y);

/**
 * Root of the constraint residual inside [y_lo, y_hi] via a bracketed
 * bisection/secant hybrid. Deterministic; requires a sign change.
 */
double solve_constraint_y(const MgParams& p, double y_lo, double y_hi);

SymmetryReport broken_generator_report(const BandedOperator& h, const BandedOperator& gen,
                                       const Field& vacuum,
                                       const std::string& generator_name = "generator");

/**
 * i1 = <S, D1 phibar> against i2 = <S, phi> where phi is the analytic
 * derivative of phibar; agreement at O(dx^2) is the discrete form of the
 * order-parameter identity. phibar is mean-centered against the S-weighted
 * quadrature, the shift being the reported Nambu-Goldstone offset.
 */
CommutatorExpectation commutator_expectation(const Field& S, const Field& phibar,
                                             const Field& phibar_deriv_analytic);

}  // namespace qflab
