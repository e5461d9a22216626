#pragma once

#include <vector>

#include "qflab/core.hpp"
#include "qflab/operators.hpp"

namespace qflab {

/**
 * LU factorization of a banded matrix without pivoting (the implicit step
 * matrices built here are diagonally dominant for the step sizes in use).
 * Storage is one array per diagonal offset in [-b, b]; fill-in stays inside
 * the band. A vanishing pivot raises singular-step-matrix.
 */
class BandedLU {
public:
    BandedLU(std::size_t n, int half_bandwidth);

    double& at(std::size_t row, long col);
    double get(std::size_t row, long col) const;

    void factor();
    void solve_in_place(std::vector<double>& rhs) const;

    std::size_t size() const { return n_; }
    int half_bandwidth() const { return b_; }

private:
    std::size_t n_;
    int b_;
    bool factored_ = false;
    std::vector<double> data_;  // row-major, (2b+1) entries per row
};

enum class Scheme { ImplicitEuler, CrankNicolson };

const char* to_string(Scheme s);

/// Time-stepping setup for the pricing kernel e^{-T H}.
struct EvolutionConfig {
    double maturity = 0.0;  // T > 0
    int steps = 1;
    Scheme scheme = Scheme::CrankNicolson;
    Grid grid;
};

struct PricingResult {
    Field values;        // evolved option values on the grid
    double spot_price;   // interpolated value at the requested log-price
    double oracle_price; // closed-form reference
    double rel_error;    // |spot - oracle| / oracle
};

/**
 * Applies the pricing kernel to a terminal field by implicit time stepping:
 * (I + dt H) v_{k+1} = v_k per step for implicit Euler, the usual averaged
 * form for Crank-Nicolson. Rows the operator flags non-interior are held at
 * the terminal field's values (Dirichlet); the step matrix is factored once.
 */
Field evolve(const BandedOperator& h, const Field& terminal, const EvolutionConfig& cfg);

/// Cumulative normal via a rational approximation (absolute error < 1e-7).
double norm_cdf(double x);

/// Lognormal European call value, the closed-form benchmark for the kernel.
double bs_closed_form(double s0, double strike, const BsParams& p, double maturity);

/**
 * Prices a European call by evolving max(e^x - k, 0) under the discrete
 * Black-Scholes Hamiltonian and compares the interpolated spot value with
 * the closed form.
 */
PricingResult price_european_call(const BsParams& p, const Grid1D& g, double strike,
                                  const EvolutionConfig& cfg, double x0);

/**
 * Interior relative max deviation of evolve(h, vacuum, cfg) from vacuum: how
 * well the discrete kernel preserves a martingale candidate.
 */
double martingale_evolution_check(const BandedOperator& h, const Field& vacuum,
                                  const EvolutionConfig& cfg);

}  // namespace qflab
