#include "qflab/potentials.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace qflab {

const char* to_string(VacuumKind k) {
    switch (k) {
        case VacuumKind::BsQuadratic: return "BsQuadratic";
        case VacuumKind::MgStationary: return "MgStationary";
        case VacuumKind::QuarticFixedNorm: return "QuarticFixedNorm";
    }
    return "unknown";
}

const char* to_string(VacuumClass c) {
    switch (c) {
        case VacuumClass::Trivial: return "Trivial";
        case VacuumClass::NonTrivial: return "NonTrivial";
        case VacuumClass::PriceTrivial: return "PriceTrivial";
        case VacuumClass::VolTrivial: return "VolTrivial";
    }
    return "unknown";
}

double bs_potential(const BsParams& p, double phi) {
    return 2.0 * (0.5 * p.sigma * p.sigma - p.r) * phi + p.r * phi * phi;
}

double bs_potential_gradient(const BsParams& p, double phi) {
    return 2.0 * (0.5 * p.sigma * p.sigma - p.r) + 2.0 * p.r * phi;
}

VacuumSolution bs_vacuum(const BsParams& p) {
    if (p.r == 0.0)
        throw Error(Errc::ZeroRate, "bs_vacuum: the vacuum formula requires r > 0");
    const double phi = 1.0 - p.sigma * p.sigma / (2.0 * p.r);
    VacuumSolution sol;
    sol.kind = VacuumKind::BsQuadratic;
    sol.values["phi"] = phi;
    sol.classification = (phi == 0.0) ? VacuumClass::Trivial : VacuumClass::NonTrivial;
    return sol;
}

double mg_coefficient_a(const MgParams& p, double y) {
    return p.lambda * std::exp(-y) + p.mu - 0.5 * p.zeta * p.zeta * std::exp(2.0 * y * (p.alpha - 1.0));
}

double mg_coefficient_b(const MgParams& p, double y) { return p.r - 0.5 * std::exp(y); }

double mg_potential(const MgParams& p, double y, double phi_x, double phi_y) {
    const double a = mg_coefficient_a(p, y);
    const double b = mg_coefficient_b(p, y);
    return -2.0 * b * phi_x * phi_y * phi_y - 2.0 * a * phi_x * phi_x * phi_y +
           p.r * phi_x * phi_x * phi_y * phi_y;
}

std::pair<double, double> mg_potential_gradient(const MgParams& p, double y, double phi_x, double phi_y) {
    const double a = mg_coefficient_a(p, y);
    const double b = mg_coefficient_b(p, y);
    const double gx = -2.0 * b * phi_y * phi_y - 4.0 * a * phi_x * phi_y + 2.0 * p.r * phi_x * phi_y * phi_y;
    const double gy = -4.0 * b * phi_x * phi_y - 2.0 * a * phi_x * phi_x + 2.0 * p.r * phi_x * phi_x * phi_y;
    return {gx, gy};
}

namespace {

// Scale used for the triviality classification of A and B.
double a_scale(const MgParams& p, double y) {
    return std::max({1.0, std::abs(p.lambda * std::exp(-y)), std::abs(p.mu),
                     0.5 * p.zeta * p.zeta * std::exp(2.0 * y * (p.alpha - 1.0))});
}

double b_scale(const MgParams& p, double y) {
    return std::max({1.0, std::abs(p.r), 0.5 * std::exp(y)});
}

struct NewtonResult {
    double u = 0.0;
    double v = 0.0;
    bool converged = false;
};

double grad_norm(const std::pair<double, double>& g) {
    return std::max(std::abs(g.first), std::abs(g.second));
}

// Damped Newton on the gradient of the cubic/quartic potential.
NewtonResult newton_stationary(const MgParams& p, double y, double u0, double v0) {
    const double a = mg_coefficient_a(p, y);
    const double b = mg_coefficient_b(p, y);
    const double coeff_scale = std::abs(a) + std::abs(b) + p.r;

    double u = u0, v = v0;
    auto g = mg_potential_gradient(p, y, u, v);
    for (int it = 0; it < 200; ++it) {
        const double point_scale = 1.0 + std::max(std::abs(u), std::abs(v));
        const double tol = 1e-16 * coeff_scale * point_scale * point_scale * point_scale + 1e-15;
        if (grad_norm(g) <= tol) return {u, v, true};

        // Hessian of V
        const double hxx = -4.0 * a * v + 2.0 * p.r * v * v;
        const double hxy = -4.0 * b * v - 4.0 * a * u + 4.0 * p.r * u * v;
        const double hyy = -4.0 * b * u + 2.0 * p.r * u * u;
        const double det = hxx * hyy - hxy * hxy;
        if (std::abs(det) < 1e-300) break;
        const double du = (-g.first * hyy + g.second * hxy) / det;
        const double dv = (-g.second * hxx + g.first * hxy) / det;

        // backtrack until the gradient norm decreases
        double step = 1.0;
        bool accepted = false;
        for (int bt = 0; bt < 40; ++bt) {
            const double un = u + step * du;
            const double vn = v + step * dv;
            auto gn = mg_potential_gradient(p, y, un, vn);
            if (grad_norm(gn) < grad_norm(g)) {
                u = un;
                v = vn;
                g = gn;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;
    }
    const double point_scale = 1.0 + std::max(std::abs(u), std::abs(v));
    const bool ok = grad_norm(g) <= 1e-12 * coeff_scale * point_scale * point_scale * point_scale;
    return {u, v, ok};
}

}  // namespace

VacuumSolution mg_vacuum(const MgParams& p, double y) {
    if (p.r == 0.0)
        throw Error(Errc::ZeroRate, "mg_vacuum: requires r > 0");
    const double a = mg_coefficient_a(p, y);
    const double b = mg_coefficient_b(p, y);

    VacuumSolution sol;
    sol.kind = VacuumKind::MgStationary;

    constexpr double kTrivialTol = 1e-12;
    if (std::abs(b) <= kTrivialTol * b_scale(p, y)) {
        // price-trivial: phi_x = 0, phi_y is a flat direction; report a representative
        sol.classification = VacuumClass::PriceTrivial;
        sol.values["phi_x"] = 0.0;
        sol.values["phi_y"] = 1.0;
        sol.values["S"] = 0.0;
        return sol;
    }
    sol.ratio = a / b;
    if (std::abs(a) <= kTrivialTol * a_scale(p, y)) {
        sol.classification = VacuumClass::VolTrivial;
        sol.values["phi_x"] = 1.0;
        sol.values["phi_y"] = 0.0;
        sol.values["S"] = 0.0;
        return sol;
    }

    const double span = 4.0 * std::max({1.0, std::abs(b) / p.r, std::abs(a) / p.r});
    const double tiny = 1e-6 * span;
    auto nontrivial = [&](const NewtonResult& nr) {
        return nr.converged && std::abs(nr.u) > tiny && std::abs(nr.v) > tiny;
    };
    NewtonResult best = newton_stationary(p, y, 1.0, 1.0);
    if (!nontrivial(best)) {
        const std::array<double, 6> starts = {0.25, -0.25, 0.5, -0.5, 1.0, -1.0};
        for (double su : starts) {
            for (double sv : starts) {
                if (nontrivial(best)) break;
                best = newton_stationary(p, y, su * span, sv * span);
            }
            if (nontrivial(best)) break;
        }
        if (!nontrivial(best))
            throw Error(Errc::MaxIterations, "mg_vacuum: Newton iteration found no nontrivial stationary point");
    }
    sol.classification = VacuumClass::NonTrivial;
    sol.values["phi_x"] = best.u;
    sol.values["phi_y"] = best.v;
    sol.values["S"] = best.u * best.v;
    return sol;
}

VacuumSolution quartic_vacuum(const QuarticParams& q) {
    if (!std::isfinite(q.mu2) || !std::isfinite(q.lam4))
        throw Error(Errc::InvalidInputs, "quartic_vacuum: non-finite coefficients");
    if (q.lam4 == 0.0 && q.mu2 != 0.0)
        throw Error(Errc::DegeneratePotential, "quartic_vacuum: lam4 = 0 leaves only the quadratic term");

    VacuumSolution sol;
    sol.kind = VacuumKind::QuarticFixedNorm;
    if (q.lam4 < 0.0 && q.mu2 > 0.0) {
        const double s = std::sqrt(-q.mu2 / q.lam4);
        sol.values["s_plus"] = s;
        sol.values["s_minus"] = -s;
        sol.values["S"] = s;  // S = e^x > 0 picks the positive branch
        sol.classification = VacuumClass::NonTrivial;
    } else {
        sol.values["s_plus"] = 0.0;
        sol.values["s_minus"] = 0.0;
        sol.values["S"] = 0.0;
        sol.classification = VacuumClass::Trivial;
    }
    return sol;
}

std::vector<VacuumManifoldPoint> vacuum_manifold(const QuarticParams& q, const std::vector<double>& ys) {
    if (!(q.lam4 < 0.0) || !(q.mu2 > 0.0))
        throw Error(Errc::NontrivialVacuumRequired,
                    "vacuum_manifold: requires lam4 < 0 and mu2 > 0 for a nontrivial vacuum norm");
    for (std::size_t i = 1; i < ys.size(); ++i) {
        if (!(ys[i] > ys[i - 1]))
            throw Error(Errc::InvalidInputs, "vacuum_manifold: ys must be strictly increasing");
    }
    const double s_norm = std::sqrt(-q.mu2 / q.lam4);
    const double log_s = std::log(s_norm);
    std::vector<VacuumManifoldPoint> pts;
    pts.reserve(ys.size());
    for (double y : ys) pts.push_back(VacuumManifoldPoint{y, log_s - y, s_norm});
    return pts;
}

double lx_symmetry_residual(const MgParams& p, double y) { return mg_coefficient_a(p, y); }

double ly_symmetry_residual(const MgParams& p, double y) { return mg_coefficient_b(p, y); }

}  // namespace qflab
