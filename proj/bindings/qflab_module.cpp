#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qflab/core.hpp"
#include "qflab/martingale.hpp"
#include "qflab/operators.hpp"
#include "qflab/potentials.hpp"
#include "qflab/pricing.hpp"

namespace py = pybind11;
using namespace qflab;

PYBIND11_MODULE(qflab, m) {
    m.doc() = "Martingale vacua, broken symmetry generators and pricing kernels for the "
              "Black-Scholes and Merton-Garman Hamiltonians";

    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            const std::string msg = std::string("[") + e.code_name() + "] " + e.what();
            if (e.numerical())
                PyErr_SetString(PyExc_RuntimeError, msg.c_str());
            else
                PyErr_SetString(PyExc_ValueError, msg.c_str());
        }
    });

    // -- core ----------------------------------------------------------------
    py::class_<BsParams>(m, "BsParams")
        .def(py::init<double, double>(), py::arg("r"), py::arg("sigma"))
        .def_readonly("r", &BsParams::r)
        .def_readonly("sigma", &BsParams::sigma)
        .def_property_readonly("sigma2", &BsParams::sigma2)
        .def_property_readonly("stable", &BsParams::stable);

    py::class_<MgParams>(m, "MgParams")
        .def(py::init<double, double, double, double, double, double>(), py::arg("r"),
             py::arg("lambda_"), py::arg("mu"), py::arg("zeta"), py::arg("alpha"), py::arg("rho"))
        .def_readonly("r", &MgParams::r)
        .def_readonly("lambda_", &MgParams::lambda)
        .def_readonly("mu", &MgParams::mu)
        .def_readonly("zeta", &MgParams::zeta)
        .def_readonly("alpha", &MgParams::alpha)
        .def_readonly("rho", &MgParams::rho);

    py::class_<Grid1D>(m, "Grid1D")
        .def_readonly("x_min", &Grid1D::x_min)
        .def_readonly("x_max", &Grid1D::x_max)
        .def_readonly("n", &Grid1D::n)
        .def_readonly("dx", &Grid1D::dx)
        .def("x", &Grid1D::x, py::arg("i"));

    py::class_<Grid2D>(m, "Grid2D")
        .def_readonly("gx", &Grid2D::gx)
        .def_readonly("gy", &Grid2D::gy)
        .def_property_readonly("nx", &Grid2D::nx)
        .def_property_readonly("ny", &Grid2D::ny)
        .def("index", &Grid2D::index, py::arg("ix"), py::arg("iy"));

    py::class_<Field>(m, "Field")
        .def_property_readonly("values", &Field::values)
        .def("__len__", &Field::size)
        .def("__getitem__", [](const Field& f, std::size_t i) {
            if (i >= f.size()) throw py::index_error();
            return f[i];
        });

    m.def("make_grid_1d", &make_grid_1d, py::arg("x_min"), py::arg("x_max"), py::arg("n"));
    m.def("make_grid_2d", &make_grid_2d, py::arg("gx"), py::arg("gy"));
    m.def(
        "sample", [](const Grid1D& g, const std::function<double(double)>& f) { return sample(g, f); },
        py::arg("grid"), py::arg("f"));
    m.def(
        "sample",
        [](const Grid2D& g, const std::function<double(double, double)>& f) { return sample(g, f); },
        py::arg("grid"), py::arg("f"));
    m.def("inner_product", &inner_product, py::arg("a"), py::arg("b"));

    // -- operators -------------------------------------------------------------
    py::class_<BandedOperator>(m, "BandedOperator")
        .def_property_readonly("interior_margin", &BandedOperator::interior_margin)
        .def_property_readonly("bandwidth", &BandedOperator::bandwidth)
        .def("apply", &BandedOperator::apply, py::arg("field"));

    m.def("d_dx", py::overload_cast<const Grid1D&>(&d_dx), py::arg("grid"));
    m.def("d_dx", py::overload_cast<const Grid2D&>(&d_dx), py::arg("grid"));
    m.def("d_dy", py::overload_cast<const Grid2D&>(&d_dy), py::arg("grid"));
    m.def("d2_dx2", py::overload_cast<const Grid1D&>(&d2_dx2), py::arg("grid"));
    m.def("d2_dx2", py::overload_cast<const Grid2D&>(&d2_dx2), py::arg("grid"));
    m.def("d2_dy2", py::overload_cast<const Grid2D&>(&d2_dy2), py::arg("grid"));
    m.def("d2_dxdy", &d2_dxdy, py::arg("grid"));
    m.def("build_bs_hamiltonian", &build_bs_hamiltonian, py::arg("params"), py::arg("grid"));
    m.def("build_mg_hamiltonian", &build_mg_hamiltonian, py::arg("params"), py::arg("grid"));
    m.def("commutator", &commutator, py::arg("a"), py::arg("b"));
    m.def("compose", &compose, py::arg("a"), py::arg("b"));
    m.def(
        "interior_norm", [](const Field& f, int margin) { return interior_norm(f, margin); },
        py::arg("field"), py::arg("margin"));
    m.def(
        "interior_norm", [](const BandedOperator& op, int margin) { return interior_norm(op, margin); },
        py::arg("op"), py::arg("margin"));

    // -- martingale --------------------------------------------------------------
    py::class_<SymmetryReport>(m, "SymmetryReport")
        .def_readonly("generator_name", &SymmetryReport::generator_name)
        .def_readonly("commutes_with_h", &SymmetryReport::commutes_with_h)
        .def_readonly("action_norm_ratio", &SymmetryReport::action_norm_ratio)
        .def_readonly("broken", &SymmetryReport::broken)
        .def_readonly("commutator_norm", &SymmetryReport::commutator_norm)
        .def_readonly("commutator_scale", &SymmetryReport::commutator_scale);

    py::class_<ConstraintResidual>(m, "ConstraintResidual")
        .def_readonly("y", &ConstraintResidual::y)
        .def_readonly("residual", &ConstraintResidual::residual);

    py::class_<CommutatorExpectation>(m, "CommutatorExpectation")
        .def_readonly("i1", &CommutatorExpectation::i1)
        .def_readonly("i2", &CommutatorExpectation::i2)
        .def_readonly("centered", &CommutatorExpectation::centered)
        .def_readonly("ng_shift", &CommutatorExpectation::ng_shift);

    m.def("bs_martingale_residual", &bs_martingale_residual, py::arg("params"), py::arg("grid"));
    m.def("extended_martingale_residual", &extended_martingale_residual, py::arg("params"), py::arg("grid"));
    m.def("extended_martingale_gap", &extended_martingale_gap, py::arg("params"), py::arg("y"));
    m.def("martingale_constraint_residual", &martingale_constraint_residual, py::arg("params"), py::arg("y"));
    m.def("solve_constraint_y", &solve_constraint_y, py::arg("params"), py::arg("y_lo"), py::arg("y_hi"));
    m.def("broken_generator_report", &broken_generator_report, py::arg("h"), py::arg("gen"),
          py::arg("vacuum"), py::arg("generator_name") = "generator");
    m.def("commutator_expectation", &commutator_expectation, py::arg("s"), py::arg("phibar"),
          py::arg("phibar_deriv_analytic"));

    // -- potentials --------------------------------------------------------------
    py::enum_<VacuumKind>(m, "VacuumKind")
        .value("BsQuadratic", VacuumKind::BsQuadratic)
        .value("MgStationary", VacuumKind::MgStationary)
        .value("QuarticFixedNorm", VacuumKind::QuarticFixedNorm);

    py::enum_<VacuumClass>(m, "VacuumClass")
        .value("Trivial", VacuumClass::Trivial)
        .value("NonTrivial", VacuumClass::NonTrivial)
        .value("PriceTrivial", VacuumClass::PriceTrivial)
        .value("VolTrivial", VacuumClass::VolTrivial);

    py::class_<QuarticParams>(m, "QuarticParams")
        .def(py::init([](double mu2, double lam4) { return QuarticParams{mu2, lam4}; }),
             py::arg("mu2"), py::arg("lam4"))
        .def_readonly("mu2", &QuarticParams::mu2)
        .def_readonly("lam4", &QuarticParams::lam4)
        .def_property_readonly("nontrivial_vacuum", &QuarticParams::nontrivial_vacuum);

    py::class_<VacuumSolution>(m, "VacuumSolution")
        .def_readonly("kind", &VacuumSolution::kind)
        .def_readonly("values", &VacuumSolution::values)
        .def_readonly("classification", &VacuumSolution::classification)
        .def_readonly("ratio", &VacuumSolution::ratio);

    py::class_<VacuumManifoldPoint>(m, "VacuumManifoldPoint")
        .def_readonly("y", &VacuumManifoldPoint::y)
        .def_readonly("x", &VacuumManifoldPoint::x)
        .def_readonly("s_norm", &VacuumManifoldPoint::s_norm);

    m.def("bs_potential", &bs_potential, py::arg("params"), py::arg("phi"));
    m.def("bs_potential_gradient", &bs_potential_gradient, py::arg("params"), py::arg("phi"));
    m.def("bs_vacuum", &bs_vacuum, py::arg("params"));
    m.def("mg_coefficient_a", &mg_coefficient_a, py::arg("params"), py::arg("y"));
    m.def("mg_coefficient_b", &mg_coefficient_b, py::arg("params"), py::arg("y"));
    m.def("mg_potential", &mg_potential, py::arg("params"), py::arg("y"), py::arg("phi_x"), py::arg("phi_y"));
    m.def("mg_potential_gradient", &mg_potential_gradient, py::arg("params"), py::arg("y"),
          py::arg("phi_x"), py::arg("phi_y"));
    m.def("mg_vacuum", &mg_vacuum, py::arg("params"), py::arg("y"));
    m.def("quartic_vacuum", &quartic_vacuum, py::arg("params"));
    m.def("vacuum_manifold", &vacuum_manifold, py::arg("params"), py::arg("ys"));
    m.def("lx_symmetry_residual", &lx_symmetry_residual, py::arg("params"), py::arg("y"));
    m.def("ly_symmetry_residual", &ly_symmetry_residual, py::arg("params"), py::arg("y"));

    // -- pricing -----------------------------------------------------------------
    py::enum_<Scheme>(m, "Scheme")
        .value("ImplicitEuler", Scheme::ImplicitEuler)
        .value("CrankNicolson", Scheme::CrankNicolson);

    py::class_<EvolutionConfig>(m, "EvolutionConfig")
        .def(py::init([](double maturity, int steps, Scheme scheme, const Grid1D& g) {
                 return EvolutionConfig{maturity, steps, scheme, Grid(g)};
             }),
             py::arg("maturity"), py::arg("steps"), py::arg("scheme"), py::arg("grid"))
        .def(py::init([](double maturity, int steps, Scheme scheme, const Grid2D& g) {
                 return EvolutionConfig{maturity, steps, scheme, Grid(g)};
             }),
             py::arg("maturity"), py::arg("steps"), py::arg("scheme"), py::arg("grid"))
        .def_readonly("maturity", &EvolutionConfig::maturity)
        .def_readonly("steps", &EvolutionConfig::steps)
        .def_readonly("scheme", &EvolutionConfig::scheme);

    py::class_<PricingResult>(m, "PricingResult")
        .def_readonly("values", &PricingResult::values)
        .def_readonly("spot_price", &PricingResult::spot_price)
        .def_readonly("oracle_price", &PricingResult::oracle_price)
        .def_readonly("rel_error", &PricingResult::rel_error);

    m.def("evolve", &evolve, py::arg("h"), py::arg("terminal"), py::arg("config"));
    m.def("norm_cdf", &norm_cdf, py::arg("x"));
    m.def("bs_closed_form", &bs_closed_form, py::arg("s0"), py::arg("strike"), py::arg("params"),
          py::arg("maturity"));
    m.def("price_european_call", &price_european_call, py::arg("params"), py::arg("grid"),
          py::arg("strike"), py::arg("config"), py::arg("x0"));
    m.def("martingale_evolution_check", &martingale_evolution_check, py::arg("h"), py::arg("vacuum"),
          py::arg("config"));

    m.attr("__version__") = "0.1.0";
}
