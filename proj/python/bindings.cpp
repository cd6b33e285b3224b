#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "fracopt/classic_perimeter.hpp"
#include "fracopt/commands.hpp"
#include "fracopt/config.hpp"
#include "fracopt/error.hpp"
#include "fracopt/kernel.hpp"
#include "fracopt/pde.hpp"
#include "fracopt/subproblem.hpp"
#include "fracopt/trust_region.hpp"

namespace py = pybind11;
using namespace fracopt;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Fractional-perimeter regularized binary control: kernels, perimeters, PDE objective, trust region";

  static py::exception<Error> error(m, "FracoptError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error, e.what());
    }
  });

  py::class_<Grid>(m, "Grid")
      .def(py::init(&Grid::build), py::arg("n"), py::arg("exterior_band") = 0, py::arg("dim") = 2)
      .def_property_readonly("n", &Grid::n)
      .def_property_readonly("dim", &Grid::dim)
      .def_property_readonly("h", &Grid::h)
      .def_property_readonly("cell_volume", &Grid::cell_volume)
      .def_property_readonly("cell_count", &Grid::cell_count)
      .def("index", &Grid::index, py::arg("row"), py::arg("col"));

  py::class_<LabelSet>(m, "LabelSet")
      .def(py::init<std::vector<int>>(), py::arg("values"))
      .def_static("binary", &LabelSet::binary)
      .def_property_readonly("values", &LabelSet::values);

  py::class_<CellSet>(m, "CellSet")
      .def(py::init([](const Grid& g, const std::vector<bool>& members) {
             std::vector<std::uint8_t> m(members.begin(), members.end());
             return CellSet(g, std::move(m));
           }),
           py::arg("grid"), py::arg("membership"))
      .def_property_readonly("membership",
                             [](const CellSet& s) { return std::vector<bool>(s.membership().begin(), s.membership().end()); })
      .def("count", &CellSet::count)
      .def("complement", &CellSet::complement)
      .def("intersection", &CellSet::intersection)
      .def("union_with", &CellSet::union_with)
      .def("difference", &CellSet::difference);

  py::class_<ControlField>(m, "ControlField")
      .def(py::init<const Grid&, LabelSet, std::vector<int>>(), py::arg("grid"), py::arg("labels"), py::arg("assignment"))
      .def_static("constant", &ControlField::constant, py::arg("grid"), py::arg("labels"), py::arg("label_index"))
      .def_property_readonly("assignment", &ControlField::assignment)
      .def_property_readonly("values", &ControlField::values)
      .def_property_readonly("grid", &ControlField::grid)
      .def("__eq__", [](const ControlField& a, const ControlField& b) { return a == b; });

  m.def("l1_distance", &l1_distance);
  m.def("level_set", &level_set);

  py::class_<QuadratureSpec>(m, "QuadratureSpec")
      .def(py::init<>())
      .def_readwrite("order", &QuadratureSpec::order)
      .def_readwrite("near_field_levels", &QuadratureSpec::near_field_levels)
      .def_readwrite("rel_tol", &QuadratureSpec::rel_tol)
      .def_readwrite("near_threshold", &QuadratureSpec::near_threshold);

  py::class_<KernelTable, std::shared_ptr<KernelTable>>(m, "KernelTable")
      .def_property_readonly("alpha", &KernelTable::alpha)
      .def_property_readonly("truncation_radius", &KernelTable::truncation_radius)
      .def_property_readonly("beta", [](const KernelTable& t) { return std::vector<double>(t.beta().begin(), t.beta().end()); })
      .def("kappa", &KernelTable::kappa)
      .def("to_text", [](const KernelTable& t) {
        std::ostringstream out;
        write_kernel_table(t, out);
        return out.str();
      });

  m.def(
      "tabulate_kernel",
      [](const Grid& g, double alpha, std::optional<double> radius, const QuadratureSpec& q) {
        return std::make_shared<KernelTable>(tabulate_kernel(g, alpha, radius ? *radius : kUntruncated, q));
      },
      py::arg("grid"), py::arg("alpha"), py::arg("truncation_radius") = py::none(), py::arg("quad") = QuadratureSpec{},
      "Tabulate kernel weights; a truncation radius of None means untruncated.");
  m.def("frac_perimeter", &frac_perimeter, py::arg("set"), py::arg("table"));
  m.def("regularizer_Ralpha", &regularizer_Ralpha, py::arg("w"), py::arg("table"));
  m.def("frac_perimeter_1d_exact", &frac_perimeter_1d_exact, py::arg("length"), py::arg("alpha"));
  m.def("grid_perimeter", &grid_perimeter, py::arg("set"), py::arg("count_domain_boundary") = true);
  m.def("regularizer_R", [](const ControlField& w) { return regularizer_R(w); }, py::arg("w"));

  py::class_<PdeMesh>(m, "PdeMesh")
      .def(py::init<const Grid&, int>(), py::arg("grid"), py::arg("refinement") = 4)
      .def_property_readonly("intervals", &PdeMesh::intervals)
      .def_property_readonly("node_count", &PdeMesh::node_count);
  m.def("solve_poisson", py::overload_cast<const ControlField&, double, const PdeMesh&>(&solve_poisson), py::arg("w"),
        py::arg("nu"), py::arg("mesh"));
  m.def(
      "make_target_ud",
      [](std::pair<double, double> c, double r, double nu, const PdeMesh& mesh) {
        return make_target_ud({c.first, c.second}, r, nu, mesh);
      },
      py::arg("center"), py::arg("radius"), py::arg("nu"), py::arg("mesh"));
  m.def("objective_F", py::overload_cast<const ControlField&, const NodalField&, double, const PdeMesh&>(&objective_F),
        py::arg("w"), py::arg("target"), py::arg("nu"), py::arg("mesh"));
  m.def("gradient_F",
        py::overload_cast<const ControlField&, const NodalField&, double, const PdeMesh&>(&gradient_F), py::arg("w"),
        py::arg("target"), py::arg("nu"), py::arg("mesh"));

  py::class_<Regularizer>(m, "Regularizer")
      .def_static("fractional",
                  [](std::shared_ptr<KernelTable> t) { return Regularizer::fractional(std::move(t)); }, py::arg("table"))
      .def_static("limit", [](const Grid& g) { return Regularizer::limit(g); }, py::arg("grid"))
      .def_property_readonly("is_limit", &Regularizer::is_limit)
      .def("value", &Regularizer::value);

  py::class_<SubproblemInstance>(m, "SubproblemInstance")
      .def(py::init([](std::vector<double> cost, const Regularizer& reg, double eta, const ControlField& center,
                       double radius) { return SubproblemInstance{std::move(cost), reg, eta, center, radius}; }),
           py::arg("linear_cost"), py::arg("regularizer"), py::arg("eta"), py::arg("center"), py::arg("radius"))
      .def_readwrite("radius", &SubproblemInstance::radius)
      .def("flip_budget", &SubproblemInstance::flip_budget);

  py::class_<SubproblemSolution>(m, "SubproblemSolution")
      .def_readonly("minimizer", &SubproblemSolution::minimizer)
      .def_readonly("objective", &SubproblemSolution::objective)
      .def_readonly("lower_bound", &SubproblemSolution::lower_bound)
      .def_readonly("exact", &SubproblemSolution::exact)
      .def_readonly("nodes", &SubproblemSolution::nodes)
      .def_property_readonly("gap", &SubproblemSolution::gap);

  m.def(
      "solve_subproblem_exact",
      [](const SubproblemInstance& inst, std::size_t max_nodes, double max_seconds) {
        return solve_subproblem_exact(inst, {max_nodes, max_seconds});
      },
      py::arg("instance"), py::arg("max_nodes") = 1000000, py::arg("max_seconds") = 60.0);
  m.def("brute_force_subproblem", &brute_force_subproblem, py::arg("instance"));
  m.def("lagrangian_lower_bound", &lagrangian_lower_bound, py::arg("instance"), py::arg("lam"));
  m.def(
      "maximize_lagrangian",
      [](const SubproblemInstance& inst) {
        const DualResult d = maximize_lagrangian(inst);
        return py::make_tuple(d.bound, d.lambda);
      },
      py::arg("instance"), "Returns (bound, lambda).");
  m.def(
      "solve_unconstrained_mincut",
      [](const SubproblemInstance& inst, double lam) {
        PenalizedSolution s = solve_unconstrained_mincut(inst, lam);
        return py::make_tuple(s.minimizer, s.energy);
      },
      py::arg("instance"), py::arg("lam"), "Returns (minimizer, energy).");
  m.def("subproblem_objective", &subproblem_objective, py::arg("instance"), py::arg("w"));

  py::class_<IterationRecord>(m, "IterationRecord")
      .def_readonly("outer", &IterationRecord::outer)
      .def_readonly("inner", &IterationRecord::inner)
      .def_readonly("radius", &IterationRecord::radius)
      .def_readonly("pred", &IterationRecord::pred)
      .def_readonly("ared", &IterationRecord::ared)
      .def_readonly("F", &IterationRecord::F)
      .def_readonly("R", &IterationRecord::R)
      .def_readonly("J", &IterationRecord::J)
      .def_readonly("accepted", &IterationRecord::accepted)
      .def_readonly("gap", &IterationRecord::gap);

  py::class_<TrustRegionResult>(m, "TrustRegionResult")
      .def_readonly("control", &TrustRegionResult::control)
      .def_readonly("log", &TrustRegionResult::log)
      .def_readonly("accepted_steps", &TrustRegionResult::accepted_steps)
      .def_readonly("F", &TrustRegionResult::F)
      .def_readonly("R", &TrustRegionResult::R)
      .def_readonly("J", &TrustRegionResult::J)
      .def_property_readonly("termination", [](const TrustRegionResult& r) { return std::string(to_string(r.reason)); });

  m.def("accept_test", &accept_test, py::arg("ared"), py::arg("pred"), py::arg("sigma"));
  m.def(
      "run_trust_region_pde",
      [](const ControlField& w0, const Regularizer& reg, double eta, double nu, std::pair<double, double> center,
         double radius, int refinement, double delta0, double sigma) {
        PdeMesh mesh(w0.grid(), refinement);
        NodalField target = make_target_ud({center.first, center.second}, radius, nu, mesh);
        const PdeObjective objective(std::move(mesh), nu, std::move(target));
        TrustRegionParams params;
        params.delta0 = delta0;
        params.sigma = sigma;
        py::gil_scoped_release release;
        return run_trust_region(objective, reg, eta, params, w0);
      },
      py::arg("w0"), py::arg("regularizer"), py::arg("eta") = 5e-5, py::arg("nu") = 1.0 / 25.0,
      py::arg("target_center") = std::pair{0.5, 0.5}, py::arg("target_radius") = 0.3, py::arg("refinement") = 4,
      py::arg("delta0") = 0.25, py::arg("sigma") = 1e-3);
  m.def(
      "run_trust_region_linear",
      [](const ControlField& w0, const Regularizer& reg, double eta, std::vector<double> gradient, double delta0,
         double sigma) {
        const LinearObjective objective(w0.grid(), std::move(gradient));
        TrustRegionParams params;
        params.delta0 = delta0;
        params.sigma = sigma;
        return run_trust_region(objective, reg, eta, params, w0);
      },
      py::arg("w0"), py::arg("regularizer"), py::arg("eta"), py::arg("gradient"), py::arg("delta0") = 0.25,
      py::arg("sigma") = 1e-3);

  m.def(
      "normalize_config", [](const std::string& text) { return serialize_config(parse_config(text)); },
      py::arg("json_text"), "Parse, validate and re-serialize a run configuration with defaults filled in.");
}
