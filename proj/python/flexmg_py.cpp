// Copyright The flexmg Authors.
// SPDX-License-Identifier: Apache-2.0

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "flexmg/bench.hpp"
#include "flexmg/cycle.hpp"
#include "flexmg/error.hpp"
#include "flexmg/evo.hpp"
#include "flexmg/grammar.hpp"
#include "flexmg/problem.hpp"
#include "flexmg/setup.hpp"
#include "flexmg/solver.hpp"

namespace py = pybind11;
using namespace flexmg;

namespace
{

py::dict result_dict(const SolveResult &r)
{
  py::dict d;
  d["iterations"] = r.iterations;
  d["converged"] = r.converged;
  d["diverged"] = r.diverged;
  d["conv_factor"] = r.conv_factor;
  d["wall_time"] = r.wall_time;
  d["work_units"] = r.work_units;
  d["residuals"] = r.residual_history;
  return d;
}

CycleProgram bound(const CycleProgram &p, const AmgHierarchy &h)
{
  return bind_program(p, h, p.flex_levels, "program");
}

}  // namespace

PYBIND11_MODULE(_core, m)
{
  m.doc() = "flexible algebraic multigrid cycles";

  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<SetupError>(m, "SetupError", PyExc_RuntimeError);

  py::class_<CsrMatrix>(m, "CsrMatrix")
      .def_readonly("nrows", &CsrMatrix::nrows)
      .def_readonly("ncols", &CsrMatrix::ncols)
      .def_readonly("row_offsets", &CsrMatrix::row_offsets)
      .def_readonly("col_indices", &CsrMatrix::col_indices)
      .def_readonly("values", &CsrMatrix::values)
      .def_property_readonly("nnz", &CsrMatrix::nnz)
      .def("at", &CsrMatrix::at)
      .def("spmv", [](const CsrMatrix &A, const Vector &x) { return spmv(A, x); });

  m.def(
      "assemble",
      [](std::size_t nx, std::size_t ny, std::size_t nz, double a, double b, double c) {
        ProblemSpec spec;
        spec.nx = nx;
        spec.ny = ny;
        spec.nz = nz;
        spec.a = a;
        spec.b = b;
        spec.c = c;
        spec.check();
        return assemble_anisotropic_7pt(spec);
      },
      py::arg("nx"), py::arg("ny"), py::arg("nz"), py::arg("a") = 0.001, py::arg("b") = 1.0,
      py::arg("c") = 1.0, "7-point anisotropic diffusion matrix with Dirichlet boundaries");
  m.def("random_unit_vector", &random_unit_vector, py::arg("n"), py::arg("seed"));

  py::class_<AmgHierarchy>(m, "Hierarchy")
      .def_property_readonly("depth", &AmgHierarchy::depth)
      .def_property_readonly("level_sizes",
                             [](const AmgHierarchy &h) {
                               std::vector<std::size_t> s;
                               for (const auto &l : h.levels)
                               {
                                 s.push_back(l.A.nrows);
                               }
                               return s;
                             })
      .def("operator", [](const AmgHierarchy &h, std::size_t l) { return h.levels.at(l).A; })
      .def_property_readonly("operator_complexity", &AmgHierarchy::operator_complexity)
      .def("summary_json", &AmgHierarchy::summary_json);

  m.def(
      "build_hierarchy",
      [](const CsrMatrix &A, double theta, std::size_t max_levels, std::size_t coarse_max_size,
         std::uint64_t seed) {
        SetupParams p;
        p.strength_threshold = theta;
        p.max_levels = max_levels;
        p.coarse_max_size = coarse_max_size;
        p.coarsen_seed = seed;
        return build_hierarchy(A, p);
      },
      py::arg("A"), py::arg("theta") = 0.25, py::arg("max_levels") = 10,
      py::arg("coarse_max_size") = 50, py::arg("seed") = 0);

  py::class_<CycleProgram>(m, "CycleProgram")
      .def_static("parse", [](const std::string &text) { return parse_dsl(text); })
      .def("dsl", &emit_dsl)
      .def("__str__", &emit_dsl)
      .def("__len__", &CycleProgram::size)
      .def("__eq__", [](const CycleProgram &a, const CycleProgram &b) { return a == b; })
      .def_readwrite("flex_levels", &CycleProgram::flex_levels)
      .def(
          "validate",
          [](const CycleProgram &p, std::size_t depth, std::size_t flex) {
            std::vector<std::string> out;
            for (const auto &v : validate(p, depth, flex))
            {
              out.push_back(v.message);
            }
            return out;
          },
          py::arg("depth"), py::arg("flex_levels") = default_flex_levels);

  m.def("v_cycle", &v_cycle, py::arg("pre"), py::arg("post"), py::arg("depth"),
        py::arg("flex_levels") = default_flex_levels);
  m.def("to_dot", &to_dot);
  m.def("work_units",
        [](const CycleProgram &p, const AmgHierarchy &h) { return work_units(bound(p, h), h); });

  m.def(
      "solve",
      [](const AmgHierarchy &h, const CycleProgram &p, const Vector &f, Vector x, double tol,
         std::size_t max_iter) {
        SolveOptions o;
        o.tol = tol;
        o.max_iter = max_iter;
        const SolveResult r = solve(h, bound(p, h), f, x, o);
        return py::make_tuple(x, result_dict(r));
      },
      py::arg("h"), py::arg("program"), py::arg("f"), py::arg("x0"), py::arg("tol") = 1e-8,
      py::arg("max_iter") = 100, "Stationary cycle iteration; returns (x, result)");
  m.def(
      "pcg",
      [](const AmgHierarchy &h, std::optional<CycleProgram> p, const Vector &f, Vector x,
         double tol, std::size_t max_iter, bool flexible) {
        SolveOptions o;
        o.tol = tol;
        o.max_iter = max_iter;
        o.flexible = flexible;
        std::optional<CycleProgram> b;
        if (p)
        {
          b = bound(*p, h);
        }
        const SolveResult r = pcg(h, b ? &*b : nullptr, f, x, o);
        return py::make_tuple(x, result_dict(r));
      },
      py::arg("h"), py::arg("program"), py::arg("f"), py::arg("x0"), py::arg("tol") = 1e-8,
      py::arg("max_iter") = 100, py::arg("flexible") = false,
      "Conjugate gradients; program=None means no preconditioner");

  m.def("nsga2_rank", [](const std::vector<std::pair<double, double>> &points) {
    std::vector<FitnessPair> fits;
    for (const auto &[c, r] : points)
    {
      fits.push_back({c, r, false});
    }
    return nsga2_rank(fits);
  });

  m.def(
      "evolve",
      [](const AmgHierarchy &h, const Vector &rhs, const Vector &x0, std::size_t mu,
         std::size_t lambda, std::size_t generations, std::size_t initial_pop,
         std::uint64_t seed) {
        EvoConfig c;
        c.mu = mu;
        c.lambda = lambda;
        c.generations = generations;
        c.initial_pop = initial_pop;
        c.master_seed = seed;
        FitnessProblem prob{rhs, x0, {}};
        const Grammar g(h.depth());
        const EvolutionResult r = evolve(g, h, prob, c);
        py::list out;
        for (const auto &e : r.front.sorted())
        {
          out.append(py::make_tuple(e.dsl, e.fitness.cost_per_iter, e.fitness.conv_factor));
        }
        return out;
      },
      py::arg("h"), py::arg("rhs"), py::arg("x0"), py::arg("mu") = 16, py::arg("lam") = 16,
      py::arg("generations") = 5, py::arg("initial_pop") = 32, py::arg("seed") = 0,
      "Runs the optimizer; returns the Pareto archive as (dsl, cost_per_iter, conv_factor)");
}
