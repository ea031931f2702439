// Copyright The flexmg Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef FLEXMG_BENCH_HPP
#define FLEXMG_BENCH_HPP

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "flexmg/config.hpp"
#include "flexmg/cycle.hpp"
#include "flexmg/evo.hpp"
#include "flexmg/setup.hpp"
#include "flexmg/solver.hpp"

namespace flexmg
{

// Exit codes of the command-line front end.
inline constexpr int exit_ok = 0;
inline constexpr int exit_config_error = 2;
inline constexpr int exit_numerical_failure = 3;

// Linear system of one benchmark run. For f = 0 the initial guess is a random
// unit vector (seeded by rhs_seed), otherwise zero.
struct BenchSystem
{
  CsrMatrix A;
  Vector rhs;
  Vector x0;
};

BenchSystem make_system(const ProblemSpec &spec);

// Generated problem, or the Matrix Market file of the config with the
// configured right-hand side kind.
BenchSystem config_system(const RunConfig &config);

FitnessProblem make_fitness_problem(const BenchSystem &system, const RunConfig &config);

// Binds a parsed program to a hierarchy and validates it. Throws
// InvalidArgument naming the program on failure.
CycleProgram bind_program(CycleProgram program, const AmgHierarchy &h, std::size_t flex_levels,
                          const std::string &name);

// Stationary solve, or PCG with the program as preconditioner.
SolveResult run_program(const AmgHierarchy &h, const CycleProgram &program,
                        const BenchSystem &system, SolverMode mode, double tol,
                        std::size_t max_iter, bool flexible_cg = false);

struct NamedProgram
{
  std::string name;
  CycleProgram program;
};

// Reads a .cycle file (one program, comments allowed).
NamedProgram load_program(const std::string &path);

// Rectangular text table with identical CSV and aligned renderings.
struct Table
{
  std::string title;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string to_csv() const;
  std::string to_text() const;
};

// Parses what to_csv wrote: an optional "# title" line, the header, then rows
// (cells with commas or quotes are double-quoted).
Table parse_table_csv(const std::string &csv);

struct ProblemOutput
{
  std::string matrix_file;
  std::string spec_file;
  std::size_t rows = 0;
  std::size_t nnz = 0;
};

// Writes <out>/matrix.mtx and <out>/spec.json.
ProblemOutput cmd_problem(const RunConfig &config);

// Builds the hierarchy once, evolves, writes <out>/pareto.csv, <out>/cycles/,
// <out>/stats.csv, <out>/config.resolved and <out>/hierarchy.json.
EvolutionResult cmd_optimize(const RunConfig &config, std::ostream &log);

struct EvalOutput
{
  std::string name;
  std::string dsl;
  std::size_t levels = 0;
  SolveResult result;

  // {"program", "dsl", "levels", "mode", ...SolveResult fields}
  std::string to_json(SolverMode mode) const;
};

EvalOutput cmd_eval(const RunConfig &config, const NamedProgram &program);

struct ProblemVariant
{
  std::string label;
  RhsKind rhs;
  double a;
};

// f=0,a=0.01 | f=0,a=0.001 | f=0,a=0.0001 | f=1,a=0.001 | f=rand,a=0.001
std::vector<ProblemVariant> compare_variants();

struct CompareOutput
{
  Table time_iters;  // cells "(seconds, iterations)"
  Table work;        // cells total work units
  std::vector<std::vector<SolveResult>> runs;  // [row][variant]
};

// Rows V(2,1), V(3,2), V(3,3) and then the supplied programs; grid and b, c
// from the config.
CompareOutput cmd_compare(const RunConfig &config, const std::vector<NamedProgram> &programs);

// Matrix of the drifting time-step suite: b and c scaled by 1 + 0.05 t.
ProblemSpec suite_problem(const ProblemSpec &base, std::size_t t);

struct SuiteOutput
{
  Table table;  // cells "(milliseconds, CG iterations)"
  std::vector<std::string> columns;
  std::vector<std::vector<SolveResult>> runs;  // [t - 1][column]
};

// PCG at t = 1..suite.steps with V(1,1), V(1,2), V(2,2), the supplied
// programs and, when plain_cg is set, unpreconditioned CG.
SuiteOutput cmd_precond_suite(const RunConfig &config, const std::vector<NamedProgram> &programs,
                              bool plain_cg = true);

std::string cmd_render(const NamedProgram &program);

struct SizesOutput
{
  Table table;  // one row per (program, grid)
  std::vector<SolveResult> runs;
};

// V(1,1) and the supplied programs on n^3 grids for n in sizes.grids.
SizesOutput cmd_sizes(const RunConfig &config, const std::vector<NamedProgram> &programs);

}  // namespace flexmg

#endif  // FLEXMG_BENCH_HPP
