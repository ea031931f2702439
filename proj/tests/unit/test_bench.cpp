// Copyright The flexmg Authors.
// SPDX-License-Identifier: Apache-2.0

#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "flexmg/bench.hpp"
#include "flexmg/error.hpp"
#include "flexmg/matrix_market.hpp"
#include "flexmg/problem.hpp"

using namespace flexmg;
namespace fs = std::filesystem;

namespace
{

fs::path scratch(const std::string &name)
{
  const fs::path p = fs::temp_directory_path() / ("flexmg_bench_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path &p)
{
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunConfig grid_config(std::size_t n, double a = 0.001)
{
  RunConfig c;
  c.problem.nx = c.problem.ny = c.problem.nz = n;
  c.problem.a = a;
  return c;
}

NamedProgram named(const std::string &name, const std::string &dsl)
{
  return {name, parse_dsl(dsl)};
}

}  // namespace

TEST_CASE("problem command")
{
  CHECK(ProblemSpec{}.size() == 262144);

  ProblemSpec iso;
  iso.nx = iso.ny = iso.nz = 4;
  iso.a = 1.0;
  const CsrMatrix A = assemble_anisotropic_7pt(iso);
  CHECK(A == transpose(A));
  for (std::size_t i = 0; i < A.nrows; ++i)
  {
    double s = 0.0;
    for (std::size_t k = A.row_offsets[i]; k < A.row_offsets[i + 1]; ++k)
    {
      s += A.values[k];
    }
    CHECK(s >= 0.0);
  }

  RunConfig c = grid_config(6);
  c.out_dir = scratch("problem").string();
  const ProblemOutput out = cmd_problem(c);
  CHECK(out.rows == 216);
  CHECK(read_matrix_market(out.matrix_file) == assemble_anisotropic_7pt(c.problem));
  CHECK(slurp(out.spec_file).find("\"nx\": 6") != std::string::npos);

  RunConfig from_file = grid_config(6);
  from_file.matrix_path = out.matrix_file;
  CHECK(config_system(from_file).A == assemble_anisotropic_7pt(c.problem));
  fs::remove_all(c.out_dir);
}

TEST_CASE("tables render identical numbers as csv and text")
{
  Table t;
  t.title = "demo";
  t.header = {"program", "x", "y"};
  t.rows = {{"V(1,1)", "(0.0012 7)", "3.50"}, {"long_program_name", "(1.5000 >100)", "12.00"}};
  const Table back = parse_table_csv(t.to_csv());
  CHECK(back.title == t.title);
  CHECK(back.header == t.header);
  CHECK(back.rows == t.rows);
  const std::string text = t.to_text();
  for (const auto &row : t.rows)
  {
    for (const auto &cell : row)
    {
      CHECK(text.find(cell) != std::string::npos);
    }
  }
  CHECK_THROWS(parse_table_csv("a,b\n1\n"));
}

TEST_CASE("eval command")
{
  RunConfig c = grid_config(32, 1.0);
  const EvalOutput e = cmd_eval(c, named("v11", "s:gsf:1.00 d s:gsf:1.00 d s:gsf:1.00 d s:gsf:1.00 d s:gsf:1.00 bv:1.00 "
                                                 "s:gsb:1.00 u:1.00 s:gsb:1.00 u:1.00 s:gsb:1.00 u:1.00 s:gsb:1.00 u:1.00 s:gsb:1.00"));
  CHECK(e.result.converged);
  CHECK(e.result.conv_factor < 1.0);
  CHECK(e.levels >= 6);
  const std::string json = e.to_json(c.mode);
  CHECK(json.find("\"program\":\"v11\"") != std::string::npos);
  CHECK(json.find("\"iterations\"") != std::string::npos);

  RunConfig r = grid_config(10);
  r.problem.rhs = RhsKind::random;
  r.problem.rhs_seed = 5;
  r.setup.coarse_max_size = 10;
  const NamedProgram p = named("p", "s:gsf:1.00 d s:jac:0.70 d s:gsf:1.00 u:1.00 s:gsb:1.00 u:1.00 s:gsb:1.00");
  const EvalOutput a = cmd_eval(r, p);
  const EvalOutput b = cmd_eval(r, p);
  CHECK(a.result.iterations == b.result.iterations);
  CHECK(a.result.residual_history == b.result.residual_history);

  r.mode = SolverMode::preconditioner;
  CHECK(cmd_eval(r, p).result.converged);

  CHECK_THROWS_AS(cmd_eval(r, named("bad", "d d d d d d d d d d d d u:1.00 u:1.00 u:1.00 u:1.00 u:1.00 u:1.00 "
                                           "u:1.00 u:1.00 u:1.00 u:1.00 u:1.00 u:1.00")),
                  InvalidArgument);
}

TEST_CASE("compare command on references only")
{
  const CompareOutput c = cmd_compare(grid_config(16), {});
  REQUIRE(c.time_iters.rows.size() == 3);
  CHECK(c.time_iters.rows[0][0] == "V(2,1)");
  CHECK(c.time_iters.rows[1][0] == "V(3,2)");
  CHECK(c.time_iters.rows[2][0] == "V(3,3)");
  CHECK(c.time_iters.header == std::vector<std::string>{"program", "f=0,a=0.01", "f=0,a=0.001", "f=0,a=0.0001",
                                                        "f=1,a=0.001", "f=rand,a=0.001"});
  CHECK(c.work.header == c.time_iters.header);
  for (const auto &row : c.runs)
  {
    for (const auto &r : row)
    {
      CHECK(r.converged);
    }
  }
  CHECK(parse_table_csv(c.work.to_csv()).rows == c.work.rows);

  RunConfig tiny = grid_config(16);
  CHECK_THROWS_AS(cmd_compare(tiny, {named("broken", "d d d d d d bv:1.00 u:1.00 u:1.00 u:1.00 u:1.00 u:1.00 u:1.00")}),
                  InvalidArgument);
}

TEST_CASE("preconditioner suite with one step")
{
  RunConfig c = grid_config(12);
  c.suite_steps = 1;
  const NamedProgram p = named("flex", "s:gsf:1.00 d s:gsf:1.00 d s:jac:0.80 u:1.00 s:gsb:1.00 u:1.00 s:gsb:1.00");
  const SuiteOutput s = cmd_precond_suite(c, {p});
  CHECK(s.columns == std::vector<std::string>{"V(1,1)", "V(1,2)", "V(2,2)", "flex", "CG"});
  REQUIRE(s.runs.size() == 1);
  REQUIRE(s.table.rows.size() == 1);
  CHECK(s.table.title.find("1+0.05t") != std::string::npos);
  for (const auto &r : s.runs[0])
  {
    CHECK(r.converged);
  }

  RunConfig single = c;
  single.problem = suite_problem(c.problem, 1);
  single.mode = SolverMode::preconditioner;
  const EvalOutput e = cmd_eval(single, p);
  CHECK(e.result.iterations == s.runs[0][3].iterations);
  CHECK(e.result.residual_history == s.runs[0][3].residual_history);

  const SuiteOutput nocg = cmd_precond_suite(c, {}, false);
  CHECK(nocg.columns == std::vector<std::string>{"V(1,1)", "V(1,2)", "V(2,2)"});
}

TEST_CASE("sizes command")
{
  RunConfig c = grid_config(8);
  c.size_grids = {6, 10};
  const NamedProgram p = named("p", "s:gsf:1.00 d s:gsf:1.00 u:1.00 s:gsb:1.00");
  const SizesOutput s = cmd_sizes(c, {p});
  REQUIRE(s.table.rows.size() == 4);
  CHECK(s.table.rows[0][0] == "V(1,1)");
  CHECK(s.table.rows[1][0] == "p");
  CHECK(s.table.rows[2][1] == "10^3");
  CHECK(parse_table_csv(s.table.to_csv()).rows == s.table.rows);
}

TEST_CASE("render and program files")
{
  const fs::path dir = scratch("render");
  fs::create_directories(dir);
  {
    std::ofstream(dir / "mine.cycle") << "# comment\nS:GSF:1.0 d cs\n  u:1.00 s:gsb:1.00\n";
    std::ofstream(dir / "broken.cycle") << "s:gsf:1.00 d\n";
  }
  const NamedProgram p = load_program((dir / "mine.cycle").string());
  CHECK(p.name == "mine");
  CHECK(emit_dsl(p.program) == "s:gsf:1.00 d cs u:1.00 s:gsb:1.00");
  CHECK(cmd_render(p) == to_dot(p.program));
  try
  {
    load_program((dir / "broken.cycle").string());
    FAIL("expected a parse error");
  }
  catch (const ParseError &e)
  {
    CHECK(std::string(e.what()).find("broken.cycle") != std::string::npos);
  }
  CHECK_THROWS_AS(load_program((dir / "missing.cycle").string()), IoError);
  fs::remove_all(dir);
}

TEST_CASE("optimize smoke run")
{
  RunConfig c = grid_config(8);
  c.setup.coarse_max_size = 10;
  c.evo.mu = c.evo.lambda = 8;
  c.evo.generations = 2;
  c.evo.initial_pop = 16;
  c.evo.batch_size = 4;
  c.evo.master_seed = 3;
  const fs::path a = scratch("opt_a"), b = scratch("opt_b");
  std::ostringstream log;
  c.out_dir = a.string();
  const EvolutionResult r = cmd_optimize(c, log);
  CHECK_FALSE(r.front.empty());
  CHECK(log.str().find("generation 2") != std::string::npos);

  std::ifstream csv(a / "pareto.csv");
  const ParetoFront back = read_front_csv(csv);
  CHECK(back.size() == r.front.size());
  std::ifstream st(a / "stats.csv");
  CHECK(read_stats_csv(st).size() == 3);
  CHECK(parse_config(slurp(a / "config.resolved")).resolved() == slurp(a / "config.resolved"));
  std::size_t cycles = 0;
  for (const auto &f : fs::directory_iterator(a / "cycles"))
  {
    CHECK(validate_structure(load_program(f.path().string()).program).empty());
    ++cycles;
  }
  CHECK(cycles == r.front.size());

  c.out_dir = b.string();
  std::ostringstream log2;
  cmd_optimize(c, log2);
  CHECK(slurp(a / "pareto.csv") == slurp(b / "pareto.csv"));
  CHECK(slurp(a / "stats.csv") == slurp(b / "stats.csv"));
  fs::remove_all(a);
  fs::remove_all(b);
}
