// Copyright The flexmg Authors.
// SPDX-License-Identifier: Apache-2.0

#include "flexmg/bench.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "flexmg/error.hpp"
#include "flexmg/grammar.hpp"
#include "flexmg/matrix_market.hpp"
#include "flexmg/problem.hpp"
#include "json.hpp"

namespace flexmg
{

namespace fs = std::filesystem;

namespace
{

Vector initial_guess(RhsKind rhs, std::size_t n, std::uint64_t seed)
{
  return rhs == RhsKind::zero ? random_unit_vector(n, seed) : Vector(n, 0.0);
}

std::string fmt(const char *format, double v)
{
  char buf[64];
  std::snprintf(buf, sizeof(buf), format, v);
  return buf;
}

std::ofstream open_out(const fs::path &p)
{
  std::ofstream os(p);
  if (!os)
  {
    throw IoError("cannot write " + p.string());
  }
  return os;
}

std::string iters_cell(const SolveResult &r)
{
  return r.converged ? std::to_string(r.iterations) : ">" + std::to_string(r.iterations);
}

std::string csv_cell(const std::string &cell)
{
  if (cell.find_first_of(",\"") == std::string::npos)
  {
    return cell;
  }
  std::string out = "\"";
  for (char ch : cell)
  {
    out += ch;
    if (ch == '"')
    {
      out += '"';
    }
  }
  return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string &line)
{
  std::vector<std::string> cells(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i)
  {
    const char ch = line[i];
    if (quoted)
    {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"')
      {
        cells.back() += '"';
        ++i;
      }
      else if (ch == '"')
      {
        quoted = false;
      }
      else
      {
        cells.back() += ch;
      }
    }
    else if (ch == '"')
    {
      quoted = true;
    }
    else if (ch == ',')
    {
      cells.emplace_back();
    }
    else
    {
      cells.back() += ch;
    }
  }
  if (quoted)
  {
    throw IoError("csv: unterminated quote in '" + line + "'");
  }
  return cells;
}

}  // namespace

BenchSystem make_system(const ProblemSpec &spec)
{
  spec.check();
  BenchSystem s;
  s.A = assemble_anisotropic_7pt(spec);
  s.rhs = make_rhs(spec);
  s.x0 = initial_guess(spec.rhs, spec.size(), spec.rhs_seed);
  return s;
}

BenchSystem config_system(const RunConfig &config)
{
  if (config.matrix_path.empty())
  {
    return make_system(config.problem);
  }
  BenchSystem s;
  s.A = read_matrix_market(config.matrix_path);
  if (s.A.nrows != s.A.ncols)
  {
    throw InvalidArgument("matrix " + config.matrix_path + " is not square");
  }
  const std::size_t n = s.A.nrows;
  switch (config.problem.rhs)
  {
    case RhsKind::zero:
      s.rhs.assign(n, 0.0);
      break;
    case RhsKind::ones:
      s.rhs.assign(n, 1.0);
      break;
    case RhsKind::random:
      s.rhs = random_unit_vector(n, config.problem.rhs_seed);
      break;
  }
  s.x0 = initial_guess(config.problem.rhs, n, config.problem.rhs_seed);
  return s;
}

FitnessProblem make_fitness_problem(const BenchSystem &system, const RunConfig &config)
{
  FitnessProblem p;
  p.rhs = system.rhs;
  p.initial_guess = system.x0;
  p.options.fitness = config.evo.fitness_mode;
  p.options.mode = config.mode;
  p.options.tol = config.tol;
  p.options.flexible_cg = config.flexible_cg;
  return p;
}

CycleProgram bind_program(CycleProgram program, const AmgHierarchy &h, std::size_t flex_levels,
                          const std::string &name)
{
  program.hierarchy_depth = h.depth();
  program.flex_levels = flex_levels;
  if (const auto errors = validate(program, h.depth(), flex_levels); !errors.empty())
  {
    throw InvalidArgument(name + ": " + describe(errors));
  }
  return program;
}

SolveResult run_program(const AmgHierarchy &h, const CycleProgram &program,
                        const BenchSystem &system, SolverMode mode, double tol,
                        std::size_t max_iter, bool flexible_cg)
{
  SolveOptions so;
  so.tol = tol;
  so.max_iter = max_iter;
  so.flexible = flexible_cg;
  Vector x = system.x0;
  return mode == SolverMode::solver ? solve(h, program, system.rhs, x, so)
                                    : pcg(h, &program, system.rhs, x, so);
}

NamedProgram load_program(const std::string &path)
{
  std::ifstream in(path);
  if (!in)
  {
    throw IoError("cannot open cycle file " + path);
  }
  std::stringstream ss;
  ss << in.rdbuf();
  try
  {
    return {fs::path(path).stem().string(), parse_dsl(ss.str())};
  }
  catch (const ParseError &e)
  {
    throw ParseError(path + ": " + e.what(), e.line(), e.column());
  }
}

std::string Table::to_csv() const
{
  std::ostringstream os;
  auto line = [&](const std::vector<std::string> &cells) {
    for (std::size_t i = 0; i < cells.size(); ++i)
    {
      os << (i ? "," : "") << csv_cell(cells[i]);
    }
    os << '\n';
  };
  if (!title.empty())
  {
    os << "# " << title << '\n';
  }
  line(header);
  for (const auto &r : rows)
  {
    line(r);
  }
  return os.str();
}

std::string Table::to_text() const
{
  std::vector<std::size_t> width(header.size(), 0);
  auto measure = [&](const std::vector<std::string> &cells) {
    for (std::size_t i = 0; i < cells.size() && i < width.size(); ++i)
    {
      width[i] = std::max(width[i], cells[i].size());
    }
  };
  measure(header);
  for (const auto &r : rows)
  {
    measure(r);
  }
  std::ostringstream os;
  if (!title.empty())
  {
    os << title << '\n';
  }
  auto line = [&](const std::vector<std::string> &cells) {
    std::string out;
    for (std::size_t i = 0; i < cells.size(); ++i)
    {
      if (i)
      {
        out += "  ";
      }
      out += cells[i];
      if (i + 1 < cells.size())
      {
        out.append(width[i] - cells[i].size(), ' ');
      }
    }
    os << out << '\n';
  };
  line(header);
  for (const auto &r : rows)
  {
    line(r);
  }
  return os.str();
}

Table parse_table_csv(const std::string &csv)
{
  Table t;
  std::istringstream is(csv);
  std::string line;
  bool first = true;
  while (std::getline(is, line))
  {
    if (first && line.rfind("# ", 0) == 0)
    {
      t.title = line.substr(2);
      continue;
    }
    const std::vector<std::string> cells = split_csv_line(line);
    if (first)
    {
      t.header = std::move(cells);
      first = false;
    }
    else
    {
      if (cells.size() != t.header.size())
      {
        throw IoError("csv row has " + std::to_string(cells.size()) + " cells, header has " +
                      std::to_string(t.header.size()));
      }
      t.rows.push_back(std::move(cells));
    }
  }
  if (first)
  {
    throw IoError("csv is empty");
  }
  return t;
}

ProblemOutput cmd_problem(const RunConfig &config)
{
  config.check();
  const BenchSystem s = config_system(config);
  const fs::path dir(config.out_dir);
  fs::create_directories(dir);
  ProblemOutput out;
  out.matrix_file = (dir / "matrix.mtx").string();
  out.spec_file = (dir / "spec.json").string();
  out.rows = s.A.nrows;
  out.nnz = s.A.nnz();
  write_matrix_market(out.matrix_file, s.A);

  nlohmann::ordered_json j;
  if (config.matrix_path.empty())
  {
    j["nx"] = config.problem.nx;
    j["ny"] = config.problem.ny;
    j["nz"] = config.problem.nz;
    j["a"] = config.problem.a;
    j["b"] = config.problem.b;
    j["c"] = config.problem.c;
  }
  else
  {
    j["matrix_source"] = config.matrix_path;
  }
  j["rhs"] = to_string(config.problem.rhs);
  j["rhs_seed"] = config.problem.rhs_seed;
  j["rows"] = out.rows;
  j["nnz"] = out.nnz;
  open_out(out.spec_file) << j.dump(2) << '\n';
  return out;
}

EvolutionResult cmd_optimize(const RunConfig &config, std::ostream &log)
{
  config.check();
  const BenchSystem s = config_system(config);
  const AmgHierarchy h = build_hierarchy(s.A, config.setup);
  const fs::path dir(config.out_dir);
  fs::create_directories(dir);
  open_out(dir / "config.resolved") << config.resolved();
  open_out(dir / "hierarchy.json") << h.summary_json() << '\n';
  log << "# hierarchy " << h.summary_json() << '\n';

  const Grammar grammar(h.depth(), config.flex_levels);
  EvolutionResult result =
      evolve(grammar, h, make_fitness_problem(s, config), config.evo,
             [&](const GenerationStats &st) {
               log << "generation " << st.generation << " min_cost_per_iter "
                   << fmt("%.6g", st.min_cost_per_iter) << " min_conv_factor "
                   << fmt("%.6g", st.min_conv_factor) << " archive " << st.archive_size << '\n';
             });
  if (result.front.empty())
  {
    throw SetupError("optimization produced no convergent program");
  }
  export_front(result.front, dir.string());
  std::ofstream stats = open_out(dir / "stats.csv");
  write_stats_csv(stats, result.stats);
  log << "evaluations " << result.evaluations << " cache_hits " << result.cache_hits
      << " archive " << result.front.size() << '\n';
  return result;
}

std::string EvalOutput::to_json(SolverMode mode) const
{
  auto j = nlohmann::ordered_json::parse(result.to_json());
  nlohmann::ordered_json out;
  out["program"] = name;
  out["dsl"] = dsl;
  out["levels"] = levels;
  out["mode"] = to_string(mode);
  for (auto it = j.begin(); it != j.end(); ++it)
  {
    out[it.key()] = it.value();
  }
  return out.dump();
}

EvalOutput cmd_eval(const RunConfig &config, const NamedProgram &program)
{
  config.check();
  const BenchSystem s = config_system(config);
  const AmgHierarchy h = build_hierarchy(s.A, config.setup);
  const CycleProgram p = bind_program(program.program, h, config.flex_levels, program.name);
  EvalOutput out;
  out.name = program.name;
  out.dsl = emit_dsl(p);
  out.levels = h.depth();
  out.result = run_program(h, p, s, config.mode, config.tol, config.max_iter,
                             config.flexible_cg);
  return out;
}

std::vector<ProblemVariant> compare_variants()
{
  return {{"f=0,a=0.01", RhsKind::zero, 0.01},
          {"f=0,a=0.001", RhsKind::zero, 0.001},
          {"f=0,a=0.0001", RhsKind::zero, 0.0001},
          {"f=1,a=0.001", RhsKind::ones, 0.001},
          {"f=rand,a=0.001", RhsKind::random, 0.001}};
}

CompareOutput cmd_compare(const RunConfig &config, const std::vector<NamedProgram> &programs)
{
  config.check();
  const auto variants = compare_variants();
  std::vector<std::string> names{"V(2,1)", "V(3,2)", "V(3,3)"};
  for (const auto &p : programs)
  {
    names.push_back(p.name);
  }

  CompareOutput out;
  out.runs.assign(names.size(), std::vector<SolveResult>(variants.size()));
  for (std::size_t v = 0; v < variants.size(); ++v)
  {
    ProblemSpec spec = config.problem;
    spec.a = variants[v].a;
    spec.rhs = variants[v].rhs;
    const BenchSystem s = make_system(spec);
    const AmgHierarchy h = build_hierarchy(s.A, config.setup);
    std::vector<CycleProgram> rows{v_cycle(2, 1, h.depth(), config.flex_levels),
                                   v_cycle(3, 2, h.depth(), config.flex_levels),
                                   v_cycle(3, 3, h.depth(), config.flex_levels)};
    for (const auto &p : programs)
    {
      rows.push_back(bind_program(p.program, h, config.flex_levels,
                                  p.name + " (" + variants[v].label + ")"));
    }
    for (std::size_t r = 0; r < rows.size(); ++r)
    {
      out.runs[r][v] = run_program(h, rows[r], s, config.mode, config.tol, config.max_iter,
                             config.flexible_cg);
    }
  }

  const std::string grid = std::to_string(config.problem.nx) + "x" +
                           std::to_string(config.problem.ny) + "x" +
                           std::to_string(config.problem.nz);
  out.time_iters.title = "(solve time [s], iterations) on " + grid;
  out.work.title = "total work units on " + grid;
  out.time_iters.header.push_back("program");
  for (const auto &v : variants)
  {
    out.time_iters.header.push_back(v.label);
  }
  out.work.header = out.time_iters.header;
  for (std::size_t r = 0; r < names.size(); ++r)
  {
    std::vector<std::string> ti{names[r]};
    std::vector<std::string> wu{names[r]};
    for (std::size_t v = 0; v < variants.size(); ++v)
    {
      const SolveResult &res = out.runs[r][v];
      ti.push_back("(" + fmt("%.4f", res.wall_time) + " " + iters_cell(res) + ")");
      wu.push_back(fmt("%.2f", res.work_units));
    }
    out.time_iters.rows.push_back(std::move(ti));
    out.work.rows.push_back(std::move(wu));
  }
  return out;
}

ProblemSpec suite_problem(const ProblemSpec &base, std::size_t t)
{
  ProblemSpec spec = base;
  const double drift = 1.0 + 0.05 * static_cast<double>(t);
  spec.b = base.b * drift;
  spec.c = base.c * drift;
  return spec;
}

SuiteOutput cmd_precond_suite(const RunConfig &config, const std::vector<NamedProgram> &programs,
                              bool plain_cg)
{
  config.check();
  SuiteOutput out;
  out.columns = {"V(1,1)", "V(1,2)", "V(2,2)"};
  for (const auto &p : programs)
  {
    out.columns.push_back(p.name);
  }
  if (plain_cg)
  {
    out.columns.push_back("CG");
  }
  out.table.title = "(solve time [ms], CG iterations); time-step analog: b,c scaled by 1+0.05t";
  out.table.header.push_back("t");
  out.table.header.insert(out.table.header.end(), out.columns.begin(), out.columns.end());

  SolveOptions cg_options;
  cg_options.tol = config.tol;
  cg_options.max_iter = std::max<std::size_t>(config.max_iter, 10 * config.problem.nx);

  for (std::size_t t = 1; t <= config.suite_steps; ++t)
  {
    const BenchSystem s = make_system(suite_problem(config.problem, t));
    const AmgHierarchy h = build_hierarchy(s.A, config.setup);
    std::vector<CycleProgram> cols{v_cycle(1, 1, h.depth(), config.flex_levels),
                                   v_cycle(1, 2, h.depth(), config.flex_levels),
                                   v_cycle(2, 2, h.depth(), config.flex_levels)};
    for (const auto &p : programs)
    {
      cols.push_back(bind_program(p.program, h, config.flex_levels,
                                  p.name + " (t=" + std::to_string(t) + ")"));
    }
    std::vector<SolveResult> row;
    for (const auto &c : cols)
    {
      row.push_back(run_program(h, c, s, SolverMode::preconditioner, config.tol,
                                 config.max_iter, config.flexible_cg));
    }
    if (plain_cg)
    {
      Vector x = s.x0;
      row.push_back(pcg(h, nullptr, s.rhs, x, cg_options));
    }
    std::vector<std::string> cells{std::to_string(t)};
    for (const auto &r : row)
    {
      cells.push_back("(" + fmt("%.2f", 1e3 * r.wall_time) + " " + iters_cell(r) + ")");
    }
    out.table.rows.push_back(std::move(cells));
    out.runs.push_back(std::move(row));
  }
  return out;
}

std::string cmd_render(const NamedProgram &program)
{
  return to_dot(program.program);
}

SizesOutput cmd_sizes(const RunConfig &config, const std::vector<NamedProgram> &programs)
{
  config.check();
  SizesOutput out;
  out.table.title = "iterations and work units per grid";
  out.table.header = {"program", "grid", "levels", "iterations", "converged", "conv_factor",
                      "work_units"};
  for (std::size_t g : config.size_grids)
  {
    ProblemSpec spec = config.problem;
    spec.nx = spec.ny = spec.nz = g;
    const BenchSystem s = make_system(spec);
    const AmgHierarchy h = build_hierarchy(s.A, config.setup);
    std::vector<NamedProgram> rows{{"V(1,1)", v_cycle(1, 1, h.depth(), config.flex_levels)}};
    rows.insert(rows.end(), programs.begin(), programs.end());
    for (const auto &r : rows)
    {
      // A program may not fit a shallower hierarchy; that row is marked invalid.
      if (!validate(r.program, h.depth(), config.flex_levels).empty())
      {
        out.table.rows.push_back({r.name, std::to_string(g) + "^3", std::to_string(h.depth()),
                                  "-", "invalid", "-", "-"});
        out.runs.emplace_back();
        continue;
      }
      const SolveResult res =
          run_program(h, bind_program(r.program, h, config.flex_levels, r.name), s, config.mode, config.tol, config.max_iter,
                             config.flexible_cg);
      out.table.rows.push_back({r.name, std::to_string(g) + "^3", std::to_string(h.depth()),
                                std::to_string(res.iterations), res.converged ? "yes" : "no",
                                fmt("%.4f", res.conv_factor), fmt("%.2f", res.work_units)});
      out.runs.push_back(res);
    }
  }
  return out;
}

}  // namespace flexmg
