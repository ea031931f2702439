// Copyright The flexmg Authors.
// SPDX-License-Identifier: Apache-2.0

#include "flexmg/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "flexmg/error.hpp"

namespace flexmg
{

std::string to_string(SolverMode mode)
{
  return mode == SolverMode::solver ? "solver" : "preconditioner";
}

std::string to_string(FitnessMode mode)
{
  return mode == FitnessMode::work_units ? "work" : "time";
}

SolverMode solver_mode_from_string(std::string_view text)
{
  if (text == "solver")
  {
    return SolverMode::solver;
  }
  if (text == "preconditioner" || text == "precond")
  {
    return SolverMode::preconditioner;
  }
  throw InvalidArgument("unknown mode '" + std::string(text) + "' (expected solver or preconditioner)");
}

FitnessMode fitness_mode_from_string(std::string_view text)
{
  if (text == "work" || text == "work_units")
  {
    return FitnessMode::work_units;
  }
  if (text == "time" || text == "wall_time")
  {
    return FitnessMode::wall_time;
  }
  throw InvalidArgument("unknown fitness '" + std::string(text) + "' (expected work or time)");
}

void RunConfig::check() const
{
  if (matrix_path.empty())
  {
    problem.check();
  }
  setup.check();
  evo.check();
  if (flex_levels < 1)
  {
    throw InvalidArgument("flex_levels must be >= 1");
  }
  if (!(tol > 0.0) || max_iter < 1)
  {
    throw InvalidArgument("solve.tol must be positive and solve.max_iter >= 1");
  }
  if (suite_steps < 1)
  {
    throw InvalidArgument("suite.steps must be >= 1");
  }
  if (size_grids.empty())
  {
    throw InvalidArgument("sizes.grids must not be empty");
  }
  for (std::size_t g : size_grids)
  {
    if (g < 2)
    {
      throw InvalidArgument("sizes.grids entries must be >= 2");
    }
  }
}

namespace
{

std::string fmt(double v)
{
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

template <typename T>
T parse_unsigned(std::string_view key, std::string_view v)
{
  T out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
  {
    throw InvalidArgument(std::string(key) + ": expected a non-negative integer, got '" +
                          std::string(v) + "'");
  }
  return out;
}

double parse_real(std::string_view key, std::string_view v)
{
  const std::string s(v);
  std::size_t used = 0;
  double out = 0.0;
  try
  {
    out = std::stod(s, &used);
  }
  catch (const std::exception &)
  {
    used = 0;
  }
  if (s.empty() || used != s.size())
  {
    throw InvalidArgument(std::string(key) + ": expected a number, got '" + s + "'");
  }
  return out;
}

std::vector<std::size_t> parse_list(std::string_view key, std::string_view v)
{
  std::vector<std::size_t> out;
  std::size_t start = 0;
  while (start <= v.size())
  {
    const std::size_t comma = std::min(v.find(',', start), v.size());
    std::string_view item = v.substr(start, comma - start);
    while (!item.empty() && item.front() == ' ')
    {
      item.remove_prefix(1);
    }
    while (!item.empty() && item.back() == ' ')
    {
      item.remove_suffix(1);
    }
    out.push_back(parse_unsigned<std::size_t>(key, item));
    start = comma + 1;
  }
  return out;
}

using Setter = std::function<void(RunConfig &, std::string_view, std::string_view)>;

const std::map<std::string, Setter, std::less<>> &setters()
{
  static const std::map<std::string, Setter, std::less<>> table = {
      {"problem.nx", [](RunConfig &c, auto k, auto v) { c.problem.nx = parse_unsigned<std::size_t>(k, v); }},
      {"problem.ny", [](RunConfig &c, auto k, auto v) { c.problem.ny = parse_unsigned<std::size_t>(k, v); }},
      {"problem.nz", [](RunConfig &c, auto k, auto v) { c.problem.nz = parse_unsigned<std::size_t>(k, v); }},
      {"problem.n",
       [](RunConfig &c, auto k, auto v) {
         c.problem.nx = c.problem.ny = c.problem.nz = parse_unsigned<std::size_t>(k, v);
       }},
      {"problem.a", [](RunConfig &c, auto k, auto v) { c.problem.a = parse_real(k, v); }},
      {"problem.b", [](RunConfig &c, auto k, auto v) { c.problem.b = parse_real(k, v); }},
      {"problem.c", [](RunConfig &c, auto k, auto v) { c.problem.c = parse_real(k, v); }},
      {"problem.rhs", [](RunConfig &c, auto, auto v) { c.problem.rhs = rhs_kind_from_string(std::string(v)); }},
      {"problem.rhs_seed", [](RunConfig &c, auto k, auto v) { c.problem.rhs_seed = parse_unsigned<std::uint64_t>(k, v); }},
      {"problem.matrix", [](RunConfig &c, auto, auto v) { c.matrix_path = std::string(v); }},
      {"setup.theta", [](RunConfig &c, auto k, auto v) { c.setup.strength_threshold = parse_real(k, v); }},
      {"setup.max_levels", [](RunConfig &c, auto k, auto v) { c.setup.max_levels = parse_unsigned<std::size_t>(k, v); }},
      {"setup.coarse_max_size", [](RunConfig &c, auto k, auto v) { c.setup.coarse_max_size = parse_unsigned<std::size_t>(k, v); }},
      {"setup.seed", [](RunConfig &c, auto k, auto v) { c.setup.coarsen_seed = parse_unsigned<std::uint64_t>(k, v); }},
      {"evo.mu", [](RunConfig &c, auto k, auto v) { c.evo.mu = parse_unsigned<std::size_t>(k, v); }},
      {"evo.lambda", [](RunConfig &c, auto k, auto v) { c.evo.lambda = parse_unsigned<std::size_t>(k, v); }},
      {"evo.generations", [](RunConfig &c, auto k, auto v) { c.evo.generations = parse_unsigned<std::size_t>(k, v); }},
      {"evo.initial_pop", [](RunConfig &c, auto k, auto v) { c.evo.initial_pop = parse_unsigned<std::size_t>(k, v); }},
      {"evo.batch_size", [](RunConfig &c, auto k, auto v) { c.evo.batch_size = parse_unsigned<std::size_t>(k, v); }},
      {"evo.crossover_prob", [](RunConfig &c, auto k, auto v) { c.evo.crossover_prob = parse_real(k, v); }},
      {"evo.mutation_prob", [](RunConfig &c, auto k, auto v) { c.evo.mutation_prob = parse_real(k, v); }},
      {"evo.seed", [](RunConfig &c, auto k, auto v) { c.evo.master_seed = parse_unsigned<std::uint64_t>(k, v); }},
      {"evo.fitness", [](RunConfig &c, auto, auto v) { c.evo.fitness_mode = fitness_mode_from_string(v); }},
      {"evo.workers", [](RunConfig &c, auto k, auto v) { c.evo.worker_count = parse_unsigned<std::size_t>(k, v); }},
      {"evo.max_steps", [](RunConfig &c, auto k, auto v) { c.evo.limits.max_steps = parse_unsigned<std::size_t>(k, v); }},
      {"evo.max_tree_depth", [](RunConfig &c, auto k, auto v) { c.evo.limits.max_tree_depth = parse_unsigned<std::size_t>(k, v); }},
      {"mode", [](RunConfig &c, auto, auto v) { c.mode = solver_mode_from_string(v); }},
      {"flex_levels", [](RunConfig &c, auto k, auto v) { c.flex_levels = parse_unsigned<std::size_t>(k, v); }},
      {"out", [](RunConfig &c, auto, auto v) { c.out_dir = std::string(v); }},
      {"solve.tol", [](RunConfig &c, auto k, auto v) { c.tol = parse_real(k, v); }},
      {"solve.flexible_cg",
       [](RunConfig &c, auto k, auto v) {
         if (v != "true" && v != "false")
         {
           throw InvalidArgument(std::string(k) + ": expected true or false");
         }
         c.flexible_cg = v == "true";
       }},
      {"solve.max_iter", [](RunConfig &c, auto k, auto v) { c.max_iter = parse_unsigned<std::size_t>(k, v); }},
      {"suite.steps", [](RunConfig &c, auto k, auto v) { c.suite_steps = parse_unsigned<std::size_t>(k, v); }},
      {"sizes.grids", [](RunConfig &c, auto k, auto v) { c.size_grids = parse_list(k, v); }},
  };
  return table;
}

std::string_view trim(std::string_view s)
{
  const auto ws = " \t\r";
  const std::size_t b = s.find_first_not_of(ws);
  if (b == std::string_view::npos)
  {
    return {};
  }
  return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

template <typename Fn>
void for_each_entry(std::string_view text, Fn &&fn)
{
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size())
  {
    const std::size_t end = std::min(text.find('\n', start), text.size());
    std::string_view line = text.substr(start, end - start);
    ++line_no;
    start = end + 1;
    if (const std::size_t hash = line.find('#'); hash != std::string_view::npos)
    {
      line = line.substr(0, hash);
    }
    if (trim(line).empty())
    {
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos)
    {
      throw ParseError("expected 'key = value'", line_no, line.find_first_not_of(" \t") + 1);
    }
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    fn(key, value, line_no, eq + 2);
  }
}

}  // namespace

void set_config_value(RunConfig &config, std::string_view key, std::string_view value)
{
  const auto &table = setters();
  const auto it = table.find(key);
  if (it == table.end())
  {
    throw ParseError("unknown key '" + std::string(key) + "'", 0, 0);
  }
  try
  {
    it->second(config, key, value);
  }
  catch (const InvalidArgument &e)
  {
    throw ParseError(e.what(), 0, 0);
  }
}

RunConfig parse_config(std::string_view text)
{
  RunConfig config;
  for_each_entry(text, [&](std::string_view key, std::string_view value, std::size_t line,
                           std::size_t column) {
    try
    {
      set_config_value(config, key, value);
    }
    catch (const ParseError &e)
    {
      // strip the "0:0: " prefix of the key-level error
      std::string msg = e.what();
      msg = msg.substr(msg.find(": ") + 2);
      throw ParseError(msg, line, column);
    }
  });
  return config;
}

RunConfig load_config(const std::string &path)
{
  std::ifstream in(path);
  if (!in)
  {
    throw IoError("cannot open config file " + path);
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::optional<std::uint64_t> config_seed(std::string_view text)
{
  std::optional<std::uint64_t> seed;
  for_each_entry(text, [&](std::string_view key, std::string_view value, std::size_t line,
                           std::size_t column) {
    if (key == "evo.seed")
    {
      try
      {
        seed = parse_unsigned<std::uint64_t>(key, value);
      }
      catch (const InvalidArgument &e)
      {
        throw ParseError(e.what(), line, column);
      }
    }
  });
  return seed;
}

std::uint64_t resolve_seed(std::optional<std::uint64_t> cli, std::optional<std::uint64_t> file,
                           const char *env_value)
{
  if (cli)
  {
    return *cli;
  }
  if (file)
  {
    return *file;
  }
  if (env_value != nullptr && *env_value != '\0')
  {
    return parse_unsigned<std::uint64_t>("FLEXMG_SEED", env_value);
  }
  return 0;
}

std::string RunConfig::resolved() const
{
  std::ostringstream os;
  os << "problem.nx = " << problem.nx << '\n'
     << "problem.ny = " << problem.ny << '\n'
     << "problem.nz = " << problem.nz << '\n'
     << "problem.a = " << fmt(problem.a) << '\n'
     << "problem.b = " << fmt(problem.b) << '\n'
     << "problem.c = " << fmt(problem.c) << '\n'
     << "problem.rhs = " << to_string(problem.rhs) << '\n'
     << "problem.rhs_seed = " << problem.rhs_seed << '\n';
  if (!matrix_path.empty())
  {
    os << "problem.matrix = " << matrix_path << '\n';
  }
  os << "setup.theta = " << fmt(setup.strength_threshold) << '\n'
     << "setup.max_levels = " << setup.max_levels << '\n'
     << "setup.coarse_max_size = " << setup.coarse_max_size << '\n'
     << "setup.seed = " << setup.coarsen_seed << '\n'
     << "evo.mu = " << evo.mu << '\n'
     << "evo.lambda = " << evo.lambda << '\n'
     << "evo.generations = " << evo.generations << '\n'
     << "evo.initial_pop = " << evo.initial_pop << '\n'
     << "evo.batch_size = " << evo.batch_size << '\n'
     << "evo.crossover_prob = " << fmt(evo.crossover_prob) << '\n'
     << "evo.mutation_prob = " << fmt(evo.mutation_prob) << '\n'
     << "evo.seed = " << evo.master_seed << '\n'
     << "evo.fitness = " << to_string(evo.fitness_mode) << '\n'
     << "evo.workers = " << evo.worker_count << '\n'
     << "evo.max_steps = " << evo.limits.max_steps << '\n'
     << "evo.max_tree_depth = " << evo.limits.max_tree_depth << '\n'
     << "mode = " << to_string(mode) << '\n'
     << "flex_levels = " << flex_levels << '\n'
     << "out = " << out_dir << '\n'
     << "solve.tol = " << fmt(tol) << '\n'
     << "solve.max_iter = " << max_iter << '\n'
     << "solve.flexible_cg = " << (flexible_cg ? "true" : "false") << '\n'
     << "suite.steps = " << suite_steps << '\n'
     << "sizes.grids = ";
  for (std::size_t i = 0; i < size_grids.size(); ++i)
  {
    os << (i ? "," : "") << size_grids[i];
  }
  os << '\n';
  return os.str();
}

}  // namespace flexmg
