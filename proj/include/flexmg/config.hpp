// Copyright The flexmg Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef FLEXMG_CONFIG_HPP
#define FLEXMG_CONFIG_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "flexmg/evo.hpp"
#include "flexmg/problem.hpp"
#include "flexmg/setup.hpp"
#include "flexmg/solver.hpp"

namespace flexmg
{

//
// Everything one bench command needs. Text form is flat `key = value` lines
// with `#` comments and dotted section prefixes:
//
//   problem.nx ny nz a b c rhs rhs_seed matrix
//   setup.theta max_levels coarse_max_size seed
//   evo.mu lambda generations initial_pop batch_size crossover_prob
//      mutation_prob seed fitness workers
//   solve.tol max_iter flexible_cg
//   suite.steps        sizes.grids (comma separated)
//   mode flex_levels out
//
struct RunConfig
{
  ProblemSpec problem;
  std::string matrix_path;  // overrides the generated problem when set
  SetupParams setup;
  EvoConfig evo;
  SolverMode mode = SolverMode::solver;
  std::size_t flex_levels = default_flex_levels;
  std::string out_dir = "flexmg-out";
  double tol = 1e-8;
  std::size_t max_iter = 100;
  bool flexible_cg = false;
  std::size_t suite_steps = 10;
  std::vector<std::size_t> size_grids{16, 32, 48, 64};

  // Throws InvalidArgument on inconsistent settings.
  void check() const;

  // Every key with its effective value; parse_config of this text yields an
  // equal configuration.
  std::string resolved() const;
};

// Sets one key from its text value. Unknown keys and malformed values throw
// ParseError (line and column 0 when not parsing a file).
void set_config_value(RunConfig &config, std::string_view key, std::string_view value);

RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::string &path);

// Seed precedence: explicit command-line value, then a seed set in the
// configuration file, then the FLEXMG_SEED environment variable, then 0.
std::uint64_t resolve_seed(std::optional<std::uint64_t> cli, std::optional<std::uint64_t> file,
                           const char *env_value);

// True when the text sets evo.seed.
std::optional<std::uint64_t> config_seed(std::string_view text);

std::string to_string(SolverMode mode);
std::string to_string(FitnessMode mode);
SolverMode solver_mode_from_string(std::string_view text);
FitnessMode fitness_mode_from_string(std::string_view text);

}  // namespace flexmg

#endif  // FLEXMG_CONFIG_HPP
