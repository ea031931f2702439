// Copyright The flexmg Authors.
// SPDX-License-Identifier: Apache-2.0

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "flexmg/bench.hpp"
#include "flexmg/config.hpp"
#include "flexmg/error.hpp"

namespace fs = std::filesystem;
using namespace flexmg;

namespace
{

struct Options
{
  std::string config_file;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  std::optional<std::string> fitness;
  std::optional<std::string> mode;
  std::optional<std::string> out;
  std::vector<std::string> overrides;
  std::vector<std::string> cycle_files;
  bool no_cg = false;
};

RunConfig resolve(const Options &opt)
{
  std::string text;
  if (!opt.config_file.empty())
  {
    std::ifstream in(opt.config_file);
    if (!in)
    {
      throw IoError("cannot open config file " + opt.config_file);
    }
    std::stringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  RunConfig config = parse_config(text);
  for (const auto &kv : opt.overrides)
  {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
    {
      throw ParseError("--set expects key=value, got '" + kv + "'", 0, 0);
    }
    set_config_value(config, kv.substr(0, eq), kv.substr(eq + 1));
  }
  std::optional<std::uint64_t> file_seed = config_seed(text);
  for (const auto &kv : opt.overrides)
  {
    if (kv.rfind("evo.seed=", 0) == 0)
    {
      file_seed = config.evo.master_seed;
    }
  }
  config.evo.master_seed = resolve_seed(opt.seed, file_seed, std::getenv("FLEXMG_SEED"));
  if (opt.workers)
  {
    config.evo.worker_count = *opt.workers;
  }
  if (opt.fitness)
  {
    config.evo.fitness_mode = fitness_mode_from_string(*opt.fitness);
  }
  if (opt.mode)
  {
    config.mode = solver_mode_from_string(*opt.mode);
  }
  if (opt.out)
  {
    config.out_dir = *opt.out;
  }
  config.check();
  return config;
}

std::vector<NamedProgram> load_programs(const std::vector<std::string> &files)
{
  std::vector<NamedProgram> out;
  for (const auto &f : files)
  {
    out.push_back(load_program(f));
  }
  return out;
}

void write_file(const fs::path &p, const std::string &text)
{
  fs::create_directories(p.parent_path().empty() ? fs::path(".") : p.parent_path());
  std::ofstream os(p);
  if (!os)
  {
    throw IoError("cannot write " + p.string());
  }
  os << text;
}

int run(const std::string &command, const Options &opt)
{
  const RunConfig config = resolve(opt);
  const fs::path out(config.out_dir);
  std::cout << "# resolved config\n" << config.resolved();

  if (command == "problem")
  {
    const ProblemOutput p = cmd_problem(config);
    std::cout << "wrote " << p.matrix_file << " (" << p.rows << " rows, " << p.nnz
              << " nonzeros) and " << p.spec_file << '\n';
    return exit_ok;
  }
  if (command == "optimize")
  {
    const EvolutionResult r = cmd_optimize(config, std::cout);
    std::cout << "wrote " << (out / "pareto.csv").string() << " with " << r.front.size()
              << " programs\n";
    return exit_ok;
  }
  if (command == "eval")
  {
    const auto programs = load_programs(opt.cycle_files);
    if (programs.empty())
    {
      throw InvalidArgument("eval needs at least one cycle file");
    }
    int code = exit_ok;
    for (const auto &p : programs)
    {
      const EvalOutput e = cmd_eval(config, p);
      const std::string json = e.to_json(config.mode);
      std::cout << json << '\n';
      write_file(out / ("eval_" + p.name + ".json"), json + "\n");
      if (!e.result.converged)
      {
        std::cerr << p.name << ": did not converge (iterations " << e.result.iterations
                  << (e.result.diverged ? ", diverged" : "") << ")\n";
        code = exit_numerical_failure;
      }
    }
    return code;
  }
  if (command == "compare")
  {
    const CompareOutput c = cmd_compare(config, load_programs(opt.cycle_files));
    std::cout << c.time_iters.to_text() << '\n' << c.work.to_text();
    write_file(out / "compare_time.csv", c.time_iters.to_csv());
    write_file(out / "compare_work.csv", c.work.to_csv());
    return exit_ok;
  }
  if (command == "precond-suite")
  {
    const SuiteOutput s = cmd_precond_suite(config, load_programs(opt.cycle_files), !opt.no_cg);
    std::cout << s.table.to_text();
    write_file(out / "precond_suite.csv", s.table.to_csv());
    return exit_ok;
  }
  if (command == "render")
  {
    const auto programs = load_programs(opt.cycle_files);
    if (programs.empty())
    {
      throw InvalidArgument("render needs at least one cycle file");
    }
    for (const auto &p : programs)
    {
      const fs::path dot = out / (p.name + ".dot");
      write_file(dot, cmd_render(p));
      std::cout << "wrote " << dot.string() << '\n';
    }
    return exit_ok;
  }
  if (command == "sizes")
  {
    const SizesOutput s = cmd_sizes(config, load_programs(opt.cycle_files));
    std::cout << s.table.to_text();
    write_file(out / "sizes.csv", s.table.to_csv());
    return exit_ok;
  }
  throw InvalidArgument("unknown command " + command);
}

}  // namespace

int main(int argc, char **argv)
{
  CLI::App app{"flexmg: flexible AMG cycle optimization and benchmarks"};
  app.require_subcommand(1);
  Options opt;

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"problem", "Write the test matrix (Matrix Market) and its JSON spec"},
      {"optimize", "Evolve flexible cycles; export the Pareto archive and stats"},
      {"eval", "Solve with stored cycle programs"},
      {"compare", "Reference V-cycles and programs over five problem variants"},
      {"precond-suite", "PCG over the drifting-coefficient time-step suite"},
      {"render", "Write Graphviz DOT renderings of cycle programs"},
      {"sizes", "Iterations and work units across grid sizes"},
  };
  for (const auto &[name, help] : commands)
  {
    CLI::App *sub = app.add_subcommand(name, help);
    sub->add_option("--config", opt.config_file, "Configuration file (key = value)");
    sub->add_option("--seed", opt.seed, "Master seed (fallback: FLEXMG_SEED)");
    sub->add_option("--workers", opt.workers, "Evaluation worker threads");
    sub->add_option("--fitness", opt.fitness, "Cost objective: work or time");
    sub->add_option("--mode", opt.mode, "solver or preconditioner");
    sub->add_option("--out", opt.out, "Output directory");
    sub->add_option("--set", opt.overrides, "Override a config key (key=value)");
    sub->add_option("cycles", opt.cycle_files, "Cycle program files");
    if (name == "precond-suite")
    {
      sub->add_flag("--no-cg", opt.no_cg, "Skip the unpreconditioned CG column");
    }
  }

  try
  {
    app.parse(argc, argv);
  }
  catch (const CLI::ParseError &e)
  {
    const int code = app.exit(e);
    return code == 0 ? exit_ok : exit_config_error;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try
  {
    return run(command, opt);
  }
  catch (const ParseError &e)
  {
    std::cerr << "flexmg " << command << ": parse error: " << e.what() << '\n';
    return exit_config_error;
  }
  catch (const InvalidArgument &e)
  {
    std::cerr << "flexmg " << command << ": " << e.what() << '\n';
    return exit_config_error;
  }
  catch (const IoError &e)
  {
    std::cerr << "flexmg " << command << ": " << e.what() << '\n';
    return exit_config_error;
  }
  catch (const std::exception &e)
  {
    std::cerr << "flexmg " << command << ": numerical failure: " << e.what() << '\n';
    return exit_numerical_failure;
  }
}
