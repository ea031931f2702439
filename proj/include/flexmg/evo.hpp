// Copyright The flexmg Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef FLEXMG_EVO_HPP
#define FLEXMG_EVO_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include "flexmg/grammar.hpp"
#include "flexmg/rng.hpp"
#include "flexmg/setup.hpp"
#include "flexmg/solver.hpp"

namespace flexmg
{

struct EvoConfig
{
  std::size_t mu = 256;
  std::size_t lambda = 256;
  std::size_t generations = 100;
  std::size_t initial_pop = 2048;
  std::size_t batch_size = 64;
  double crossover_prob = 0.7;
  double mutation_prob = 0.3;
  std::uint64_t master_seed = 0;
  FitnessMode fitness_mode = FitnessMode::work_units;
  std::size_t worker_count = 1;
  GenerateLimits limits;

  void check() const;
};

struct Individual
{
  DerivationNode genotype;
  CycleProgram program;
  std::string dsl;
  FitnessPair fitness;
  bool evaluated = false;
  std::size_t rank = 0;
  double crowding = 0.0;
  std::size_t generation = 0;
};

Individual make_individual(DerivationNode genotype, const Grammar &grammar,
                           std::size_t generation);

// Minimization in both objectives.
bool dominates(const FitnessPair &a, const FitnessPair &b);

// Fast non-dominated sorting. Returns fronts of indices; front 0 holds rank 1.
std::vector<std::vector<std::size_t>> nondominated_fronts(const std::vector<FitnessPair> &fits);

// 1-based NSGA-II rank of every point.
std::vector<std::size_t> nsga2_rank(const std::vector<FitnessPair> &fits);

// Crowding distance of the points of one front: per objective the extreme
// points get +inf, interior points accumulate the neighbor gap normalized by
// the objective range.
std::vector<double> crowding_distance(const std::vector<FitnessPair> &front);

// Indices of the `keep` survivors: whole fronts in rank order, the last one
// cut by descending crowding distance. Ties among infinite distances favor the
// per-objective minima, so both minima always survive when keep >= 2.
std::vector<std::size_t> nsga2_truncate(const std::vector<FitnessPair> &fits, std::size_t keep);

// Fills rank and crowding of every individual.
void assign_rank_and_crowding(std::vector<Individual> &pop);

// Binary tournament between two distinct members: lower rank wins, then
// larger crowding, then a fair coin.
std::size_t select_parent(const std::vector<Individual> &pop, Rng &rng);

// Weight index moved one step (direction -1 or +1) along the grammar's
// weight list, clamped at the ends.
std::uint8_t perturb_weight(std::uint8_t weight, int direction, const Grammar &grammar);

// Subtree crossover at a shared nonterminal (same symbol and level). Identical
// parents, parents without a shared nonterminal below the root, and offspring
// beyond the depth or step limits come back as copies of their parents.
std::pair<DerivationNode, DerivationNode> crossover(const DerivationNode &a,
                                                    const DerivationNode &b, Rng &rng,
                                                    const GenerateLimits &limits = {});

// Either regrows a random subtree within the remaining budgets or perturbs a
// terminal (smoother kind resampled, or a weight moved one grid step).
DerivationNode mutate(const DerivationNode &g, const Grammar &grammar, Rng &rng,
                      const GenerateLimits &limits = {});

// n individuals by ramped half-and-half from the "init" stream of seed.
std::vector<Individual> init_population(const Grammar &grammar, std::size_t n,
                                        std::uint64_t seed, const GenerateLimits &limits = {},
                                        std::size_t *duplicates = nullptr);

// The system a fitness evaluation solves: right-hand side, initial guess and
// the capped-iteration solve settings.
struct FitnessProblem
{
  Vector rhs;
  Vector initial_guess;
  FitnessOptions options;
};

//
// Batched, memoized fitness evaluation over one fixed hierarchy. Programs are
// keyed by canonical DSL text; batches of batch_size are dispatched to
// worker_count threads and gathered before returning.
//
class FitnessEvaluator
{
public:
  FitnessEvaluator(const AmgHierarchy &h, FitnessProblem problem, std::size_t batch_size,
                   std::size_t worker_count);

  // Evaluates every individual without a fitness.
  void evaluate(std::vector<Individual> &individuals);

  FitnessPair evaluate_one(const CycleProgram &program) const;

  std::size_t evaluations() const { return evaluations_; }
  std::size_t cache_hits() const { return cache_hits_; }
  std::size_t batches() const { return batches_; }

private:
  const AmgHierarchy &h_;
  FitnessProblem problem_;
  std::size_t batch_size_;
  std::size_t worker_count_;
  std::map<std::string, FitnessPair> memo_;
  std::size_t evaluations_ = 0;
  std::size_t cache_hits_ = 0;
  std::size_t batches_ = 0;
};

struct ArchiveEntry
{
  std::string dsl;
  FitnessPair fitness;
  std::size_t generation = 0;
};

// Pairwise non-dominated set of evaluated, non-penalized programs.
class ParetoFront
{
public:
  // Returns true if the entry was added. Dominated, penalized or duplicate
  // (same DSL) entries are rejected; entries the newcomer dominates leave.
  bool insert(const ArchiveEntry &entry);

  // Sorted by cost, then convergence factor, then DSL text.
  std::vector<ArchiveEntry> sorted() const;

  const std::vector<ArchiveEntry> &entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

private:
  std::vector<ArchiveEntry> entries_;
};

struct GenerationStats
{
  std::size_t generation = 0;
  double min_cost_per_iter = 0.0;
  double min_conv_factor = 0.0;
  std::size_t archive_size = 0;
};

struct EvolutionResult
{
  ParetoFront front;
  std::vector<GenerationStats> stats;
  std::vector<Individual> population;
  std::size_t evaluations = 0;
  std::size_t cache_hits = 0;
  std::size_t initial_duplicates = 0;
};

using ProgressCallback = std::function<void(const GenerationStats &)>;

// (mu + lambda) grammar-guided GP with NSGA-II survival and a global archive.
EvolutionResult evolve(const Grammar &grammar, const AmgHierarchy &h, FitnessProblem problem,
                       const EvoConfig &config, const ProgressCallback &progress = {});

// CSV "cost_per_iter,conv_factor,generation,dsl" sorted by the first objective.
void write_front_csv(std::ostream &os, const ParetoFront &front);
ParetoFront read_front_csv(std::istream &is);

// Writes <dir>/pareto.csv and one <dir>/cycles/front_NNN.cycle per member.
void export_front(const ParetoFront &front, const std::string &dir);

// CSV "generation,min_cost_per_iter,min_conv_factor,archive_size".
void write_stats_csv(std::ostream &os, const std::vector<GenerationStats> &stats);
std::vector<GenerationStats> read_stats_csv(std::istream &is);

}  // namespace flexmg

#endif  // FLEXMG_EVO_HPP
