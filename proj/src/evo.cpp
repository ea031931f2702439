// Copyright The flexmg Authors.
// SPDX-License-Identifier: Apache-2.0

#include "flexmg/evo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "flexmg/error.hpp"

namespace flexmg
{

void EvoConfig::check() const
{
  if (mu < 2 || lambda < 2)
  {
    throw InvalidArgument("evo: mu and lambda must be >= 2");
  }
  if (initial_pop < 1 || batch_size < 1 || worker_count < 1)
  {
    throw InvalidArgument("evo: initial_pop, batch_size and worker_count must be >= 1");
  }
  if (crossover_prob < 0.0 || mutation_prob < 0.0 || crossover_prob + mutation_prob > 1.0)
  {
    throw InvalidArgument("evo: variation probabilities must lie in [0,1] and sum to <= 1");
  }
}

Individual make_individual(DerivationNode genotype, const Grammar &grammar,
                           std::size_t generation)
{
  Individual ind;
  ind.program = decode(genotype, grammar);
  ind.dsl = emit_dsl(ind.program);
  ind.genotype = std::move(genotype);
  ind.generation = generation;
  return ind;
}

bool dominates(const FitnessPair &a, const FitnessPair &b)
{
  return a.cost_per_iter <= b.cost_per_iter && a.conv_factor <= b.conv_factor &&
         (a.cost_per_iter < b.cost_per_iter || a.conv_factor < b.conv_factor);
}

std::vector<std::vector<std::size_t>> nondominated_fronts(const std::vector<FitnessPair> &fits)
{
  const std::size_t n = fits.size();
  std::vector<std::vector<std::size_t>> dominated_by(n);
  std::vector<std::size_t> count(n, 0);
  std::vector<std::vector<std::size_t>> fronts;
  std::vector<std::size_t> current;
  for (std::size_t p = 0; p < n; ++p)
  {
    for (std::size_t q = 0; q < n; ++q)
    {
      if (dominates(fits[p], fits[q]))
      {
        dominated_by[p].push_back(q);
      }
      else if (dominates(fits[q], fits[p]))
      {
        ++count[p];
      }
    }
    if (count[p] == 0)
    {
      current.push_back(p);
    }
  }
  while (!current.empty())
  {
    std::vector<std::size_t> next;
    for (std::size_t p : current)
    {
      for (std::size_t q : dominated_by[p])
      {
        if (--count[q] == 0)
        {
          next.push_back(q);
        }
      }
    }
    std::sort(next.begin(), next.end());
    fronts.push_back(std::move(current));
    current = std::move(next);
  }
  return fronts;
}

std::vector<std::size_t> nsga2_rank(const std::vector<FitnessPair> &fits)
{
  std::vector<std::size_t> rank(fits.size(), 0);
  const auto fronts = nondominated_fronts(fits);
  for (std::size_t r = 0; r < fronts.size(); ++r)
  {
    for (std::size_t i : fronts[r])
    {
      rank[i] = r + 1;
    }
  }
  return rank;
}

namespace
{

double objective(const FitnessPair &f, int m) { return m == 0 ? f.cost_per_iter : f.conv_factor; }

}  // namespace

std::vector<double> crowding_distance(const std::vector<FitnessPair> &front)
{
  const std::size_t n = front.size();
  std::vector<double> dist(n, 0.0);
  if (n <= 2)
  {
    std::fill(dist.begin(), dist.end(), std::numeric_limits<double>::infinity());
    return dist;
  }
  std::vector<std::size_t> order(n);
  for (int m = 0; m < 2; ++m)
  {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return objective(front[a], m) < objective(front[b], m);
    });
    const double lo = objective(front[order.front()], m);
    const double hi = objective(front[order.back()], m);
    dist[order.front()] = std::numeric_limits<double>::infinity();
    dist[order.back()] = std::numeric_limits<double>::infinity();
    if (!(hi > lo))
    {
      continue;
    }
    for (std::size_t k = 1; k + 1 < n; ++k)
    {
      dist[order[k]] +=
          (objective(front[order[k + 1]], m) - objective(front[order[k - 1]], m)) / (hi - lo);
    }
  }
  return dist;
}

std::vector<std::size_t> nsga2_truncate(const std::vector<FitnessPair> &fits, std::size_t keep)
{
  std::vector<std::size_t> out;
  if (keep >= fits.size())
  {
    out.resize(fits.size());
    std::iota(out.begin(), out.end(), std::size_t{0});
    return out;
  }
  for (const auto &front : nondominated_fronts(fits))
  {
    if (out.size() + front.size() <= keep)
    {
      out.insert(out.end(), front.begin(), front.end());
      if (out.size() == keep)
      {
        break;
      }
      continue;
    }
    std::vector<FitnessPair> pts;
    for (std::size_t i : front)
    {
      pts.push_back(fits[i]);
    }
    const auto dist = crowding_distance(pts);
    // Rank 0 marks a point attaining the front minimum of some objective.
    std::vector<int> extreme(front.size(), 1);
    for (int m = 0; m < 2; ++m)
    {
      std::size_t best = 0;
      for (std::size_t k = 1; k < front.size(); ++k)
      {
        if (objective(pts[k], m) < objective(pts[best], m))
        {
          best = k;
        }
      }
      extreme[best] = 0;
    }
    std::vector<std::size_t> order(front.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (dist[a] != dist[b])
      {
        return dist[a] > dist[b];
      }
      return extreme[a] < extreme[b];
    });
    for (std::size_t k = 0; out.size() < keep; ++k)
    {
      out.push_back(front[order[k]]);
    }
    break;
  }
  return out;
}

void assign_rank_and_crowding(std::vector<Individual> &pop)
{
  std::vector<FitnessPair> fits;
  fits.reserve(pop.size());
  for (const auto &ind : pop)
  {
    fits.push_back(ind.fitness);
  }
  const auto fronts = nondominated_fronts(fits);
  for (std::size_t r = 0; r < fronts.size(); ++r)
  {
    std::vector<FitnessPair> pts;
    for (std::size_t i : fronts[r])
    {
      pts.push_back(fits[i]);
    }
    const auto dist = crowding_distance(pts);
    for (std::size_t k = 0; k < fronts[r].size(); ++k)
    {
      pop[fronts[r][k]].rank = r + 1;
      pop[fronts[r][k]].crowding = dist[k];
    }
  }
}

std::size_t select_parent(const std::vector<Individual> &pop, Rng &rng)
{
  const std::size_t a = uniform_below(rng, pop.size());
  if (pop.size() == 1)
  {
    return a;
  }
  std::size_t b = uniform_below(rng, pop.size() - 1);
  b += b >= a ? 1 : 0;
  if (pop[a].rank != pop[b].rank)
  {
    return pop[a].rank < pop[b].rank ? a : b;
  }
  if (pop[a].crowding != pop[b].crowding)
  {
    return pop[a].crowding > pop[b].crowding ? a : b;
  }
  return uniform_below(rng, 2) == 0 ? a : b;
}

std::uint8_t perturb_weight(std::uint8_t weight, int direction, const Grammar &grammar)
{
  const auto &w = grammar.weights();
  auto it = std::lower_bound(w.begin(), w.end(), weight);
  auto pos = static_cast<std::ptrdiff_t>(it - w.begin());
  if (it == w.end() || *it != weight)
  {
    // off the grammar's list: snap to the nearest listed weight
    pos = std::min<std::ptrdiff_t>(pos, static_cast<std::ptrdiff_t>(w.size()) - 1);
    return w[static_cast<std::size_t>(pos)];
  }
  pos = std::clamp<std::ptrdiff_t>(pos + direction, 0, static_cast<std::ptrdiff_t>(w.size()) - 1);
  return w[static_cast<std::size_t>(pos)];
}

namespace
{

using Path = std::vector<std::size_t>;

struct NodeRef
{
  Path path;
  const DerivationNode *node;
};

void collect(const DerivationNode &n, Path &path, std::vector<NodeRef> &out)
{
  out.push_back({path, &n});
  for (std::size_t i = 0; i < n.children.size(); ++i)
  {
    path.push_back(i);
    collect(n.children[i], path, out);
    path.pop_back();
  }
}

std::vector<NodeRef> all_nodes(const DerivationNode &root)
{
  std::vector<NodeRef> out;
  Path path;
  collect(root, path, out);
  return out;
}

DerivationNode &at(DerivationNode &root, const Path &path)
{
  DerivationNode *n = &root;
  for (std::size_t i : path)
  {
    n = &n->children[i];
  }
  return *n;
}

bool same_nonterminal(const DerivationNode &a, const DerivationNode &b)
{
  return a.symbol == b.symbol && a.level == b.level;
}

bool within(const DerivationNode &g, const GenerateLimits &limits)
{
  return g.depth() <= limits.max_tree_depth && g.step_count() <= limits.max_steps;
}

}  // namespace

std::pair<DerivationNode, DerivationNode> crossover(const DerivationNode &a,
                                                    const DerivationNode &b, Rng &rng,
                                                    const GenerateLimits &limits)
{
  if (a == b)
  {
    return {a, b};
  }
  auto nodes_a = all_nodes(a);
  auto nodes_b = all_nodes(b);
  nodes_a.erase(nodes_a.begin());  // roots are not exchanged
  nodes_b.erase(nodes_b.begin());

  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < nodes_a.size(); ++i)
  {
    const bool shared = std::any_of(nodes_b.begin(), nodes_b.end(), [&](const NodeRef &r) {
      return same_nonterminal(*nodes_a[i].node, *r.node);
    });
    if (shared)
    {
      candidates.push_back(i);
    }
  }
  if (candidates.empty())
  {
    return {a, b};
  }
  const NodeRef &ra = nodes_a[candidates[uniform_below(rng, candidates.size())]];
  std::vector<std::size_t> matches;
  for (std::size_t j = 0; j < nodes_b.size(); ++j)
  {
    if (same_nonterminal(*ra.node, *nodes_b[j].node))
    {
      matches.push_back(j);
    }
  }
  const NodeRef &rb = nodes_b[matches[uniform_below(rng, matches.size())]];

  DerivationNode child_a = a;
  DerivationNode child_b = b;
  at(child_a, ra.path) = *rb.node;
  at(child_b, rb.path) = *ra.node;
  if (!within(child_a, limits))
  {
    child_a = a;
  }
  if (!within(child_b, limits))
  {
    child_b = b;
  }
  return {std::move(child_a), std::move(child_b)};
}

DerivationNode mutate(const DerivationNode &g, const Grammar &grammar, Rng &rng,
                      const GenerateLimits &limits)
{
  const auto nodes = all_nodes(g);
  std::vector<std::size_t> terminals;
  for (std::size_t i = 0; i < nodes.size(); ++i)
  {
    const Production p = nodes[i].node->production;
    if (p == Production::smooth || p == Production::descend || p == Production::base_v)
    {
      terminals.push_back(i);
    }
  }

  DerivationNode out = g;
  const bool perturb = uniform_below(rng, 2) == 0;
  if (perturb && !terminals.empty())
  {
    const NodeRef &ref = nodes[terminals[uniform_below(rng, terminals.size())]];
    DerivationNode &n = at(out, ref.path);
    if (n.production == Production::smooth && uniform_below(rng, 2) == 0)
    {
      n.kind = grammar.kinds()[uniform_below(rng, grammar.kinds().size())];
    }
    else
    {
      n.weight = perturb_weight(n.weight, uniform_below(rng, 2) == 0 ? -1 : 1, grammar);
    }
    return out;
  }

  const NodeRef &ref = nodes[uniform_below(rng, nodes.size())];
  const std::size_t depth_used = ref.path.size();
  if (depth_used >= limits.max_tree_depth)
  {
    return out;
  }
  const std::size_t other_steps = g.step_count() - ref.node->step_count();
  if (other_steps > limits.max_steps)
  {
    return out;
  }
  DerivationNode fresh;
  const bool full = uniform_below(rng, 2) == 0;
  if (grow_subtree(grammar, ref.node->symbol, ref.node->level, rng,
                   limits.max_tree_depth - depth_used, limits.max_steps - other_steps, full,
                   fresh))
  {
    at(out, ref.path) = std::move(fresh);
  }
  return out;
}

std::vector<Individual> init_population(const Grammar &grammar, std::size_t n,
                                        std::uint64_t seed, const GenerateLimits &limits,
                                        std::size_t *duplicates)
{
  Rng rng = make_stream(seed, "init");
  std::vector<Individual> pop;
  pop.reserve(n);
  std::set<std::string> seen;
  std::size_t dup = 0;
  for (std::size_t i = 0; i < n; ++i)
  {
    pop.push_back(make_individual(generate_tree(grammar, rng, limits), grammar, 0));
    if (!seen.insert(pop.back().dsl).second)
    {
      ++dup;
    }
  }
  if (duplicates != nullptr)
  {
    *duplicates = dup;
  }
  return pop;
}

FitnessEvaluator::FitnessEvaluator(const AmgHierarchy &h, FitnessProblem problem,
                                   std::size_t batch_size, std::size_t worker_count)
  : h_(h), problem_(std::move(problem)), batch_size_(std::max<std::size_t>(batch_size, 1)),
    worker_count_(std::max<std::size_t>(worker_count, 1))
{
}

FitnessPair FitnessEvaluator::evaluate_one(const CycleProgram &program) const
{
  return evaluate_fitness(h_, program, problem_.rhs, problem_.initial_guess, problem_.options);
}

void FitnessEvaluator::evaluate(std::vector<Individual> &individuals)
{
  // Unique programs still missing from the memo, in first-seen order.
  std::vector<const Individual *> todo;
  std::set<std::string> queued;
  for (const auto &ind : individuals)
  {
    if (ind.evaluated || memo_.count(ind.dsl) || !queued.insert(ind.dsl).second)
    {
      continue;
    }
    todo.push_back(&ind);
  }

  std::vector<FitnessPair> results(todo.size());
  const std::size_t nbatches = (todo.size() + batch_size_ - 1) / batch_size_;
  std::atomic<std::size_t> next_batch{0};
  auto worker = [&]() {
    for (std::size_t b = next_batch++; b < nbatches; b = next_batch++)
    {
      const std::size_t lo = b * batch_size_;
      const std::size_t hi = std::min(todo.size(), lo + batch_size_);
      for (std::size_t i = lo; i < hi; ++i)
      {
        results[i] = evaluate_one(todo[i]->program);
      }
    }
  };
  const std::size_t nthreads = std::min(worker_count_, nbatches);
  if (nthreads <= 1)
  {
    worker();
  }
  else
  {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < nthreads; ++t)
    {
      pool.emplace_back(worker);
    }
    for (auto &th : pool)
    {
      th.join();
    }
  }
  batches_ += nbatches;
  evaluations_ += todo.size();

  for (std::size_t i = 0; i < todo.size(); ++i)
  {
    memo_.emplace(todo[i]->dsl, results[i]);
  }
  for (auto &ind : individuals)
  {
    if (ind.evaluated)
    {
      continue;
    }
    if (!queued.count(ind.dsl))
    {
      ++cache_hits_;
    }
    ind.fitness = memo_.at(ind.dsl);
    ind.evaluated = true;
  }
}

bool ParetoFront::insert(const ArchiveEntry &entry)
{
  if (entry.fitness.penalty)
  {
    return false;
  }
  for (const auto &e : entries_)
  {
    if (e.dsl == entry.dsl || dominates(e.fitness, entry.fitness) || e.fitness == entry.fitness)
    {
      return false;
    }
  }
  std::erase_if(entries_,
                [&](const ArchiveEntry &e) { return dominates(entry.fitness, e.fitness); });
  entries_.push_back(entry);
  return true;
}

std::vector<ArchiveEntry> ParetoFront::sorted() const
{
  auto out = entries_;
  std::sort(out.begin(), out.end(), [](const ArchiveEntry &a, const ArchiveEntry &b) {
    return std::tie(a.fitness.cost_per_iter, a.fitness.conv_factor, a.dsl) <
           std::tie(b.fitness.cost_per_iter, b.fitness.conv_factor, b.dsl);
  });
  return out;
}

namespace
{

GenerationStats population_stats(const std::vector<Individual> &pop, std::size_t generation,
                                 std::size_t archive_size)
{
  GenerationStats s;
  s.generation = generation;
  s.min_cost_per_iter = std::numeric_limits<double>::infinity();
  s.min_conv_factor = std::numeric_limits<double>::infinity();
  for (const auto &ind : pop)
  {
    s.min_cost_per_iter = std::min(s.min_cost_per_iter, ind.fitness.cost_per_iter);
    s.min_conv_factor = std::min(s.min_conv_factor, ind.fitness.conv_factor);
  }
  s.archive_size = archive_size;
  return s;
}

std::vector<Individual> survivors(std::vector<Individual> pool, std::size_t keep)
{
  std::vector<FitnessPair> fits;
  fits.reserve(pool.size());
  for (const auto &ind : pool)
  {
    fits.push_back(ind.fitness);
  }
  std::vector<Individual> out;
  for (std::size_t i : nsga2_truncate(fits, keep))
  {
    out.push_back(std::move(pool[i]));
  }
  assign_rank_and_crowding(out);
  return out;
}

}  // namespace

EvolutionResult evolve(const Grammar &grammar, const AmgHierarchy &h, FitnessProblem problem,
                       const EvoConfig &config, const ProgressCallback &progress)
{
  config.check();
  EvolutionResult result;
  FitnessEvaluator evaluator(h, std::move(problem), config.batch_size, config.worker_count);
  Rng selection = make_stream(config.master_seed, "selection");
  Rng variation = make_stream(config.master_seed, "variation");

  auto archive = [&](const std::vector<Individual> &inds) {
    for (const auto &ind : inds)
    {
      result.front.insert({ind.dsl, ind.fitness, ind.generation});
    }
  };
  auto record = [&](const std::vector<Individual> &pop, std::size_t gen) {
    result.stats.push_back(population_stats(pop, gen, result.front.size()));
    if (progress)
    {
      progress(result.stats.back());
    }
  };

  std::vector<Individual> pop = init_population(grammar, config.initial_pop, config.master_seed,
                                                config.limits, &result.initial_duplicates);
  evaluator.evaluate(pop);
  archive(pop);
  pop = survivors(std::move(pop), config.mu);
  record(pop, 0);

  for (std::size_t gen = 1; gen <= config.generations; ++gen)
  {
    std::vector<Individual> offspring;
    offspring.reserve(config.lambda + 1);
    while (offspring.size() < config.lambda)
    {
      const Individual &p1 = pop[select_parent(pop, selection)];
      const double u = uniform01(variation);
      if (u < config.crossover_prob)
      {
        const Individual &p2 = pop[select_parent(pop, selection)];
        auto [c1, c2] = crossover(p1.genotype, p2.genotype, variation, config.limits);
        offspring.push_back(make_individual(std::move(c1), grammar, gen));
        if (offspring.size() < config.lambda)
        {
          offspring.push_back(make_individual(std::move(c2), grammar, gen));
        }
      }
      else if (u < config.crossover_prob + config.mutation_prob)
      {
        offspring.push_back(
            make_individual(mutate(p1.genotype, grammar, variation, config.limits), grammar, gen));
      }
      else
      {
        Individual copy = p1;
        copy.generation = gen;
        offspring.push_back(std::move(copy));
      }
    }
    evaluator.evaluate(offspring);
    archive(offspring);
    pop.insert(pop.end(), std::make_move_iterator(offspring.begin()),
               std::make_move_iterator(offspring.end()));
    pop = survivors(std::move(pop), config.mu);
    record(pop, gen);
  }

  result.population = std::move(pop);
  result.evaluations = evaluator.evaluations();
  result.cache_hits = evaluator.cache_hits();
  return result;
}

namespace
{

std::string fmt_double(double v)
{
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv(const std::string &line, std::size_t fields)
{
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t k = 0; k + 1 < fields; ++k)
  {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos)
    {
      throw ParseError("csv: expected " + std::to_string(fields) + " fields in '" + line + "'", 0, 0);
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  out.push_back(line.substr(start));
  return out;
}

std::size_t to_count(const std::string &s)
{
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
  {
    throw ParseError("csv: malformed count '" + s + "'", 0, 0);
  }
  return static_cast<std::size_t>(std::stoull(s));
}

double to_double(const std::string &s)
{
  std::size_t used = 0;
  double v = 0.0;
  try
  {
    v = std::stod(s, &used);
  }
  catch (const std::exception &)
  {
    used = 0;
  }
  if (used == 0 || used != s.size())
  {
    throw ParseError("csv: malformed number '" + s + "'", 0, 0);
  }
  return v;
}

}  // namespace

void write_front_csv(std::ostream &os, const ParetoFront &front)
{
  os << "cost_per_iter,conv_factor,generation,dsl\n";
  for (const auto &e : front.sorted())
  {
    os << fmt_double(e.fitness.cost_per_iter) << ',' << fmt_double(e.fitness.conv_factor) << ','
       << e.generation << ',' << e.dsl << '\n';
  }
}

ParetoFront read_front_csv(std::istream &is)
{
  std::string line;
  if (!std::getline(is, line) || line != "cost_per_iter,conv_factor,generation,dsl")
  {
    throw ParseError("pareto csv: unexpected header", 1, 1);
  }
  ParetoFront front;
  while (std::getline(is, line))
  {
    if (line.empty())
    {
      continue;
    }
    const auto f = split_csv(line, 4);
    ArchiveEntry e;
    e.fitness = {to_double(f[0]), to_double(f[1]), false};
    e.generation = to_count(f[2]);
    e.dsl = emit_dsl(parse_dsl(f[3]));
    if (!front.insert(e))
    {
      throw ParseError("pareto csv: entry '" + e.dsl + "' is dominated or duplicated", 0, 0);
    }
  }
  return front;
}

void export_front(const ParetoFront &front, const std::string &dir)
{
  namespace fs = std::filesystem;
  if (front.empty())
  {
    throw InvalidArgument("export_front: archive is empty");
  }
  fs::create_directories(fs::path(dir) / "cycles");
  {
    std::ofstream os(fs::path(dir) / "pareto.csv");
    if (!os)
    {
      throw IoError("cannot write " + (fs::path(dir) / "pareto.csv").string());
    }
    write_front_csv(os, front);
  }
  const auto entries = front.sorted();
  for (std::size_t i = 0; i < entries.size(); ++i)
  {
    char name[32];
    std::snprintf(name, sizeof(name), "front_%03zu.cycle", i);
    std::ofstream os(fs::path(dir) / "cycles" / name);
    if (!os)
    {
      throw IoError(std::string("cannot write cycle file ") + name);
    }
    os << "# cost_per_iter=" << fmt_double(entries[i].fitness.cost_per_iter)
       << " conv_factor=" << fmt_double(entries[i].fitness.conv_factor)
       << " generation=" << entries[i].generation << '\n';
    os << entries[i].dsl << '\n';
  }
}

void write_stats_csv(std::ostream &os, const std::vector<GenerationStats> &stats)
{
  os << "generation,min_cost_per_iter,min_conv_factor,archive_size\n";
  for (const auto &s : stats)
  {
    os << s.generation << ',' << fmt_double(s.min_cost_per_iter) << ','
       << fmt_double(s.min_conv_factor) << ',' << s.archive_size << '\n';
  }
}

std::vector<GenerationStats> read_stats_csv(std::istream &is)
{
  std::string line;
  if (!std::getline(is, line) ||
      line != "generation,min_cost_per_iter,min_conv_factor,archive_size")
  {
    throw ParseError("stats csv: unexpected header", 1, 1);
  }
  std::vector<GenerationStats> out;
  while (std::getline(is, line))
  {
    if (line.empty())
    {
      continue;
    }
    const auto f = split_csv(line, 4);
    out.push_back({to_count(f[0]), to_double(f[1]),
                   to_double(f[2]), to_count(f[3])});
  }
  return out;
}

}  // namespace flexmg
