// Copyright The flexmg Authors.
// SPDX-License-Identifier: Apache-2.0

#include "flexmg/grammar.hpp"

#include <algorithm>

#include "flexmg/error.hpp"

namespace flexmg
{

Grammar::Grammar(std::size_t hierarchy_depth, std::size_t flex_levels,
                 std::vector<SmootherKind> kinds, std::vector<std::uint8_t> weights)
  : hierarchy_depth_(hierarchy_depth), flex_levels_(flex_levels),
    levels_(std::min(hierarchy_depth, flex_levels)), kinds_(std::move(kinds)),
    weights_(std::move(weights))
{
  if (hierarchy_depth == 0 || flex_levels == 0)
  {
    throw InvalidArgument("grammar: hierarchy depth and flex levels must be >= 1");
  }
  if (kinds_.empty() || weights_.empty())
  {
    throw InvalidArgument("grammar: terminal sets must not be empty");
  }
  for (std::uint8_t w : weights_)
  {
    if (w >= WeightGrid::size)
    {
      throw InvalidArgument("grammar: weight index off the grid");
    }
  }
  std::sort(weights_.begin(), weights_.end());

  const bool deep = hierarchy_depth > flex_levels;
  step_productions_.resize(levels_);
  for (std::size_t l = 0; l < levels_; ++l)
  {
    auto &prods = step_productions_[l];
    prods = {Production::smooth, Production::noop};
    if (l + 1 < levels_)
    {
      prods.push_back(Production::descend);
    }
    if (deep && l == flex_levels - 1)
    {
      prods.push_back(Production::base_v);
    }
    if (!deep && l == hierarchy_depth - 1)
    {
      prods.push_back(Production::coarse_solve);
    }
  }
}

std::vector<std::uint8_t> Grammar::full_weight_grid()
{
  std::vector<std::uint8_t> w(WeightGrid::size);
  for (std::size_t i = 0; i < w.size(); ++i)
  {
    w[i] = static_cast<std::uint8_t>(i);
  }
  return w;
}

std::size_t DerivationNode::depth() const
{
  std::size_t d = 0;
  for (const auto &c : children)
  {
    d = std::max(d, c.depth());
  }
  return d + 1;
}

std::size_t DerivationNode::step_count() const
{
  std::size_t n = 0;
  switch (production)
  {
    case Production::smooth:
    case Production::noop:
    case Production::base_v:
    case Production::coarse_solve:
      n = 1;
      break;
    case Production::descend:
      n = 2;
      break;
    default:
      break;
  }
  for (const auto &c : children)
  {
    n += c.step_count();
  }
  return n;
}

namespace
{

DerivationNode make_node(Symbol symbol, std::size_t level, Production production)
{
  DerivationNode n;
  n.symbol = symbol;
  n.level = static_cast<std::uint8_t>(level);
  n.production = production;
  return n;
}

struct Deriver
{
  const Grammar &grammar;
  Rng &rng;
  std::size_t level_limit;
  bool full;

  template <typename T>
  T pick(const std::vector<T> &v)
  {
    return v[uniform_below(rng, v.size())];
  }

  static std::size_t min_steps(Production p) { return p == Production::descend ? 2 : 1; }
  static std::size_t min_depth(Production p) { return p == Production::descend ? 2 : 1; }

  std::vector<Production> feasible_steps(std::size_t level, std::size_t depth,
                                         std::size_t steps) const
  {
    std::vector<Production> out;
    for (Production p : grammar.step_productions(level))
    {
      if (p == Production::descend && level + 1 >= level_limit)
      {
        continue;
      }
      if (depth >= min_depth(p) && steps >= min_steps(p))
      {
        out.push_back(p);
      }
    }
    return out;
  }

  DerivationNode step(std::size_t level, std::size_t depth, std::size_t &steps)
  {
    const auto options = feasible_steps(level, depth, steps);
    DerivationNode node = make_node(Symbol::step, level, pick(options));
    switch (node.production)
    {
      case Production::smooth:
        node.kind = pick(grammar.kinds());
        node.weight = pick(grammar.weights());
        steps -= 1;
        break;
      case Production::descend:
        node.weight = pick(grammar.weights());
        steps -= 2;
        node.children.push_back(seq(level + 1, depth - 1, steps));
        break;
      case Production::base_v:
        node.weight = pick(grammar.weights());
        steps -= 1;
        break;
      default:
        steps -= 1;
        break;
    }
    return node;
  }

  DerivationNode seq(std::size_t level, std::size_t depth, std::size_t &steps)
  {
    DerivationNode node = make_node(Symbol::seq, level, Production::seq_empty);
    const bool can_extend = depth >= 2 && steps >= 1;
    const bool extend = can_extend && (full || uniform_below(rng, 2) == 0);
    if (extend)
    {
      node.production = Production::seq_extend;
      node.children.push_back(step(level, depth - 1, steps));
      node.children.push_back(seq(level, depth - 1, steps));
    }
    return node;
  }

  DerivationNode cycle(std::size_t depth, std::size_t &steps)
  {
    DerivationNode node = make_node(Symbol::cycle, 0, Production::cycle);
    node.children.push_back(step(0, depth - 1, steps));
    node.children.push_back(seq(0, depth - 1, steps));
    return node;
  }
};

void decode_into(const DerivationNode &node, std::vector<Step> &out)
{
  switch (node.production)
  {
    case Production::cycle:
    case Production::seq_extend:
    case Production::seq_empty:
      for (const auto &c : node.children)
      {
        decode_into(c, out);
      }
      break;
    case Production::smooth:
      out.push_back(Step::smooth(node.kind, node.weight));
      break;
    case Production::noop:
      out.push_back(Step::noop());
      break;
    case Production::base_v:
      out.push_back(Step::base_v(node.weight));
      break;
    case Production::coarse_solve:
      out.push_back(Step::coarse_solve());
      break;
    case Production::descend:
      out.push_back(Step::descend());
      decode_into(node.children.at(0), out);
      out.push_back(Step::ascend(node.weight));
      break;
  }
}

std::size_t effective_levels(const Grammar &grammar, std::size_t max_levels)
{
  return max_levels == 0 ? grammar.levels() : std::min(grammar.levels(), max_levels);
}

}  // namespace

bool grow_subtree(const Grammar &grammar, Symbol symbol, std::size_t level, Rng &rng,
                  std::size_t depth_budget, std::size_t step_budget, bool full,
                  DerivationNode &out)
{
  Deriver d{grammar, rng, grammar.levels(), full};
  switch (symbol)
  {
    case Symbol::cycle:
      if (depth_budget < 2 || step_budget < 1)
      {
        return false;
      }
      out = d.cycle(depth_budget, step_budget);
      return true;
    case Symbol::seq:
      if (depth_budget < 1)
      {
        return false;
      }
      out = d.seq(level, depth_budget, step_budget);
      return true;
    case Symbol::step:
      if (d.feasible_steps(level, depth_budget, step_budget).empty())
      {
        return false;
      }
      out = d.step(level, depth_budget, step_budget);
      return true;
  }
  return false;
}

DerivationNode generate_tree(const Grammar &grammar, Rng &rng, const GenerateLimits &limits)
{
  if (limits.max_steps == 0 || limits.max_tree_depth < 2)
  {
    throw InvalidArgument("generate: limits must allow at least one step and depth 2");
  }
  if (limits.max_levels > grammar.flex_levels())
  {
    throw InvalidArgument("generate: max_levels exceeds the flexible region");
  }
  const std::size_t lo = std::clamp<std::size_t>(limits.min_tree_depth, 2, limits.max_tree_depth);
  const std::size_t depth = lo + uniform_below(rng, limits.max_tree_depth - lo + 1);
  const bool full = uniform_below(rng, 2) == 0;
  Deriver d{grammar, rng, effective_levels(grammar, limits.max_levels), full};
  std::size_t steps = limits.max_steps;
  return d.cycle(depth, steps);
}

CycleProgram decode(const DerivationNode &tree, const Grammar &grammar)
{
  CycleProgram p;
  p.flex_levels = grammar.flex_levels();
  p.hierarchy_depth = grammar.hierarchy_depth();
  decode_into(tree, p.steps);
  return p;
}

CycleProgram generate(const Grammar &grammar, Rng &rng, const GenerateLimits &limits)
{
  return decode(generate_tree(grammar, rng, limits), grammar);
}

namespace
{

using StepList = std::vector<Step>;

// All step lists derivable from Seq_level or Step_level with at most budget steps.
struct Expander
{
  const Grammar &grammar;

  std::vector<StepList> step(std::size_t level, std::size_t budget) const
  {
    std::vector<StepList> out;
    if (budget == 0)
    {
      return out;
    }
    for (Production p : grammar.step_productions(level))
    {
      switch (p)
      {
        case Production::smooth:
          for (SmootherKind k : grammar.kinds())
          {
            for (std::uint8_t w : grammar.weights())
            {
              out.push_back({Step::smooth(k, w)});
            }
          }
          break;
        case Production::noop:
          out.push_back({Step::noop()});
          break;
        case Production::coarse_solve:
          out.push_back({Step::coarse_solve()});
          break;
        case Production::base_v:
          for (std::uint8_t w : grammar.weights())
          {
            out.push_back({Step::base_v(w)});
          }
          break;
        case Production::descend:
          if (budget < 2)
          {
            break;
          }
          for (const StepList &inner : seq(level + 1, budget - 2))
          {
            for (std::uint8_t w : grammar.weights())
            {
              StepList s{Step::descend()};
              s.insert(s.end(), inner.begin(), inner.end());
              s.push_back(Step::ascend(w));
              out.push_back(std::move(s));
            }
          }
          break;
        default:
          break;
      }
    }
    return out;
  }

  std::vector<StepList> seq(std::size_t level, std::size_t budget) const
  {
    std::vector<StepList> out{StepList{}};
    for (const StepList &head : step(level, budget))
    {
      for (const StepList &tail : seq(level, budget - head.size()))
      {
        StepList s = head;
        s.insert(s.end(), tail.begin(), tail.end());
        out.push_back(std::move(s));
      }
    }
    return out;
  }
};

}  // namespace

std::vector<CycleProgram> derive_all(const Grammar &grammar, std::size_t max_steps)
{
  const Expander ex{grammar};
  std::vector<CycleProgram> out;
  for (const StepList &head : ex.step(0, max_steps))
  {
    for (const StepList &tail : ex.seq(0, max_steps - head.size()))
    {
      CycleProgram p;
      p.flex_levels = grammar.flex_levels();
      p.hierarchy_depth = grammar.hierarchy_depth();
      p.steps = head;
      p.steps.insert(p.steps.end(), tail.begin(), tail.end());
      out.push_back(std::move(p));
    }
  }
  return out;
}

}  // namespace flexmg
