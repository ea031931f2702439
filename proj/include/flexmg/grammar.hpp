// Copyright The flexmg Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef FLEXMG_GRAMMAR_HPP
#define FLEXMG_GRAMMAR_HPP

#include <cstddef>
#include <cstdint>
#include <vector>

#include "flexmg/cycle.hpp"
#include "flexmg/rng.hpp"

namespace flexmg
{

//
// Context-free grammar of flexible cycles, one nonterminal pair per level l of
// the flexible region:
//
//   Cycle  -> Step_0 Seq_0
//   Seq_l  -> Step_l Seq_l | <empty>
//   Step_l -> s:<kind>:<w> | n | d Seq_{l+1} u:<w> | bv:<w> | cs
//
// The descend production exists only above the deepest flexible level, bv only
// on level flex_levels-1 of a hierarchy deeper than the flexible region, and
// cs only on the coarsest level of a shallow one. Every complete derivation
// therefore decodes to a program that passes validate().
//
enum class Symbol : std::uint8_t
{
  cycle,
  seq,
  step,
};

enum class Production : std::uint8_t
{
  cycle,
  seq_extend,
  seq_empty,
  smooth,
  noop,
  descend,
  base_v,
  coarse_solve,
};

class Grammar
{
public:
  explicit Grammar(std::size_t hierarchy_depth, std::size_t flex_levels = default_flex_levels,
                   std::vector<SmootherKind> kinds = {all_smoothers, all_smoothers + 3},
                   std::vector<std::uint8_t> weights = full_weight_grid());

  std::size_t hierarchy_depth() const { return hierarchy_depth_; }
  std::size_t flex_levels() const { return flex_levels_; }
  // Number of levels a program may visit.
  std::size_t levels() const { return levels_; }

  const std::vector<SmootherKind> &kinds() const { return kinds_; }
  const std::vector<std::uint8_t> &weights() const { return weights_; }

  // Step_l alternatives in a fixed order.
  const std::vector<Production> &step_productions(std::size_t level) const
  {
    return step_productions_[level];
  }

  static std::vector<std::uint8_t> full_weight_grid();

private:
  std::size_t hierarchy_depth_;
  std::size_t flex_levels_;
  std::size_t levels_;
  std::vector<SmootherKind> kinds_;
  std::vector<std::uint8_t> weights_;
  std::vector<std::vector<Production>> step_productions_;
};

//
// Derivation tree node. Terminal choices are stored on the Step node that
// emits them: kind and weight for smooth, the ascend weight for descend, the
// scaling weight for bv.
//
struct DerivationNode
{
  Symbol symbol = Symbol::cycle;
  std::uint8_t level = 0;
  Production production = Production::cycle;
  SmootherKind kind = SmootherKind::gs_forward;
  std::uint8_t weight = WeightGrid::unit;
  std::vector<DerivationNode> children;

  // Nodes on the longest root-to-leaf path.
  std::size_t depth() const;
  // Program steps produced by this subtree.
  std::size_t step_count() const;

  bool operator==(const DerivationNode &) const = default;
};

inline constexpr std::size_t max_tree_depth = 17;

struct GenerateLimits
{
  std::size_t max_steps = max_program_steps;
  // Levels the program may use; 0 means all levels the grammar offers.
  std::size_t max_levels = 0;
  std::size_t min_tree_depth = 2;
  std::size_t max_tree_depth = flexmg::max_tree_depth;
};

// Ramped half-and-half: target depth uniform in [min_tree_depth,
// max_tree_depth], then "full" or "grow" with equal probability. Step and depth
// budgets are enforced while deriving, so no retries are needed.
DerivationNode generate_tree(const Grammar &grammar, Rng &rng, const GenerateLimits &limits = {});

// Random subtree for a nonterminal within the given depth and step budgets.
// Returns false (leaving out untouched) if no derivation fits.
bool grow_subtree(const Grammar &grammar, Symbol symbol, std::size_t level, Rng &rng,
                  std::size_t depth_budget, std::size_t step_budget, bool full,
                  DerivationNode &out);

CycleProgram decode(const DerivationNode &tree, const Grammar &grammar);

CycleProgram generate(const Grammar &grammar, Rng &rng, const GenerateLimits &limits = {});

// Every program derivable with at most max_steps steps, by exhaustive
// expansion of derivation choices. Intended for small grammars.
std::vector<CycleProgram> derive_all(const Grammar &grammar, std::size_t max_steps);

}  // namespace flexmg

#endif  // FLEXMG_GRAMMAR_HPP
