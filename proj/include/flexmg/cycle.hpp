// Copyright The flexmg Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef FLEXMG_CYCLE_HPP
#define FLEXMG_CYCLE_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace flexmg
{

enum class SmootherKind : std::uint8_t
{
  gs_forward,
  gs_backward,
  jacobi,
};

inline constexpr SmootherKind all_smoothers[] = {SmootherKind::gs_forward,
                                                 SmootherKind::gs_backward,
                                                 SmootherKind::jacobi};

// DSL mnemonic: gsf, gsb, jac.
std::string_view mnemonic(SmootherKind kind);

//
// Relaxation weights and coarse-grid-correction scaling factors share one
// grid: 0.10, 0.15, ..., 1.90. Weights are stored as grid indices.
//
struct WeightGrid
{
  static constexpr std::size_t size = 37;
  static constexpr std::uint8_t unit = 18;  // index of 1.00

  static constexpr double value(std::uint8_t index) { return 0.10 + 0.05 * index; }

  // Grid index of w, or nullopt when w is not (within 1e-9) a grid value.
  static std::optional<std::uint8_t> index_of(double w);
};

enum class StepOp : std::uint8_t
{
  smooth,
  descend,
  ascend,
  base_v,
  coarse_solve,
  noop,
};

// One step of a flexible cycle. Fields not used by an op hold their defaults,
// so equality is plain memberwise comparison.
struct Step
{
  StepOp op = StepOp::noop;
  SmootherKind kind = SmootherKind::gs_forward;
  std::uint8_t weight = WeightGrid::unit;

  double omega() const { return WeightGrid::value(weight); }

  static Step smooth(SmootherKind kind, std::uint8_t weight) { return {StepOp::smooth, kind, weight}; }
  static Step descend() { return {StepOp::descend}; }
  static Step ascend(std::uint8_t weight) { return {StepOp::ascend, SmootherKind::gs_forward, weight}; }
  static Step base_v(std::uint8_t weight) { return {StepOp::base_v, SmootherKind::gs_forward, weight}; }
  static Step coarse_solve() { return {StepOp::coarse_solve}; }
  static Step noop() { return {StepOp::noop}; }

  bool operator==(const Step &) const = default;
};

inline constexpr std::size_t default_flex_levels = 5;
inline constexpr std::size_t max_program_steps = 40;

//
// A flexible multigrid cycle as a flat list of steps. Execution starts and
// must end on the finest level; descend/ascend move one level down/up. The
// metadata records the hierarchy a program was validated against and does
// not take part in equality.
//
struct CycleProgram
{
  std::vector<Step> steps;
  std::size_t flex_levels = default_flex_levels;
  std::size_t hierarchy_depth = 0;  // 0 = not bound to a hierarchy

  std::size_t size() const { return steps.size(); }
  bool operator==(const CycleProgram &other) const { return steps == other.steps; }
};

struct Violation
{
  static constexpr std::size_t whole_program = static_cast<std::size_t>(-1);

  std::size_t step = whole_program;
  std::string message;
};

// Deepest level reachable by a program: min(flex_levels, hierarchy_depth) - 1.
std::size_t deepest_flexible_level(std::size_t hierarchy_depth, std::size_t flex_levels);

// Full check against a hierarchy. Empty result means the program is valid.
std::vector<Violation> validate(const CycleProgram &program, std::size_t hierarchy_depth,
                                std::size_t flex_levels = default_flex_levels);

// Checks that do not need a hierarchy: non-empty, no level underflow, ends on
// level 0.
std::vector<Violation> validate_structure(const CycleProgram &program);

// Level after each step, starting from 0.
std::vector<int> level_trace(const CycleProgram &program);

std::string describe(const std::vector<Violation> &violations);

//
// DSL, whitespace separated tokens:
//   s:<gsf|gsb|jac>:<w>   smooth        d      descend
//   u:<w>                 ascend+scale  bv:<w> fixed V(1,1) below + scale
//   cs                    coarse solve  n      no operation
// Weights must lie on the grid. '#' starts a comment.
//
// parse_dsl reads exactly one program (tokens may span lines) and applies the
// structural checks; errors are ParseError with line and column.
CycleProgram parse_dsl(std::string_view text);

// One program per non-empty, non-comment line.
std::vector<CycleProgram> parse_dsl_lines(std::string_view text);

// Canonical form: single spaces, lowercase, weights with two decimals.
std::string emit_dsl(const CycleProgram &program);

// V(pre_sweeps, post_sweeps) over the flexible region. Below it the fixed
// V(1,1) is invoked through base_v(1.00) on deep hierarchies; shallow ones end
// in a coarse solve.
CycleProgram standard_cycle(std::size_t pre_sweeps, std::size_t post_sweeps, SmootherKind pre,
                            SmootherKind post, std::uint8_t weight, std::size_t hierarchy_depth,
                            std::size_t flex_levels = default_flex_levels);

// V(pre,post) with forward Gauss-Seidel down and backward Gauss-Seidel up, unit weights.
CycleProgram v_cycle(std::size_t pre_sweeps, std::size_t post_sweeps, std::size_t hierarchy_depth,
                     std::size_t flex_levels = default_flex_levels);

struct EnumerationBounds
{
  std::size_t max_steps = 4;
  std::size_t hierarchy_depth = 2;
  std::size_t flex_levels = default_flex_levels;
  std::vector<SmootherKind> kinds{SmootherKind::gs_forward};
  std::vector<std::uint8_t> weights{WeightGrid::unit};
};

// Every valid program with 1..max_steps steps over the restricted terminal
// sets, in lexicographic token order. Refuses (InvalidArgument) beyond
// 6 steps, 2 levels, 1 smoother kind or 1 weight.
std::vector<CycleProgram> enumerate_programs(const EnumerationBounds &bounds);

// Graphviz rendering: one node per step at (step index, level). Colors:
// gsf yellow, gsb red, jac purple, coarse solve black, no-op white. Smoothing
// weights are node labels, coarse-grid-correction weights label ascend edges.
std::string to_dot(const CycleProgram &program);

}  // namespace flexmg

#endif  // FLEXMG_CYCLE_HPP
