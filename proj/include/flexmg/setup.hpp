// Copyright The flexmg Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef FLEXMG_SETUP_HPP
#define FLEXMG_SETUP_HPP

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "flexmg/dense.hpp"
#include "flexmg/sparse.hpp"

namespace flexmg
{

struct SetupParams
{
  double strength_threshold = 0.25;
  std::size_t max_levels = 10;
  std::size_t coarse_max_size = 50;
  std::uint64_t coarsen_seed = 0;

  void check() const;
};

// Directed strength graph in CSR layout: row i lists the points j that i
// strongly depends on.
struct StrengthGraph
{
  std::size_t n = 0;
  std::vector<std::size_t> offsets{0};
  std::vector<std::size_t> targets;

  std::size_t edges() const { return targets.size(); }
  bool has_edge(std::size_t i, std::size_t j) const;

  // Union of the graph and its transpose, rows sorted and duplicate free.
  StrengthGraph symmetrized() const;
};

enum class CfLabel : unsigned char
{
  fine,
  coarse,
};

using CfSplitting = std::vector<CfLabel>;

// j != i is a strong influence on i when -a_ij >= theta * max_{k != i}(-a_ik);
// rows whose largest negated off-diagonal is <= 0 have no strong edges.
StrengthGraph strength_graph(const CsrMatrix &A, double theta);

// PMIS-style splitting: a maximal independent set of the symmetrized graph
// chosen by weights deg(i) + hash(seed, i). Points without strong neighbors
// are fine.
CfSplitting pmis_coarsen(const StrengthGraph &S, std::uint64_t seed);

// Weight of point i used by pmis_coarsen.
double pmis_weight(const StrengthGraph &symmetric, std::uint64_t seed, std::size_t i);

struct Interpolation
{
  CsrMatrix P;
  // F rows that fell back to zero because their coarse-neighbor sum vanished.
  std::size_t degenerate_rows = 0;
};

//
// Classical direct interpolation. Coarse points copy their coarse value. A fine
// point i interpolates from its strong coarse neighbors C_i (taken in the
// symmetrized strength graph) with
//
//   w_ij = -(a_ij / a_ii) * (sum_{k != i} a_ik) / (sum_{k in C_i} a_ik).
//
// Fine points with an empty C_i get a zero row.
//
Interpolation direct_interpolation(const CsrMatrix &A, const StrengthGraph &S,
                                   const CfSplitting &splitting);

// P^T A P
CsrMatrix galerkin(const CsrMatrix &A, const CsrMatrix &P);

struct AmgLevel
{
  CsrMatrix A;
  CsrMatrix P;  // empty on the coarsest level
  CsrMatrix R;  // transpose(P)
  std::vector<std::size_t> diag;  // positions of the diagonal entries of A

  std::size_t size() const { return A.nrows; }
};

//
// Multilevel hierarchy produced by the setup phase. Immutable after
// construction; evaluation scratch space lives outside of it so one hierarchy
// can serve many concurrent cycle evaluations.
//
struct AmgHierarchy
{
  std::vector<AmgLevel> levels;
  DenseFactor coarse_factor;
  std::size_t degenerate_rows = 0;

  std::size_t depth() const { return levels.size(); }
  const AmgLevel &coarsest() const { return levels.back(); }
  double operator_complexity() const;

  // {"levels": [{"level", "rows", "nnz"}...], "operator_complexity": x}
  std::string summary_json() const;
};

// Largest coarsest level accepted for the dense direct solve.
inline constexpr std::size_t max_dense_coarse_size = 4096;

// Coarsens until the level size is at most coarse_max_size or max_levels
// levels exist, then factors the coarsest operator. Throws SetupError when a
// level above coarse_max_size produces no reduction.
AmgHierarchy build_hierarchy(const CsrMatrix &A, const SetupParams &params);

}  // namespace flexmg

#endif  // FLEXMG_SETUP_HPP
