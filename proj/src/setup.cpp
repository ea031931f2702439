// Copyright The flexmg Authors.
// SPDX-License-Identifier: Apache-2.0

#include "flexmg/setup.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

#include "flexmg/error.hpp"
#include "flexmg/rng.hpp"
#include "json.hpp"

namespace flexmg
{

void SetupParams::check() const
{
  if (!(strength_threshold > 0.0 && strength_threshold < 1.0))
  {
    throw InvalidArgument("setup: strength threshold must lie in (0,1)");
  }
  if (coarse_max_size < 1)
  {
    throw InvalidArgument("setup: coarse_max_size must be >= 1");
  }
  if (max_levels < 1)
  {
    throw InvalidArgument("setup: max_levels must be >= 1");
  }
}

bool StrengthGraph::has_edge(std::size_t i, std::size_t j) const
{
  const auto first = targets.begin() + static_cast<std::ptrdiff_t>(offsets[i]);
  const auto last = targets.begin() + static_cast<std::ptrdiff_t>(offsets[i + 1]);
  return std::binary_search(first, last, j);
}

StrengthGraph StrengthGraph::symmetrized() const
{
  std::vector<std::vector<std::size_t>> adj(n);
  for (std::size_t i = 0; i < n; ++i)
  {
    for (std::size_t k = offsets[i]; k < offsets[i + 1]; ++k)
    {
      adj[i].push_back(targets[k]);
      adj[targets[k]].push_back(i);
    }
  }
  StrengthGraph G;
  G.n = n;
  G.offsets.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i)
  {
    auto &row = adj[i];
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
    G.targets.insert(G.targets.end(), row.begin(), row.end());
    G.offsets[i + 1] = G.targets.size();
  }
  return G;
}

StrengthGraph strength_graph(const CsrMatrix &A, double theta)
{
  StrengthGraph S;
  S.n = A.nrows;
  S.offsets.assign(A.nrows + 1, 0);
  for (std::size_t i = 0; i < A.nrows; ++i)
  {
    double row_max = 0.0;
    for (std::size_t k = A.row_offsets[i]; k < A.row_offsets[i + 1]; ++k)
    {
      if (A.col_indices[k] != i)
      {
        row_max = std::max(row_max, -A.values[k]);
      }
    }
    if (row_max > 0.0)
    {
      const double cut = theta * row_max;
      for (std::size_t k = A.row_offsets[i]; k < A.row_offsets[i + 1]; ++k)
      {
        if (A.col_indices[k] != i && -A.values[k] >= cut)
        {
          S.targets.push_back(A.col_indices[k]);
        }
      }
    }
    S.offsets[i + 1] = S.targets.size();
  }
  return S;
}

double pmis_weight(const StrengthGraph &symmetric, std::uint64_t seed, std::size_t i)
{
  const auto degree = symmetric.offsets[i + 1] - symmetric.offsets[i];
  return static_cast<double>(degree) + hash_unit(seed, i);
}

CfSplitting pmis_coarsen(const StrengthGraph &S, std::uint64_t seed)
{
  enum class State : unsigned char
  {
    undecided,
    coarse,
    fine,
  };

  const StrengthGraph G = S.symmetrized();
  const std::size_t n = G.n;
  std::vector<double> weight(n);
  std::vector<State> state(n, State::undecided);
  std::vector<std::size_t> undecided;
  for (std::size_t i = 0; i < n; ++i)
  {
    weight[i] = pmis_weight(G, seed, i);
    if (G.offsets[i + 1] == G.offsets[i])
    {
      state[i] = State::fine;
    }
    else
    {
      undecided.push_back(i);
    }
  }

  // Ties on weight are broken by index so the order is total.
  auto beats = [&](std::size_t i, std::size_t j) {
    return std::tie(weight[i], i) > std::tie(weight[j], j);
  };

  std::vector<std::size_t> selected;
  while (!undecided.empty())
  {
    selected.clear();
    for (std::size_t i : undecided)
    {
      bool local_max = true;
      for (std::size_t k = G.offsets[i]; k < G.offsets[i + 1] && local_max; ++k)
      {
        const std::size_t j = G.targets[k];
        local_max = state[j] != State::undecided || beats(i, j);
      }
      if (local_max)
      {
        selected.push_back(i);
      }
    }
    for (std::size_t i : selected)
    {
      state[i] = State::coarse;
    }
    for (std::size_t i : selected)
    {
      for (std::size_t k = G.offsets[i]; k < G.offsets[i + 1]; ++k)
      {
        if (state[G.targets[k]] == State::undecided)
        {
          state[G.targets[k]] = State::fine;
        }
      }
    }
    std::erase_if(undecided, [&](std::size_t i) { return state[i] != State::undecided; });
  }

  // Second pass: a fine point with strong neighbors but no coarse one would get
  // an empty interpolation stencil. Maximality rules this out; keep the guard.
  for (std::size_t i = 0; i < n; ++i)
  {
    if (state[i] != State::fine || G.offsets[i + 1] == G.offsets[i])
    {
      continue;
    }
    bool has_coarse = false;
    for (std::size_t k = G.offsets[i]; k < G.offsets[i + 1] && !has_coarse; ++k)
    {
      has_coarse = state[G.targets[k]] == State::coarse;
    }
    if (!has_coarse)
    {
      state[i] = State::coarse;
    }
  }

  CfSplitting split(n);
  for (std::size_t i = 0; i < n; ++i)
  {
    split[i] = state[i] == State::coarse ? CfLabel::coarse : CfLabel::fine;
  }
  return split;
}

Interpolation direct_interpolation(const CsrMatrix &A, const StrengthGraph &S,
                                   const CfSplitting &splitting)
{
  if (S.n != A.nrows || splitting.size() != A.nrows || A.nrows != A.ncols)
  {
    throw DimensionMismatch("direct_interpolation: operator, graph and splitting disagree");
  }
  const std::size_t n = A.nrows;
  constexpr std::size_t none = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> coarse_index(n, none);
  std::size_t nc = 0;
  for (std::size_t i = 0; i < n; ++i)
  {
    if (splitting[i] == CfLabel::coarse)
    {
      coarse_index[i] = nc++;
    }
  }

  const StrengthGraph G = S.symmetrized();
  Interpolation out;
  CsrMatrix &P = out.P;
  P.nrows = n;
  P.ncols = nc;
  P.row_offsets.assign(n + 1, 0);

  for (std::size_t i = 0; i < n; ++i)
  {
    if (splitting[i] == CfLabel::coarse)
    {
      P.col_indices.push_back(coarse_index[i]);
      P.values.push_back(1.0);
      P.row_offsets[i + 1] = P.col_indices.size();
      continue;
    }

    double diag = 0.0;
    double off_sum = 0.0;
    double coarse_sum = 0.0;
    for (std::size_t k = A.row_offsets[i]; k < A.row_offsets[i + 1]; ++k)
    {
      const std::size_t j = A.col_indices[k];
      if (j == i)
      {
        diag = A.values[k];
        continue;
      }
      off_sum += A.values[k];
      if (splitting[j] == CfLabel::coarse && G.has_edge(i, j))
      {
        coarse_sum += A.values[k];
      }
    }

    bool any_coarse = false;
    for (std::size_t k = G.offsets[i]; k < G.offsets[i + 1] && !any_coarse; ++k)
    {
      any_coarse = splitting[G.targets[k]] == CfLabel::coarse;
    }
    if (any_coarse && (coarse_sum == 0.0 || diag == 0.0))
    {
      ++out.degenerate_rows;
      any_coarse = false;
    }
    if (any_coarse)
    {
      const double scale = off_sum / coarse_sum;
      // Row of A is sorted and coarse_index is monotone, so P stays sorted.
      for (std::size_t k = A.row_offsets[i]; k < A.row_offsets[i + 1]; ++k)
      {
        const std::size_t j = A.col_indices[k];
        if (j != i && splitting[j] == CfLabel::coarse && G.has_edge(i, j))
        {
          P.col_indices.push_back(coarse_index[j]);
          P.values.push_back(-(A.values[k] / diag) * scale);
        }
      }
    }
    P.row_offsets[i + 1] = P.col_indices.size();
  }
  return out;
}

CsrMatrix galerkin(const CsrMatrix &A, const CsrMatrix &P)
{
  if (A.ncols != P.nrows || A.nrows != P.nrows)
  {
    throw DimensionMismatch("galerkin: P must have as many rows as A");
  }
  return spgemm(transpose(P), spgemm(A, P));
}

double AmgHierarchy::operator_complexity() const
{
  if (levels.empty() || levels.front().A.nnz() == 0)
  {
    return 0.0;
  }
  double total = 0.0;
  for (const auto &lvl : levels)
  {
    total += static_cast<double>(lvl.A.nnz());
  }
  return total / static_cast<double>(levels.front().A.nnz());
}

std::string AmgHierarchy::summary_json() const
{
  nlohmann::ordered_json j;
  j["levels"] = nlohmann::ordered_json::array();
  for (std::size_t l = 0; l < levels.size(); ++l)
  {
    j["levels"].push_back(
        {{"level", l}, {"rows", levels[l].A.nrows}, {"nnz", levels[l].A.nnz()}});
  }
  j["operator_complexity"] = operator_complexity();
  j["degenerate_interpolation_rows"] = degenerate_rows;
  return j.dump(2);
}

AmgHierarchy build_hierarchy(const CsrMatrix &A, const SetupParams &params)
{
  params.check();
  if (A.nrows != A.ncols)
  {
    throw DimensionMismatch("build_hierarchy: operator must be square");
  }
  A.check();

  AmgHierarchy h;
  h.levels.push_back(AmgLevel{A, {}, {}, A.diagonal_positions()});
  while (true)
  {
    AmgLevel &fine = h.levels.back();
    const std::size_t n = fine.size();
    if (n <= params.coarse_max_size || h.levels.size() >= params.max_levels)
    {
      break;
    }
    const StrengthGraph S = strength_graph(fine.A, params.strength_threshold);
    const CfSplitting split =
        pmis_coarsen(S, stream_seed(params.coarsen_seed, "pmis", h.levels.size() - 1));
    const auto nc = static_cast<std::size_t>(
        std::count(split.begin(), split.end(), CfLabel::coarse));
    if (nc == 0 || nc >= n)
    {
      throw SetupError("coarsening stalled on level " + std::to_string(h.levels.size() - 1) +
                       " (" + std::to_string(n) + " rows, " + std::to_string(nc) +
                       " coarse points)");
    }
    Interpolation interp = direct_interpolation(fine.A, S, split);
    h.degenerate_rows += interp.degenerate_rows;
    fine.P = std::move(interp.P);
    fine.R = transpose(fine.P);
    CsrMatrix Ac = spgemm(fine.R, spgemm(fine.A, fine.P));
    std::vector<std::size_t> diag;
    try
    {
      diag = Ac.diagonal_positions();
    }
    catch (const InvalidArgument &e)
    {
      throw SetupError(std::string("coarse operator unusable for smoothing: ") + e.what());
    }
    h.levels.push_back(AmgLevel{std::move(Ac), {}, {}, std::move(diag)});
  }

  const CsrMatrix &Ac = h.coarsest().A;
  if (Ac.nrows > max_dense_coarse_size)
  {
    throw SetupError("coarsest level has " + std::to_string(Ac.nrows) +
                     " rows; raise max_levels to coarsen further");
  }
  try
  {
    h.coarse_factor = dense_lu_factor(to_dense(Ac));
  }
  catch (const SingularMatrix &e)
  {
    throw SetupError(std::string("coarsest operator is singular: ") + e.what());
  }
  return h;
}

}  // namespace flexmg
