// Copyright The flexmg Authors.
// SPDX-License-Identifier: Apache-2.0

// Brute-force reference implementations used as test oracles. Everything here
// works on plain row-major dense arrays and is written independently of the
// library kernels it checks.

#ifndef FLEXMG_TEST_ORACLE_HPP
#define FLEXMG_TEST_ORACLE_HPP

#include <cmath>
#include <cstddef>
#include <random>
#include <stdexcept>
#include <tuple>
#include <utility>
#include <vector>

#include "flexmg/sparse.hpp"

namespace oracle
{

struct Dense
{
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> a;

  Dense(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, 0.0) {}
  double &operator()(std::size_t i, std::size_t j) { return a[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a[i * cols + j]; }
};

inline Dense dense(const flexmg::CsrMatrix &A)
{
  Dense D(A.nrows, A.ncols);
  for (std::size_t i = 0; i < A.nrows; ++i)
  {
    for (std::size_t k = A.row_offsets[i]; k < A.row_offsets[i + 1]; ++k)
    {
      D(i, A.col_indices[k]) += A.values[k];
    }
  }
  return D;
}

inline Dense matmul(const Dense &A, const Dense &B)
{
  Dense C(A.rows, B.cols);
  for (std::size_t i = 0; i < A.rows; ++i)
  {
    for (std::size_t j = 0; j < B.cols; ++j)
    {
      double s = 0.0;
      for (std::size_t k = 0; k < A.cols; ++k)
      {
        s += A(i, k) * B(k, j);
      }
      C(i, j) = s;
    }
  }
  return C;
}

inline Dense transpose(const Dense &A)
{
  Dense T(A.cols, A.rows);
  for (std::size_t i = 0; i < A.rows; ++i)
  {
    for (std::size_t j = 0; j < A.cols; ++j)
    {
      T(j, i) = A(i, j);
    }
  }
  return T;
}

inline std::vector<double> matvec(const Dense &A, const std::vector<double> &x)
{
  std::vector<double> y(A.rows, 0.0);
  for (std::size_t i = 0; i < A.rows; ++i)
  {
    for (std::size_t j = 0; j < A.cols; ++j)
    {
      y[i] += A(i, j) * x[j];
    }
  }
  return y;
}

inline double max_abs_diff(const Dense &A, const Dense &B)
{
  if (A.rows != B.rows || A.cols != B.cols)
  {
    return INFINITY;
  }
  double m = 0.0;
  for (std::size_t k = 0; k < A.a.size(); ++k)
  {
    m = std::max(m, std::abs(A.a[k] - B.a[k]));
  }
  return m;
}

// Gauss-Jordan elimination with full pivoting.
inline std::vector<double> solve(Dense A, std::vector<double> b)
{
  const std::size_t n = A.rows;
  std::vector<std::size_t> colperm(n);
  for (std::size_t i = 0; i < n; ++i)
  {
    colperm[i] = i;
  }
  for (std::size_t k = 0; k < n; ++k)
  {
    std::size_t pi = k, pj = k;
    for (std::size_t i = k; i < n; ++i)
    {
      for (std::size_t j = k; j < n; ++j)
      {
        if (std::abs(A(i, j)) > std::abs(A(pi, pj)))
        {
          pi = i;
          pj = j;
        }
      }
    }
    if (A(pi, pj) == 0.0)
    {
      throw std::runtime_error("oracle: singular");
    }
    for (std::size_t j = 0; j < n; ++j)
    {
      std::swap(A(k, j), A(pi, j));
    }
    std::swap(b[k], b[pi]);
    for (std::size_t i = 0; i < n; ++i)
    {
      std::swap(A(i, k), A(i, pj));
    }
    std::swap(colperm[k], colperm[pj]);
    for (std::size_t i = 0; i < n; ++i)
    {
      if (i == k)
      {
        continue;
      }
      const double m = A(i, k) / A(k, k);
      for (std::size_t j = k; j < n; ++j)
      {
        A(i, j) -= m * A(k, j);
      }
      b[i] -= m * b[k];
    }
  }
  std::vector<double> x(n);
  for (std::size_t k = 0; k < n; ++k)
  {
    x[colperm[k]] = b[k] / A(k, k);
  }
  return x;
}

// Random sparse matrix with the given fill ratio; optionally a nonzero diagonal.
inline flexmg::CsrMatrix random_sparse(std::mt19937_64 &gen, std::size_t rows, std::size_t cols,
                                       double fill, bool diagonal = false)
{
  std::uniform_real_distribution<double> val(-1.0, 1.0);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::vector<std::tuple<std::size_t, std::size_t, double>> t;
  for (std::size_t i = 0; i < rows; ++i)
  {
    for (std::size_t j = 0; j < cols; ++j)
    {
      if (diagonal && i == j)
      {
        t.emplace_back(i, j, 4.0 + coin(gen));
      }
      else if (coin(gen) < fill)
      {
        t.emplace_back(i, j, val(gen));
      }
    }
  }
  return flexmg::CsrMatrix::from_triplets(rows, cols, std::move(t));
}

// Symmetric, strictly diagonally dominant M-matrix-like random operator.
inline flexmg::CsrMatrix random_spd(std::mt19937_64 &gen, std::size_t n, double fill)
{
  std::uniform_real_distribution<double> val(0.1, 1.0);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  Dense D(n, n);
  for (std::size_t i = 0; i < n; ++i)
  {
    for (std::size_t j = i + 1; j < n; ++j)
    {
      if (coin(gen) < fill)
      {
        const double v = -val(gen);
        D(i, j) = v;
        D(j, i) = v;
      }
    }
  }
  std::vector<std::tuple<std::size_t, std::size_t, double>> t;
  for (std::size_t i = 0; i < n; ++i)
  {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j)
    {
      if (j != i && D(i, j) != 0.0)
      {
        s -= D(i, j);
        t.emplace_back(i, j, D(i, j));
      }
    }
    t.emplace_back(i, i, s + 0.5 + val(gen));
  }
  return flexmg::CsrMatrix::from_triplets(n, n, std::move(t));
}

// 1D Poisson tridiag(-1, 2, -1).
inline flexmg::CsrMatrix poisson_1d(std::size_t n)
{
  std::vector<std::tuple<std::size_t, std::size_t, double>> t;
  for (std::size_t i = 0; i < n; ++i)
  {
    if (i > 0)
    {
      t.emplace_back(i, i - 1, -1.0);
    }
    t.emplace_back(i, i, 2.0);
    if (i + 1 < n)
    {
      t.emplace_back(i, i + 1, -1.0);
    }
  }
  return flexmg::CsrMatrix::from_triplets(n, n, std::move(t));
}

// NSGA-II rank by repeated peeling with an O(n^2) dominance test per layer.
inline std::vector<std::size_t> pareto_ranks(const std::vector<std::pair<double, double>> &pts)
{
  auto dom = [](const std::pair<double, double> &p, const std::pair<double, double> &q) {
    return p.first <= q.first && p.second <= q.second && (p.first < q.first || p.second < q.second);
  };
  std::vector<std::size_t> rank(pts.size(), 0);
  std::size_t assigned = 0;
  for (std::size_t r = 1; assigned < pts.size(); ++r)
  {
    std::vector<std::size_t> layer;
    for (std::size_t i = 0; i < pts.size(); ++i)
    {
      if (rank[i] != 0)
      {
        continue;
      }
      bool dominated = false;
      for (std::size_t j = 0; j < pts.size() && !dominated; ++j)
      {
        dominated = rank[j] == 0 && j != i && dom(pts[j], pts[i]);
      }
      if (!dominated)
      {
        layer.push_back(i);
      }
    }
    for (std::size_t i : layer)
    {
      rank[i] = r;
    }
    assigned += layer.size();
  }
  return rank;
}

}  // namespace oracle

#endif  // FLEXMG_TEST_ORACLE_HPP
