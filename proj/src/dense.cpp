// Copyright The flexmg Authors.
// SPDX-License-Identifier: Apache-2.0

#include "flexmg/dense.hpp"

#include <cmath>
#include <numeric>
#include <string>
#include <utility>

#include "flexmg/error.hpp"

namespace flexmg
{

DenseMatrix to_dense(const CsrMatrix &A)
{
  DenseMatrix D(A.nrows, A.ncols);
  for (std::size_t i = 0; i < A.nrows; ++i)
  {
    for (std::size_t k = A.row_offsets[i]; k < A.row_offsets[i + 1]; ++k)
    {
      D(i, A.col_indices[k]) += A.values[k];
    }
  }
  return D;
}

DenseFactor dense_lu_factor(const DenseMatrix &A)
{
  if (A.rows != A.cols)
  {
    throw DimensionMismatch("dense_lu_factor: matrix is not square");
  }
  const std::size_t n = A.rows;
  DenseFactor F{n, A.data, std::vector<std::size_t>(n)};
  std::iota(F.perm.begin(), F.perm.end(), std::size_t{0});
  auto lu = [&](std::size_t i, std::size_t j) -> double & { return F.lu[i * n + j]; };

  for (std::size_t k = 0; k < n; ++k)
  {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i)
    {
      if (std::abs(lu(i, k)) > std::abs(lu(piv, k)))
      {
        piv = i;
      }
    }
    if (lu(piv, k) == 0.0)
    {
      throw SingularMatrix("dense_lu_factor: zero pivot in column " + std::to_string(k));
    }
    if (piv != k)
    {
      for (std::size_t j = 0; j < n; ++j)
      {
        std::swap(lu(k, j), lu(piv, j));
      }
      std::swap(F.perm[k], F.perm[piv]);
    }
    const double inv = 1.0 / lu(k, k);
    for (std::size_t i = k + 1; i < n; ++i)
    {
      const double m = lu(i, k) * inv;
      lu(i, k) = m;
      if (m == 0.0)
      {
        continue;
      }
      for (std::size_t j = k + 1; j < n; ++j)
      {
        lu(i, j) -= m * lu(k, j);
      }
    }
  }
  return F;
}

void dense_lu_solve(const DenseFactor &F, std::span<const double> b, std::span<double> x)
{
  const std::size_t n = F.n;
  if (b.size() != n || x.size() != n)
  {
    throw DimensionMismatch("dense_lu_solve: vector length does not match factor");
  }
  const Vector rhs(b.begin(), b.end());  // b may alias x
  for (std::size_t i = 0; i < n; ++i)
  {
    double s = rhs[F.perm[i]];
    for (std::size_t j = 0; j < i; ++j)
    {
      s -= F.lu[i * n + j] * x[j];
    }
    x[i] = s;
  }
  for (std::size_t i = n; i-- > 0;)
  {
    double s = x[i];
    for (std::size_t j = i + 1; j < n; ++j)
    {
      s -= F.lu[i * n + j] * x[j];
    }
    x[i] = s / F.lu[i * n + i];
  }
}

Vector dense_lu_solve(const DenseFactor &F, std::span<const double> b)
{
  Vector x(F.n);
  dense_lu_solve(F, b, x);
  return x;
}

}  // namespace flexmg
