// Copyright The flexmg Authors.
// SPDX-License-Identifier: Apache-2.0

#include "flexmg/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "flexmg/error.hpp"

namespace flexmg
{

namespace
{

void require_size(std::size_t got, std::size_t want, const char *what)
{
  if (got != want)
  {
    throw DimensionMismatch(std::string(what) + ": expected length " + std::to_string(want) +
                            ", got " + std::to_string(got));
  }
}

}  // namespace

double CsrMatrix::at(std::size_t i, std::size_t j) const
{
  const auto first = col_indices.begin() + static_cast<std::ptrdiff_t>(row_offsets[i]);
  const auto last = col_indices.begin() + static_cast<std::ptrdiff_t>(row_offsets[i + 1]);
  const auto it = std::lower_bound(first, last, j);
  if (it == last || *it != j)
  {
    return 0.0;
  }
  return values[static_cast<std::size_t>(it - col_indices.begin())];
}

Vector CsrMatrix::diagonal() const
{
  Vector d(std::min(nrows, ncols), 0.0);
  for (std::size_t i = 0; i < d.size(); ++i)
  {
    d[i] = at(i, i);
  }
  return d;
}

std::vector<std::size_t> CsrMatrix::diagonal_positions() const
{
  std::vector<std::size_t> pos(nrows);
  for (std::size_t i = 0; i < nrows; ++i)
  {
    bool found = false;
    for (std::size_t k = row_offsets[i]; k < row_offsets[i + 1]; ++k)
    {
      if (col_indices[k] == i)
      {
        if (values[k] == 0.0)
        {
          break;
        }
        pos[i] = k;
        found = true;
        break;
      }
    }
    if (!found)
    {
      throw InvalidArgument("row " + std::to_string(i) + " has no nonzero diagonal entry");
    }
  }
  return pos;
}

void CsrMatrix::check() const
{
  if (row_offsets.size() != nrows + 1 || row_offsets.front() != 0)
  {
    throw InvalidArgument("csr: row_offsets must have nrows+1 entries starting at 0");
  }
  if (row_offsets.back() != col_indices.size() || col_indices.size() != values.size())
  {
    throw InvalidArgument("csr: row_offsets[nrows] must equal nnz");
  }
  for (std::size_t i = 0; i < nrows; ++i)
  {
    if (row_offsets[i + 1] < row_offsets[i])
    {
      throw InvalidArgument("csr: row_offsets decreasing at row " + std::to_string(i));
    }
    for (std::size_t k = row_offsets[i]; k < row_offsets[i + 1]; ++k)
    {
      if (col_indices[k] >= ncols)
      {
        throw InvalidArgument("csr: column index out of range in row " + std::to_string(i));
      }
      if (k > row_offsets[i] && col_indices[k] <= col_indices[k - 1])
      {
        throw InvalidArgument("csr: columns not strictly increasing in row " +
                              std::to_string(i));
      }
    }
  }
}

CsrMatrix CsrMatrix::identity(std::size_t n)
{
  CsrMatrix I;
  I.nrows = I.ncols = n;
  I.row_offsets.resize(n + 1);
  I.col_indices.resize(n);
  I.values.assign(n, 1.0);
  for (std::size_t i = 0; i <= n; ++i)
  {
    I.row_offsets[i] = i;
  }
  for (std::size_t i = 0; i < n; ++i)
  {
    I.col_indices[i] = i;
  }
  return I;
}

CsrMatrix CsrMatrix::from_triplets(
    std::size_t nrows, std::size_t ncols,
    std::vector<std::tuple<std::size_t, std::size_t, double>> entries)
{
  for (const auto &[i, j, v] : entries)
  {
    if (i >= nrows || j >= ncols)
    {
      throw InvalidArgument("triplet index out of range");
    }
  }
  std::sort(entries.begin(), entries.end(), [](const auto &a, const auto &b) {
    return std::tie(std::get<0>(a), std::get<1>(a)) < std::tie(std::get<0>(b), std::get<1>(b));
  });

  CsrMatrix A;
  A.nrows = nrows;
  A.ncols = ncols;
  A.row_offsets.assign(nrows + 1, 0);
  for (std::size_t k = 0; k < entries.size(); ++k)
  {
    const auto [i, j, v] = entries[k];
    if (k > 0 && std::get<0>(entries[k - 1]) == i && std::get<1>(entries[k - 1]) == j)
    {
      A.values.back() += v;
      continue;
    }
    A.col_indices.push_back(j);
    A.values.push_back(v);
    ++A.row_offsets[i + 1];
  }
  for (std::size_t i = 0; i < nrows; ++i)
  {
    A.row_offsets[i + 1] += A.row_offsets[i];
  }
  return A;
}

void spmv(const CsrMatrix &A, std::span<const double> x, std::span<double> y)
{
  require_size(x.size(), A.ncols, "spmv x");
  require_size(y.size(), A.nrows, "spmv y");
  for (std::size_t i = 0; i < A.nrows; ++i)
  {
    double sum = 0.0;
    for (std::size_t k = A.row_offsets[i]; k < A.row_offsets[i + 1]; ++k)
    {
      sum += A.values[k] * x[A.col_indices[k]];
    }
    y[i] = sum;
  }
}

Vector spmv(const CsrMatrix &A, std::span<const double> x)
{
  Vector y(A.nrows);
  spmv(A, x, y);
  return y;
}

void residual(const CsrMatrix &A, std::span<const double> x, std::span<const double> f,
              std::span<double> r)
{
  require_size(x.size(), A.ncols, "residual x");
  require_size(f.size(), A.nrows, "residual f");
  require_size(r.size(), A.nrows, "residual r");
  for (std::size_t i = 0; i < A.nrows; ++i)
  {
    double sum = 0.0;
    for (std::size_t k = A.row_offsets[i]; k < A.row_offsets[i + 1]; ++k)
    {
      sum += A.values[k] * x[A.col_indices[k]];
    }
    r[i] = f[i] - sum;
  }
}

Vector residual(const CsrMatrix &A, std::span<const double> x, std::span<const double> f)
{
  Vector r(A.nrows);
  residual(A, x, f, r);
  return r;
}

double dot(std::span<const double> x, std::span<const double> y)
{
  require_size(y.size(), x.size(), "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
  {
    s += x[i] * y[i];
  }
  return s;
}

double norm2(std::span<const double> v) { return std::sqrt(dot(v, v)); }

Vector axpy(double alpha, std::span<const double> x, std::span<const double> y)
{
  require_size(y.size(), x.size(), "axpy");
  Vector z(y.begin(), y.end());
  axpy_inplace(alpha, x, z);
  return z;
}

void axpy_inplace(double alpha, std::span<const double> x, std::span<double> y)
{
  require_size(y.size(), x.size(), "axpy");
  for (std::size_t i = 0; i < x.size(); ++i)
  {
    y[i] += alpha * x[i];
  }
}

CsrMatrix transpose(const CsrMatrix &A)
{
  CsrMatrix T;
  T.nrows = A.ncols;
  T.ncols = A.nrows;
  T.row_offsets.assign(A.ncols + 1, 0);
  T.col_indices.resize(A.nnz());
  T.values.resize(A.nnz());
  for (std::size_t c : A.col_indices)
  {
    ++T.row_offsets[c + 1];
  }
  for (std::size_t j = 0; j < A.ncols; ++j)
  {
    T.row_offsets[j + 1] += T.row_offsets[j];
  }
  std::vector<std::size_t> next(T.row_offsets.begin(), T.row_offsets.end() - 1);
  // Rows of A are visited in order, so each row of T comes out sorted.
  for (std::size_t i = 0; i < A.nrows; ++i)
  {
    for (std::size_t k = A.row_offsets[i]; k < A.row_offsets[i + 1]; ++k)
    {
      const std::size_t dst = next[A.col_indices[k]]++;
      T.col_indices[dst] = i;
      T.values[dst] = A.values[k];
    }
  }
  return T;
}

CsrMatrix spgemm(const CsrMatrix &A, const CsrMatrix &B)
{
  if (A.ncols != B.nrows)
  {
    throw DimensionMismatch("spgemm: inner dimensions " + std::to_string(A.ncols) + " and " +
                            std::to_string(B.nrows) + " differ");
  }
  constexpr std::size_t unset = static_cast<std::size_t>(-1);

  CsrMatrix C;
  C.nrows = A.nrows;
  C.ncols = B.ncols;
  C.row_offsets.assign(A.nrows + 1, 0);

  std::vector<std::size_t> marker(B.ncols, unset);
  std::vector<double> accum(B.ncols, 0.0);
  std::vector<std::size_t> cols;
  for (std::size_t i = 0; i < A.nrows; ++i)
  {
    cols.clear();
    for (std::size_t ka = A.row_offsets[i]; ka < A.row_offsets[i + 1]; ++ka)
    {
      const std::size_t k = A.col_indices[ka];
      const double a = A.values[ka];
      for (std::size_t kb = B.row_offsets[k]; kb < B.row_offsets[k + 1]; ++kb)
      {
        const std::size_t j = B.col_indices[kb];
        if (marker[j] != i)
        {
          marker[j] = i;
          accum[j] = 0.0;
          cols.push_back(j);
        }
        accum[j] += a * B.values[kb];
      }
    }
    std::sort(cols.begin(), cols.end());
    for (std::size_t j : cols)
    {
      C.col_indices.push_back(j);
      C.values.push_back(accum[j]);
    }
    C.row_offsets[i + 1] = C.col_indices.size();
  }
  return C;
}

double norm_inf(const CsrMatrix &A)
{
  double m = 0.0;
  for (std::size_t i = 0; i < A.nrows; ++i)
  {
    double s = 0.0;
    for (std::size_t k = A.row_offsets[i]; k < A.row_offsets[i + 1]; ++k)
    {
      s += std::abs(A.values[k]);
    }
    m = std::max(m, s);
  }
  return m;
}

}  // namespace flexmg
