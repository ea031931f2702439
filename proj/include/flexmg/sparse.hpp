// Copyright The flexmg Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef FLEXMG_SPARSE_HPP
#define FLEXMG_SPARSE_HPP

#include <cstddef>
#include <span>
#include <tuple>
#include <vector>

namespace flexmg
{

using Vector = std::vector<double>;

//
// Compressed sparse row matrix. Column indices are strictly increasing within a
// row and every index is below ncols. Instances are treated as immutable once
// built and may be shared freely between readers.
//
struct CsrMatrix
{
  std::size_t nrows = 0;
  std::size_t ncols = 0;
  std::vector<std::size_t> row_offsets{0};
  std::vector<std::size_t> col_indices;
  std::vector<double> values;

  std::size_t nnz() const { return values.size(); }

  // Entry (i, j), or 0 if not stored.
  double at(std::size_t i, std::size_t j) const;

  // Diagonal entries; missing diagonals read as 0.
  Vector diagonal() const;

  // Position of each row's diagonal entry in values; throws InvalidArgument if
  // a row has no stored or a zero diagonal (smoothers require both).
  std::vector<std::size_t> diagonal_positions() const;

  // Throws InvalidArgument describing the first broken CSR invariant.
  void check() const;

  bool operator==(const CsrMatrix &) const = default;

  static CsrMatrix identity(std::size_t n);

  // Duplicate (row, col) entries are summed.
  static CsrMatrix from_triplets(std::size_t nrows, std::size_t ncols,
                                 std::vector<std::tuple<std::size_t, std::size_t, double>> entries);
};

// y = A x, summed in column-index order per row.
Vector spmv(const CsrMatrix &A, std::span<const double> x);
void spmv(const CsrMatrix &A, std::span<const double> x, std::span<double> y);

// r = f - A x
Vector residual(const CsrMatrix &A, std::span<const double> x, std::span<const double> f);
void residual(const CsrMatrix &A, std::span<const double> x, std::span<const double> f,
              std::span<double> r);

double dot(std::span<const double> x, std::span<const double> y);
double norm2(std::span<const double> v);

// Returns alpha * x + y.
Vector axpy(double alpha, std::span<const double> x, std::span<const double> y);
// y += alpha * x
void axpy_inplace(double alpha, std::span<const double> x, std::span<double> y);

CsrMatrix transpose(const CsrMatrix &A);

// Sparse product. Every structurally produced entry is kept, even when its
// computed value is zero.
CsrMatrix spgemm(const CsrMatrix &A, const CsrMatrix &B);

// max_i sum_j |a_ij|
double norm_inf(const CsrMatrix &A);

}  // namespace flexmg

#endif  // FLEXMG_SPARSE_HPP
