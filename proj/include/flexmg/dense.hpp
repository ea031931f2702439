// Copyright The flexmg Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef FLEXMG_DENSE_HPP
#define FLEXMG_DENSE_HPP

#include <cstddef>
#include <span>
#include <vector>

#include "flexmg/sparse.hpp"

namespace flexmg
{

// Row-major dense matrix for coarse solves and test-scale oracles.
struct DenseMatrix
{
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  DenseMatrix() = default;
  DenseMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double &operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  bool operator==(const DenseMatrix &) const = default;
};

DenseMatrix to_dense(const CsrMatrix &A);

// LU factors with row partial pivoting: P A = L U, L unit lower triangular.
// L and U share storage in lu; perm[i] is the row of A placed at row i.
struct DenseFactor
{
  std::size_t n = 0;
  std::vector<double> lu;
  std::vector<std::size_t> perm;
};

// Throws SingularMatrix on an exactly zero pivot after pivoting.
DenseFactor dense_lu_factor(const DenseMatrix &A);
Vector dense_lu_solve(const DenseFactor &F, std::span<const double> b);
void dense_lu_solve(const DenseFactor &F, std::span<const double> b, std::span<double> x);

}  // namespace flexmg

#endif  // FLEXMG_DENSE_HPP
