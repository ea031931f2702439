// Copyright The flexmg Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef FLEXMG_MATRIX_MARKET_HPP
#define FLEXMG_MATRIX_MARKET_HPP

#include <iosfwd>
#include <string>

#include "flexmg/sparse.hpp"

namespace flexmg
{

// Coordinate real general format, 1-based indices. Values are written with
// 17 significant digits so a write/read cycle is exact.
void write_matrix_market(std::ostream &os, const CsrMatrix &A);
void write_matrix_market(const std::string &path, const CsrMatrix &A);

// Accepts "general" and "symmetric" coordinate real files.
CsrMatrix read_matrix_market(std::istream &is);
CsrMatrix read_matrix_market(const std::string &path);

}  // namespace flexmg

#endif  // FLEXMG_MATRIX_MARKET_HPP
