// Copyright The flexmg Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef FLEXMG_PROBLEM_HPP
#define FLEXMG_PROBLEM_HPP

#include <cstddef>
#include <cstdint>
#include <string>

#include "flexmg/sparse.hpp"

namespace flexmg
{

enum class RhsKind
{
  zero,
  ones,
  random,
};

std::string to_string(RhsKind kind);
RhsKind rhs_kind_from_string(const std::string &text);

//
// -a u_xx - b u_yy - c u_zz = f on an nx x ny x nz grid of interior points,
// u = 0 on the boundary. Mesh width is 1; boundary unknowns are eliminated.
//
struct ProblemSpec
{
  std::size_t nx = 64;
  std::size_t ny = 64;
  std::size_t nz = 64;
  double a = 0.001;
  double b = 1.0;
  double c = 1.0;
  RhsKind rhs = RhsKind::zero;
  std::uint64_t rhs_seed = 0;

  std::size_t size() const { return nx * ny * nz; }

  // Throws InvalidArgument on zero extents or non-positive coefficients.
  void check() const;
};

// Unknown (i,j,k) maps to row i + nx*(j + ny*k).
CsrMatrix assemble_anisotropic_7pt(const ProblemSpec &spec);

// zero, all ones, or uniform random entries scaled to unit 2-norm.
Vector make_rhs(const ProblemSpec &spec);

// Unit 2-norm random vector, used as the initial guess for homogeneous problems.
Vector random_unit_vector(std::size_t n, std::uint64_t seed);

}  // namespace flexmg

#endif  // FLEXMG_PROBLEM_HPP
