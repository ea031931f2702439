// Copyright The flexmg Authors.
// SPDX-License-Identifier: Apache-2.0

#include "flexmg/problem.hpp"

#include "flexmg/error.hpp"
#include "flexmg/rng.hpp"

namespace flexmg
{

std::string to_string(RhsKind kind)
{
  switch (kind)
  {
    case RhsKind::zero:
      return "zero";
    case RhsKind::ones:
      return "ones";
    case RhsKind::random:
      return "rand";
  }
  return "zero";
}

RhsKind rhs_kind_from_string(const std::string &text)
{
  if (text == "zero" || text == "0")
  {
    return RhsKind::zero;
  }
  if (text == "ones" || text == "1")
  {
    return RhsKind::ones;
  }
  if (text == "rand" || text == "random")
  {
    return RhsKind::random;
  }
  throw InvalidArgument("unknown rhs kind '" + text + "' (expected zero, ones or rand)");
}

void ProblemSpec::check() const
{
  if (nx == 0 || ny == 0 || nz == 0)
  {
    throw InvalidArgument("problem: grid extents must be >= 1");
  }
  if (!(a > 0.0) || !(b > 0.0) || !(c > 0.0))
  {
    throw InvalidArgument("problem: anisotropy coefficients must be > 0");
  }
}

CsrMatrix assemble_anisotropic_7pt(const ProblemSpec &spec)
{
  spec.check();
  const std::size_t nx = spec.nx, ny = spec.ny, nz = spec.nz;
  const std::size_t n = spec.size();
  const double diag = 2.0 * (spec.a + spec.b + spec.c);

  CsrMatrix A;
  A.nrows = A.ncols = n;
  A.row_offsets.reserve(n + 1);
  A.col_indices.reserve(7 * n);
  A.values.reserve(7 * n);

  // Neighbors pushed in increasing column order: -z, -y, -x, self, +x, +y, +z.
  for (std::size_t k = 0; k < nz; ++k)
  {
    for (std::size_t j = 0; j < ny; ++j)
    {
      for (std::size_t i = 0; i < nx; ++i)
      {
        const std::size_t row = i + nx * (j + ny * k);
        auto push = [&](std::size_t col, double v) {
          A.col_indices.push_back(col);
          A.values.push_back(v);
        };
        if (k > 0)
        {
          push(row - nx * ny, -spec.c);
        }
        if (j > 0)
        {
          push(row - nx, -spec.b);
        }
        if (i > 0)
        {
          push(row - 1, -spec.a);
        }
        push(row, diag);
        if (i + 1 < nx)
        {
          push(row + 1, -spec.a);
        }
        if (j + 1 < ny)
        {
          push(row + nx, -spec.b);
        }
        if (k + 1 < nz)
        {
          push(row + nx * ny, -spec.c);
        }
        A.row_offsets.push_back(A.col_indices.size());
      }
    }
  }
  return A;
}

Vector random_unit_vector(std::size_t n, std::uint64_t seed)
{
  Rng rng(stream_seed(seed, "rhs"));
  Vector v(n);
  for (double &x : v)
  {
    x = 2.0 * uniform01(rng) - 1.0;
  }
  const double nrm = norm2(v);
  if (nrm > 0.0)
  {
    for (double &x : v)
    {
      x /= nrm;
    }
  }
  return v;
}

Vector make_rhs(const ProblemSpec &spec)
{
  switch (spec.rhs)
  {
    case RhsKind::zero:
      return Vector(spec.size(), 0.0);
    case RhsKind::ones:
      return Vector(spec.size(), 1.0);
    case RhsKind::random:
      return random_unit_vector(spec.size(), spec.rhs_seed);
  }
  return {};
}

}  // namespace flexmg
