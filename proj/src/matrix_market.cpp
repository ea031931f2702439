// Copyright The flexmg Authors.
// SPDX-License-Identifier: Apache-2.0

#include "flexmg/matrix_market.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <tuple>
#include <vector>

#include "flexmg/error.hpp"

namespace flexmg
{

void write_matrix_market(std::ostream &os, const CsrMatrix &A)
{
  os << "%%MatrixMarket matrix coordinate real general\n";
  os << A.nrows << ' ' << A.ncols << ' ' << A.nnz() << '\n';
  os << std::setprecision(17);
  for (std::size_t i = 0; i < A.nrows; ++i)
  {
    for (std::size_t k = A.row_offsets[i]; k < A.row_offsets[i + 1]; ++k)
    {
      os << i + 1 << ' ' << A.col_indices[k] + 1 << ' ' << A.values[k] << '\n';
    }
  }
}

void write_matrix_market(const std::string &path, const CsrMatrix &A)
{
  std::ofstream os(path);
  if (!os)
  {
    throw IoError("cannot open '" + path + "' for writing");
  }
  write_matrix_market(os, A);
  if (!os)
  {
    throw IoError("write to '" + path + "' failed");
  }
}

CsrMatrix read_matrix_market(std::istream &is)
{
  std::string line;
  if (!std::getline(is, line))
  {
    throw IoError("matrix market: empty input");
  }
  std::string lower = line;
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  std::istringstream header(lower);
  std::string banner, object, format, field, symmetry;
  header >> banner >> object >> format >> field >> symmetry;
  if (banner != "%%matrixmarket" || object != "matrix" || format != "coordinate")
  {
    throw IoError("matrix market: unsupported header '" + line + "'");
  }
  if (field != "real" && field != "double" && field != "integer")
  {
    throw IoError("matrix market: unsupported field '" + field + "'");
  }
  const bool symmetric = symmetry == "symmetric";
  if (!symmetric && symmetry != "general")
  {
    throw IoError("matrix market: unsupported symmetry '" + symmetry + "'");
  }

  while (std::getline(is, line) && (line.empty() || line[0] == '%'))
  {
  }
  std::size_t nrows = 0, ncols = 0, nnz = 0;
  {
    std::istringstream dims(line);
    if (!(dims >> nrows >> ncols >> nnz))
    {
      throw IoError("matrix market: bad size line '" + line + "'");
    }
  }

  std::vector<std::tuple<std::size_t, std::size_t, double>> entries;
  entries.reserve(symmetric ? 2 * nnz : nnz);
  for (std::size_t e = 0; e < nnz; ++e)
  {
    std::size_t i = 0, j = 0;
    double v = 0.0;
    if (!(is >> i >> j >> v))
    {
      throw IoError("matrix market: expected " + std::to_string(nnz) + " entries, read " +
                    std::to_string(e));
    }
    if (i == 0 || j == 0 || i > nrows || j > ncols)
    {
      throw IoError("matrix market: entry index out of range");
    }
    entries.emplace_back(i - 1, j - 1, v);
    if (symmetric && i != j)
    {
      entries.emplace_back(j - 1, i - 1, v);
    }
  }
  return CsrMatrix::from_triplets(nrows, ncols, std::move(entries));
}

CsrMatrix read_matrix_market(const std::string &path)
{
  std::ifstream is(path);
  if (!is)
  {
    throw IoError("cannot open '" + path + "'");
  }
  return read_matrix_market(is);
}

}  // namespace flexmg
