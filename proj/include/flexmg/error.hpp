// Copyright The flexmg Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef FLEXMG_ERROR_HPP
#define FLEXMG_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace flexmg
{

// Precondition violated by the caller (bad extents, bad parameters).
class InvalidArgument : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

class DimensionMismatch : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

class SingularMatrix : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

// Hierarchy construction failed (coarsening stall, oversized coarse level).
class SetupError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

// DSL or config text could not be parsed. Line and column are 1-based.
class ParseError : public std::runtime_error
{
public:
  ParseError(const std::string &msg, std::size_t line, std::size_t column)
    : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) + ": " + msg),
      line_(line), column_(column)
  {
  }

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

private:
  std::size_t line_;
  std::size_t column_;
};

}  // namespace flexmg

#endif  // FLEXMG_ERROR_HPP
