// Copyright The flexmg Authors.
// SPDX-License-Identifier: Apache-2.0

#include "flexmg/cycle.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "flexmg/error.hpp"

namespace flexmg
{

std::string_view mnemonic(SmootherKind kind)
{
  switch (kind)
  {
    case SmootherKind::gs_forward:
      return "gsf";
    case SmootherKind::gs_backward:
      return "gsb";
    case SmootherKind::jacobi:
      return "jac";
  }
  return "gsf";
}

std::optional<std::uint8_t> WeightGrid::index_of(double w)
{
  if (!std::isfinite(w))
  {
    return std::nullopt;
  }
  const double idx = std::round((w * 100.0 - 10.0) / 5.0);
  if (idx < 0.0 || idx >= static_cast<double>(size))
  {
    return std::nullopt;
  }
  const auto i = static_cast<std::uint8_t>(idx);
  if (std::abs(value(i) - w) > 1e-9)
  {
    return std::nullopt;
  }
  return i;
}

namespace
{

std::string format_weight(std::uint8_t index)
{
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%.2f", (10.0 + 5.0 * index) / 100.0);
  return buf;
}

std::string token_of(const Step &s)
{
  switch (s.op)
  {
    case StepOp::smooth:
      return "s:" + std::string(mnemonic(s.kind)) + ":" + format_weight(s.weight);
    case StepOp::descend:
      return "d";
    case StepOp::ascend:
      return "u:" + format_weight(s.weight);
    case StepOp::base_v:
      return "bv:" + format_weight(s.weight);
    case StepOp::coarse_solve:
      return "cs";
    case StepOp::noop:
      return "n";
  }
  return "n";
}

}  // namespace

std::size_t deepest_flexible_level(std::size_t hierarchy_depth, std::size_t flex_levels)
{
  const std::size_t levels = std::min(hierarchy_depth, flex_levels);
  return levels == 0 ? 0 : levels - 1;
}

std::vector<Violation> validate_structure(const CycleProgram &program)
{
  std::vector<Violation> out;
  if (program.steps.empty())
  {
    out.push_back({Violation::whole_program, "empty program"});
    return out;
  }
  std::size_t level = 0;
  for (std::size_t i = 0; i < program.steps.size(); ++i)
  {
    const Step &s = program.steps[i];
    if (s.weight >= WeightGrid::size)
    {
      out.push_back({i, "weight index off the grid"});
    }
    if (s.op == StepOp::descend)
    {
      ++level;
    }
    else if (s.op == StepOp::ascend)
    {
      if (level == 0)
      {
        out.push_back({i, "level underflow: ascend on the finest level"});
      }
      else
      {
        --level;
      }
    }
  }
  if (level != 0)
  {
    out.push_back({Violation::whole_program,
                   "final level != 0 (program ends on level " + std::to_string(level) + ")"});
  }
  return out;
}

std::vector<Violation> validate(const CycleProgram &program, std::size_t hierarchy_depth,
                                std::size_t flex_levels)
{
  std::vector<Violation> out;
  if (hierarchy_depth == 0 || flex_levels == 0)
  {
    out.push_back({Violation::whole_program, "hierarchy depth and flex levels must be >= 1"});
    return out;
  }
  if (program.steps.empty())
  {
    out.push_back({Violation::whole_program, "empty program"});
    return out;
  }
  const std::size_t deepest = deepest_flexible_level(hierarchy_depth, flex_levels);
  const bool deep = hierarchy_depth > flex_levels;

  std::size_t level = 0;
  for (std::size_t i = 0; i < program.steps.size(); ++i)
  {
    const Step &s = program.steps[i];
    if (s.weight >= WeightGrid::size)
    {
      out.push_back({i, "weight index off the grid"});
    }
    switch (s.op)
    {
      case StepOp::smooth:
      case StepOp::noop:
        break;
      case StepOp::descend:
        ++level;
        if (level > deepest)
        {
          out.push_back({i, "level exceeds flexible region (level " + std::to_string(level) +
                                " > " + std::to_string(deepest) + ")"});
        }
        break;
      case StepOp::ascend:
        if (level == 0)
        {
          out.push_back({i, "level underflow: ascend on the finest level"});
        }
        else
        {
          --level;
        }
        break;
      case StepOp::base_v:
        if (!deep)
        {
          out.push_back({i, "bv needs a hierarchy deeper than the flexible region"});
        }
        else if (level != flex_levels - 1)
        {
          out.push_back({i, "bv only allowed on level " + std::to_string(flex_levels - 1)});
        }
        break;
      case StepOp::coarse_solve:
        if (deep)
        {
          out.push_back({i, "cs not allowed: coarsest level lies below the flexible region"});
        }
        else if (level != hierarchy_depth - 1)
        {
          out.push_back({i, "cs only allowed on the coarsest level " +
                                std::to_string(hierarchy_depth - 1)});
        }
        break;
    }
  }
  if (level != 0)
  {
    out.push_back({Violation::whole_program,
                   "final level != 0 (program ends on level " + std::to_string(level) + ")"});
  }
  return out;
}

std::vector<int> level_trace(const CycleProgram &program)
{
  std::vector<int> trace;
  trace.reserve(program.steps.size());
  int level = 0;
  for (const Step &s : program.steps)
  {
    if (s.op == StepOp::descend)
    {
      ++level;
    }
    else if (s.op == StepOp::ascend)
    {
      --level;
    }
    trace.push_back(level);
  }
  return trace;
}

std::string describe(const std::vector<Violation> &violations)
{
  std::ostringstream os;
  for (std::size_t k = 0; k < violations.size(); ++k)
  {
    if (k > 0)
    {
      os << "; ";
    }
    if (violations[k].step != Violation::whole_program)
    {
      os << "step " << violations[k].step + 1 << ": ";
    }
    os << violations[k].message;
  }
  return os.str();
}

namespace
{

struct Token
{
  std::string_view text;
  std::size_t line;
  std::size_t column;
};

// Splits into tokens, dropping comments. Lines are numbered from 1.
std::vector<std::vector<Token>> tokenize_lines(std::string_view text)
{
  std::vector<std::vector<Token>> lines;
  std::size_t line_no = 1;
  std::size_t start = 0;
  while (start <= text.size())
  {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos)
    {
      end = text.size();
    }
    std::string_view line = text.substr(start, end - start);
    if (auto hash = line.find('#'); hash != std::string_view::npos)
    {
      line = line.substr(0, hash);
    }
    std::vector<Token> tokens;
    std::size_t i = 0;
    while (i < line.size())
    {
      while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i])))
      {
        ++i;
      }
      const std::size_t tok_start = i;
      while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i])))
      {
        ++i;
      }
      if (i > tok_start)
      {
        tokens.push_back({line.substr(tok_start, i - tok_start), line_no, tok_start + 1});
      }
    }
    lines.push_back(std::move(tokens));
    ++line_no;
    start = end + 1;
  }
  return lines;
}

std::uint8_t parse_weight(std::string_view text, const Token &tok)
{
  double w = 0.0;
  const auto *first = text.data();
  const auto *last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, w);
  if (text.empty() || ec != std::errc() || ptr != last)
  {
    throw ParseError("malformed weight '" + std::string(text) + "' in token '" +
                         std::string(tok.text) + "'",
                     tok.line, tok.column);
  }
  const auto idx = WeightGrid::index_of(w);
  if (!idx)
  {
    throw ParseError("weight " + std::string(text) + " is off the grid 0.10, 0.15, ..., 1.90",
                     tok.line, tok.column);
  }
  return *idx;
}

Step parse_token(const Token &tok)
{
  std::string lower(tok.text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  const std::string_view text = lower;
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true)
  {
    const std::size_t colon = text.find(':', start);
    parts.push_back(text.substr(start, colon - start));
    if (colon == std::string_view::npos)
    {
      break;
    }
    start = colon + 1;
  }
  const std::string_view head = parts[0];
  if (head == "d" && parts.size() == 1)
  {
    return Step::descend();
  }
  if (head == "cs" && parts.size() == 1)
  {
    return Step::coarse_solve();
  }
  if (head == "n" && parts.size() == 1)
  {
    return Step::noop();
  }
  if (head == "u" && parts.size() == 2)
  {
    return Step::ascend(parse_weight(parts[1], tok));
  }
  if (head == "bv" && parts.size() == 2)
  {
    return Step::base_v(parse_weight(parts[1], tok));
  }
  if (head == "s" && parts.size() == 3)
  {
    for (SmootherKind kind : all_smoothers)
    {
      if (parts[1] == mnemonic(kind))
      {
        return Step::smooth(kind, parse_weight(parts[2], tok));
      }
    }
    throw ParseError("unknown smoother '" + std::string(parts[1]) + "'", tok.line, tok.column);
  }
  throw ParseError("unknown token '" + std::string(tok.text) + "'", tok.line, tok.column);
}

CycleProgram parse_tokens(const std::vector<Token> &tokens, std::size_t eof_line,
                          std::size_t eof_column)
{
  CycleProgram p;
  if (tokens.empty())
  {
    throw ParseError("empty program", eof_line, eof_column);
  }
  std::size_t level = 0;
  for (const Token &tok : tokens)
  {
    const Step s = parse_token(tok);
    if (s.op == StepOp::descend)
    {
      ++level;
    }
    else if (s.op == StepOp::ascend)
    {
      if (level == 0)
      {
        throw ParseError("level underflow: ascend on the finest level", tok.line, tok.column);
      }
      --level;
    }
    p.steps.push_back(s);
  }
  if (level != 0)
  {
    const Token &last = tokens.back();
    throw ParseError("final level != 0 (program ends on level " + std::to_string(level) + ")",
                     last.line, last.column + last.text.size());
  }
  return p;
}

}  // namespace

CycleProgram parse_dsl(std::string_view text)
{
  const auto lines = tokenize_lines(text);
  std::vector<Token> tokens;
  for (const auto &line : lines)
  {
    tokens.insert(tokens.end(), line.begin(), line.end());
  }
  return parse_tokens(tokens, lines.size(), 1);
}

std::vector<CycleProgram> parse_dsl_lines(std::string_view text)
{
  std::vector<CycleProgram> out;
  for (const auto &line : tokenize_lines(text))
  {
    if (!line.empty())
    {
      out.push_back(parse_tokens(line, line.front().line, 1));
    }
  }
  return out;
}

std::string emit_dsl(const CycleProgram &program)
{
  std::string out;
  for (const Step &s : program.steps)
  {
    if (!out.empty())
    {
      out += ' ';
    }
    out += token_of(s);
  }
  return out;
}

CycleProgram standard_cycle(std::size_t pre_sweeps, std::size_t post_sweeps, SmootherKind pre,
                            SmootherKind post, std::uint8_t weight, std::size_t hierarchy_depth,
                            std::size_t flex_levels)
{
  if (hierarchy_depth == 0 || flex_levels == 0)
  {
    throw InvalidArgument("standard_cycle: hierarchy depth and flex levels must be >= 1");
  }
  CycleProgram p;
  p.flex_levels = flex_levels;
  p.hierarchy_depth = hierarchy_depth;
  const bool deep = hierarchy_depth > flex_levels;

  auto build = [&](auto &self, std::size_t level) -> void {
    if (!deep && level == hierarchy_depth - 1)
    {
      p.steps.push_back(Step::coarse_solve());
      return;
    }
    for (std::size_t k = 0; k < pre_sweeps; ++k)
    {
      p.steps.push_back(Step::smooth(pre, weight));
    }
    if (deep && level == flex_levels - 1)
    {
      p.steps.push_back(Step::base_v(WeightGrid::unit));
    }
    else
    {
      p.steps.push_back(Step::descend());
      self(self, level + 1);
      p.steps.push_back(Step::ascend(WeightGrid::unit));
    }
    for (std::size_t k = 0; k < post_sweeps; ++k)
    {
      p.steps.push_back(Step::smooth(post, weight));
    }
  };
  build(build, 0);
  return p;
}

CycleProgram v_cycle(std::size_t pre_sweeps, std::size_t post_sweeps, std::size_t hierarchy_depth,
                     std::size_t flex_levels)
{
  return standard_cycle(pre_sweeps, post_sweeps, SmootherKind::gs_forward,
                        SmootherKind::gs_backward, WeightGrid::unit, hierarchy_depth,
                        flex_levels);
}

std::vector<CycleProgram> enumerate_programs(const EnumerationBounds &bounds)
{
  if (bounds.max_steps > 6 || bounds.hierarchy_depth > 2 || bounds.kinds.size() > 1 ||
      bounds.weights.size() > 1)
  {
    throw InvalidArgument(
        "enumerate_programs: bounds limited to 6 steps, 2 levels, 1 smoother, 1 weight");
  }
  if (bounds.max_steps == 0 || bounds.hierarchy_depth == 0)
  {
    return {};
  }

  std::vector<Step> alphabet;
  for (SmootherKind k : bounds.kinds)
  {
    for (std::uint8_t w : bounds.weights)
    {
      alphabet.push_back(Step::smooth(k, w));
    }
  }
  alphabet.push_back(Step::noop());
  alphabet.push_back(Step::coarse_solve());
  alphabet.push_back(Step::descend());
  for (std::uint8_t w : bounds.weights)
  {
    alphabet.push_back(Step::ascend(w));
    alphabet.push_back(Step::base_v(w));
  }

  std::vector<CycleProgram> out;
  for (std::size_t len = 1; len <= bounds.max_steps; ++len)
  {
    std::vector<std::size_t> digits(len, 0);
    while (true)
    {
      CycleProgram p;
      p.flex_levels = bounds.flex_levels;
      p.hierarchy_depth = bounds.hierarchy_depth;
      for (std::size_t d : digits)
      {
        p.steps.push_back(alphabet[d]);
      }
      if (validate(p, bounds.hierarchy_depth, bounds.flex_levels).empty())
      {
        out.push_back(std::move(p));
      }
      std::size_t pos = len;
      while (pos > 0 && ++digits[pos - 1] == alphabet.size())
      {
        digits[--pos] = 0;
      }
      if (pos == 0)
      {
        break;
      }
    }
  }
  return out;
}

std::string to_dot(const CycleProgram &program)
{
  std::ostringstream os;
  os << "digraph cycle {\n";
  os << "  node [shape=circle, style=filled, fixedsize=true, width=0.5, fontsize=10];\n";
  os << "  edge [arrowsize=0.6];\n";

  const auto trace = level_trace(program);
  for (std::size_t i = 0; i < program.steps.size(); ++i)
  {
    const Step &s = program.steps[i];
    // base_v is drawn one level below the step that invokes it
    const int level = s.op == StepOp::base_v ? trace[i] + 1 : trace[i];
    os << "  s" << i << " [pos=\"" << i << "," << -level << "!\"";
    switch (s.op)
    {
      case StepOp::smooth:
      {
        const char *color = s.kind == SmootherKind::gs_forward    ? "yellow"
                            : s.kind == SmootherKind::gs_backward ? "red"
                                                                  : "purple";
        os << ", fillcolor=" << color << ", label=\"" << format_weight(s.weight) << "\"";
        break;
      }
      case StepOp::coarse_solve:
        os << ", fillcolor=black, fontcolor=white, label=\"\"";
        break;
      case StepOp::noop:
        os << ", fillcolor=white, label=\"\"";
        break;
      case StepOp::base_v:
        os << ", fillcolor=gray, shape=invtriangle, label=\"V\\n" << format_weight(s.weight) << "\"";
        break;
      case StepOp::descend:
      case StepOp::ascend:
        os << ", shape=point, width=0.08, fillcolor=black, label=\"\"";
        break;
    }
    os << "];\n";
  }
  for (std::size_t i = 1; i < program.steps.size(); ++i)
  {
    const Step &s = program.steps[i];
    const Step &prev = program.steps[i - 1];
    os << "  s" << i - 1 << " -> s" << i;
    std::vector<std::string> attrs;
    if (s.op == StepOp::ascend)
    {
      attrs.push_back("label=\"" + format_weight(s.weight) + "\"");
    }
    if (s.op == StepOp::base_v || prev.op == StepOp::base_v)
    {
      attrs.push_back("style=dotted");
    }
    if (!attrs.empty())
    {
      os << " [";
      for (std::size_t k = 0; k < attrs.size(); ++k)
      {
        os << (k ? ", " : "") << attrs[k];
      }
      os << "]";
    }
    os << ";\n";
  }
  os << "}\n";
  return os.str();
}

}  // namespace flexmg
