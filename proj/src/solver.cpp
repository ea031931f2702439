// Copyright The flexmg Authors.
// SPDX-License-Identifier: Apache-2.0

#include "flexmg/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>

#include "flexmg/error.hpp"
#include "flexmg/rng.hpp"
#include "json.hpp"

namespace flexmg
{

EvalContext::EvalContext(const AmgHierarchy &h)
{
  x.resize(h.depth());
  f.resize(h.depth());
  r.resize(h.depth());
  for (std::size_t l = 0; l < h.depth(); ++l)
  {
    const std::size_t n = h.levels[l].size();
    r[l].assign(n, 0.0);
    // level 0 iterates live in caller storage
    if (l > 0)
    {
      x[l].assign(n, 0.0);
      f[l].assign(n, 0.0);
    }
  }
}

void smooth_jacobi(const CsrMatrix &A, std::span<const std::size_t> diag, std::span<double> x,
                   std::span<const double> f, double omega, std::span<double> scratch)
{
  residual(A, x, f, scratch);
  for (std::size_t i = 0; i < A.nrows; ++i)
  {
    x[i] += omega * scratch[i] / A.values[diag[i]];
  }
}

void smooth_gs_forward(const CsrMatrix &A, std::span<const std::size_t> diag,
                       std::span<double> x, std::span<const double> f, double omega)
{
  for (std::size_t i = 0; i < A.nrows; ++i)
  {
    double s = f[i];
    for (std::size_t k = A.row_offsets[i]; k < A.row_offsets[i + 1]; ++k)
    {
      s -= A.values[k] * x[A.col_indices[k]];
    }
    x[i] += omega * s / A.values[diag[i]];
  }
}

void smooth_gs_backward(const CsrMatrix &A, std::span<const std::size_t> diag,
                        std::span<double> x, std::span<const double> f, double omega)
{
  for (std::size_t i = A.nrows; i-- > 0;)
  {
    double s = f[i];
    for (std::size_t k = A.row_offsets[i]; k < A.row_offsets[i + 1]; ++k)
    {
      s -= A.values[k] * x[A.col_indices[k]];
    }
    x[i] += omega * s / A.values[diag[i]];
  }
}

namespace
{

void check_square(const CsrMatrix &A, std::span<const double> x, std::span<const double> f)
{
  if (A.nrows != A.ncols || x.size() != A.nrows || f.size() != A.nrows)
  {
    throw DimensionMismatch("smoother: operator and vectors disagree in size");
  }
}

}  // namespace

Vector smooth_jacobi(const CsrMatrix &A, std::span<const double> x, std::span<const double> f,
                     double omega)
{
  check_square(A, x, f);
  Vector out(x.begin(), x.end());
  Vector scratch(A.nrows);
  smooth_jacobi(A, A.diagonal_positions(), out, f, omega, scratch);
  return out;
}

Vector smooth_gs_forward(const CsrMatrix &A, std::span<const double> x,
                         std::span<const double> f, double omega)
{
  check_square(A, x, f);
  Vector out(x.begin(), x.end());
  smooth_gs_forward(A, A.diagonal_positions(), out, f, omega);
  return out;
}

Vector smooth_gs_backward(const CsrMatrix &A, std::span<const double> x,
                          std::span<const double> f, double omega)
{
  check_square(A, x, f);
  Vector out(x.begin(), x.end());
  smooth_gs_backward(A, A.diagonal_positions(), out, f, omega);
  return out;
}

namespace
{

// Executes steps against level-indexed views; level 0 aliases the caller's
// vectors.
class Interpreter
{
public:
  Interpreter(const AmgHierarchy &h, EvalContext &ctx, std::span<const double> f,
              std::span<double> x)
    : h_(h), ctx_(ctx), f0_(f), x0_(x)
  {
  }

  void run(const CycleProgram &program)
  {
    std::size_t level = 0;
    for (const Step &s : program.steps)
    {
      switch (s.op)
      {
        case StepOp::smooth:
          smooth(level, s.kind, s.omega());
          break;
        case StepOp::descend:
          restrict_residual(level);
          ++level;
          break;
        case StepOp::ascend:
          --level;
          interpolate_add(level, s.omega());
          break;
        case StepOp::base_v:
          restrict_residual(level);
          fixed_v(level + 1);
          interpolate_add(level, s.omega());
          break;
        case StepOp::coarse_solve:
          dense_lu_solve(h_.coarse_factor, f(level), x(level));
          break;
        case StepOp::noop:
          break;
      }
    }
  }

private:
  std::span<double> x(std::size_t l) { return l == 0 ? x0_ : std::span<double>(ctx_.x[l]); }
  std::span<const double> f(std::size_t l)
  {
    return l == 0 ? f0_ : std::span<const double>(ctx_.f[l]);
  }

  void smooth(std::size_t l, SmootherKind kind, double omega)
  {
    const AmgLevel &lvl = h_.levels[l];
    switch (kind)
    {
      case SmootherKind::gs_forward:
        smooth_gs_forward(lvl.A, lvl.diag, x(l), f(l), omega);
        break;
      case SmootherKind::gs_backward:
        smooth_gs_backward(lvl.A, lvl.diag, x(l), f(l), omega);
        break;
      case SmootherKind::jacobi:
        smooth_jacobi(lvl.A, lvl.diag, x(l), f(l), omega, ctx_.r[l]);
        break;
    }
  }

  // f_{l+1} = R_l (f_l - A_l x_l), x_{l+1} = 0
  void restrict_residual(std::size_t l)
  {
    const AmgLevel &lvl = h_.levels[l];
    residual(lvl.A, x(l), f(l), ctx_.r[l]);
    spmv(lvl.R, ctx_.r[l], ctx_.f[l + 1]);
    std::fill(ctx_.x[l + 1].begin(), ctx_.x[l + 1].end(), 0.0);
  }

  // x_l += omega P_l x_{l+1}
  void interpolate_add(std::size_t l, double omega)
  {
    const CsrMatrix &P = h_.levels[l].P;
    const std::span<double> xf = x(l);
    const Vector &xc = ctx_.x[l + 1];
    for (std::size_t i = 0; i < P.nrows; ++i)
    {
      double s = 0.0;
      for (std::size_t k = P.row_offsets[i]; k < P.row_offsets[i + 1]; ++k)
      {
        s += P.values[k] * xc[P.col_indices[k]];
      }
      xf[i] += omega * s;
    }
  }

  void fixed_v(std::size_t l)
  {
    if (l + 1 == h_.depth())
    {
      dense_lu_solve(h_.coarse_factor, f(l), x(l));
      return;
    }
    smooth(l, SmootherKind::gs_forward, 1.0);
    restrict_residual(l);
    fixed_v(l + 1);
    interpolate_add(l, 1.0);
    smooth(l, SmootherKind::gs_backward, 1.0);
  }

  const AmgHierarchy &h_;
  EvalContext &ctx_;
  std::span<const double> f0_;
  std::span<double> x0_;
};

double seconds_since(std::chrono::steady_clock::time_point start)
{
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

void apply_program(const AmgHierarchy &h, const CycleProgram &program, EvalContext &ctx,
                   std::span<const double> f, std::span<double> x)
{
  if (h.depth() == 0 || f.size() != h.levels[0].size() || x.size() != h.levels[0].size())
  {
    throw DimensionMismatch("apply_program: vectors do not match the finest level");
  }
  if (ctx.r.size() != h.depth())
  {
    throw DimensionMismatch("apply_program: evaluation context built for another hierarchy");
  }
  if (const auto errors = validate(program, h.depth(), program.flex_levels); !errors.empty())
  {
    throw InvalidArgument("program does not fit the hierarchy: " + describe(errors));
  }
  Interpreter(h, ctx, f, x).run(program);
}

std::string SolveResult::to_json() const
{
  nlohmann::ordered_json j;
  j["iterations"] = iterations;
  j["converged"] = converged;
  j["conv_factor"] = conv_factor;
  j["wall_time_s"] = wall_time;
  j["work_units"] = work_units;
  j["residuals"] = residual_history;
  if (diverged)
  {
    j["diverged"] = true;
  }
  if (breakdown)
  {
    j["breakdown"] = true;
  }
  return j.dump();
}

namespace
{

double rate(double rk, double r0, std::size_t k)
{
  if (k == 0)
  {
    return 1.0;
  }
  const double q = std::pow(rk / r0, 1.0 / static_cast<double>(k));
  return std::isfinite(q) ? q : std::numeric_limits<double>::infinity();
}

}  // namespace

SolveResult solve(const AmgHierarchy &h, const CycleProgram &program, std::span<const double> f,
                  std::span<double> x, const SolveOptions &options)
{
  const auto start = std::chrono::steady_clock::now();
  const CsrMatrix &A = h.levels.at(0).A;
  EvalContext ctx(h);
  Vector r(A.nrows);
  residual(A, x, f, r);
  const double r0 = norm2(r);

  SolveResult res;
  res.residual_history.push_back(r0);
  if (r0 == 0.0)
  {
    res.converged = true;
    res.conv_factor = 0.0;
    res.wall_time = seconds_since(start);
    return res;
  }
  const double wu = work_units(program, h);

  double rk = r0;
  while (res.iterations < options.max_iter)
  {
    apply_program(h, program, ctx, f, x);
    ++res.iterations;
    residual(A, x, f, r);
    rk = norm2(r);
    res.residual_history.push_back(rk);
    if (!std::isfinite(rk) || rk > options.divergence_factor * r0)
    {
      res.diverged = true;
      break;
    }
    if (rk <= options.tol * r0)
    {
      res.converged = true;
      break;
    }
  }
  res.conv_factor = rate(rk, r0, res.iterations);
  res.work_units = wu * static_cast<double>(res.iterations);
  res.wall_time = seconds_since(start);
  return res;
}

SolveResult pcg(const AmgHierarchy &h, const CycleProgram *program, std::span<const double> f,
                std::span<double> x, const SolveOptions &options)
{
  const auto start = std::chrono::steady_clock::now();
  const CsrMatrix &A = h.levels.at(0).A;
  const std::size_t n = A.nrows;
  if (f.size() != n || x.size() != n)
  {
    throw DimensionMismatch("pcg: vectors do not match the operator");
  }

  std::optional<EvalContext> ctx;
  if (program != nullptr)
  {
    if (const auto errors = validate(*program, h.depth(), program->flex_levels); !errors.empty())
    {
      throw InvalidArgument("preconditioner does not fit the hierarchy: " + describe(errors));
    }
    ctx.emplace(h);
  }
  auto precondition = [&](std::span<const double> r, std::span<double> z) {
    if (program == nullptr)
    {
      std::copy(r.begin(), r.end(), z.begin());
      return;
    }
    std::fill(z.begin(), z.end(), 0.0);
    apply_program(h, *program, *ctx, r, z);
  };

  SolveResult res;
  Vector r(n), z(n), p(n), q(n), r_prev;
  residual(A, x, f, r);
  const double r0 = norm2(r);
  res.residual_history.push_back(r0);
  if (r0 == 0.0)
  {
    res.converged = true;
    res.conv_factor = 0.0;
    res.wall_time = seconds_since(start);
    return res;
  }

  precondition(r, z);
  p = z;
  double rz = dot(r, z);
  double rk = r0;
  while (res.iterations < options.max_iter)
  {
    spmv(A, p, q);
    const double pq = dot(p, q);
    if (!(pq > 0.0) || !std::isfinite(rz))
    {
      res.breakdown = true;
      break;
    }
    const double alpha = rz / pq;
    axpy_inplace(alpha, p, x);
    if (options.flexible)
    {
      r_prev = r;
    }
    axpy_inplace(-alpha, q, r);
    ++res.iterations;
    rk = norm2(r);
    res.residual_history.push_back(rk);
    if (!std::isfinite(rk) || rk > options.divergence_factor * r0)
    {
      res.diverged = true;
      break;
    }
    if (rk <= options.tol * r0)
    {
      res.converged = true;
      break;
    }
    precondition(r, z);
    const double rz_new = dot(r, z);
    double beta = rz_new / rz;
    if (options.flexible)
    {
      double num = rz_new;
      for (std::size_t i = 0; i < n; ++i)
      {
        num -= z[i] * r_prev[i];
      }
      beta = num / rz;
    }
    rz = rz_new;
    for (std::size_t i = 0; i < n; ++i)
    {
      p[i] = z[i] + beta * p[i];
    }
  }
  res.conv_factor = rate(rk, r0, res.iterations);
  const double per_iter = 1.0 + (program ? work_units(*program, h) : 0.0);
  res.work_units = per_iter * static_cast<double>(res.iterations);
  res.wall_time = seconds_since(start);
  return res;
}

double base_v_work_units(const AmgHierarchy &h, std::size_t level)
{
  const double nnz0 = static_cast<double>(h.levels[0].A.nnz());
  if (level + 1 == h.depth())
  {
    const double nc = static_cast<double>(h.levels[level].size());
    return 2.0 * nc * nc / nnz0;
  }
  const AmgLevel &lvl = h.levels[level];
  const double smooth = static_cast<double>(lvl.A.nnz()) / nnz0;
  const double down = static_cast<double>(lvl.A.nnz() + lvl.R.nnz()) / nnz0;
  const double up = static_cast<double>(lvl.P.nnz()) / nnz0;
  return 2.0 * smooth + down + base_v_work_units(h, level + 1) + up;
}

double work_units(const CycleProgram &program, const AmgHierarchy &h)
{
  const double nnz0 = static_cast<double>(h.levels.at(0).A.nnz());
  double total = 0.0;
  std::size_t level = 0;
  for (const Step &s : program.steps)
  {
    const AmgLevel &lvl = h.levels.at(level);
    switch (s.op)
    {
      case StepOp::smooth:
        total += static_cast<double>(lvl.A.nnz()) / nnz0;
        break;
      case StepOp::descend:
        total += static_cast<double>(lvl.A.nnz() + lvl.R.nnz()) / nnz0;
        ++level;
        break;
      case StepOp::ascend:
        --level;
        total += static_cast<double>(h.levels.at(level).P.nnz()) / nnz0;
        break;
      case StepOp::base_v:
        total += static_cast<double>(lvl.A.nnz() + lvl.R.nnz()) / nnz0;
        total += base_v_work_units(h, level + 1);
        total += static_cast<double>(lvl.P.nnz()) / nnz0;
        break;
      case StepOp::coarse_solve:
      {
        const double nc = static_cast<double>(h.coarsest().size());
        total += 2.0 * nc * nc / nnz0;
        break;
      }
      case StepOp::noop:
        break;
    }
  }
  return total;
}

DenseMatrix error_propagation_dense(const AmgHierarchy &h, const CycleProgram &program)
{
  const std::size_t n = h.levels.at(0).size();
  if (n > max_dense_oracle_size)
  {
    throw InvalidArgument("error_propagation_dense: fine level has " + std::to_string(n) +
                          " rows, limit is " + std::to_string(max_dense_oracle_size));
  }
  DenseMatrix E(n, n);
  EvalContext ctx(h);
  const Vector zero(n, 0.0);
  Vector x(n);
  for (std::size_t j = 0; j < n; ++j)
  {
    std::fill(x.begin(), x.end(), 0.0);
    x[j] = 1.0;
    apply_program(h, program, ctx, zero, x);
    for (std::size_t i = 0; i < n; ++i)
    {
      E(i, j) = x[i];
    }
  }
  return E;
}

double spectral_radius(const DenseMatrix &E, std::size_t max_iter, double tol)
{
  if (E.rows != E.cols)
  {
    throw DimensionMismatch("spectral_radius: matrix is not square");
  }
  const std::size_t n = E.rows;
  if (n == 0 || max_iter == 0)
  {
    return 0.0;
  }
  Rng rng(stream_seed(0, "power-iteration"));
  Vector v(n), w(n);
  for (double &t : v)
  {
    t = uniform01(rng) + 0.5;
  }
  double nv = norm2(v);
  for (double &t : v)
  {
    t /= nv;
  }

  std::vector<double> growth;
  growth.reserve(max_iter);
  for (std::size_t k = 0; k < max_iter; ++k)
  {
    for (std::size_t i = 0; i < n; ++i)
    {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j)
      {
        s += E(i, j) * v[j];
      }
      w[i] = s;
    }
    const double g = norm2(w);
    if (g == 0.0)
    {
      return 0.0;
    }
    growth.push_back(g);
    for (std::size_t i = 0; i < n; ++i)
    {
      v[i] = w[i] / g;
    }
    // A real dominant eigenvalue shows up as a settled growth factor.
    if (k >= 10)
    {
      bool settled = true;
      for (std::size_t m = k - 9; m <= k && settled; ++m)
      {
        settled = std::abs(growth[m] - growth[m - 1]) <= tol * std::max(1.0, growth[m]);
      }
      if (settled)
      {
        return g;
      }
    }
  }
  const std::size_t half = growth.size() / 2;
  double log_sum = 0.0;
  for (std::size_t k = half; k < growth.size(); ++k)
  {
    log_sum += std::log(growth[k]);
  }
  return std::exp(log_sum / static_cast<double>(growth.size() - half));
}

FitnessPair evaluate_fitness(const AmgHierarchy &h, const CycleProgram &program,
                             std::span<const double> f, std::span<const double> x0,
                             const FitnessOptions &options)
{
  try
  {
    Vector x(x0.begin(), x0.end());
    SolveOptions so;
    so.tol = options.tol;
    so.max_iter = options.max_iter;
    so.flexible = options.flexible_cg;
    const SolveResult res = options.mode == SolverMode::solver ? solve(h, program, f, x, so)
                                                               : pcg(h, &program, f, x, so);
    if (res.diverged || res.breakdown || res.iterations == 0 ||
        !std::isfinite(res.conv_factor) || res.conv_factor >= 1.0)
    {
      return FitnessPair::penalized();
    }
    FitnessPair fit;
    fit.penalty = false;
    fit.conv_factor = res.conv_factor;
    const double iters = static_cast<double>(res.iterations);
    fit.cost_per_iter = options.fitness == FitnessMode::work_units ? res.work_units / iters
                                                                   : res.wall_time / iters;
    return fit;
  }
  catch (const std::exception &)
  {
    return FitnessPair::penalized();
  }
}

}  // namespace flexmg
