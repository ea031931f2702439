// Copyright The flexmg Authors.
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "flexmg/cycle.hpp"
#include "flexmg/error.hpp"
#include "flexmg/grammar.hpp"
#include "flexmg/problem.hpp"
#include "flexmg/rng.hpp"
#include "flexmg/setup.hpp"
#include "flexmg/solver.hpp"
#include "oracle.hpp"

using namespace flexmg;

namespace
{

CsrMatrix grid(std::size_t n, double a = 1.0)
{
  ProblemSpec s;
  s.nx = s.ny = s.nz = n;
  s.a = a;
  return assemble_anisotropic_7pt(s);
}

AmgHierarchy hierarchy(const CsrMatrix &A, std::size_t max_levels, std::size_t coarse_max = 1)
{
  SetupParams p;
  p.max_levels = max_levels;
  p.coarse_max_size = coarse_max;
  return build_hierarchy(A, p);
}

std::vector<double> random_vector(std::mt19937_64 &gen, std::size_t n)
{
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  std::vector<double> v(n);
  for (auto &x : v)
  {
    x = d(gen);
  }
  return v;
}

double max_diff(std::span<const double> a, std::span<const double> b)
{
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
  {
    m = std::max(m, std::abs(a[i] - b[i]));
  }
  return m;
}

oracle::Dense from(const DenseMatrix &M)
{
  oracle::Dense D(M.rows, M.cols);
  D.a = M.data;
  return D;
}

oracle::Dense identity(std::size_t n)
{
  oracle::Dense I(n, n);
  for (std::size_t i = 0; i < n; ++i)
  {
    I(i, i) = 1.0;
  }
  return I;
}

// Column j of M^{-1} B by Gauss-Jordan.
oracle::Dense solve_columns(const oracle::Dense &M, const oracle::Dense &B)
{
  oracle::Dense X(B.rows, B.cols);
  for (std::size_t j = 0; j < B.cols; ++j)
  {
    std::vector<double> col(B.rows);
    for (std::size_t i = 0; i < B.rows; ++i)
    {
      col[i] = B(i, j);
    }
    const auto x = oracle::solve(M, col);
    for (std::size_t i = 0; i < B.rows; ++i)
    {
      X(i, j) = x[i];
    }
  }
  return X;
}

// One weighted Gauss-Seidel sweep written out on the dense matrix.
std::vector<double> dense_gs(const oracle::Dense &A, std::vector<double> x,
                             const std::vector<double> &f, double w, bool forward)
{
  const std::size_t n = A.rows;
  for (std::size_t s = 0; s < n; ++s)
  {
    const std::size_t i = forward ? s : n - 1 - s;
    double r = f[i];
    for (std::size_t j = 0; j < n; ++j)
    {
      r -= A(i, j) * x[j];
    }
    x[i] += w * r / A(i, i);
  }
  return x;
}

std::vector<double> run(const AmgHierarchy &h, const CycleProgram &p, std::span<const double> f,
                        std::vector<double> x)
{
  EvalContext ctx(h);
  apply_program(h, p, ctx, f, x);
  return x;
}

}  // namespace

TEST_CASE("jacobi examples")
{
  const CsrMatrix D = CsrMatrix::from_triplets(1, 1, {{0, 0, 2.0}});
  const std::vector<double> f{2.0}, x0{0.0};
  CHECK(smooth_jacobi(D, x0, f, 1.0)[0] == doctest::Approx(1.0));

  std::mt19937_64 gen(1);
  const CsrMatrix A = oracle::poisson_1d(8);
  const auto x = random_vector(gen, 8);
  const auto b = random_vector(gen, 8);
  CHECK(max_diff(smooth_jacobi(A, x, b, 0.0), x) == 0.0);

  const std::vector<double> zero(8, 0.0);
  const oracle::Dense Ad = oracle::dense(A);
  for (double w : {0.5, 2.0 / 3.0, 1.0, 1.3})
  {
    oracle::Dense S = identity(8);
    for (std::size_t i = 0; i < 8; ++i)
    {
      for (std::size_t j = 0; j < 8; ++j)
      {
        S(i, j) -= w * Ad(i, j) / Ad(i, i);
      }
    }
    CHECK(max_diff(smooth_jacobi(A, x, zero, w), oracle::matvec(S, x)) < 1e-14);
  }
}

TEST_CASE("gauss-seidel examples")
{
  const CsrMatrix D = CsrMatrix::from_triplets(3, 3, {{0, 0, 2.0}, {1, 1, 4.0}, {2, 2, 0.5}});
  const std::vector<double> f{2.0, 2.0, 3.0}, x0{7.0, -1.0, 0.25};
  using Sweep = Vector (*)(const CsrMatrix &, std::span<const double>, std::span<const double>, double);
  for (Sweep sweep : {static_cast<Sweep>(&smooth_gs_forward), static_cast<Sweep>(&smooth_gs_backward)})
  {
    const Vector x = sweep(D, x0, f, 1.0);
    CHECK(x[0] == doctest::Approx(1.0));
    CHECK(x[1] == doctest::Approx(0.5));
    CHECK(x[2] == doctest::Approx(6.0));
  }

  const CsrMatrix T = CsrMatrix::from_triplets(2, 2, {{0, 0, 2.0}, {0, 1, -1.0}, {1, 0, -1.0}, {1, 1, 2.0}});
  const Vector y = smooth_gs_forward(T, std::vector<double>{0.0, 0.0}, std::vector<double>{1.0, 1.0}, 1.0);
  CHECK(y[0] == doctest::Approx(0.5));
  CHECK(y[1] == doctest::Approx(0.75));
}

TEST_CASE("gauss-seidel error propagation matches the dense operators")
{
  const CsrMatrix A = oracle::poisson_1d(8);
  const oracle::Dense Ad = oracle::dense(A);
  oracle::Dense lower(8, 8), upper(8, 8);
  for (std::size_t i = 0; i < 8; ++i)
  {
    for (std::size_t j = 0; j < 8; ++j)
    {
      (j <= i ? lower : upper)(i, j) = Ad(i, j);
      if (i == j)
      {
        upper(i, j) = Ad(i, j);
      }
    }
  }
  oracle::Dense Ef = identity(8), Eb = identity(8);
  const oracle::Dense Lf = solve_columns(lower, Ad), Lb = solve_columns(upper, Ad);
  for (std::size_t k = 0; k < 64; ++k)
  {
    Ef.a[k] -= Lf.a[k];
    Eb.a[k] -= Lb.a[k];
  }
  std::mt19937_64 gen(2);
  const std::vector<double> zero(8, 0.0);
  for (int t = 0; t < 5; ++t)
  {
    const auto e = random_vector(gen, 8);
    CHECK(max_diff(smooth_gs_forward(A, e, zero, 1.0), oracle::matvec(Ef, e)) < 1e-13);
    CHECK(max_diff(smooth_gs_backward(A, e, zero, 1.0), oracle::matvec(Eb, e)) < 1e-13);
  }

  std::mt19937_64 g2(3);
  const CsrMatrix R = oracle::random_spd(g2, 12, 0.3);
  const oracle::Dense Rd = oracle::dense(R);
  for (double w : {0.35, 0.8, 1.45})
  {
    const auto x = random_vector(gen, 12);
    const auto f = random_vector(gen, 12);
    CHECK(max_diff(smooth_gs_forward(R, x, f, w), dense_gs(Rd, x, f, w, true)) < 1e-13);
    CHECK(max_diff(smooth_gs_backward(R, x, f, w), dense_gs(Rd, x, f, w, false)) < 1e-13);
  }
}

TEST_CASE("apply_program examples")
{
  const CsrMatrix A = oracle::poisson_1d(15);
  const AmgHierarchy h = hierarchy(A, 2);
  REQUIRE(h.depth() == 2);
  std::mt19937_64 gen(4);
  const auto f = random_vector(gen, 15);
  const auto x = random_vector(gen, 15);

  CHECK(run(h, parse_dsl("n"), f, x) == x);

  const std::vector<double> zero(15, 0.0);
  const auto y = run(h, parse_dsl("d cs u:1.00"), f, zero);
  const oracle::Dense P = oracle::dense(h.levels[0].P);
  const oracle::Dense Ac = oracle::matmul(oracle::matmul(oracle::transpose(P), oracle::dense(A)), P);
  const auto rc = oracle::matvec(oracle::transpose(P), f);
  const auto expect = oracle::matvec(P, oracle::solve(Ac, rc));
  CHECK(max_diff(y, expect) < 1e-12);

  const auto half = run(h, parse_dsl("d cs u:0.50"), f, zero);
  for (std::size_t i = 0; i < 15; ++i)
  {
    CHECK(half[i] == doctest::Approx(0.5 * expect[i]).epsilon(1e-12));
  }

  CHECK_THROWS_AS(run(h, parse_dsl("d d cs u:1.00 u:1.00"), f, zero), InvalidArgument);
}

TEST_CASE("error propagation oracle examples")
{
  const CsrMatrix A = oracle::poisson_1d(20);
  const AmgHierarchy h = hierarchy(A, 3);
  const oracle::Dense I = identity(20);
  CHECK(oracle::max_abs_diff(from(error_propagation_dense(h, parse_dsl("n"))), I) == 0.0);

  const oracle::Dense Ad = oracle::dense(A);
  for (const char *dsl : {"s:jac:0.70", "s:jac:1.00", "s:jac:1.30"})
  {
    const double w = parse_dsl(dsl).steps[0].omega();
    oracle::Dense S = identity(20);
    for (std::size_t i = 0; i < 20; ++i)
    {
      for (std::size_t j = 0; j < 20; ++j)
      {
        S(i, j) -= w * Ad(i, j) / Ad(i, i);
      }
    }
    CHECK(oracle::max_abs_diff(from(error_propagation_dense(h, parse_dsl(dsl))), S) < 1e-15);
  }

  const AmgHierarchy big = hierarchy(oracle::poisson_1d(201), 4);
  CHECK_THROWS_AS(error_propagation_dense(big, parse_dsl("n")), InvalidArgument);
}

TEST_CASE("spectral radius by power iteration")
{
  DenseMatrix D(3, 3);
  D(0, 0) = 0.5;
  D(1, 1) = -0.9;
  D(2, 2) = 0.1;
  CHECK(spectral_radius(D) == doctest::Approx(0.9).epsilon(1e-6));

  DenseMatrix R(2, 2);
  const double c = 0.8 * std::cos(1.0), s = 0.8 * std::sin(1.0);
  R(0, 0) = c;
  R(0, 1) = -s;
  R(1, 0) = s;
  R(1, 1) = c;
  CHECK(spectral_radius(R) == doctest::Approx(0.8).epsilon(1e-3));
  CHECK(spectral_radius(DenseMatrix(4, 4)) == 0.0);
}

TEST_CASE("apply_program is linear in x when f = 0")
{
  const CsrMatrix A = grid(6, 0.01);
  const AmgHierarchy h = hierarchy(A, 10, 4);
  REQUIRE(h.depth() >= 3);
  const Grammar g(h.depth());
  Rng rng = make_stream(5, "linearity");
  std::mt19937_64 gen(6);
  const std::vector<double> zero(A.nrows, 0.0);
  for (int t = 0; t < 30; ++t)
  {
    const CycleProgram p = generate(g, rng);
    const auto x = random_vector(gen, A.nrows);
    const auto y = random_vector(gen, A.nrows);
    const double a = 0.7, b = -1.3;
    std::vector<double> z(A.nrows);
    for (std::size_t i = 0; i < z.size(); ++i)
    {
      z[i] = a * x[i] + b * y[i];
    }
    const auto ex = run(h, p, zero, x);
    const auto ey = run(h, p, zero, y);
    const auto ez = run(h, p, zero, z);
    double m = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i)
    {
      m = std::max(m, std::abs(ez[i] - (a * ex[i] + b * ey[i])));
    }
    CHECK_MESSAGE(m <= 1e-10, emit_dsl(p));
  }
}

TEST_CASE("zero scaling on the fine-level ascend removes the coarse correction")
{
  // The weight grid starts at 0.10, so the omega = 0 operator is reached by
  // affine extrapolation: E(0) = 2 E(w) - E(2w).
  const CsrMatrix A = grid(5, 0.01);
  const AmgHierarchy h = hierarchy(A, 3);
  REQUIRE(h.depth() == 3);
  const char *bodies[][2] = {
      {"s:gsf:1.00", "s:gsb:1.00"},
      {"s:jac:0.70 s:gsf:1.20", "s:jac:0.70"},
      {"s:gsb:0.90", "n"},
  };
  const char *coarse[] = {"d s:jac:1.00 d cs u:1.30 s:gsb:1.00", "d s:gsf:1.00 d cs u:1.00 s:gsf:1.00",
                          "d s:gsf:0.80 d s:gsf:1.00 u:0.60 s:gsb:1.00"};
  for (const auto &body : bodies)
  {
    for (const char *mid : coarse)
    {
      const std::string pre = body[0], post = body[1];
      const auto E = [&](const char *w) {
        return from(error_propagation_dense(h, parse_dsl(pre + " " + mid + " u:" + w + " " + post)));
      };
      const oracle::Dense e1 = E("0.50"), e2 = E("1.00");
      const oracle::Dense smooth = from(error_propagation_dense(h, parse_dsl(pre + " " + post)));
      oracle::Dense zero(e1.rows, e1.cols);
      for (std::size_t k = 0; k < zero.a.size(); ++k)
      {
        zero.a[k] = 2.0 * e1.a[k] - e2.a[k];
      }
      CHECK(oracle::max_abs_diff(zero, smooth) < 1e-12);
    }
  }
}

TEST_CASE("work units")
{
  const CsrMatrix A = oracle::poisson_1d(31);
  const AmgHierarchy h = hierarchy(A, 3);
  REQUIRE(h.depth() == 3);
  CHECK(work_units(parse_dsl("n"), h) == 0.0);
  CHECK(work_units(parse_dsl("s:gsf:1.00"), h) == doctest::Approx(1.0));

  const double a0 = static_cast<double>(h.levels[0].A.nnz());
  const double a1 = static_cast<double>(h.levels[1].A.nnz());
  const double r0 = static_cast<double>(h.levels[0].R.nnz());
  const double r1 = static_cast<double>(h.levels[1].R.nnz());
  const double p0 = static_cast<double>(h.levels[0].P.nnz());
  const double p1 = static_cast<double>(h.levels[1].P.nnz());
  const double n2 = static_cast<double>(h.levels[2].size());
  const double tally = (a0 + (a0 + r0) + a1 + (a1 + r1) + 2.0 * n2 * n2 + p1 + a1 + p0 + a0) / a0;
  CHECK(work_units(parse_dsl("s:gsf:1.00 d s:gsf:1.00 d cs u:1.00 s:gsb:1.00 u:1.00 s:gsb:1.00"), h) ==
        doctest::Approx(tally).epsilon(1e-14));

  const AmgHierarchy deep = hierarchy(grid(10, 0.01), 10, 4);
  REQUIRE(deep.depth() >= 3);
  const Grammar g(deep.depth());
  Rng rng = make_stream(7, "work");
  for (int t = 0; t < 200; ++t)
  {
    const CycleProgram p = generate(g, rng);
    const CycleProgram q = generate(g, rng);
    CycleProgram pq = p;
    pq.steps.insert(pq.steps.end(), q.steps.begin(), q.steps.end());
    CHECK(work_units(pq, deep) == doctest::Approx(work_units(p, deep) + work_units(q, deep)).epsilon(1e-12));

    CycleProgram padded = p;
    const std::size_t at = uniform_below(rng, padded.size() + 1);
    padded.steps.insert(padded.steps.begin() + static_cast<std::ptrdiff_t>(at), Step::noop());
    CHECK(work_units(padded, deep) == work_units(p, deep));
  }
}

TEST_CASE("solve conventions")
{
  const CsrMatrix A = oracle::poisson_1d(31);
  const AmgHierarchy h = hierarchy(A, 3);
  const CycleProgram v = v_cycle(1, 1, h.depth());
  std::vector<double> f(31, 0.0), x(31, 0.0);
  const SolveResult zero = solve(h, v, f, x);
  CHECK(zero.converged);
  CHECK(zero.iterations == 0);
  CHECK(zero.conv_factor == 0.0);

  std::fill(f.begin(), f.end(), 1.0);
  SolveOptions none;
  none.max_iter = 0;
  const SolveResult idle = solve(h, v, f, x, none);
  CHECK_FALSE(idle.converged);
  CHECK(idle.iterations == 0);
  CHECK(idle.conv_factor == 1.0);

  const SolveResult r = solve(h, v, f, x);
  CHECK(r.converged);
  CHECK(r.residual_history.size() == r.iterations + 1);
  CHECK(r.residual_history.back() <= 1e-8 * r.residual_history.front());
  CHECK(r.conv_factor >= 0.0);
  CHECK(r.conv_factor < 1.0);
  CHECK(r.work_units == doctest::Approx(work_units(v, h) * static_cast<double>(r.iterations)));
  const double actual = norm2(residual(A, x, f));
  CHECK(std::abs(actual - r.residual_history.back()) <= 1e-10 * r.residual_history.front());

  std::fill(x.begin(), x.end(), 0.0);
  const SolveResult bad = solve(h, parse_dsl("s:jac:1.90"), f, x);
  CHECK(bad.diverged);
  CHECK_FALSE(bad.converged);
  CHECK(bad.residual_history.back() > 1e6 * bad.residual_history.front());
}

TEST_CASE("residual history matches the final iterate on random programs")
{
  const CsrMatrix A = grid(8, 0.001);
  const AmgHierarchy h = hierarchy(A, 10, 4);
  const Grammar g(h.depth());
  Rng rng = make_stream(8, "history");
  const Vector f = random_unit_vector(A.nrows, 3);
  for (int t = 0; t < 25; ++t)
  {
    const CycleProgram p = generate(g, rng);
    std::vector<double> x(A.nrows, 0.0);
    SolveOptions o;
    o.max_iter = 20;
    const SolveResult r = solve(h, p, f, x, o);
    if (r.diverged)
    {
      continue;
    }
    const double actual = norm2(residual(A, x, f));
    CHECK_MESSAGE(std::abs(actual - r.residual_history.back()) <= 1e-10 * std::max(actual, r.residual_history.front()),
                  emit_dsl(p));
    if (r.converged)
    {
      CHECK(r.residual_history.back() <= 1e-8 * r.residual_history.front());
    }
  }
}

TEST_CASE("measured convergence factor agrees with the dense spectral radius")
{
  std::mt19937_64 gen(9);
  // Long runs from a random start so the averaged rate reaches its
  // asymptotic value; f = 0 keeps the residual free of a rounding floor.
  const auto check_program = [&](const AmgHierarchy &h, const CycleProgram &p) {
    const double rho = spectral_radius(error_propagation_dense(h, p));
    if (rho > 0.95)
    {
      return false;
    }
    const std::size_t n = h.levels[0].size();
    const std::vector<double> f(n, 0.0);
    auto x = random_vector(gen, n);
    SolveOptions o;
    o.tol = 1e-60;
    o.max_iter = 3000;
    const SolveResult r = solve(h, p, f, x, o);
    CHECK_MESSAGE(std::abs(r.conv_factor - rho) <= 0.05,
                  emit_dsl(p) << " measured " << r.conv_factor << " dense " << rho);
    return true;
  };

  const AmgHierarchy line = build_hierarchy(oracle::poisson_1d(64), {});
  const CycleProgram v11 = v_cycle(1, 1, line.depth());
  const double rho_line = spectral_radius(error_propagation_dense(line, v11));
  CHECK(rho_line < 1.0);
  {
    std::vector<double> f(64, 1.0), x(64, 0.0);
    const SolveResult r = solve(line, v11, f, x);
    CHECK(r.converged);
    CHECK(std::abs(r.conv_factor - rho_line) <= 0.05);
  }
  CHECK(check_program(line, v11));
  const AmgHierarchy deep_line = hierarchy(oracle::poisson_1d(64), 10, 4);
  CHECK(check_program(deep_line, v_cycle(1, 1, deep_line.depth())));

  const AmgHierarchy cube = hierarchy(grid(5, 0.001), 10, 4);
  REQUIRE(cube.depth() >= 3);
  CHECK(check_program(cube, v_cycle(1, 1, cube.depth())));
  CHECK(check_program(cube, v_cycle(2, 1, cube.depth())));
  CHECK(check_program(cube, v_cycle(2, 2, cube.depth())));

  const Grammar g(cube.depth());
  Rng rng = make_stream(10, "oracle-corpus");
  std::size_t checked = 0;
  for (int t = 0; t < 20; ++t)
  {
    checked += check_program(cube, generate(g, rng)) ? 1 : 0;
  }
  MESSAGE(checked << " of 20 random programs had rho(E) <= 0.95");
}

TEST_CASE("conjugate gradients")
{
  const CsrMatrix A = oracle::poisson_1d(32);
  const AmgHierarchy h = hierarchy(A, 1);
  std::vector<double> f(32, 1.0), x(32, 0.0);
  const SolveResult cg = pcg(h, nullptr, f, x);
  CHECK(cg.converged);
  CHECK(cg.iterations <= 32);
  CHECK(norm2(residual(A, x, f)) <= 1e-8 * std::sqrt(32.0) * 1.0001);

  std::vector<double> zf(32, 0.0), zx(32, 0.0);
  const SolveResult zero = pcg(h, nullptr, zf, zx);
  CHECK(zero.converged);
  CHECK(zero.iterations == 0);

  const CsrMatrix G = grid(32);
  const AmgHierarchy hg = build_hierarchy(G, {});
  const Vector rhs = random_unit_vector(G.nrows, 1);
  std::vector<double> x1(G.nrows, 0.0), x2(G.nrows, 0.0);
  const CycleProgram v = v_cycle(1, 1, hg.depth());
  SolveOptions o;
  o.max_iter = 1000;
  const SolveResult pre = pcg(hg, &v, rhs, x1, o);
  const SolveResult plain = pcg(hg, nullptr, rhs, x2, o);
  CHECK(pre.converged);
  CHECK(plain.converged);
  CHECK(pre.iterations < plain.iterations);
}

TEST_CASE("fitness evaluation")
{
  const CsrMatrix A = grid(8, 0.01);
  const AmgHierarchy h = hierarchy(A, 10, 4);
  const Vector f(A.nrows, 0.0);
  const Vector x0 = random_unit_vector(A.nrows, 0);
  FitnessOptions o;
  const CycleProgram v = v_cycle(1, 1, h.depth());
  const FitnessPair good = evaluate_fitness(h, v, f, x0, o);
  CHECK_FALSE(good.penalty);
  CHECK(good.cost_per_iter == doctest::Approx(work_units(v, h)));
  CHECK(good.conv_factor < 1.0);

  const FitnessPair bad = evaluate_fitness(h, parse_dsl("s:jac:1.90"), f, x0, o);
  CHECK(bad == FitnessPair::penalized());
  CHECK(bad.cost_per_iter == 1e6);
  CHECK(bad.conv_factor == 1e6);

  const FitnessPair stall = evaluate_fitness(h, parse_dsl("n"), f, x0, o);
  CHECK(stall.penalty);

  CycleProgram wrong = parse_dsl("d d d d d d d d d bv:1.00 u:1.00 u:1.00 u:1.00 u:1.00 u:1.00 u:1.00 u:1.00 u:1.00 u:1.00");
  CHECK(evaluate_fitness(h, wrong, f, x0, o).penalty);

  o.mode = SolverMode::preconditioner;
  const Vector b = random_unit_vector(A.nrows, 2);
  const Vector zero(A.nrows, 0.0);
  const FitnessPair pre = evaluate_fitness(h, v, b, zero, o);
  CHECK_FALSE(pre.penalty);
  CHECK(pre.conv_factor < 1.0);
}
