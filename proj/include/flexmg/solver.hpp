// Copyright The flexmg Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef FLEXMG_SOLVER_HPP
#define FLEXMG_SOLVER_HPP

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "flexmg/cycle.hpp"
#include "flexmg/dense.hpp"
#include "flexmg/setup.hpp"
#include "flexmg/sparse.hpp"

namespace flexmg
{

// Per-evaluation work vectors for every level of one hierarchy. Never share an
// instance between simultaneous evaluations.
struct EvalContext
{
  explicit EvalContext(const AmgHierarchy &h);

  std::vector<Vector> x;
  std::vector<Vector> f;
  std::vector<Vector> r;
};

// In-place relaxation sweeps x <- x + omega * D^{-1} (f - A x). diag holds
// the positions of the diagonal entries (CsrMatrix::diagonal_positions).
// Jacobi uses only old values of x and needs a scratch vector of length n.
void smooth_jacobi(const CsrMatrix &A, std::span<const std::size_t> diag, std::span<double> x,
                   std::span<const double> f, double omega, std::span<double> scratch);
void smooth_gs_forward(const CsrMatrix &A, std::span<const std::size_t> diag,
                       std::span<double> x, std::span<const double> f, double omega);
void smooth_gs_backward(const CsrMatrix &A, std::span<const std::size_t> diag,
                        std::span<double> x, std::span<const double> f, double omega);

// Convenience forms returning the smoothed vector.
Vector smooth_jacobi(const CsrMatrix &A, std::span<const double> x, std::span<const double> f,
                     double omega);
Vector smooth_gs_forward(const CsrMatrix &A, std::span<const double> x,
                         std::span<const double> f, double omega);
Vector smooth_gs_backward(const CsrMatrix &A, std::span<const double> x,
                          std::span<const double> f, double omega);

//
// Runs one application of the program on the fine level, updating x in place.
// Descend restricts the residual and starts the coarse level from zero; ascend
// adds the scaled interpolated correction; bv runs the fixed V(1,1) (forward
// Gauss-Seidel down, backward up, unit weights, direct solve at the bottom)
// below the flexible region. Throws InvalidArgument if the program does not
// validate against the hierarchy.
//
void apply_program(const AmgHierarchy &h, const CycleProgram &program, EvalContext &ctx,
                   std::span<const double> f, std::span<double> x);

struct SolveOptions
{
  double tol = 1e-8;
  std::size_t max_iter = 100;
  // Abort once the residual grows beyond this factor of the initial one.
  double divergence_factor = 1e6;
  // PCG only: Polak-Ribiere beta, robust to nonsymmetric preconditioners.
  bool flexible = false;
};

struct SolveResult
{
  std::size_t iterations = 0;
  bool converged = false;
  bool diverged = false;
  bool breakdown = false;
  double conv_factor = 1.0;
  double wall_time = 0.0;
  double work_units = 0.0;  // total, fine-grid operator equivalents
  std::vector<double> residual_history;  // ||r_0||, ||r_1||, ...

  // {iterations, converged, conv_factor, wall_time_s, work_units, residuals}
  std::string to_json() const;
};

// Stationary iteration x <- cycle(x) until ||r_k|| <= tol ||r_0||. The
// convergence factor is (||r_k|| / ||r_0||)^(1/k); 0 when r_0 = 0 and 1.0 when
// no iteration ran.
SolveResult solve(const AmgHierarchy &h, const CycleProgram &program, std::span<const double> f,
                  std::span<double> x, const SolveOptions &options = {});

// Conjugate gradients on the finest operator of h, preconditioned by one
// application of the program per iteration (z = cycle(r) from a zero guess).
// A null program selects the identity preconditioner.
SolveResult pcg(const AmgHierarchy &h, const CycleProgram *program, std::span<const double> f,
                std::span<double> x, const SolveOptions &options = {});

// Cost of one program application in fine-level operator applications.
double work_units(const CycleProgram &program, const AmgHierarchy &h);

// Cost of the fixed V(1,1) below the flexible region, entered on level l.
double base_v_work_units(const AmgHierarchy &h, std::size_t level);

inline constexpr std::size_t max_dense_oracle_size = 200;

// Column j is the program applied to e_j with f = 0. Fine level <= 200 rows.
DenseMatrix error_propagation_dense(const AmgHierarchy &h, const CycleProgram &program);

// Largest eigenvalue magnitude by power iteration. When the iterates do not
// settle (complex dominant pair), the mean log growth over the second half of
// the iteration is returned instead.
double spectral_radius(const DenseMatrix &E, std::size_t max_iter = 1000, double tol = 1e-10);

inline constexpr double penalty_fitness = 1e6;

enum class FitnessMode
{
  work_units,
  wall_time,
};

enum class SolverMode
{
  solver,
  preconditioner,
};

struct FitnessPair
{
  double cost_per_iter = penalty_fitness;
  double conv_factor = penalty_fitness;
  bool penalty = true;

  static FitnessPair penalized() { return {}; }
  bool operator==(const FitnessPair &) const = default;
};

struct FitnessOptions
{
  FitnessMode fitness = FitnessMode::work_units;
  SolverMode mode = SolverMode::solver;
  std::size_t max_iter = 15;
  double tol = 1e-8;
  // Preconditioner mode: Polak-Ribiere beta in PCG.
  bool flexible_cg = false;
};

// Runs the capped fitness solve from x0. Divergence, breakdown, a convergence
// factor >= 1 or any exception yield the penalty pair.
FitnessPair evaluate_fitness(const AmgHierarchy &h, const CycleProgram &program,
                             std::span<const double> f, std::span<const double> x0,
                             const FitnessOptions &options);

}  // namespace flexmg

#endif  // FLEXMG_SOLVER_HPP
