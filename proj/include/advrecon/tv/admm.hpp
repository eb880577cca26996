#pragma once

#include <filesystem>
#include <memory>
#include <vector>

#include "advrecon/core/cholesky.hpp"
#include "advrecon/core/linear_map.hpp"
#include "advrecon/core/tape.hpp"
#include "advrecon/operators/dense.hpp"

namespace advrecon::tv {

struct AdmmConfig {
  double rho = 1.0;
  int max_iters = 5000;
  double tol_primal = 1e-8;
  double tol_dual = 1e-8;
  int unroll_iters = 25;
  // Over-relaxation factor in (0, 2); 1 is plain ADMM.
  double relaxation = 1.6;

  void validate() const;
};

/// ADMM variables. z = grad x splitting with scaled dual u; the constrained
/// form adds w = A x with scaled dual v (empty in the unconstrained form).
struct AdmmState {
  Tensor x;
  Tensor z;
  Tensor u;
  Tensor w;
  Tensor v;
  // Penalty the producing solve ended with; a warm-started solve resumes
  // from it. 0 means the configured rho. The duals above are always scaled
  // for the configured rho.
  double rho_hint = 0.0;
};

enum class TvMode { constrained, unconstrained };

/// constrained:   min ||grad x||_1  s.t. ||A x - y|| <= eta
/// unconstrained: min lambda ||grad x||_1 + ||A x - y||^2
struct TvObjective {
  TvMode mode = TvMode::constrained;
  double weight = 0.0;  // eta (constrained) or lambda (unconstrained)

  static TvObjective constrained(double eta) { return {TvMode::constrained, eta}; }
  static TvObjective unconstrained(double lambda) { return {TvMode::unconstrained, lambda}; }
  void validate() const;
};

struct TvProblem {
  std::shared_ptr<const operators::DenseMatrix> a;
  std::shared_ptr<const LinearOperator> grad;
  Tensor y;
  TvObjective objective;
};

struct TvIterate {
  int iter = 0;
  double objective = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  // Objective did not exceed the last accepted objective by more than 1e-10.
  // Plain ADMM iterates are not monotone; the accepted subsequence is, and an
  // unconverged unconstrained solve returns the last accepted iterate.
  bool accepted = true;
};

struct TvSolution {
  Tensor x;
  AdmmState state;
  int iters_used = 0;
  bool converged = false;
  std::vector<TvIterate> trace;
};

/// ADMM for TV minimization with the x-update factorizations computed once.
///
/// constrained x-update:   (grad^T grad + A^T A) x = grad^T (z - u) + A^T (w - v)
/// unconstrained x-update: (2 A^T A + rho grad^T grad) x = 2 A^T y + rho grad^T (z - u)
/// z-update soft-thresholds grad x + u (tau = 1/rho resp. lambda/rho); the
/// constrained w-update projects A x + v onto the eta-ball around y.
///
/// Immutable after construction; solve() and unrolled() may run concurrently.
class AdmmTvSolver {
 public:
  AdmmTvSolver(std::shared_ptr<const operators::DenseMatrix> a,
               std::shared_ptr<const LinearOperator> grad, AdmmConfig cfg = {});

  const AdmmConfig& config() const noexcept { return cfg_; }
  const std::shared_ptr<const operators::DenseMatrix>& op() const noexcept { return a_; }
  const std::shared_ptr<const LinearOperator>& grad() const noexcept { return grad_; }

  // Runs until both residuals meet their tolerances or max_iters. rho is
  // adapted internally by residual balancing; the returned state is always
  // expressed at config().rho. Throws
  // NumericalError if iterates go non-finite or the monitored merit grows for
  // 50 consecutive iterations and at least doubles over them.
  TvSolution solve(const Tensor& y, const TvObjective& objective,
                   const AdmmState* warm = nullptr) const;

  /// Exactly cfg.unroll_iters iterations from `warm`, recorded on the tape so
  /// that the result is differentiable w.r.t. y. The warm state enters as a
  /// constant. Throws ContractViolation if the tape is not live.
  Var unrolled(Tape& tape, Var y, const TvObjective& objective, const AdmmState& warm) const;

  AdmmState zero_state(TvMode mode) const;

 private:
  std::shared_ptr<const operators::DenseMatrix> a_;
  std::shared_ptr<const LinearOperator> grad_;
  AdmmConfig cfg_;
  std::shared_ptr<const CholeskyFactor> constrained_factor_;
  std::shared_ptr<const CholeskyFactor> unconstrained_factor_;
};

TvSolution tv_solve(const TvProblem& problem, const AdmmConfig& cfg,
                    const AdmmState* warm = nullptr);

double tv_objective(const AdmmTvSolver& solver, const Tensor& x, const Tensor& y,
                    const TvObjective& objective);

void write_trace_csv(const std::filesystem::path& path, const std::vector<TvIterate>& trace);

}  // namespace advrecon::tv
