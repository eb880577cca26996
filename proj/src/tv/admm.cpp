#include "advrecon/tv/admm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <fstream>
#include <iomanip>

#include "advrecon/core/error.hpp"
#include "advrecon/core/kernels.hpp"
#include "advrecon/core/prox.hpp"

namespace advrecon::tv {

using operators::DenseMatrix;

void AdmmConfig::validate() const {
  if (!(rho > 0.0)) throw ConfigError("admm: rho must be positive");
  if (max_iters < 1) throw ConfigError("admm: max_iters must be at least 1");
  if (!(tol_primal > 0.0) || !(tol_dual > 0.0)) throw ConfigError("admm: tolerances must be positive");
  if (unroll_iters < 0) throw ConfigError("admm: unroll_iters must be nonnegative");
  if (!(relaxation > 0.0 && relaxation < 2.0))
    throw ConfigError("admm: relaxation must lie in (0, 2)");
}

void TvObjective::validate() const {
  if (mode == TvMode::constrained && !(weight >= 0.0))
    throw ConfigError("tv: eta must be nonnegative");
  if (mode == TvMode::unconstrained && !(weight > 0.0))
    throw ConfigError("tv: lambda must be positive");
}

namespace {

constexpr int kDivergenceWindow = 50;
constexpr double kMonotoneSlack = 1e-10;
constexpr int kBalanceEvery = 20;
constexpr int kMaxRhoChanges = 40;
constexpr double kBalance = 3.0;
constexpr double kRhoStep = 2.0;
constexpr double kRhoRange = 1e4;

std::shared_ptr<const CholeskyFactor> factor_of(const DenseMatrix& m) {
  return std::make_shared<CholeskyFactor>(m.data(), m.rows());
}

double l1(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += std::abs(x);
  return acc;
}

double sq(std::span<const double> v) { return kernels::dot(v.data(), v.data(), v.size()); }

}  // namespace

AdmmTvSolver::AdmmTvSolver(std::shared_ptr<const DenseMatrix> a,
                           std::shared_ptr<const LinearOperator> grad, AdmmConfig cfg)
    : a_(std::move(a)), grad_(std::move(grad)), cfg_(cfg) {
  expects(a_ != nullptr && grad_ != nullptr, "AdmmTvSolver: null operator");
  expects(grad_->cols() == a_->cols(), "AdmmTvSolver: gradient and operator widths differ");
  cfg_.validate();
  const DenseMatrix ata = operators::gram(*a_);
  const DenseMatrix gtg = operators::gram(DenseMatrix::from_operator(*grad_));
  constrained_factor_ = factor_of(operators::add_scaled(ata, 1.0, gtg));
  unconstrained_factor_ = factor_of(operators::add_scaled(operators::add_scaled(ata, 1.0, ata), cfg_.rho, gtg));
}

AdmmState AdmmTvSolver::zero_state(TvMode mode) const {
  AdmmState s;
  s.x = Tensor::zeros(a_->cols());
  s.z = Tensor::zeros(grad_->rows());
  s.u = Tensor::zeros(grad_->rows());
  if (mode == TvMode::constrained) {
    s.w = Tensor::zeros(a_->rows());
    s.v = Tensor::zeros(a_->rows());
  }
  return s;
}

double tv_objective(const AdmmTvSolver& solver, const Tensor& x, const Tensor& y,
                    const TvObjective& objective) {
  const Tensor gx = solver.grad()->apply(x);
  if (objective.mode == TvMode::constrained) return l1_norm(gx);
  const Tensor r = solver.op()->apply(x) - y;
  return objective.weight * l1_norm(gx) + squared_norm(r);
}

TvSolution AdmmTvSolver::solve(const Tensor& y, const TvObjective& objective,
                               const AdmmState* warm) const {
  objective.validate();
  expects(y.size() == a_->rows(), "tv solve: measurement length mismatch");
  expects(y.all_finite(), "tv solve: measurements must be finite");
  const bool constrained = objective.mode == TvMode::constrained;
  const std::size_t n = a_->cols();
  const std::size_t m = a_->rows();
  const std::size_t p = grad_->rows();
  const double rho0 = cfg_.rho;
  const double al = cfg_.relaxation;
  double rho = rho0;

  AdmmState s = warm ? *warm : zero_state(objective.mode);
  expects(s.x.size() == n && s.z.size() == p && s.u.size() == p,
          "tv solve: warm state has wrong dimensions");
  if (constrained) {
    if (s.w.size() != m || s.v.size() != m) {
      // Warm state from an unconstrained solve: start the measurement split at A x.
      s.w = a_->apply(s.x);
      s.v = Tensor::zeros(m);
    }
  } else {
    s.w = Tensor();
    s.v = Tensor();
  }
  if (s.rho_hint > 0.0) {
    rho = std::clamp(s.rho_hint, rho0 / kRhoRange, rho0 * kRhoRange);
    const double f = rho / rho0;
    for (double& v : s.u.span()) v /= f;
    for (double& v : s.v.span()) v /= f;
  }

  std::shared_ptr<const CholeskyFactor> ufactor = unconstrained_factor_;
  DenseMatrix ata, gtg;  // built lazily when rho moves in the unconstrained form
  auto refactor = [&] {
    if (constrained) return;  // the constrained system does not depend on rho
    if (ata.rows() == 0) {
      ata = operators::gram(*a_);
      gtg = operators::gram(DenseMatrix::from_operator(*grad_));
    }
    ufactor = factor_of(operators::add_scaled(operators::add_scaled(ata, 1.0, ata), rho, gtg));
  };
  if (rho != rho0) refactor();

  std::vector<double> rhs(n), tmp_n(n), dual(n), kty(n), two_aty(n);
  std::vector<double> gx(p), hx(p), z_old(p), diff_p(p);
  std::vector<double> ax(m), hm(m), w_old(m), diff_m(m);
  Tensor target = Tensor::zeros(m);
  if (!constrained) {
    a_->adjoint(y.span(), two_aty);
    for (double& v : two_aty) v *= 2.0;
  }

  TvSolution sol;
  double prev_merit = std::numeric_limits<double>::infinity();
  double window_start = prev_merit;
  int rising = 0;
  int rho_changes = 0;
  double accepted_obj = std::numeric_limits<double>::infinity();
  Tensor accepted_x;

  for (int it = 1; it <= cfg_.max_iters; ++it) {
    // x-update
    for (std::size_t i = 0; i < p; ++i) diff_p[i] = s.z[i] - s.u[i];
    grad_->adjoint(diff_p, rhs);
    if (constrained) {
      for (std::size_t i = 0; i < m; ++i) diff_m[i] = s.w[i] - s.v[i];
      a_->adjoint(diff_m, tmp_n);
      kernels::axpy(1.0, tmp_n.data(), rhs.data(), n);
      constrained_factor_->solve_in_place(rhs);
    } else {
      for (std::size_t i = 0; i < n; ++i) rhs[i] = two_aty[i] + rho * rhs[i];
      ufactor->solve_in_place(rhs);
    }
    std::copy(rhs.begin(), rhs.end(), s.x.data());

    // z-update (soft threshold) and scaled dual u
    const double tau = constrained ? 1.0 / rho : objective.weight / rho;
    grad_->apply(s.x.span(), gx);
    std::copy(s.z.values().begin(), s.z.values().end(), z_old.begin());
    double r2 = 0.0;
    for (std::size_t i = 0; i < p; ++i) {
      hx[i] = al * gx[i] + (1.0 - al) * z_old[i];
      const double t = hx[i] + s.u[i];
      const double mag = std::abs(t) - tau;
      s.z[i] = mag > 0.0 ? std::copysign(mag, t) : 0.0;
      s.u[i] += hx[i] - s.z[i];
      const double d = gx[i] - s.z[i];
      r2 += d * d;
      diff_p[i] = s.z[i] - z_old[i];
    }
    double scale_kx = sq(gx);
    double scale_c = sq(s.z.span());
    grad_->adjoint(diff_p, dual);

    // w-update (ball projection) and scaled dual v
    a_->apply(s.x.span(), ax);
    if (constrained) {
      std::copy(s.w.values().begin(), s.w.values().end(), w_old.begin());
      for (std::size_t i = 0; i < m; ++i) {
        hm[i] = al * ax[i] + (1.0 - al) * w_old[i];
        target[i] = hm[i] + s.v[i];
      }
      s.w = project_l2_ball(target, y, objective.weight);
      for (std::size_t i = 0; i < m; ++i) {
        s.v[i] += hm[i] - s.w[i];
        const double d = ax[i] - s.w[i];
        r2 += d * d;
        diff_m[i] = s.w[i] - w_old[i];
      }
      a_->adjoint(diff_m, tmp_n);
      kernels::axpy(1.0, tmp_n.data(), dual.data(), n);
      scale_kx += sq(ax);
      scale_c += sq(s.w.span());
    }
    const double primal = std::sqrt(r2);
    const double dual_res = rho * std::sqrt(sq(dual));

    grad_->adjoint(s.u.span(), kty);
    if (constrained) {
      a_->adjoint(s.v.span(), tmp_n);
      kernels::axpy(1.0, tmp_n.data(), kty.data(), n);
    }
    const double eps_p = cfg_.tol_primal * std::max({1.0, std::sqrt(scale_kx), std::sqrt(scale_c)});
    const double eps_d = cfg_.tol_dual * std::max(1.0, rho * std::sqrt(sq(kty)));

    double obj = l1(gx);
    if (!constrained) {
      double res = 0.0;
      for (std::size_t i = 0; i < m; ++i) res += (ax[i] - y[i]) * (ax[i] - y[i]);
      obj = objective.weight * obj + res;
    }
    const bool finite = std::isfinite(obj) && std::isfinite(primal) && std::isfinite(dual_res);
    const bool accepted = finite && (constrained || obj <= accepted_obj + kMonotoneSlack);
    if (accepted && !constrained) {
      accepted_obj = obj;
      accepted_x = s.x;
    }
    sol.trace.push_back({it, obj, primal, dual_res, accepted});
    sol.iters_used = it;
    if (!finite)
      throw NumericalError("tv solve: non-finite iterate at iteration " + std::to_string(it));

    // Divergence: the merit (unconstrained objective, constrained primal
    // residual) rose for a full window and at least doubled over it.
    const double merit = constrained ? primal : obj;
    if (merit > prev_merit) {
      if (rising == 0) window_start = prev_merit;
      ++rising;
    } else {
      rising = 0;
    }
    prev_merit = merit;
    if (rising >= kDivergenceWindow && merit > 2.0 * window_start) {
      std::string msg = "tv solve: diverging, merit rose for " + std::to_string(rising) +
                        " consecutive iterations to iteration " + std::to_string(it) +
                        "; trace tail:";
      for (std::size_t k = sol.trace.size() - 5; k < sol.trace.size(); ++k)
        msg += " [" + std::to_string(sol.trace[k].iter) + ": obj=" +
               std::to_string(sol.trace[k].objective) +
               " r=" + std::to_string(sol.trace[k].primal_residual) +
               " s=" + std::to_string(sol.trace[k].dual_residual) + "]";
      throw NumericalError(msg);
    }

    if (primal <= eps_p && dual_res <= eps_d) {
      sol.converged = true;
      break;
    }

    // Residual balancing: keep the normalized residuals within a factor of
    // kBalance of each other. Scaled duals are rescaled so the unscaled
    // multipliers are unchanged.
    if (it % kBalanceEvery == 0 && rho_changes < kMaxRhoChanges) {
      const double rp = primal, rd = dual_res;
      double f = std::sqrt(rp / std::max(rd, 1e-300));
      f = std::clamp(f, 1.0 / kRhoRange, kRhoRange);
      if (f < kBalance && f > 1.0 / kBalance) f = 1.0;
      f = std::clamp(rho * f, rho0 / kRhoRange, rho0 * kRhoRange) / rho;
      if (f != 1.0) {
        rho *= f;
        for (std::size_t i = 0; i < p; ++i) s.u[i] /= f;
        if (constrained)
          for (std::size_t i = 0; i < m; ++i) s.v[i] /= f;
        refactor();
        ++rho_changes;
        rising = 0;
        prev_merit = std::numeric_limits<double>::infinity();
      }
    }
  }
  // Express the duals at the configured rho so the state can seed another
  // solve or an unrolled run.
  if (rho != rho0) {
    const double f = rho / rho0;
    for (std::size_t i = 0; i < p; ++i) s.u[i] *= f;
    if (constrained)
      for (std::size_t i = 0; i < m; ++i) s.v[i] *= f;
  }
  s.rho_hint = rho;
  sol.x = (!constrained && !sol.converged && !accepted_x.empty()) ? accepted_x : s.x;
  sol.state = std::move(s);
  return sol;
}

Var AdmmTvSolver::unrolled(Tape& tape, Var y, const TvObjective& objective,
                           const AdmmState& warm) const {
  if (!tape.live()) throw ContractViolation("tv unrolled: tape is not live");
  objective.validate();
  expects(tape.value(y).size() == a_->rows(), "tv unrolled: measurement length mismatch");
  const bool constrained = objective.mode == TvMode::constrained;
  expects(warm.x.size() == a_->cols() && warm.z.size() == grad_->rows() &&
              warm.u.size() == grad_->rows(),
          "tv unrolled: warm state dimensions do not match the problem");
  if (constrained)
    expects(warm.w.size() == a_->rows() && warm.v.size() == a_->rows(),
            "tv unrolled: constrained warm state needs w and v");

  Var x = tape.constant(warm.x);
  if (cfg_.unroll_iters == 0) return x;
  Var z = tape.constant(warm.z);
  Var u = tape.constant(warm.u);
  Var w{}, v{};
  if (constrained) {
    w = tape.constant(warm.w);
    v = tape.constant(warm.v);
  }
  const double rho = cfg_.rho;
  const double tau = constrained ? 1.0 / rho : objective.weight / rho;
  std::shared_ptr<const LinearOperator> a = a_;

  const double al = cfg_.relaxation;
  auto relax = [al](Tape& t, Var k, Var prev) {
    return al == 1.0 ? k : t.add(t.scale(k, al), t.scale(prev, 1.0 - al));
  };

  Var two_aty{};
  if (!constrained) two_aty = tape.scale(tape.matvec_adjoint(a, y), 2.0);

  for (int it = 0; it < cfg_.unroll_iters; ++it) {
    Var rhs = tape.matvec_adjoint(grad_, tape.sub(z, u));
    if (constrained) {
      rhs = tape.add(rhs, tape.matvec_adjoint(a, tape.sub(w, v)));
      x = tape.solve(constrained_factor_, rhs);
    } else {
      rhs = tape.add(two_aty, tape.scale(rhs, rho));
      x = tape.solve(unconstrained_factor_, rhs);
    }
    Var hx = relax(tape, tape.matvec(grad_, x), z);
    z = tape.soft_threshold(tape.add(hx, u), tau);
    u = tape.add(u, tape.sub(hx, z));
    if (constrained) {
      Var hm = relax(tape, tape.matvec(a, x), w);
      w = tape.project_l2_ball(tape.add(hm, v), y, objective.weight);
      v = tape.add(v, tape.sub(hm, w));
    }
  }
  return x;
}

TvSolution tv_solve(const TvProblem& problem, const AdmmConfig& cfg, const AdmmState* warm) {
  AdmmTvSolver solver(problem.a, problem.grad, cfg);
  return solver.solve(problem.y, problem.objective, warm);
}

void write_trace_csv(const std::filesystem::path& path, const std::vector<TvIterate>& trace) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << "iter,objective,primal_residual,dual_residual,accepted\n" << std::setprecision(17);
  for (const auto& t : trace)
    out << t.iter << ',' << t.objective << ',' << t.primal_residual << ',' << t.dual_residual
        << ',' << (t.accepted ? 1 : 0) << '\n';
}

}  // namespace advrecon::tv
