#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "advrecon/attacks/attack.hpp"
#include "advrecon/core/recon_map.hpp"
#include "advrecon/tv/admm.hpp"

namespace advrecon::bench {

enum class NoiseKind { adversarial, gaussian, uniform, bernoulli };

std::string_view noise_kind_name(NoiseKind kind) noexcept;
// Throws ConfigError for unknown names.
NoiseKind parse_noise_kind(std::string_view name);

/// A reconstruction method as seen by the curve harness: `at(eta)` returns
/// the map to use at absolute noise level eta. Constrained TV re-tunes its
/// constraint to eta; learned maps ignore it.
struct Method {
  std::string name;
  std::function<std::shared_ptr<const ReconstructionMap>(double eta)> at;
};

Method fixed_method(std::string name, std::shared_ptr<const ReconstructionMap> map);
Method tv_constrained_method(std::string name, std::shared_ptr<const tv::AdmmTvSolver> solver);

// One reconstruction: a CSV row.
struct ErrorRecord {
  std::string scenario;
  std::string method;
  NoiseKind kind = NoiseKind::gaussian;
  double rel_noise = 0.0;
  std::size_t signal_idx = 0;
  std::size_t draw_idx = 0;
  double rel_error = 0.0;
  double psnr = 0.0;
  std::uint64_t seed = 0;
};

// Feasibility and dominance evidence for one attack.
struct AttackAudit {
  std::string method;
  double rel_noise = 0.0;
  std::size_t signal_idx = 0;
  double eta = 0.0;
  double perturbation_norm = 0.0;
  double achieved_error = 0.0;
  double baseline_error = 0.0;  // error of the same map at e = 0

  bool feasible() const { return perturbation_norm <= eta * (1.0 + 1e-9); }
  bool dominant() const { return achieved_error >= baseline_error; }
};

struct CurvePoint {
  double rel_noise = 0.0;  // eta / ||A xbar||
  double rel_error_mean = 0.0;
  double rel_error_std = 0.0;  // sample standard deviation over all records
  std::string method;
  NoiseKind kind = NoiseKind::gaussian;
  std::size_t n_signals = 0;
  std::size_t n_draws = 0;
};

struct Curve {
  std::vector<CurvePoint> points;  // in grid order
  std::vector<ErrorRecord> records;
  std::vector<AttackAudit> audits;
  std::vector<Tensor> perturbations;  // winning e_adv per audit
};

struct CurveOptions {
  std::string scenario = "A1";
  std::size_t draws = 1;  // statistical kinds only
  attacks::AttackConfig attack;  // eta and seed are set per item
  double bernoulli_p = 0.025;
  std::uint64_t seed = 0;
  int threads = 1;
};

/// Relative error against relative noise level for one method and noise kind.
///
/// For signal x the absolute level is rel * ||A x||. Statistical kinds draw
/// `draws` perturbations per (signal, level); the adversarial kind runs one
/// attack per (signal, level), visiting levels in increasing order and
/// passing the previous winner as an extra init, so per-signal errors are
/// monotone in the level. Every item has its own stream derived from
/// (seed, method name, kind, level index, signal, draw) and results are
/// reduced by index, so output does not depend on threads or method order.
Curve noise_to_error_curve(const Method& method, const LinearOperator& a,
                           const std::vector<Tensor>& signals, const std::vector<double>& rel_grid,
                           NoiseKind kind, const CurveOptions& opts);

struct CurveFit {
  double slope = 0.0;  // empirical robustness constant C
  double intercept = 0.0;
  double r2 = 0.0;
};

/// Least-squares line through (rel_noise, rel_error_mean). Needs at least 3
/// points and two distinct levels (ConfigError otherwise). A constant curve
/// fits exactly and reports r2 = 1.
CurveFit fit_robustness_constant(const std::vector<CurvePoint>& curve);

struct JitterAblation {
  Curve jittered;
  Curve plain;
  // plain mean / jittered mean per level.
  std::vector<double> ratio;
  // Per-signal plain / jittered error at the largest level.
  std::vector<double> signal_ratio_at_max;
};

/// Adversarial curves of two nets that differ only in training jitter.
JitterAblation ablate_jitter(const Method& jittered, const Method& plain, const LinearOperator& a,
                             const std::vector<Tensor>& signals,
                             const std::vector<double>& rel_grid, const CurveOptions& opts);

}  // namespace advrecon::bench
