#include "advrecon/bench/curve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "advrecon/attacks/noise.hpp"
#include "advrecon/bench/metrics.hpp"
#include "advrecon/core/error.hpp"
#include "advrecon/core/parallel.hpp"
#include "advrecon/core/rng.hpp"
#include "advrecon/tv/tv_map.hpp"

namespace advrecon::bench {

std::string_view noise_kind_name(NoiseKind kind) noexcept {
  switch (kind) {
    case NoiseKind::adversarial: return "adversarial";
    case NoiseKind::gaussian: return "gaussian";
    case NoiseKind::uniform: return "uniform";
    case NoiseKind::bernoulli: return "bernoulli";
  }
  return "unknown";
}

NoiseKind parse_noise_kind(std::string_view name) {
  if (name == "adversarial") return NoiseKind::adversarial;
  if (name == "gaussian") return NoiseKind::gaussian;
  if (name == "uniform") return NoiseKind::uniform;
  if (name == "bernoulli") return NoiseKind::bernoulli;
  throw ConfigError("unknown noise kind '" + std::string(name) + "'");
}

Method fixed_method(std::string name, std::shared_ptr<const ReconstructionMap> map) {
  expects(map != nullptr, "fixed_method: null map");
  return {std::move(name), [map](double) { return map; }};
}

Method tv_constrained_method(std::string name, std::shared_ptr<const tv::AdmmTvSolver> solver) {
  expects(solver != nullptr, "tv_constrained_method: null solver");
  const std::string label = name;
  return {std::move(name), [solver, label](double eta) -> std::shared_ptr<const ReconstructionMap> {
            return std::make_shared<tv::TvMap>(solver, tv::TvObjective::constrained(eta), label);
          }};
}

namespace {

attacks::StatisticalNoise statistical(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::gaussian: return attacks::StatisticalNoise::gaussian;
    case NoiseKind::uniform: return attacks::StatisticalNoise::uniform;
    case NoiseKind::bernoulli: return attacks::StatisticalNoise::bernoulli;
    case NoiseKind::adversarial: break;
  }
  throw ContractViolation("statistical: adversarial is not a statistical kind");
}

void summarize(Curve& c, const std::string& method, NoiseKind kind,
               const std::vector<double>& grid, std::size_t n_signals, std::size_t n_draws) {
  const std::size_t per_level = n_signals * n_draws;
  for (std::size_t l = 0; l < grid.size(); ++l) {
    double mean = 0.0;
    for (std::size_t k = 0; k < per_level; ++k) mean += c.records[l * per_level + k].rel_error;
    mean /= static_cast<double>(per_level);
    double var = 0.0;
    for (std::size_t k = 0; k < per_level; ++k) {
      const double d = c.records[l * per_level + k].rel_error - mean;
      var += d * d;
    }
    const double sd = per_level > 1 ? std::sqrt(var / static_cast<double>(per_level - 1)) : 0.0;
    c.points.push_back({grid[l], mean, sd, method, kind, n_signals, n_draws});
  }
}

}  // namespace

Curve noise_to_error_curve(const Method& method, const LinearOperator& a,
                           const std::vector<Tensor>& signals, const std::vector<double>& rel_grid,
                           NoiseKind kind, const CurveOptions& opts) {
  if (rel_grid.empty()) throw ConfigError("curve: empty noise grid");
  for (double r : rel_grid)
    if (!(r >= 0.0) || !std::isfinite(r)) throw ConfigError("curve: noise levels must be finite and nonnegative");
  if (signals.empty()) throw ConfigError("curve: no test signals");
  if (kind != NoiseKind::adversarial && opts.draws < 1) throw ConfigError("curve: draws must be at least 1");
  expects(static_cast<bool>(method.at), "curve: method has no map factory");

  const std::size_t levels = rel_grid.size(), count = signals.size();
  const std::size_t draws = kind == NoiseKind::adversarial ? 1 : opts.draws;
  const std::uint64_t method_key = hash_name(method.name);
  const std::uint64_t kind_key = hash_name(noise_kind_name(kind));
  auto item_seed = [&](std::size_t l, std::size_t s, std::size_t d) {
    return derive_seed(opts.seed, {method_key, kind_key, l, s, d});
  };

  std::vector<Tensor> ybar(count);
  for (std::size_t s = 0; s < count; ++s) ybar[s] = a.apply(signals[s]);

  Curve c;
  c.records.resize(levels * count * draws);
  auto put = [&](std::size_t l, std::size_t s, std::size_t d, const Tensor& xhat) {
    ErrorRecord& r = c.records[(l * count + s) * draws + d];
    const Tensor xr = xhat.reshaped(signals[s].shape());
    r = {opts.scenario, method.name, kind, rel_grid[l], s, d,
         rel_error(xr, signals[s]), psnr(xr, signals[s]), item_seed(l, s, d)};
  };

  if (kind == NoiseKind::adversarial) {
    std::vector<std::size_t> order(levels);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return rel_grid[i] < rel_grid[j]; });
    c.audits.resize(levels * count);
    c.perturbations.resize(levels * count);
    parallel_for(count, opts.threads, [&](std::size_t s) {
      std::vector<Tensor> inits;
      const double ynorm = norm(ybar[s]);
      for (std::size_t l : order) {
        const double eta = rel_grid[l] * ynorm;
        const auto map = method.at(eta);
        attacks::AttackConfig cfg = opts.attack;
        cfg.eta = eta;
        cfg.seed = item_seed(l, s, 0);
        cfg.threads = 1;
        attacks::AttackResult res = attacks::find_adversarial(*map, a, signals[s], cfg, inits);
        put(l, s, 0, map->reconstruct(ybar[s] + res.e_adv));
        const double base = rel_error(map->reconstruct(ybar[s]).reshaped(signals[s].shape()), signals[s]);
        c.audits[l * count + s] = {method.name, rel_grid[l], s, eta, norm(res.e_adv),
                                   res.achieved_error, base};
        inits = {res.e_adv};
        c.perturbations[l * count + s] = std::move(res.e_adv);
      }
    });
  } else {
    const auto noise = statistical(kind);
    const std::size_t m = a.rows();
    parallel_for(levels * count * draws, opts.threads, [&](std::size_t item) {
      const std::size_t d = item % draws, s = (item / draws) % count, l = item / (draws * count);
      const double eta = rel_grid[l] * norm(ybar[s]);
      const auto map = method.at(eta);
      Rng rng(item_seed(l, s, d));
      const Tensor e = attacks::sample_statistical_noise(noise, m, eta, rng, opts.bernoulli_p);
      put(l, s, d, map->reconstruct(ybar[s] + e));
    });
  }
  summarize(c, method.name, kind, rel_grid, count, draws);
  return c;
}

CurveFit fit_robustness_constant(const std::vector<CurvePoint>& curve) {
  if (curve.size() < 3) throw ConfigError("fit: need at least 3 curve points");
  const double n = static_cast<double>(curve.size());
  double mx = 0.0, my = 0.0;
  for (const auto& p : curve) {
    mx += p.rel_noise / n;
    my += p.rel_error_mean / n;
  }
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& p : curve) {
    const double dx = p.rel_noise - mx, dy = p.rel_error_mean - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (!(sxx > 0.0)) throw ConfigError("fit: all noise levels are equal");
  CurveFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy > 0.0 ? std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0) : 1.0;
  return f;
}

JitterAblation ablate_jitter(const Method& jittered, const Method& plain, const LinearOperator& a,
                             const std::vector<Tensor>& signals,
                             const std::vector<double>& rel_grid, const CurveOptions& opts) {
  JitterAblation out;
  out.jittered = noise_to_error_curve(jittered, a, signals, rel_grid, NoiseKind::adversarial, opts);
  out.plain = noise_to_error_curve(plain, a, signals, rel_grid, NoiseKind::adversarial, opts);
  auto ratio = [](double num, double den) {
    if (den > 0.0) return num / den;
    return num > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
  };
  for (std::size_t l = 0; l < rel_grid.size(); ++l)
    out.ratio.push_back(ratio(out.plain.points[l].rel_error_mean, out.jittered.points[l].rel_error_mean));
  const std::size_t top = static_cast<std::size_t>(
      std::max_element(rel_grid.begin(), rel_grid.end()) - rel_grid.begin());
  for (std::size_t s = 0; s < signals.size(); ++s)
    out.signal_ratio_at_max.push_back(ratio(out.plain.records[top * signals.size() + s].rel_error,
                                            out.jittered.records[top * signals.size() + s].rel_error));
  return out;
}

}  // namespace advrecon::bench
