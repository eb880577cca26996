#include "advrecon/attacks/noise.hpp"

#include <cmath>

#include "advrecon/core/error.hpp"

namespace advrecon::attacks {

std::string_view noise_name(StatisticalNoise kind) noexcept {
  switch (kind) {
    case StatisticalNoise::gaussian: return "gaussian";
    case StatisticalNoise::uniform: return "uniform";
    case StatisticalNoise::bernoulli: return "bernoulli";
  }
  return "unknown";
}

StatisticalNoise parse_statistical_noise(std::string_view name) {
  if (name == "gaussian") return StatisticalNoise::gaussian;
  if (name == "uniform") return StatisticalNoise::uniform;
  if (name == "bernoulli") return StatisticalNoise::bernoulli;
  throw ConfigError("unknown statistical noise kind '" + std::string(name) + "'");
}

Tensor sample_statistical_noise(StatisticalNoise kind, std::size_t m, double eta, Rng& rng,
                                double bernoulli_p) {
  expects(eta >= 0.0, "sample_statistical_noise: eta must be nonnegative");
  if (kind == StatisticalNoise::bernoulli && !(bernoulli_p > 0.0 && bernoulli_p < 1.0))
    throw ConfigError("bernoulli noise requires 0 < p < 1");
  Tensor e = Tensor::zeros(m);
  if (eta == 0.0 || m == 0) return e;
  const double md = static_cast<double>(m);
  switch (kind) {
    case StatisticalNoise::gaussian: {
      std::normal_distribution<double> dist(0.0, eta / std::sqrt(md));
      for (std::size_t i = 0; i < m; ++i) e[i] = dist(rng);
      break;
    }
    case StatisticalNoise::uniform: {
      const double a = eta * std::sqrt(3.0 / md);
      std::uniform_real_distribution<double> dist(-a, a);
      for (std::size_t i = 0; i < m; ++i) e[i] = dist(rng);
      break;
    }
    case StatisticalNoise::bernoulli: {
      const double b = eta / std::sqrt(md * bernoulli_p);
      std::uniform_real_distribution<double> dist(0.0, 1.0);
      for (std::size_t i = 0; i < m; ++i) {
        const double u = dist(rng);
        if (u < 0.5 * bernoulli_p)
          e[i] = b;
        else if (u < bernoulli_p)
          e[i] = -b;
      }
      break;
    }
  }
  return e;
}

}  // namespace advrecon::attacks
