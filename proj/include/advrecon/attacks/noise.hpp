#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include "advrecon/core/rng.hpp"
#include "advrecon/core/tensor.hpp"

namespace advrecon::attacks {

enum class StatisticalNoise { gaussian, uniform, bernoulli };

std::string_view noise_name(StatisticalNoise kind) noexcept;
// Throws ConfigError for unknown names.
StatisticalNoise parse_statistical_noise(std::string_view name);

/// Random perturbation with E||e||^2 = eta^2 exactly:
///   gaussian  (eta / sqrt(m)) * N(0, I)
///   uniform   iid U[-a, a], a = eta * sqrt(3 / m)
///   bernoulli entries +-b with probability p/2 each, else 0, b = eta / sqrt(m p)
/// Throws ConfigError unless 0 < p < 1 for bernoulli; eta must be >= 0.
Tensor sample_statistical_noise(StatisticalNoise kind, std::size_t m, double eta, Rng& rng,
                                double bernoulli_p = 0.025);

}  // namespace advrecon::attacks
