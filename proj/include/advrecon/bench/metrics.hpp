#pragma once

#include "advrecon/core/tensor.hpp"

namespace advrecon::bench {

// Reported in place of +inf when the reconstruction is exact.
inline constexpr double kPsnrCap = 99.0;

// ||xhat - xbar|| / ||xbar||. Throws ContractViolation on shape mismatch or xbar = 0.
double rel_error(const Tensor& xhat, const Tensor& xbar);

// 10 log10(window^2 / mse), capped at kPsnrCap. window <= 0 selects
// max(xbar) - min(xbar); a flat xbar then falls back to window 1.
double psnr(const Tensor& xhat, const Tensor& xbar, double window = 0.0);

}  // namespace advrecon::bench
