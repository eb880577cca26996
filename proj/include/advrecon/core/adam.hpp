#pragma once

#include <cstdint>
#include <span>

#include "advrecon/core/tensor.hpp"

namespace advrecon {

struct AdamState {
  Tensor m1;
  Tensor m2;
  std::uint64_t t = 0;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  static AdamState fresh(const Shape& shape, double lr);
};

struct AdamUpdate {
  Tensor params;
  AdamState state;
};

/// One bias-corrected Adam step, params' = params - lr * m1_hat / (sqrt(m2_hat) + eps).
/// Pure: the inputs are left untouched.
AdamUpdate adam_step(const AdamState& state, const Tensor& params, const Tensor& grad);

// In-place variant for optimizer loops; same arithmetic as adam_step.
void adam_step_in_place(AdamState& state, std::span<double> params, std::span<const double> grad);

}  // namespace advrecon
