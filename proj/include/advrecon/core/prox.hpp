#pragma once

#include "advrecon/core/tensor.hpp"

namespace advrecon {

// Elementwise sign(v) * max(|v| - tau, 0). Throws ContractViolation if tau < 0.
Tensor soft_threshold(const Tensor& v, double tau);

// Euclidean projection of e onto the ball {p : ||p - center|| <= radius}.
// The result always satisfies the ball test exactly in floating point, so the
// projection is idempotent bit-for-bit.
Tensor project_l2_ball(const Tensor& e, const Tensor& center, double radius);

}  // namespace advrecon
