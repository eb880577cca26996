#include "advrecon/core/prox.hpp"

#include <cmath>
#include <limits>

#include "advrecon/core/error.hpp"

namespace advrecon {

Tensor soft_threshold(const Tensor& v, double tau) {
  expects(tau >= 0.0, "soft_threshold: tau must be nonnegative");
  Tensor out = v;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double a = std::abs(v[i]) - tau;
    out[i] = a > 0.0 ? std::copysign(a, v[i]) : 0.0;
  }
  return out;
}

Tensor project_l2_ball(const Tensor& e, const Tensor& center, double radius) {
  expects(radius >= 0.0, "project_l2_ball: radius must be nonnegative");
  expects(e.size() == center.size(), "project_l2_ball: shape mismatch");
  const Tensor d = e - center;
  const double dn = norm(d);
  if (dn <= radius) return e;
  if (radius == 0.0) return center;
  Tensor q = (radius / dn) * d;
  Tensor p = center + q;
  // Rounding in the scale and the shift can land a hair outside the ball.
  while (norm(p - center) > radius) {
    q = (1.0 - 4.0 * std::numeric_limits<double>::epsilon()) * q;
    p = center + q;
  }
  return p;
}

}  // namespace advrecon
