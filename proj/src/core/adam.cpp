#include "advrecon/core/adam.hpp"

#include <cmath>

#include "advrecon/core/error.hpp"

namespace advrecon {

AdamState AdamState::fresh(const Shape& shape, double lr) {
  AdamState s;
  s.m1 = Tensor(shape);
  s.m2 = Tensor(shape);
  s.lr = lr;
  return s;
}

void adam_step_in_place(AdamState& state, std::span<double> params, std::span<const double> grad) {
  expects(params.size() == grad.size() && state.m1.size() == params.size() &&
              state.m2.size() == params.size(),
          "adam_step: shapes of params, grad and moments must agree");
  state.t += 1;
  const double t = static_cast<double>(state.t);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grad[i];
    double& m1 = state.m1[i];
    double& m2 = state.m2[i];
    m1 = state.beta1 * m1 + (1.0 - state.beta1) * g;
    m2 = state.beta2 * m2 + (1.0 - state.beta2) * g * g;
    const double m1_hat = m1 / c1;
    const double m2_hat = m2 / c2;
    params[i] -= state.lr * m1_hat / (std::sqrt(m2_hat) + state.eps);
  }
}

AdamUpdate adam_step(const AdamState& state, const Tensor& params, const Tensor& grad) {
  expects(params.shape() == grad.shape() && params.shape() == state.m1.shape() &&
              params.shape() == state.m2.shape(),
          "adam_step: shapes of params, grad and moments must agree");
  AdamUpdate out{params, state};
  adam_step_in_place(out.state, out.params.span(), grad.span());
  return out;
}

}  // namespace advrecon
