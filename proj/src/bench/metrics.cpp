#include "advrecon/bench/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "advrecon/core/error.hpp"

namespace advrecon::bench {

double rel_error(const Tensor& xhat, const Tensor& xbar) {
  expects(xhat.size() == xbar.size(), "rel_error: size mismatch");
  const double ref = norm(xbar);
  expects(ref > 0.0, "rel_error: reference signal is zero");
  return norm(xhat - xbar) / ref;
}

double psnr(const Tensor& xhat, const Tensor& xbar, double window) {
  expects(xhat.size() == xbar.size() && !xbar.empty(), "psnr: size mismatch");
  if (!(window > 0.0)) {
    const auto [lo, hi] = std::minmax_element(xbar.values().begin(), xbar.values().end());
    window = *hi > *lo ? *hi - *lo : 1.0;
  }
  const double mse = squared_norm(xhat - xbar) / static_cast<double>(xbar.size());
  if (mse == 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(window * window / mse));
}

}  // namespace advrecon::bench
