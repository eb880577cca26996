#include "advrecon/operators/gradient.hpp"

#include "advrecon/core/error.hpp"

namespace advrecon::operators {

GradientOp1D::GradientOp1D(std::size_t n) : n_(n) {
  expects(n >= 2, "GradientOp1D: signal length must be at least 2");
}

void GradientOp1D::apply(std::span<const double> in, std::span<double> out) const {
  expects(in.size() == n_ && out.size() == n_, "GradientOp1D::apply: dimension mismatch");
  double mean = 0.0;
  for (std::size_t i = 0; i < n_; ++i) mean += in[i];
  for (std::size_t i = 0; i + 1 < n_; ++i) out[i] = in[i + 1] - in[i];
  out[n_ - 1] = mean / static_cast<double>(n_);
}

void GradientOp1D::adjoint(std::span<const double> in, std::span<double> out) const {
  expects(in.size() == n_ && out.size() == n_, "GradientOp1D::adjoint: dimension mismatch");
  const double m = in[n_ - 1] / static_cast<double>(n_);
  for (std::size_t j = 0; j < n_; ++j) {
    double v = m;
    if (j >= 1) v += in[j - 1];
    if (j + 1 < n_) v -= in[j];
    out[j] = v;
  }
}

GradientOp2D::GradientOp2D(std::size_t height, std::size_t width) : h_(height), w_(width) {
  expects(height >= 2 && width >= 2, "GradientOp2D: image must be at least 2 x 2");
}

void GradientOp2D::apply(std::span<const double> in, std::span<double> out) const {
  expects(in.size() == cols() && out.size() == rows(), "GradientOp2D::apply: dimension mismatch");
  const std::size_t hw = h_ * w_;
  for (std::size_t i = 0; i < h_; ++i) {
    const std::size_t down = (i + 1) % h_;
    for (std::size_t j = 0; j < w_; ++j) {
      const std::size_t right = (j + 1) % w_;
      out[i * w_ + j] = in[i * w_ + right] - in[i * w_ + j];
      out[hw + i * w_ + j] = in[down * w_ + j] - in[i * w_ + j];
    }
  }
}

void GradientOp2D::adjoint(std::span<const double> in, std::span<double> out) const {
  expects(in.size() == rows() && out.size() == cols(),
          "GradientOp2D::adjoint: dimension mismatch");
  const std::size_t hw = h_ * w_;
  for (std::size_t i = 0; i < h_; ++i) {
    const std::size_t up = (i + h_ - 1) % h_;
    for (std::size_t j = 0; j < w_; ++j) {
      const std::size_t left = (j + w_ - 1) % w_;
      out[i * w_ + j] = in[i * w_ + left] - in[i * w_ + j] + in[hw + up * w_ + j] -
                        in[hw + i * w_ + j];
    }
  }
}

Tensor grad_1d(const Tensor& x) {
  expects(x.size() >= 2, "grad_1d: signal length must be at least 2");
  return GradientOp1D(x.size()).apply(x.reshaped({x.size()}));
}

Tensor grad_2d(const Tensor& x) {
  expects(x.rank() == 2, "grad_2d: expected an [H, W] tensor");
  GradientOp2D op(x.shape()[0], x.shape()[1]);
  return op.apply(x.reshaped({x.size()}));
}

}  // namespace advrecon::operators
