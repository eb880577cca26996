#pragma once

#include <cstddef>

#include "advrecon/core/linear_map.hpp"
#include "advrecon/core/tensor.hpp"

namespace advrecon::operators {

/// 1D forward differences with Neumann boundary, completed to a square
/// operator by a final row of 1/N entries (the signal mean).
class GradientOp1D final : public LinearOperator {
 public:
  explicit GradientOp1D(std::size_t n);

  std::size_t rows() const noexcept override { return n_; }
  std::size_t cols() const noexcept override { return n_; }
  using LinearOperator::adjoint;
  using LinearOperator::apply;
  void apply(std::span<const double> in, std::span<double> out) const override;
  void adjoint(std::span<const double> in, std::span<double> out) const override;

 private:
  std::size_t n_;
};

/// Periodic forward differences on an H x W image stored row-major:
/// the first H*W outputs are horizontal differences, the next H*W vertical.
class GradientOp2D final : public LinearOperator {
 public:
  GradientOp2D(std::size_t height, std::size_t width);

  std::size_t height() const noexcept { return h_; }
  std::size_t width() const noexcept { return w_; }
  std::size_t rows() const noexcept override { return 2 * h_ * w_; }
  std::size_t cols() const noexcept override { return h_ * w_; }
  using LinearOperator::adjoint;
  using LinearOperator::apply;
  void apply(std::span<const double> in, std::span<double> out) const override;
  void adjoint(std::span<const double> in, std::span<double> out) const override;

 private:
  std::size_t h_;
  std::size_t w_;
};

Tensor grad_1d(const Tensor& x);
// x has shape [H, W].
Tensor grad_2d(const Tensor& x);

}  // namespace advrecon::operators
