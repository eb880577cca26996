#pragma once

#include <cstddef>
#include <span>

#include "advrecon/core/tensor.hpp"

namespace advrecon {

/// Linear map R^cols -> R^rows with an explicit adjoint.
///
/// Implementations must satisfy <apply(x), y> == <x, adjoint(y)> up to
/// rounding; every operator in the library is tested for it.
class LinearOperator {
 public:
  virtual ~LinearOperator() = default;

  virtual std::size_t rows() const noexcept = 0;
  virtual std::size_t cols() const noexcept = 0;

  // out has length rows(), in has length cols().
  virtual void apply(std::span<const double> in, std::span<double> out) const = 0;
  // out has length cols(), in has length rows().
  virtual void adjoint(std::span<const double> in, std::span<double> out) const = 0;

  Tensor apply(const Tensor& x) const;
  Tensor adjoint(const Tensor& y) const;
};

}  // namespace advrecon
