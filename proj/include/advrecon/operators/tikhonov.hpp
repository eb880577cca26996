#pragma once

#include <memory>

#include "advrecon/core/linear_map.hpp"
#include "advrecon/operators/dense.hpp"

namespace advrecon::operators {

/// Explicit generalized Tikhonov inversion T = (A^T A + alpha G^T G)^{-1} A^T
/// (N x m), used as the model-based inversion layer of the networks.
struct TikhonovInverse {
  double alpha = 0.0;
  std::shared_ptr<const DenseMatrix> matrix;

  // Relative Frobenius residual ||(A^T A + alpha G^T G) T - A^T|| / ||A^T||.
  double residual = 0.0;
};

/// Throws NumericalError (with a condition estimate) if the normal matrix is
/// singular, or if the defining-equation residual exceeds 1e-8.
TikhonovInverse tikhonov_inverse(const DenseMatrix& a, const LinearOperator& grad, double alpha);

}  // namespace advrecon::operators
