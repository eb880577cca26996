#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "advrecon/core/tensor.hpp"

namespace advrecon {

/// Cholesky factor L of a symmetric positive-definite matrix G = L L^T.
///
/// Factorization throws NumericalError (with a diagonal-ratio condition
/// estimate) when a pivot is not safely positive.
class CholeskyFactor {
 public:
  // matrix is n x n row-major; only the lower triangle is read.
  CholeskyFactor(std::span<const double> matrix, std::size_t n);

  std::size_t dim() const noexcept { return n_; }

  void solve_in_place(std::span<double> rhs) const;
  Tensor solve(const Tensor& rhs) const;

  // (max_i L_ii / min_i L_ii)^2, a cheap lower bound on cond(G).
  double condition_estimate() const noexcept { return condition_estimate_; }

 private:
  std::size_t n_;
  std::vector<double> lower_;  // row-major, row i holds L[i][0..i]
  std::vector<double> upper_;  // row-major L^T, row i holds L[i..n)[i]
  double condition_estimate_ = 1.0;
};

}  // namespace advrecon
