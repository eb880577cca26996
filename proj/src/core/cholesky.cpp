#include "advrecon/core/cholesky.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "advrecon/core/error.hpp"
#include "advrecon/core/kernels.hpp"
#include "advrecon/core/linear_map.hpp"

namespace advrecon {

Tensor LinearOperator::apply(const Tensor& x) const {
  expects(x.size() == cols(), "operator apply: input length mismatch");
  Tensor out = Tensor::zeros(rows());
  apply(x.span(), out.span());
  return out;
}

Tensor LinearOperator::adjoint(const Tensor& y) const {
  expects(y.size() == rows(), "operator adjoint: input length mismatch");
  Tensor out = Tensor::zeros(cols());
  adjoint(y.span(), out.span());
  return out;
}

CholeskyFactor::CholeskyFactor(std::span<const double> matrix, std::size_t n)
    : n_(n), lower_(n * n, 0.0), upper_(n * n, 0.0) {
  expects(matrix.size() == n * n, "cholesky: matrix is not n x n");
  double max_diag = 0.0;
  double min_diag = std::numeric_limits<double>::infinity();
  double max_input_diag = 0.0;
  for (std::size_t i = 0; i < n; ++i) max_input_diag = std::max(max_input_diag, matrix[i * n + i]);

  for (std::size_t i = 0; i < n; ++i) {
    double* li = lower_.data() + i * n;
    for (std::size_t j = 0; j <= i; ++j) {
      const double* lj = lower_.data() + j * n;
      const double s = matrix[i * n + j] - kernels::dot(li, lj, j);
      if (i == j) {
        if (!(s > max_input_diag * 1e-14) || !std::isfinite(s)) {
          std::ostringstream msg;
          msg << "cholesky: matrix not numerically positive definite (pivot " << i << " = " << s
              << ", condition estimate >= "
              << (s > 0 ? (max_diag * max_diag) / s : std::numeric_limits<double>::infinity())
              << ")";
          throw NumericalError(msg.str());
        }
        li[i] = std::sqrt(s);
        max_diag = std::max(max_diag, li[i]);
        min_diag = std::min(min_diag, li[i]);
      } else {
        li[j] = s / lj[j];
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) upper_[j * n + i] = lower_[i * n + j];
  condition_estimate_ = n ? (max_diag / min_diag) * (max_diag / min_diag) : 1.0;
}

void CholeskyFactor::solve_in_place(std::span<double> rhs) const {
  expects(rhs.size() == n_, "cholesky solve: rhs length mismatch");
  const std::size_t n = n_;
  // L z = b
  for (std::size_t i = 0; i < n; ++i) {
    const double* li = lower_.data() + i * n;
    rhs[i] = (rhs[i] - kernels::dot(li, rhs.data(), i)) / li[i];
  }
  // L^T x = z
  for (std::size_t ii = n; ii-- > 0;) {
    const double* ui = upper_.data() + ii * n;
    rhs[ii] = (rhs[ii] - kernels::dot(ui + ii + 1, rhs.data() + ii + 1, n - ii - 1)) / ui[ii];
  }
}

Tensor CholeskyFactor::solve(const Tensor& rhs) const {
  Tensor out = rhs;
  solve_in_place(out.span());
  return out;
}

}  // namespace advrecon
