#include "advrecon/operators/tikhonov.hpp"

#include <sstream>

#include "advrecon/core/cholesky.hpp"
#include "advrecon/core/error.hpp"

namespace advrecon::operators {

TikhonovInverse tikhonov_inverse(const DenseMatrix& a, const LinearOperator& grad, double alpha) {
  expects(alpha > 0.0, "tikhonov_inverse: alpha must be positive");
  expects(grad.cols() == a.cols(), "tikhonov_inverse: gradient and operator widths differ");
  const std::size_t n = a.cols();
  const std::size_t m = a.rows();

  const DenseMatrix normal = add_scaled(gram(a), alpha, gram(DenseMatrix::from_operator(grad)));
  CholeskyFactor factor(normal.data(), n);

  // Solve column by column for T = normal^{-1} A^T; column j of A^T is row j of A.
  DenseMatrix t(n, m);
  std::vector<double> col(n);
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t i = 0; i < n; ++i) col[i] = a(j, i);
    factor.solve_in_place(col);
    for (std::size_t i = 0; i < n; ++i) t(i, j) = col[i];
  }

  const DenseMatrix at = a.transposed();
  const DenseMatrix resid = add_scaled(multiply(normal, t), -1.0, at);
  const double rel = resid.frobenius_norm() / std::max(at.frobenius_norm(), 1e-300);
  if (!(rel <= 1e-8)) {
    std::ostringstream msg;
    msg << "tikhonov_inverse: defining-equation residual " << rel
        << " exceeds 1e-8 (condition estimate " << factor.condition_estimate() << ")";
    throw NumericalError(msg.str());
  }
  return {alpha, std::make_shared<DenseMatrix>(std::move(t)), rel};
}

}  // namespace advrecon::operators
