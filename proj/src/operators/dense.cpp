#include "advrecon/operators/dense.hpp"

#include <cmath>

#include "json.hpp"

#include "advrecon/core/cholesky.hpp"
#include "advrecon/core/error.hpp"
#include "advrecon/core/kernels.hpp"
#include "advrecon/core/rng.hpp"

namespace advrecon::operators {

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  expects(data_.size() == rows * cols, "DenseMatrix: data length does not match dimensions");
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

DenseMatrix DenseMatrix::from_operator(const LinearOperator& op) {
  DenseMatrix m(op.rows(), op.cols());
  std::vector<double> e(op.rows(), 0.0);
  std::vector<double> col(op.cols());
  // Row r of the matrix is adjoint(e_r).
  for (std::size_t r = 0; r < op.rows(); ++r) {
    e[r] = 1.0;
    op.adjoint(e, col);
    e[r] = 0.0;
    std::copy(col.begin(), col.end(), m.data_.begin() + static_cast<std::ptrdiff_t>(r * op.cols()));
  }
  return m;
}

DenseMatrix DenseMatrix::from_tensor(const Tensor& t) {
  expects(t.rank() == 2, "DenseMatrix::from_tensor: rank-2 tensor required");
  return DenseMatrix(t.shape()[0], t.shape()[1], t.values());
}

void DenseMatrix::apply(std::span<const double> in, std::span<double> out) const {
  expects(in.size() == cols_ && out.size() == rows_, "DenseMatrix::apply: dimension mismatch");
  kernels::gemv(data_.data(), rows_, cols_, in.data(), out.data());
}

void DenseMatrix::adjoint(std::span<const double> in, std::span<double> out) const {
  expects(in.size() == rows_ && out.size() == cols_, "DenseMatrix::adjoint: dimension mismatch");
  kernels::gemv_t(data_.data(), rows_, cols_, in.data(), out.data());
}

DenseMatrix DenseMatrix::transposed() const {
  DenseMatrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

double DenseMatrix::frobenius_norm() const {
  return std::sqrt(kernels::dot(data_.data(), data_.data(), data_.size()));
}

DenseMatrix gram(const DenseMatrix& m) {
  const std::size_t n = m.cols();
  DenseMatrix g(n, n);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const double* row = m.data().data() + r * n;
    for (std::size_t i = 0; i < n; ++i)
      if (row[i] != 0.0) kernels::axpy(row[i], row, g.data().data() + i * n, n);
  }
  return g;
}

DenseMatrix multiply(const DenseMatrix& a, const DenseMatrix& b) {
  expects(a.cols() == b.rows(), "multiply: inner dimensions differ");
  DenseMatrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double v = a(i, k);
      if (v != 0.0)
        kernels::axpy(v, b.data().data() + k * b.cols(), out.data().data() + i * b.cols(),
                      b.cols());
    }
  return out;
}

DenseMatrix add_scaled(const DenseMatrix& a, double c, const DenseMatrix& b) {
  expects(a.rows() == b.rows() && a.cols() == b.cols(), "add_scaled: dimension mismatch");
  DenseMatrix out = a;
  kernels::axpy(c, b.data().data(), out.data().data(), out.data().size());
  return out;
}

std::shared_ptr<const DenseMatrix> sample_gaussian_operator(std::size_t m, std::size_t n,
                                                            std::uint64_t seed) {
  if (m == 0 || m >= n)
    throw ConfigError("gaussian operator requires 0 < m < N (got m=" + std::to_string(m) +
                      ", N=" + std::to_string(n) + ")");
  Rng rng = make_rng(seed, {hash_name("gaussian-operator"), m, n});
  std::normal_distribution<double> dist(0.0, 1.0 / std::sqrt(static_cast<double>(m)));
  std::vector<double> data(m * n);
  for (double& v : data) v = dist(rng);
  auto a = std::make_shared<DenseMatrix>(m, n, std::move(data));

  // Full row rank <=> A A^T is positive definite.
  const DenseMatrix aat = gram(a->transposed());
  try {
    CholeskyFactor check(aat.data(), m);
  } catch (const NumericalError& e) {
    throw NumericalError(std::string("gaussian operator is rank deficient: ") + e.what());
  }
  return a;
}

Container operator_to_container(const DenseMatrix& a, std::uint64_t seed) {
  Container c;
  c.metadata = nlohmann::json{{"kind", "operator"},
                              {"m", a.rows()},
                              {"N", a.cols()},
                              {"seed", seed}}
                   .dump();
  c.put("matrix", a.as_tensor());
  return c;
}

std::shared_ptr<const DenseMatrix> operator_from_container(const Container& c) {
  const Tensor& t = c.get("matrix");
  if (t.rank() != 2) throw FormatError("operator matrix must be rank 2", 0);
  return std::make_shared<DenseMatrix>(DenseMatrix::from_tensor(t));
}

}  // namespace advrecon::operators
