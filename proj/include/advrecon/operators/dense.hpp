#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "advrecon/core/container.hpp"
#include "advrecon/core/linear_map.hpp"
#include "advrecon/core/tensor.hpp"

namespace advrecon::operators {

/// Explicit row-major matrix used as a LinearOperator.
class DenseMatrix final : public LinearOperator {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols);
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static DenseMatrix identity(std::size_t n);
  static DenseMatrix from_operator(const LinearOperator& op);

  std::size_t rows() const noexcept override { return rows_; }
  std::size_t cols() const noexcept override { return cols_; }
  using LinearOperator::adjoint;
  using LinearOperator::apply;
  void apply(std::span<const double> in, std::span<double> out) const override;
  void adjoint(std::span<const double> in, std::span<double> out) const override;

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  const std::vector<double>& data() const noexcept { return data_; }
  std::vector<double>& data() noexcept { return data_; }

  Tensor as_tensor() const { return Tensor(Shape{rows_, cols_}, data_); }
  static DenseMatrix from_tensor(const Tensor& t);

  DenseMatrix transposed() const;
  double frobenius_norm() const;
  friend bool operator==(const DenseMatrix& a, const DenseMatrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// M^T M (cols x cols).
DenseMatrix gram(const DenseMatrix& m);
// a * b
DenseMatrix multiply(const DenseMatrix& a, const DenseMatrix& b);
// a + c * b
DenseMatrix add_scaled(const DenseMatrix& a, double c, const DenseMatrix& b);

/// Gaussian measurement operator with i.i.d. N(0, 1/m) entries.
///
/// Requires 0 < m < N (the underdetermined regime) and checks that the draw
/// has full row rank. Deterministic in (m, N, seed).
std::shared_ptr<const DenseMatrix> sample_gaussian_operator(std::size_t m, std::size_t n,
                                                            std::uint64_t seed);

// Container entry "matrix" [rows, cols]; metadata records kind, dims and seed.
Container operator_to_container(const DenseMatrix& a, std::uint64_t seed);
std::shared_ptr<const DenseMatrix> operator_from_container(const Container& c);

}  // namespace advrecon::operators
