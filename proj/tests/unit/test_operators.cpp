#include <cmath>

#include "advrecon/core/error.hpp"
#include "advrecon/operators/dense.hpp"
#include "advrecon/operators/gradient.hpp"
#include "advrecon/operators/tikhonov.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace advrecon;
using namespace advrecon::operators;

namespace {

void check_adjoint(const LinearOperator& op, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  for (int k = 0; k < 100; ++k) {
    Tensor x = standard_normal(rng, op.cols());
    Tensor y = standard_normal(rng, op.rows());
    const double lhs = dot(op.apply(x), y);
    const double rhs = dot(x, op.adjoint(y));
    CHECK(std::abs(lhs - rhs) <= 1e-10 * norm(x) * norm(y));
  }
}

oracle::Mat to_mat(const DenseMatrix& d) {
  oracle::Mat m(d.rows(), oracle::Vec(d.cols()));
  for (std::size_t r = 0; r < d.rows(); ++r)
    for (std::size_t c = 0; c < d.cols(); ++c) m[r][c] = d(r, c);
  return m;
}

}  // namespace

TEST_SUITE("operators") {

TEST_CASE("gaussian operator determinism and moments") {
  auto a = sample_gaussian_operator(100, 256, 42);
  auto b = sample_gaussian_operator(100, 256, 42);
  CHECK(*a == *b);
  CHECK_FALSE(*a == *sample_gaussian_operator(100, 256, 43));

  double mean = 0.0, sq = 0.0;
  for (double v : a->data()) {
    mean += v;
    sq += v * v;
  }
  mean /= 25600.0;
  const double var = sq / 25600.0 - mean * mean;
  CHECK(var == doctest::Approx(0.01).epsilon(0.10));

  double col = 0.0;
  for (std::size_t c = 0; c < 256; ++c)
    for (std::size_t r = 0; r < 100; ++r) col += (*a)(r, c) * (*a)(r, c);
  CHECK(col / 256.0 == doctest::Approx(1.0).epsilon(0.10));

  CHECK_THROWS_AS(sample_gaussian_operator(256, 256, 1), ConfigError);
  CHECK_THROWS_AS(sample_gaussian_operator(300, 256, 1), ConfigError);
  CHECK_THROWS_AS(sample_gaussian_operator(0, 256, 1), ConfigError);
}

TEST_CASE("grad_1d examples") {
  CHECK(grad_1d(Tensor::vector({1, 1, 1, 1})) == Tensor::vector({0, 0, 0, 1}));
  CHECK(grad_1d(Tensor::vector({1, 2, 4, 4})) == Tensor::vector({1, 2, 0, 2.75}));
  CHECK(grad_1d(Tensor::zeros(5)) == Tensor::zeros(5));
  CHECK_THROWS_AS(GradientOp1D(1), ContractViolation);
  CHECK_THROWS_AS(grad_1d(Tensor::vector({1.0})), ContractViolation);
}

TEST_CASE("grad_1d matches the explicit matrix") {
  GradientOp1D g(9);
  DenseMatrix d = DenseMatrix::from_operator(g);
  oracle::Mat ref = oracle::gradient_1d_matrix(9);
  for (std::size_t r = 0; r < 9; ++r)
    for (std::size_t c = 0; c < 9; ++c) CHECK(d(r, c) == doctest::Approx(ref[r][c]));
}

TEST_CASE("grad_2d examples") {
  Tensor c(Shape{3, 4});
  for (std::size_t i = 0; i < 12; ++i) c[i] = 2.5;
  CHECK(grad_2d(c) == Tensor::zeros(24));
  Tensor img(Shape{2, 2}, {0, 1, 0, 1});
  CHECK(grad_2d(img) == Tensor::vector({1, -1, 1, -1, 0, 0, 0, 0}));
  CHECK_THROWS_AS(GradientOp2D(1, 4), ContractViolation);
}

TEST_CASE("adjoint identity for every operator") {
  check_adjoint(*sample_gaussian_operator(30, 70, 1), 1);
  check_adjoint(GradientOp1D(2), 2);
  check_adjoint(GradientOp1D(257), 3);
  check_adjoint(GradientOp2D(2, 2), 4);
  check_adjoint(GradientOp2D(28, 28), 5);
  check_adjoint(GradientOp2D(3, 7), 6);
  auto a = sample_gaussian_operator(6, 12, 2);
  GradientOp1D g(12);
  check_adjoint(*tikhonov_inverse(*a, g, 0.02).matrix, 7);
}

TEST_CASE("gradient of a piecewise constant signal has one entry per jump") {
  Tensor x = Tensor::zeros(40);
  for (std::size_t i = 10; i < 20; ++i) x[i] = 1.5;
  for (std::size_t i = 20; i < 30; ++i) x[i] = -0.5;
  Tensor g = grad_1d(x);
  int nz = 0;
  for (std::size_t i = 0; i + 1 < 40; ++i) nz += g[i] != 0.0;
  CHECK(nz == 3);
}

TEST_CASE("tikhonov identity case") {
  DenseMatrix eye = DenseMatrix::identity(2);
  DenseMatrix zero(2, 2);
  auto t = tikhonov_inverse(eye, zero, 1.0);
  CHECK(*t.matrix == DenseMatrix::identity(2));
}

TEST_CASE("tikhonov defining equation against an explicit inverse") {
  auto a = sample_gaussian_operator(6, 12, 8);
  GradientOp1D g(12);
  auto t = tikhonov_inverse(*a, g, 0.02);
  CHECK(t.residual <= 1e-8);
  CHECK(t.matrix->rows() == 12);
  CHECK(t.matrix->cols() == 6);

  oracle::Mat am = to_mat(*a), gm = oracle::gradient_1d_matrix(12);
  oracle::Mat normal(12, oracle::Vec(12, 0.0));
  for (std::size_t i = 0; i < 12; ++i)
    for (std::size_t j = 0; j < 12; ++j) {
      for (std::size_t r = 0; r < 6; ++r) normal[i][j] += am[r][i] * am[r][j];
      for (std::size_t r = 0; r < 12; ++r) normal[i][j] += 0.02 * gm[r][i] * gm[r][j];
    }
  oracle::Mat inv = oracle::inverse(normal);
  double diff = 0.0, ref = 0.0;
  for (std::size_t i = 0; i < 12; ++i)
    for (std::size_t c = 0; c < 6; ++c) {
      double v = 0.0;
      for (std::size_t k = 0; k < 12; ++k) v += inv[i][k] * am[c][k];
      diff += (v - (*t.matrix)(i, c)) * (v - (*t.matrix)(i, c));
      ref += v * v;
    }
  CHECK(std::sqrt(diff / ref) <= 1e-9);
}

TEST_CASE("tikhonov norm decreases with alpha") {
  auto a = sample_gaussian_operator(6, 12, 9);
  GradientOp1D g(12);
  double prev = std::numeric_limits<double>::infinity();
  for (double alpha : {0.02, 0.2, 2.0}) {
    const double s = oracle::spectral_norm(to_mat(*tikhonov_inverse(*a, g, alpha).matrix));
    CHECK(s < prev);
    prev = s;
  }
}

TEST_CASE("tikhonov singular system") {
  DenseMatrix a(1, 3, {1.0, 0.0, 0.0});
  DenseMatrix zero(3, 3);
  try {
    tikhonov_inverse(a, zero, 1.0);
    FAIL("expected NumericalError");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("condition") != std::string::npos);
  }
  CHECK_THROWS_AS(tikhonov_inverse(a, GradientOp1D(3), 0.0), ContractViolation);
}

TEST_CASE("operator container roundtrip") {
  auto a = sample_gaussian_operator(5, 9, 77);
  Container c = operator_to_container(*a, 77);
  auto back = operator_from_container(decode_container(encode_container(c)));
  CHECK(*back == *a);
}

}
