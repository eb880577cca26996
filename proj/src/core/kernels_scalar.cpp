#include "kernels_impl.hpp"

namespace advrecon::kernels::detail {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void gemv_scalar(const double* m, std::size_t rows, std::size_t cols, const double* x,
                 double* y) {
  for (std::size_t r = 0; r < rows; ++r) y[r] = dot_scalar(m + r * cols, x, cols);
}

void gemv_t_scalar(const double* m, std::size_t rows, std::size_t cols, const double* x,
                   double* y) {
  for (std::size_t c = 0; c < cols; ++c) y[c] = 0.0;
  for (std::size_t r = 0; r < rows; ++r) axpy_scalar(x[r], m + r * cols, y, cols);
}

void conv3_scalar(const double* in, double* out, std::size_t n, double w0, double w1,
                  double w2) {
  if (n == 0) return;
  if (n == 1) {
    out[0] += w1 * in[0];
    return;
  }
  out[0] += w1 * in[0] + w2 * in[1];
  for (std::size_t i = 1; i + 1 < n; ++i) out[i] += w0 * in[i - 1] + w1 * in[i] + w2 * in[i + 1];
  out[n - 1] += w0 * in[n - 2] + w1 * in[n - 1];
}

}  // namespace

const KernelTable& scalar_kernels() noexcept {
  static const KernelTable table{Isa::scalar, dot_scalar,    axpy_scalar,
                                 gemv_scalar, gemv_t_scalar, conv3_scalar};
  return table;
}

}  // namespace advrecon::kernels::detail
