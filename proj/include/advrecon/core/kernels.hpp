#pragma once

#include <cstddef>
#include <string_view>

// Inner-loop arithmetic kernels. Every kernel has a scalar reference
// implementation; vectorized variants are chosen once at startup from the
// host CPU and can be overridden (tests, ADVRECON_SIMD=scalar).
namespace advrecon::kernels {

enum class Isa { scalar, avx2 };

struct KernelTable {
  Isa isa;
  // sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y[i] += alpha * x[i]
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // y = M x, M row-major rows x cols
  void (*gemv)(const double* m, std::size_t rows, std::size_t cols, const double* x, double* y);
  // y = M^T x, M row-major rows x cols
  void (*gemv_t)(const double* m, std::size_t rows, std::size_t cols, const double* x,
                 double* y);
  // out[i] += w0 * in[i-1] + w1 * in[i] + w2 * in[i+1], zero outside [0, n)
  void (*conv3)(const double* in, double* out, std::size_t n, double w0, double w1, double w2);
};

bool isa_supported(Isa isa) noexcept;
const KernelTable& table(Isa isa);
const KernelTable& active() noexcept;
Isa active_isa() noexcept;
void select(Isa isa);
std::string_view isa_name(Isa isa) noexcept;

inline double dot(const double* a, const double* b, std::size_t n) {
  return active().dot(a, b, n);
}
inline void axpy(double alpha, const double* x, double* y, std::size_t n) {
  active().axpy(alpha, x, y, n);
}
inline void gemv(const double* m, std::size_t rows, std::size_t cols, const double* x,
                 double* y) {
  active().gemv(m, rows, cols, x, y);
}
inline void gemv_t(const double* m, std::size_t rows, std::size_t cols, const double* x,
                   double* y) {
  active().gemv_t(m, rows, cols, x, y);
}
inline void conv3(const double* in, double* out, std::size_t n, double w0, double w1,
                  double w2) {
  active().conv3(in, out, n, w0, w1, w2);
}

}  // namespace advrecon::kernels
