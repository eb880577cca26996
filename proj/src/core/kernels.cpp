#include "advrecon/core/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

#include "advrecon/core/error.hpp"
#include "kernels_impl.hpp"

namespace advrecon::kernels {
namespace {

bool cpu_has_avx2() noexcept {
#if defined(ADVRECON_HAS_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* initial_table() noexcept {
  if (const char* env = std::getenv("ADVRECON_SIMD")) {
    if (std::string_view(env) == "scalar") return &detail::scalar_kernels();
  }
#if defined(ADVRECON_HAS_AVX2)
  if (cpu_has_avx2()) return &detail::avx2_kernels();
#endif
  return &detail::scalar_kernels();
}

std::atomic<const KernelTable*>& current() noexcept {
  static std::atomic<const KernelTable*> table{initial_table()};
  return table;
}

}  // namespace

bool isa_supported(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
      return cpu_has_avx2();
  }
  return false;
}

const KernelTable& table(Isa isa) {
  if (!isa_supported(isa))
    throw ConfigError("kernel ISA " + std::string(isa_name(isa)) + " not supported on this host");
#if defined(ADVRECON_HAS_AVX2)
  if (isa == Isa::avx2) return detail::avx2_kernels();
#endif
  return detail::scalar_kernels();
}

const KernelTable& active() noexcept { return *current().load(std::memory_order_acquire); }

Isa active_isa() noexcept { return active().isa; }

void select(Isa isa) { current().store(&table(isa), std::memory_order_release); }

std::string_view isa_name(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar:
      return "scalar";
    case Isa::avx2:
      return "avx2";
  }
  return "unknown";
}

}  // namespace advrecon::kernels
