#pragma once

#include "advrecon/core/kernels.hpp"

namespace advrecon::kernels::detail {

const KernelTable& scalar_kernels() noexcept;
#if defined(ADVRECON_HAS_AVX2)
const KernelTable& avx2_kernels() noexcept;
#endif

}  // namespace advrecon::kernels::detail
