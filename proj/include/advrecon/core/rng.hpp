#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

#include "advrecon/core/tensor.hpp"

namespace advrecon {

using Rng = std::mt19937_64;

// splitmix64 finalizer; used to derive independent per-item streams.
std::uint64_t mix_seed(std::uint64_t x) noexcept;

// Stream seed for a work item identified by (base, path...). Stable across
// platforms and independent of scheduling order.
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> path) noexcept;

// FNV-1a, for turning names into seed path components.
std::uint64_t hash_name(std::string_view name) noexcept;

inline Rng make_rng(std::uint64_t base, std::initializer_list<std::uint64_t> path = {}) {
  return Rng(derive_seed(base, path));
}

Tensor standard_normal(Rng& rng, std::size_t n);
double uniform(Rng& rng, double lo, double hi);

}  // namespace advrecon
