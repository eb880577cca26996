#pragma once

#include <vector>

#include "advrecon/core/rng.hpp"
#include "advrecon/core/tensor.hpp"
#include "oracles.hpp"

namespace testing {

inline oracle::Vec vec(const advrecon::Tensor& t) { return t.values(); }

inline advrecon::Tensor random_tensor(advrecon::Rng& rng, advrecon::Shape shape) {
  const std::size_t n = advrecon::shape_size(shape);
  return advrecon::Tensor(shape, advrecon::standard_normal(rng, n).values());
}

inline double rel_err(const advrecon::Tensor& a, const advrecon::Tensor& b) {
  return oracle::rel_dist(a.values(), b.values());
}

}  // namespace testing
