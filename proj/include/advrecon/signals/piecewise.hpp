#pragma once

#include <cstddef>

#include "advrecon/core/rng.hpp"
#include "advrecon/core/tensor.hpp"

namespace advrecon::signals {

/// Distribution of piecewise-constant signals with zero boundary segments.
///
/// A signal has k jumps (k drawn uniformly from [jumps_min, jumps_max],
/// excluding k = 1 which cannot return to zero), every segment is at least
/// min_gap samples long, and every jump magnitude lies in [amp_min, amp_max].
struct PiecewiseConstantSpec {
  std::size_t n = 256;
  int jumps_min = 2;
  int jumps_max = 6;
  double amp_min = 0.5;
  double amp_max = 2.0;
  std::size_t min_gap = 10;

  // Throws ConfigError describing the first violated constraint.
  void validate() const;
};

Tensor sample_piecewise_constant(const PiecewiseConstantSpec& spec, Rng& rng);

// Number of nonzero forward differences x[i+1] - x[i].
int count_jumps(const Tensor& x);

}  // namespace advrecon::signals
