#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "advrecon/core/tape.hpp"
#include "advrecon/nets/params.hpp"

namespace advrecon::nets {

struct ConvBlockSpec {
  int levels = 3;
  std::vector<std::size_t> channels = {16, 32, 64};
  int kernel = 3;
  int pool = 2;

  // Throws ConfigError unless kernel == 3, pool == 2, levels >= 1 and
  // channels has one positive entry per level.
  void validate() const;
  // Signal lengths must be divisible by this.
  std::size_t length_multiple() const;
};

/// 1D U-Net-lite with a residual output: f(x) = x + correction(x).
///
/// Each level has two conv+ReLU layers; levels are joined by max-pooling on
/// the way down and nearest upsampling plus skip concatenation on the way up.
/// The final 1-channel correction conv starts at zero, so f is the identity
/// at initialization.
///
/// Parameters live under `prefix` in a ParamSet.
void init_unet(ParamSet& params, const std::string& prefix, const ConvBlockSpec& spec,
               std::uint64_t seed);

// x has N entries; the result has the same shape as x.
Var unet_forward(Tape& tape, const Bound& params, const std::string& prefix,
                 const ConvBlockSpec& spec, Var x);

}  // namespace advrecon::nets
