#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "advrecon/attacks/noise.hpp"
#include "advrecon/core/container.hpp"
#include "advrecon/operators/dense.hpp"
#include "advrecon/signals/piecewise.hpp"

namespace advrecon::signals {

struct NoiseSpec {
  std::optional<attacks::StatisticalNoise> kind;  // nullopt: noiseless
  double eta = 0.0;                               // absolute level
  double bernoulli_p = 0.025;

  std::string describe() const;
};

/// Ground-truth signals with their measurements y_i = A x_i + e_i.
struct Dataset {
  std::vector<Tensor> signals;
  std::vector<Tensor> measurements;
  std::shared_ptr<const operators::DenseMatrix> op;
  NoiseSpec noise;

  std::size_t size() const noexcept { return signals.size(); }
};

/// Signal i and its noise come from streams derived from (seed, i), so the
/// result does not depend on how the work is scheduled.
Dataset make_dataset(std::shared_ptr<const operators::DenseMatrix> a,
                     const PiecewiseConstantSpec& spec, std::size_t count, const NoiseSpec& noise,
                     std::uint64_t seed, int threads = 1);

// Measurements for externally supplied signals (e.g. IDX images).
Dataset make_dataset_from_signals(std::shared_ptr<const operators::DenseMatrix> a,
                                  std::vector<Tensor> signals, const NoiseSpec& noise,
                                  std::uint64_t seed);

// Entries "signals" [M, N] and "measurements" [M, m]; the operator is stored
// separately and must be supplied when loading.
Container dataset_to_container(const Dataset& d);
Dataset dataset_from_container(const Container& c,
                               std::shared_ptr<const operators::DenseMatrix> a);

}  // namespace advrecon::signals
