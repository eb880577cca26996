#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "advrecon/core/rng.hpp"
#include "advrecon/nets/recon_net.hpp"

namespace advrecon::nets {

struct TrainConfig {
  int epochs = 200;
  std::size_t batch_size = 32;
  double lr = 1e-3;
  double weight_decay = 1e-5;  // mu
  double jitter_bound = 0.0;   // eta-hat, absolute
  std::uint64_t seed = 0;
  int threads = 1;

  void validate() const;
};

struct TrainReport {
  std::vector<double> epoch_loss;  // mean data loss per epoch, without weight decay
};

/// t ~ U[0, bound], e = (t / sqrt(m)) g with g ~ N(0, I), so E||e|| is close to t.
Tensor jitter_noise(std::size_t m, double bound, Rng& rng);

/// Mini-batch Adam on mean_i ||net(A x_i + e_i) - x_i||^2 + mu ||theta||^2.
///
/// Epoch order and every e_i come from streams derived from (seed, epoch,
/// sample), and per-sample gradients are summed in sample order, so the
/// result does not depend on `threads`. Throws TrainingError naming the epoch
/// and batch if the loss or a gradient becomes non-finite.
TrainReport train(ReconNet& net, const std::vector<Tensor>& signals, const TrainConfig& cfg,
                  const std::function<void(int, double)>& on_epoch = nullptr);

// Mean squared reconstruction error of the batch loss for fixed measurements
// (used by tests and reports).
double data_loss(const ReconNet& net, const std::vector<Tensor>& signals,
                 const std::vector<Tensor>& measurements);

}  // namespace advrecon::nets
