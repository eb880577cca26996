#include "advrecon/nets/train.hpp"

#include <cmath>
#include <numeric>

#include "advrecon/core/adam.hpp"
#include "advrecon/core/error.hpp"
#include "advrecon/core/kernels.hpp"
#include "advrecon/core/parallel.hpp"

namespace advrecon::nets {

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("train: epochs must be at least 1");
  if (batch_size < 1) throw ConfigError("train: batch_size must be at least 1");
  if (!(lr >= 0.0)) throw ConfigError("train: lr must be nonnegative");
  if (!(weight_decay >= 0.0)) throw ConfigError("train: weight_decay must be nonnegative");
  if (!(jitter_bound >= 0.0)) throw ConfigError("train: jitter_bound must be nonnegative");
  if (threads < 1) throw ConfigError("train: threads must be at least 1");
}

Tensor jitter_noise(std::size_t m, double bound, Rng& rng) {
  expects(bound >= 0.0, "jitter_noise: bound must be nonnegative");
  if (bound == 0.0) return Tensor::zeros(m);
  const double t = uniform(rng, 0.0, bound);
  return (t / std::sqrt(static_cast<double>(m))) * standard_normal(rng, m);
}

namespace {

std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, int epoch) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng = make_rng(seed, {hash_name("train-epoch"), static_cast<std::uint64_t>(epoch)});
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng() % i]);
  return order;
}

bool all_finite(const std::vector<Tensor>& ts) {
  for (const auto& t : ts)
    if (!t.all_finite()) return false;
  return true;
}

}  // namespace

TrainReport train(ReconNet& net, const std::vector<Tensor>& signals, const TrainConfig& cfg,
                  const std::function<void(int, double)>& on_epoch) {
  cfg.validate();
  if (signals.empty()) throw ConfigError("train: no training signals");
  const auto& a = *net.op();
  for (const auto& x : signals)
    if (x.size() != a.cols()) throw ConfigError("train: signal length differs from operator N");

  ParamSet& ps = net.params();
  std::vector<AdamState> adam;
  for (const auto& e : ps.entries()) adam.push_back(AdamState::fresh(e.second.shape(), cfg.lr));

  TrainReport report;
  const std::size_t n = signals.size();
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto order = epoch_order(n, cfg.seed, epoch);
    double epoch_sum = 0.0;
    int batch = 0;
    for (std::size_t start = 0; start < n; start += cfg.batch_size, ++batch) {
      const std::size_t count = std::min(cfg.batch_size, n - start);
      std::vector<std::vector<Tensor>> grads(count);
      std::vector<double> losses(count, 0.0);
      try {
        parallel_for(count, cfg.threads, [&](std::size_t j) {
          const std::size_t i = order[start + j];
          Rng rng = make_rng(cfg.seed, {hash_name("jitter"), static_cast<std::uint64_t>(epoch), i});
          Tensor y = a.apply(signals[i]) + jitter_noise(a.rows(), cfg.jitter_bound, rng);
          Tape t;
          Bound p(t, ps, true);
          Var out = net.record(t, p, t.constant(y));
          Var loss = t.squared_norm(t.sub(out, t.constant(signals[i])));
          losses[j] = t.scalar(loss);
          grads[j] = p.gradients(t.backward(loss));
        });
      } catch (const TrainingError&) {
        throw;
      } catch (const NumericalError& e) {
        throw TrainingError(std::string("train: ") + e.what(), epoch, batch);
      }
      double batch_loss = 0.0;
      for (std::size_t j = 0; j < count; ++j) {
        batch_loss += losses[j];
        if (!std::isfinite(losses[j]) || !all_finite(grads[j]))
          throw TrainingError("train: non-finite loss or gradient", epoch, batch);
      }
      epoch_sum += batch_loss;

      const double inv = 1.0 / static_cast<double>(count);
      auto& entries = ps.entries();
      for (std::size_t k = 0; k < entries.size(); ++k) {
        Tensor& theta = entries[k].second;
        std::vector<double> g(theta.size(), 0.0);
        for (std::size_t j = 0; j < count; ++j)
          kernels::axpy(inv, grads[j][k].data(), g.data(), g.size());
        if (cfg.weight_decay > 0.0)
          kernels::axpy(2.0 * cfg.weight_decay, theta.data(), g.data(), g.size());
        adam_step_in_place(adam[k], theta.span(), g);
        if (!theta.all_finite())
          throw TrainingError("train: parameter '" + entries[k].first + "' became non-finite",
                              epoch, batch);
      }
    }
    report.epoch_loss.push_back(epoch_sum / static_cast<double>(n));
    if (on_epoch) on_epoch(epoch, report.epoch_loss.back());
  }
  return report;
}

double data_loss(const ReconNet& net, const std::vector<Tensor>& signals,
                 const std::vector<Tensor>& measurements) {
  expects(signals.size() == measurements.size() && !signals.empty(),
          "data_loss: need matching nonempty lists");
  double s = 0.0;
  for (std::size_t i = 0; i < signals.size(); ++i)
    s += squared_norm(net.forward(measurements[i]) - signals[i]);
  return s / static_cast<double>(signals.size());
}

}  // namespace advrecon::nets
