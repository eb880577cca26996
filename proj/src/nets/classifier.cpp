#include "advrecon/nets/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "advrecon/core/adam.hpp"
#include "advrecon/core/error.hpp"
#include "advrecon/core/kernels.hpp"
#include "advrecon/core/linear_map.hpp"
#include "advrecon/core/parallel.hpp"
#include "advrecon/core/rng.hpp"
#include "advrecon/signals/piecewise.hpp"

namespace advrecon::nets {

void ClassifierSpec::validate() const {
  if (channels == 0 || hidden == 0) throw ConfigError("classifier: widths must be positive");
  if (classes < 2) throw ConfigError("classifier: need at least two classes");
}

void ClassifierTrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("classifier train: epochs must be at least 1");
  if (batch_size < 1) throw ConfigError("classifier train: batch_size must be at least 1");
  if (!(lr >= 0.0)) throw ConfigError("classifier train: lr must be nonnegative");
  if (!(weight_decay >= 0.0)) throw ConfigError("classifier train: weight_decay must be nonnegative");
  if (threads < 1) throw ConfigError("classifier train: threads must be at least 1");
}

namespace {

// Scale applied to per-channel sums; keeps the pooled features of a
// 256-sample signal in the range where the dense layers train well.
constexpr double kPoolScale = 0.5;
// Initial conv1 bias: a small negative threshold so flat regions stay dead.
constexpr double kConv1Bias = -0.1;

// [c, len] -> [c], scaled sum over the length axis.
class ChannelPool final : public LinearOperator {
 public:
  ChannelPool(std::size_t c, std::size_t len) : c_(c), len_(len) {}
  std::size_t rows() const noexcept override { return c_; }
  std::size_t cols() const noexcept override { return c_ * len_; }
  using LinearOperator::adjoint;
  using LinearOperator::apply;
  void apply(std::span<const double> in, std::span<double> out) const override {
    for (std::size_t c = 0; c < c_; ++c) {
      double acc = 0.0;
      for (std::size_t i = 0; i < len_; ++i) acc += in[c * len_ + i];
      out[c] = kPoolScale * acc;
    }
  }
  void adjoint(std::span<const double> in, std::span<double> out) const override {
    for (std::size_t c = 0; c < c_; ++c)
      for (std::size_t i = 0; i < len_; ++i) out[c * len_ + i] = kPoolScale * in[c];
  }

 private:
  std::size_t c_, len_;
};

Tensor he(Shape shape, std::size_t fan_in, std::uint64_t seed, const char* name) {
  Rng rng = make_rng(seed, {hash_name("classifier"), hash_name(name)});
  Tensor g = standard_normal(rng, shape_size(shape));
  return Tensor(std::move(shape), (std::sqrt(2.0 / static_cast<double>(fan_in)) * g).values());
}

}  // namespace

Classifier::Classifier(ClassifierSpec spec, std::size_t length)
    : spec_(spec), length_(length) {
  spec_.validate();
  expects(length_ >= 1, "Classifier: empty input length");
  const std::size_t c = spec_.channels, h = spec_.hidden, k = spec_.classes;
  // First-layer kernels start with zero mean: they respond to edges, not levels.
  Tensor w0 = he({c, 1, 3}, 3, spec_.seed, "conv0");
  for (std::size_t o = 0; o < c; ++o) {
    const double mean = (w0[3 * o] + w0[3 * o + 1] + w0[3 * o + 2]) / 3.0;
    for (std::size_t j = 0; j < 3; ++j) w0[3 * o + j] -= mean;
  }
  params_.add("conv0.w", std::move(w0));
  params_.add("conv0.b", Tensor::zeros(c));
  params_.add("conv1.w", he({c, c, 3}, 3 * c, spec_.seed, "conv1"));
  params_.add("conv1.b", Tensor(Shape{c}, std::vector<double>(c, kConv1Bias)));
  params_.add("fc0.w", he({h, c}, c, spec_.seed, "fc0"));
  params_.add("fc0.b", Tensor::zeros(h));
  params_.add("fc1.w", Tensor(Shape{k, h}));
  params_.add("fc1.b", Tensor::zeros(k));
}

Classifier::Classifier(ClassifierSpec spec, std::size_t length, ParamSet params)
    : Classifier(spec, length) {
  expects(params.count() == params_.count(), "Classifier: parameter count mismatch");
  for (const auto& [name, value] : params_.entries())
    if (params.at(name).shape() != value.shape())
      throw FormatError("classifier parameter '" + name + "' has the wrong shape", 0);
  params_ = std::move(params);
}

Var Classifier::logits(Tape& t, const Bound& p, Var x) const {
  expects(t.value(x).size() == length_, "Classifier: input length mismatch");
  Var h = t.relu(t.conv1d(x, p("conv0.w"), p("conv0.b")));
  h = t.relu(t.conv1d(h, p("conv1.w"), p("conv1.b")));
  h = t.matvec(std::make_shared<ChannelPool>(spec_.channels, length_), h);
  h = t.relu(t.add(t.matvec_param(p("fc0.w"), h), p("fc0.b")));
  return t.add(t.matvec_param(p("fc1.w"), h), p("fc1.b"));
}

Tensor Classifier::logits(const Tensor& x) const {
  Tape t(false);
  Bound p(t, params_, false);
  return t.value(logits(t, p, t.constant(x)));
}

Tensor softmax(const Tensor& z) {
  expects(z.size() > 0, "softmax: empty input");
  const double mx = *std::max_element(z.values().begin(), z.values().end());
  Tensor p = z;
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = std::exp(z[i] - mx);
    s += p[i];
  }
  for (std::size_t i = 0; i < p.size(); ++i) p[i] /= s;
  return p;
}

Tensor Classifier::probabilities(const Tensor& x) const { return softmax(logits(x)); }

int Classifier::predict(const Tensor& x) const {
  const Tensor z = logits(x);
  return static_cast<int>(std::max_element(z.values().begin(), z.values().end()) -
                          z.values().begin());
}

TrainReport train_classifier(Classifier& clf, const std::vector<Tensor>& features,
                             const std::vector<int>& labels, const ClassifierTrainConfig& cfg) {
  cfg.validate();
  if (features.empty()) throw ConfigError("classifier train: no training data");
  if (labels.size() != features.size())
    throw ConfigError("classifier train: labels missing or count differs from features");
  for (int l : labels)
    if (l < 0 || static_cast<std::size_t>(l) >= clf.spec().classes)
      throw ConfigError("classifier train: label " + std::to_string(l) + " out of range");

  ParamSet& ps = clf.params();
  std::vector<AdamState> adam;
  for (const auto& e : ps.entries()) adam.push_back(AdamState::fresh(e.second.shape(), cfg.lr));
  const std::size_t n = features.size();
  TrainReport report;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng = make_rng(cfg.seed, {hash_name("classifier-epoch"), static_cast<std::uint64_t>(epoch)});
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng() % i]);
    double epoch_sum = 0.0;
    int batch = 0;
    for (std::size_t start = 0; start < n; start += cfg.batch_size, ++batch) {
      const std::size_t count = std::min(cfg.batch_size, n - start);
      std::vector<std::vector<Tensor>> grads(count);
      std::vector<double> losses(count);
      parallel_for(count, cfg.threads, [&](std::size_t j) {
        const std::size_t i = order[start + j];
        Tape t;
        Bound p(t, ps, true);
        Var z = clf.logits(t, p, t.constant(features[i]));
        Var loss = t.sub(t.log_sum_exp(z), t.element(z, static_cast<std::size_t>(labels[i])));
        losses[j] = t.scalar(loss);
        grads[j] = p.gradients(t.backward(loss));
      });
      for (std::size_t j = 0; j < count; ++j) {
        if (!std::isfinite(losses[j]))
          throw TrainingError("classifier train: non-finite loss", epoch, batch);
        epoch_sum += losses[j];
      }
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
      }
    }
    report.epoch_loss.push_back(epoch_sum / static_cast<double>(n));
  }
  return report;
}

double accuracy(const Classifier& clf, const std::vector<Tensor>& features,
                const std::vector<int>& labels, int threads) {
  expects(features.size() == labels.size() && !features.empty(),
          "accuracy: need matching nonempty lists");
  std::vector<int> hit(features.size());
  parallel_for(features.size(), threads,
               [&](std::size_t i) { hit[i] = clf.predict(features[i]) == labels[i]; });
  return static_cast<double>(std::accumulate(hit.begin(), hit.end(), 0)) /
         static_cast<double>(features.size());
}

std::vector<int> parity_labels(const std::vector<Tensor>& signals) {
  std::vector<int> out;
  out.reserve(signals.size());
  for (const auto& s : signals) out.push_back(signals::count_jumps(s) % 2);
  return out;
}

}  // namespace advrecon::nets
