#include "advrecon/signals/dataset.hpp"

#include "advrecon/core/error.hpp"
#include "advrecon/core/parallel.hpp"
#include "json.hpp"

namespace advrecon::signals {

std::string NoiseSpec::describe() const {
  if (!kind) return "none";
  std::string s = std::string(attacks::noise_name(*kind)) + "(eta=" + std::to_string(eta);
  if (*kind == attacks::StatisticalNoise::bernoulli) s += ", p=" + std::to_string(bernoulli_p);
  return s + ")";
}

namespace {

Tensor measure(const operators::DenseMatrix& a, const Tensor& x, const NoiseSpec& noise,
               std::uint64_t seed, std::size_t index) {
  Tensor y = a.apply(x);
  if (noise.kind && noise.eta > 0.0) {
    Rng rng = make_rng(seed, {hash_name("dataset-noise"), index});
    y = y + attacks::sample_statistical_noise(*noise.kind, a.rows(), noise.eta, rng,
                                              noise.bernoulli_p);
  }
  return y;
}

}  // namespace

Dataset make_dataset(std::shared_ptr<const operators::DenseMatrix> a,
                     const PiecewiseConstantSpec& spec, std::size_t count, const NoiseSpec& noise,
                     std::uint64_t seed, int threads) {
  expects(a != nullptr, "make_dataset: null operator");
  expects(count >= 1, "make_dataset: need at least one sample");
  spec.validate();
  if (spec.n != a->cols()) throw ConfigError("make_dataset: signal length differs from operator N");
  Dataset d;
  d.op = a;
  d.noise = noise;
  d.signals.resize(count);
  d.measurements.resize(count);
  parallel_for(count, threads, [&](std::size_t i) {
    Rng rng = make_rng(seed, {hash_name("dataset-signal"), i});
    d.signals[i] = sample_piecewise_constant(spec, rng);
    d.measurements[i] = measure(*a, d.signals[i], noise, seed, i);
  });
  return d;
}

Dataset make_dataset_from_signals(std::shared_ptr<const operators::DenseMatrix> a,
                                  std::vector<Tensor> signals, const NoiseSpec& noise,
                                  std::uint64_t seed) {
  expects(a != nullptr, "make_dataset_from_signals: null operator");
  Dataset d;
  d.op = a;
  d.noise = noise;
  d.signals = std::move(signals);
  d.measurements.reserve(d.signals.size());
  for (std::size_t i = 0; i < d.signals.size(); ++i) {
    if (d.signals[i].size() != a->cols())
      throw ConfigError("make_dataset_from_signals: signal length differs from operator N");
    d.measurements.push_back(measure(*a, d.signals[i], noise, seed, i));
  }
  return d;
}

namespace {

Tensor stack(const std::vector<Tensor>& rows, std::size_t width) {
  std::vector<double> data;
  data.reserve(rows.size() * width);
  for (const auto& r : rows) data.insert(data.end(), r.values().begin(), r.values().end());
  return Tensor(Shape{rows.size(), width}, std::move(data));
}

std::vector<Tensor> unstack(const Tensor& t) {
  if (t.rank() != 2) throw FormatError("dataset entry must be rank 2", 0);
  const std::size_t rows = t.shape()[0];
  const std::size_t width = t.shape()[1];
  std::vector<Tensor> out;
  out.reserve(rows);
  for (std::size_t r = 0; r < rows; ++r)
    out.push_back(Tensor::vector(std::vector<double>(
        t.values().begin() + static_cast<std::ptrdiff_t>(r * width),
        t.values().begin() + static_cast<std::ptrdiff_t>((r + 1) * width))));
  return out;
}

}  // namespace

Container dataset_to_container(const Dataset& d) {
  Container c;
  nlohmann::json meta{{"kind", "dataset"},
                      {"count", d.size()},
                      {"N", d.op ? d.op->cols() : 0},
                      {"m", d.op ? d.op->rows() : 0},
                      {"noise", d.noise.describe()}};
  if (d.noise.kind) {
    meta["noise_kind"] = std::string(attacks::noise_name(*d.noise.kind));
    meta["noise_eta"] = d.noise.eta;
    meta["noise_p"] = d.noise.bernoulli_p;
  }
  c.metadata = meta.dump();
  c.put("signals", stack(d.signals, d.op ? d.op->cols() : 0));
  c.put("measurements", stack(d.measurements, d.op ? d.op->rows() : 0));
  return c;
}

Dataset dataset_from_container(const Container& c,
                               std::shared_ptr<const operators::DenseMatrix> a) {
  Dataset d;
  d.op = std::move(a);
  d.signals = unstack(c.get("signals"));
  d.measurements = unstack(c.get("measurements"));
  if (d.signals.size() != d.measurements.size())
    throw FormatError("dataset signal and measurement counts differ", 0);
  if (d.op && !d.signals.empty() &&
      (d.signals[0].size() != d.op->cols() || d.measurements[0].size() != d.op->rows()))
    throw FormatError("dataset dimensions do not match operator", 0);
  const auto meta = nlohmann::json::parse(c.metadata, nullptr, false);
  if (!meta.is_discarded() && meta.contains("noise_kind")) {
    d.noise.kind = attacks::parse_statistical_noise(meta["noise_kind"].get<std::string>());
    d.noise.eta = meta.value("noise_eta", 0.0);
    d.noise.bernoulli_p = meta.value("noise_p", 0.025);
  }
  return d;
}

}  // namespace advrecon::signals
