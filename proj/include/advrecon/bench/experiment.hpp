#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "advrecon/bench/config.hpp"
#include "advrecon/bench/curve.hpp"
#include "advrecon/nets/classifier.hpp"
#include "advrecon/nets/recon_net.hpp"
#include "advrecon/operators/dense.hpp"
#include "advrecon/tv/admm.hpp"

namespace advrecon::bench {

// Progress messages; may be empty.
using Log = std::function<void(const std::string&)>;

/// Operator and data of a scenario.
struct Scenario {
  std::string name;
  std::shared_ptr<const operators::DenseMatrix> a;
  std::shared_ptr<const LinearOperator> grad;  // 1D differences, or 2D for images
  std::vector<Tensor> train;
  std::vector<Tensor> test;
  std::size_t height = 1;  // image rows for idx scenarios
  std::size_t width = 0;
};

/// Piecewise: train and test signals from streams derived from data_seed.
/// Idx: the first train_count images train, the next test_count test.
Scenario build_scenario(const ExperimentConfig& cfg);

// Mean ||A x|| over the training signals (0 for an empty set).
double mean_measurement_norm(const Scenario& s);

std::shared_ptr<const tv::AdmmTvSolver> make_tv_solver(const ExperimentConfig& cfg,
                                                        const Scenario& s);

struct BuiltMethod {
  std::string name;
  MethodType type = MethodType::tv;
  Method method;
  std::shared_ptr<const nets::ReconNet> net;  // learned methods only
  double jitter_bound = 0.0;                  // absolute, as trained
  std::vector<double> epoch_loss;             // empty when loaded from weights
};

/// TV methods wrap the constrained solver; learned methods load `weights` or
/// train on the scenario's training signals with jitter_bound =
/// jitter_rel * mean_measurement_norm.
BuiltMethod build_method(const ExperimentConfig& cfg, const Scenario& s, const std::string& name,
                         const Log& log = nullptr);

CurveOptions curve_options(const ExperimentConfig& cfg);

// One curve per (method, noise kind), methods outer, both in config order.
std::vector<Curve> run_curves(const ExperimentConfig& cfg, const Scenario& s,
                              const std::vector<BuiltMethod>& methods, const Log& log = nullptr);

struct TransferRecord {
  std::string source;
  std::string target;
  double rel_noise = 0.0;
  std::size_t signal_idx = 0;
  double rel_error = 0.0;
};

/// Every adversarial perturbation of `source` (levels x signals, as stored in
/// the curve) evaluated on `target` at the same absolute level.
std::vector<TransferRecord> run_transfer(const Scenario& s, const Curve& source_curve,
                                         const BuiltMethod& source, const BuiltMethod& target,
                                         const std::vector<double>& rel_grid, int threads);

// Methods found by name in `built` are reused instead of rebuilt.
JitterAblation run_ablation(const ExperimentConfig& cfg, const Scenario& s,
                            const std::vector<BuiltMethod>& built = {}, const Log& log = nullptr);

struct ClassifyRecord {
  double rel_noise = 0.0;
  std::size_t signal_idx = 0;
  int label = 0;
  int predicted = 0;
  double margin = 0.0;  // max_{k != label} z_k - z_label at the winning perturbation
  double clean_margin = 0.0;  // same map, e = 0
  double eta = 0.0;
  double perturbation_norm = 0.0;
  std::uint64_t seed = 0;
};

struct ClassifyReport {
  std::string method;
  std::size_t train_count = 0;
  double train_accuracy = 0.0;  // on clean training signals
  double clean_accuracy = 0.0;  // on reconstructions from noiseless measurements
  std::vector<double> levels;   // ascending; 0 is always included
  std::vector<double> accuracy;  // per level, under the margin attack
  std::vector<ClassifyRecord> records;  // level-major
};

/// Jump-parity pipeline: a classifier trained on clean piecewise signals, applied
/// to reconstructions by the configured method, attacked on the logit margin at
/// ascending levels with nested inits.
ClassifyReport run_classify(const ExperimentConfig& cfg, const Scenario& s,
                            const std::vector<BuiltMethod>& built = {}, const Log& log = nullptr);

struct ExperimentReport {
  std::vector<Curve> curves;
  std::vector<TransferRecord> transfer;
  std::optional<JitterAblation> ablation;
  std::optional<ClassifyReport> classify;
  std::vector<std::filesystem::path> files;  // everything written, in write order
};

/// Builds the scenario and methods, runs every configured curve, transfer
/// between all method pairs, the ablation and the classification pipeline, and
/// writes all outputs below cfg.output (created if missing). CSV output is
/// byte-identical for a given config regardless of cfg.threads.
ExperimentReport run_experiment(const ExperimentConfig& cfg, const Log& log = nullptr);

// Writers used by run_experiment and the CLI; each returns the files written.
std::vector<std::filesystem::path> write_curves(const std::filesystem::path& dir,
                                                const std::string& scenario,
                                                const std::vector<Curve>& curves,
                                                const std::string& stem = "");
std::filesystem::path write_transfer_csv(const std::filesystem::path& path,
                                         const std::string& scenario,
                                         const std::vector<TransferRecord>& records);
std::vector<std::filesystem::path> write_ablation(const std::filesystem::path& dir,
                                                  const std::string& scenario,
                                                  const std::vector<double>& rel_grid,
                                                  const JitterAblation& ab);
std::vector<std::filesystem::path> write_classify(const std::filesystem::path& dir,
                                                  const std::string& scenario,
                                                  const ClassifyReport& report);

}  // namespace advrecon::bench
