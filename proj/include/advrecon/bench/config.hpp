#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "advrecon/attacks/attack.hpp"
#include "advrecon/bench/curve.hpp"
#include "advrecon/nets/classifier.hpp"
#include "advrecon/nets/recon_net.hpp"
#include "advrecon/nets/train.hpp"
#include "advrecon/signals/piecewise.hpp"
#include "advrecon/tv/admm.hpp"

namespace advrecon::bench {

inline constexpr int kConfigVersion = 1;

struct ScenarioConfig {
  std::string name = "A1";
  std::string source = "piecewise";  // piecewise | idx
  std::size_t m = 100;
  std::uint64_t operator_seed = 0;
  signals::PiecewiseConstantSpec signal;  // source = piecewise; signal.n is N
  std::string idx_images;                 // source = idx
  std::size_t train_count = 500;
  std::size_t test_count = 20;
  std::uint64_t data_seed = 1;

  // Signal length N (signal.n for piecewise; fixed by the file for idx).
  std::size_t n() const { return signal.n; }
};

enum class MethodType { tv, postproc, fully_learned, iterative };

struct MethodConfig {
  std::string name;
  MethodType type = MethodType::tv;
  nets::NetSpec net;       // learned methods; net.kind follows type
  nets::TrainConfig train;  // jitter_bound set from jitter_rel at run time
  double jitter_rel = 0.0;  // eta-hat as a fraction of the mean ||A x|| of the training set
  double tikhonov_alpha = 0.02;
  std::string weights;  // optional: load a saved net instead of training
};

// Adversarial curves of two learned methods that differ only in training jitter.
struct AblationConfig {
  std::string jittered;
  std::string plain;
  std::vector<double> eta_grid;  // empty: the experiment grid
};

struct ClassifyConfig {
  bool enabled = false;
  std::string reconstruction = "tv";  // name of a configured method
  std::size_t train_count = 1000;
  std::size_t test_count = 50;
  nets::ClassifierSpec classifier;
  nets::ClassifierTrainConfig train;
  std::vector<double> eta_grid;  // relative levels for the margin attack
  // Margin attack settings; keys not given fall back to the experiment's attack.
  std::optional<attacks::AttackConfig> attack;
};

/// Everything a run needs; validated before any computation.
struct ExperimentConfig {
  int version = kConfigVersion;
  ScenarioConfig scenario;
  tv::AdmmConfig admm;
  std::vector<MethodConfig> methods;
  std::vector<double> eta_grid = {0.005, 0.02, 0.06};
  std::vector<NoiseKind> noise_kinds = {NoiseKind::adversarial, NoiseKind::gaussian};
  std::size_t draws = 50;
  double bernoulli_p = 0.025;
  attacks::AttackConfig attack;  // eta and seed are per item
  std::optional<AblationConfig> ablation;
  ClassifyConfig classify;
  std::uint64_t seed = 0;
  int threads = 1;
  std::filesystem::path output = "out";

  // Throws ConfigError naming the offending field path.
  void validate() const;
  const MethodConfig& method(const std::string& name) const;
};

std::string_view method_type_name(MethodType t) noexcept;

/// Parses a version-1 JSON document. Unknown keys, wrong types and invalid
/// values raise ConfigError with the field path, e.g.
/// "config: methods[1].train.epochs: expected an integer".
ExperimentConfig parse_experiment_config(const std::string& json_text);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
// Canonical JSON for a config; parse_experiment_config(dump(c)) == c field by field.
std::string dump_experiment_config(const ExperimentConfig& cfg);

}  // namespace advrecon::bench
