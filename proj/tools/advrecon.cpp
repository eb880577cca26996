// advrecon: command-line front end for experiments.
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "advrecon/attacks/attack.hpp"
#include "advrecon/bench/config.hpp"
#include "advrecon/bench/csv.hpp"
#include "advrecon/bench/experiment.hpp"
#include "advrecon/bench/metrics.hpp"
#include "advrecon/core/container.hpp"
#include "advrecon/core/error.hpp"
#include "advrecon/core/rng.hpp"
#include "advrecon/nets/serialize.hpp"
#include "advrecon/operators/dense.hpp"
#include "advrecon/signals/dataset.hpp"

using namespace advrecon;
using namespace advrecon::bench;

namespace {

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> threads;
};

ExperimentConfig load(const Globals& g) {
  if (g.config.empty()) throw ConfigError("--config is required");
  ExperimentConfig c = load_experiment_config(g.config);
  if (g.seed) c.seed = *g.seed;
  if (g.out) c.output = *g.out;
  if (g.threads) c.threads = *g.threads;
  c.validate();
  return c;
}

void log_line(const std::string& s) { std::cerr << s << std::endl; }

void report(const std::vector<std::filesystem::path>& files) {
  for (const auto& f : files) std::cout << f.string() << "\n";
}

std::vector<std::string> learned_methods(const ExperimentConfig& c) {
  std::vector<std::string> out;
  for (const auto& m : c.methods)
    if (m.type != MethodType::tv) out.push_back(m.name);
  return out;
}

void cmd_gen_data(const Globals& g) {
  const ExperimentConfig c = load(g);
  const Scenario s = build_scenario(c);
  const signals::NoiseSpec clean;
  std::vector<std::filesystem::path> files = {c.output / "operator.advr", c.output / "train.advr",
                                              c.output / "test.advr"};
  write_container(files[0], operators::operator_to_container(*s.a, c.scenario.operator_seed));
  write_container(files[1], signals::dataset_to_container(
                                signals::make_dataset_from_signals(s.a, s.train, clean, 0)));
  write_container(files[2], signals::dataset_to_container(
                                signals::make_dataset_from_signals(s.a, s.test, clean, 0)));
  report(files);
}

void cmd_train(const Globals& g, std::vector<std::string> names) {
  const ExperimentConfig c = load(g);
  if (names.empty()) names = learned_methods(c);
  for (const auto& n : names)
    if (c.method(n).type == MethodType::tv) throw ConfigError("method '" + n + "' is not a learned method");
  const Scenario s = build_scenario(c);
  std::vector<std::filesystem::path> files;
  for (const auto& n : names) {
    const BuiltMethod b = build_method(c, s, n, log_line);
    files.push_back(c.output / "nets" / (n + ".advr"));
    write_container(files.back(), nets::net_to_container(*b.net));
    std::vector<std::vector<std::string>> rows;
    for (std::size_t e = 0; e < b.epoch_loss.size(); ++e)
      rows.push_back({n, std::to_string(e), format_double(b.epoch_loss[e])});
    files.push_back(c.output / ("train_" + n + ".csv"));
    write_table_csv(files.back(), {"method", "epoch", "loss"}, rows);
  }
  report(files);
}

void cmd_attack(const Globals& g, const std::string& name, std::size_t signal, double rel) {
  const ExperimentConfig c = load(g);
  const Scenario s = build_scenario(c);
  if (signal >= s.test.size())
    throw ConfigError("--signal " + std::to_string(signal) + " out of range (test_count " +
                      std::to_string(s.test.size()) + ")");
  if (!(rel >= 0.0)) throw ConfigError("--eta must be nonnegative");
  const BuiltMethod b = build_method(c, s, name, log_line);
  attacks::AttackConfig ac = c.attack;
  ac.eta = rel * norm(s.a->apply(s.test[signal]));
  ac.seed = derive_seed(c.seed, {hash_name(name), hash_name("cli-attack"), signal});
  ac.threads = c.threads;
  const auto map = b.method.at(ac.eta);
  const attacks::AttackResult r = attacks::find_adversarial(*map, *s.a, s.test[signal], ac);
  const std::string stem = "attack_" + name + "_" + std::to_string(signal);
  std::vector<std::filesystem::path> files = {c.output / (stem + ".csv"), c.output / (stem + ".advr")};
  attacks::write_attack_csv(files[0], r);
  write_container(files[1], attacks::perturbation_to_container(r, name, ac.eta));
  std::cerr << "eta " << format_double(ac.eta) << " achieved relative error "
            << format_double(r.achieved_error) << " (start " << r.best_restart << ")\n";
  report(files);
}

std::vector<BuiltMethod> build_all(const ExperimentConfig& c, const Scenario& s,
                                   const std::vector<std::string>& names) {
  std::vector<BuiltMethod> out;
  if (names.empty())
    for (const auto& m : c.methods) out.push_back(build_method(c, s, m.name, log_line));
  else
    for (const auto& n : names) out.push_back(build_method(c, s, n, log_line));
  return out;
}

void cmd_curve(const Globals& g, const std::vector<std::string>& names) {
  const ExperimentConfig c = load(g);
  for (const auto& n : names) c.method(n);
  const Scenario s = build_scenario(c);
  const auto methods = build_all(c, s, names);
  report(write_curves(c.output, s.name, run_curves(c, s, methods, log_line)));
}

void cmd_transfer(const Globals& g, const std::string& source) {
  ExperimentConfig c = load(g);
  c.method(source);
  const Scenario s = build_scenario(c);
  const auto methods = build_all(c, s, {});
  const BuiltMethod* src = nullptr;
  for (const auto& m : methods)
    if (m.name == source) src = &m;
  log_line("adversarial curve for " + source);
  const Curve curve = noise_to_error_curve(src->method, *s.a, s.test, c.eta_grid, NoiseKind::adversarial,
                                           curve_options(c));
  std::vector<TransferRecord> all;
  for (const auto& m : methods) {
    auto t = run_transfer(s, curve, *src, m, c.eta_grid, c.threads);
    all.insert(all.end(), t.begin(), t.end());
  }
  report({write_transfer_csv(c.output / ("transfer_" + source + ".csv"), s.name, all)});
}

void cmd_ablate(const Globals& g) {
  const ExperimentConfig c = load(g);
  if (!c.ablation) throw ConfigError("config: ablation: required for ablate-jitter");
  const Scenario s = build_scenario(c);
  const JitterAblation ab = run_ablation(c, s, {}, log_line);
  const auto grid = c.ablation->eta_grid.empty() ? c.eta_grid : c.ablation->eta_grid;
  for (std::size_t l = 0; l < grid.size(); ++l)
    std::cerr << "rel noise " << format_double(grid[l]) << ": plain/jittered " << format_double(ab.ratio[l])
              << "\n";
  report(write_ablation(c.output, s.name, grid, ab));
}

void cmd_classify(const Globals& g) {
  ExperimentConfig c = load(g);
  if (!c.classify.enabled) throw ConfigError("config: classify: required for classify-attack");
  const Scenario s = build_scenario(c);
  const ClassifyReport r = run_classify(c, s, {}, log_line);
  std::cerr << "clean accuracy " << format_double(r.clean_accuracy) << "\n";
  for (std::size_t l = 0; l < r.levels.size(); ++l)
    std::cerr << "rel noise " << format_double(r.levels[l]) << ": accuracy " << format_double(r.accuracy[l])
              << "\n";
  report(write_classify(c.output, s.name, r));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adversarial robustness experiments for signal reconstruction"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config, "Experiment config (JSON)");
  app.add_option("--seed", g.seed, "Override the config seed");
  app.add_option("--out", g.out, "Override the output directory");
  app.add_option("--threads", g.threads, "Worker threads")->check(CLI::PositiveNumber);

  auto* gen = app.add_subcommand("gen-data", "Write the operator and train/test datasets");
  std::vector<std::string> train_names;
  auto* train = app.add_subcommand("train", "Train learned methods and save them");
  train->add_option("--method", train_names, "Methods to train (default: all learned)");
  std::string atk_method;
  std::size_t atk_signal = 0;
  double atk_eta = 0.02;
  auto* attack = app.add_subcommand("attack", "Attack one test signal");
  attack->add_option("--method", atk_method, "Method to attack")->required();
  attack->add_option("--signal", atk_signal, "Test signal index");
  attack->add_option("--eta", atk_eta, "Relative noise level eta / ||A x||");
  std::vector<std::string> curve_names;
  auto* curve = app.add_subcommand("curve", "Noise-to-error curves for the configured noise kinds");
  curve->add_option("--method", curve_names, "Methods (default: all)");
  std::string source;
  auto* transfer = app.add_subcommand("transfer", "Evaluate one method's perturbations on all methods");
  transfer->add_option("--source", source, "Method the perturbations are crafted against")->required();
  auto* ablate = app.add_subcommand("ablate-jitter", "Adversarial curves of jittered vs plain nets");
  auto* classify = app.add_subcommand("classify-attack", "Margin attack on the jump-parity classifier");
  auto* run = app.add_subcommand("run", "Everything the config describes");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*gen) cmd_gen_data(g);
    else if (*train) cmd_train(g, train_names);
    else if (*attack) cmd_attack(g, atk_method, atk_signal, atk_eta);
    else if (*curve) cmd_curve(g, curve_names);
    else if (*transfer) cmd_transfer(g, source);
    else if (*ablate) cmd_ablate(g);
    else if (*classify) cmd_classify(g);
    else if (*run) report(run_experiment(load(g), log_line).files);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
