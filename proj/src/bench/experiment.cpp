#include "advrecon/bench/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "advrecon/attacks/attack.hpp"
#include "advrecon/attacks/margin.hpp"
#include "advrecon/bench/csv.hpp"
#include "advrecon/bench/metrics.hpp"
#include "advrecon/bench/plot.hpp"
#include "advrecon/core/container.hpp"
#include "advrecon/core/error.hpp"
#include "advrecon/core/parallel.hpp"
#include "advrecon/core/rng.hpp"
#include "advrecon/nets/serialize.hpp"
#include "advrecon/nets/train.hpp"
#include "advrecon/operators/gradient.hpp"
#include "advrecon/operators/tikhonov.hpp"
#include "advrecon/signals/dataset.hpp"
#include "advrecon/signals/idx.hpp"

namespace advrecon::bench {

namespace {

void say(const Log& log, const std::string& msg) {
  if (log) log(msg);
}

std::string fmt(double v) { return format_double(v); }

std::vector<double> sorted_levels(std::vector<double> grid, bool with_zero) {
  if (with_zero) grid.push_back(0.0);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

BuiltMethod reuse_or_build(const ExperimentConfig& cfg, const Scenario& s, const std::string& name,
                           const std::vector<BuiltMethod>& built, const Log& log) {
  for (const auto& b : built)
    if (b.name == name) return b;
  return build_method(cfg, s, name, log);
}

}  // namespace

Scenario build_scenario(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto& sc = cfg.scenario;
  Scenario s;
  s.name = sc.name;
  if (sc.source == "piecewise") {
    const std::size_t n = sc.signal.n;
    s.a = operators::sample_gaussian_operator(sc.m, n, sc.operator_seed);
    s.grad = std::make_shared<operators::GradientOp1D>(n);
    s.width = n;
    const signals::NoiseSpec clean;
    s.train = signals::make_dataset(s.a, sc.signal, sc.train_count, clean,
                                    derive_seed(sc.data_seed, {hash_name("train")}), cfg.threads)
                  .signals;
    s.test = signals::make_dataset(s.a, sc.signal, sc.test_count, clean,
                                   derive_seed(sc.data_seed, {hash_name("test")}), cfg.threads)
                 .signals;
  } else {
    signals::IdxImages img = signals::load_idx_images(sc.idx_images);
    if (img.images.size() < sc.train_count + sc.test_count)
      throw ConfigError("config: scenario.idx_images: file has " + std::to_string(img.images.size()) +
                        " images, need train_count + test_count = " +
                        std::to_string(sc.train_count + sc.test_count));
    const std::size_t n = img.rows * img.cols;
    if (sc.m >= n) throw ConfigError("config: scenario.m: need m < rows * cols = " + std::to_string(n));
    s.a = operators::sample_gaussian_operator(sc.m, n, sc.operator_seed);
    s.grad = std::make_shared<operators::GradientOp2D>(img.rows, img.cols);
    s.height = img.rows;
    s.width = img.cols;
    auto flat = [&](std::size_t i) { return img.images[i].reshaped(Shape{n}); };
    for (std::size_t i = 0; i < sc.train_count; ++i) s.train.push_back(flat(i));
    for (std::size_t i = 0; i < sc.test_count; ++i) s.test.push_back(flat(sc.train_count + i));
  }
  return s;
}

double mean_measurement_norm(const Scenario& s) {
  if (s.train.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& x : s.train) sum += norm(s.a->apply(x));
  return sum / static_cast<double>(s.train.size());
}

std::shared_ptr<const tv::AdmmTvSolver> make_tv_solver(const ExperimentConfig& cfg,
                                                        const Scenario& s) {
  return std::make_shared<tv::AdmmTvSolver>(s.a, s.grad, cfg.admm);
}

BuiltMethod build_method(const ExperimentConfig& cfg, const Scenario& s, const std::string& name,
                         const Log& log) {
  const MethodConfig& mc = cfg.method(name);
  BuiltMethod b;
  b.name = mc.name;
  b.type = mc.type;
  if (mc.type == MethodType::tv) {
    b.method = tv_constrained_method(mc.name, make_tv_solver(cfg, s));
    return b;
  }
  std::shared_ptr<nets::ReconNet> net;
  if (!mc.weights.empty()) {
    say(log, "loading " + mc.name + " from " + mc.weights);
    net = std::make_shared<nets::ReconNet>(nets::net_from_container(read_container(mc.weights), s.a));
  } else {
    auto tik = operators::tikhonov_inverse(*s.a, *s.grad, mc.tikhonov_alpha);
    net = std::make_shared<nets::ReconNet>(mc.net, s.a, std::move(tik));
    nets::TrainConfig tc = mc.train;
    b.jitter_bound = mc.jitter_rel * mean_measurement_norm(s);
    tc.jitter_bound = b.jitter_bound;
    tc.threads = cfg.threads;
    say(log, "training " + mc.name + " (" + std::string(method_type_name(mc.type)) + ", " +
                 std::to_string(s.train.size()) + " signals, " + std::to_string(tc.epochs) +
                 " epochs, jitter " + fmt(b.jitter_bound) + ")");
    const int every = std::max(1, tc.epochs / 10);
    auto report = nets::train(*net, s.train, tc, [&](int epoch, double loss) {
      if ((epoch + 1) % every == 0 || epoch + 1 == tc.epochs)
        say(log, "  " + mc.name + " epoch " + std::to_string(epoch + 1) + " loss " + fmt(loss));
    });
    b.epoch_loss = std::move(report.epoch_loss);
  }
  b.net = net;
  b.method = fixed_method(mc.name, std::make_shared<nets::NetMap>(net, mc.name));
  return b;
}

CurveOptions curve_options(const ExperimentConfig& cfg) {
  CurveOptions o;
  o.scenario = cfg.scenario.name;
  o.draws = cfg.draws;
  o.attack = cfg.attack;
  o.bernoulli_p = cfg.bernoulli_p;
  o.seed = cfg.seed;
  o.threads = cfg.threads;
  return o;
}

std::vector<Curve> run_curves(const ExperimentConfig& cfg, const Scenario& s,
                              const std::vector<BuiltMethod>& methods, const Log& log) {
  const CurveOptions opts = curve_options(cfg);
  std::vector<Curve> out;
  for (const auto& m : methods)
    for (NoiseKind kind : cfg.noise_kinds) {
      say(log, "curve " + m.name + " / " + std::string(noise_kind_name(kind)));
      out.push_back(noise_to_error_curve(m.method, *s.a, s.test, cfg.eta_grid, kind, opts));
    }
  return out;
}

std::vector<TransferRecord> run_transfer(const Scenario& s, const Curve& source_curve,
                                         const BuiltMethod& source, const BuiltMethod& target,
                                         const std::vector<double>& rel_grid, int threads) {
  const std::size_t count = s.test.size();
  expects(source_curve.perturbations.size() == rel_grid.size() * count,
          "run_transfer: curve has no perturbations for this grid");
  std::vector<TransferRecord> out(rel_grid.size() * count);
  parallel_for(out.size(), threads, [&](std::size_t i) {
    const std::size_t l = i / count, sig = i % count;
    const AttackAudit& audit = source_curve.audits[i];
    const auto map = target.method.at(audit.eta);
    out[i] = {source.name, target.name, rel_grid[l], sig,
              attacks::transfer_eval(*map, *s.a, s.test[sig], source_curve.perturbations[i])};
  });
  return out;
}

JitterAblation run_ablation(const ExperimentConfig& cfg, const Scenario& s,
                            const std::vector<BuiltMethod>& built, const Log& log) {
  expects(cfg.ablation.has_value(), "run_ablation: no ablation configured");
  const auto& ab = *cfg.ablation;
  const auto grid = ab.eta_grid.empty() ? cfg.eta_grid : ab.eta_grid;
  const BuiltMethod jit = reuse_or_build(cfg, s, ab.jittered, built, log);
  const BuiltMethod plain = reuse_or_build(cfg, s, ab.plain, built, log);
  say(log, "ablation " + ab.jittered + " vs " + ab.plain);
  return ablate_jitter(jit.method, plain.method, *s.a, s.test, grid, curve_options(cfg));
}

ClassifyReport run_classify(const ExperimentConfig& cfg, const Scenario& s,
                            const std::vector<BuiltMethod>& built, const Log& log) {
  const ClassifyConfig& cc = cfg.classify;
  expects(cc.enabled, "run_classify: classification is not enabled");
  const auto& sig = cfg.scenario.signal;
  const signals::NoiseSpec clean;
  const std::uint64_t base = cfg.scenario.data_seed;
  const auto train = signals::make_dataset(s.a, sig, cc.train_count, clean,
                                           derive_seed(base, {hash_name("classify-train")}), cfg.threads)
                         .signals;
  const auto test = signals::make_dataset(s.a, sig, cc.test_count, clean,
                                          derive_seed(base, {hash_name("classify-test")}), cfg.threads)
                        .signals;
  const auto train_labels = nets::parity_labels(train);
  const auto test_labels = nets::parity_labels(test);

  nets::Classifier clf(cc.classifier, sig.n);
  nets::ClassifierTrainConfig tc = cc.train;
  tc.threads = cfg.threads;
  say(log, "training parity classifier on " + std::to_string(train.size()) + " signals");
  nets::train_classifier(clf, train, train_labels, tc);

  ClassifyReport r;
  r.method = cc.reconstruction;
  r.train_count = train.size();
  r.train_accuracy = nets::accuracy(clf, train, train_labels, cfg.threads);
  const BuiltMethod rec = reuse_or_build(cfg, s, cc.reconstruction, built, log);
  r.levels = sorted_levels(cc.eta_grid, true);

  const std::size_t count = test.size(), levels = r.levels.size();
  r.records.resize(levels * count);
  std::vector<int> clean_pred(count);
  const std::uint64_t method_key = hash_name(cc.reconstruction);
  parallel_for(count, cfg.threads, [&](std::size_t i) {
    const Tensor ybar = s.a->apply(test[i]);
    const double ynorm = norm(ybar);
    clean_pred[i] = clf.predict(rec.method.at(0.0)->reconstruct(ybar).reshaped(test[i].shape()));
    std::vector<Tensor> inits;
    for (std::size_t l = 0; l < levels; ++l) {
      attacks::AttackConfig ac = cc.attack ? *cc.attack : cfg.attack;
      ac.eta = r.levels[l] * ynorm;
      ac.seed = derive_seed(cfg.seed, {hash_name("classify"), method_key, l, i});
      ac.threads = 1;
      const auto map = rec.method.at(ac.eta);
      attacks::MarginResult m =
          attacks::margin_attack(*map, clf, *s.a, test[i], test_labels[i], ac, inits);
      const double base = attacks::logit_margin(
          clf.logits(map->reconstruct(ybar).reshaped(test[i].shape())), test_labels[i]);
      r.records[l * count + i] = {r.levels[l], i, test_labels[i], m.predicted, m.attack.achieved_error,
                                  base, ac.eta, norm(m.attack.e_adv), ac.seed};
      inits = {std::move(m.attack.e_adv)};
    }
  });
  std::size_t hits = 0;
  for (std::size_t i = 0; i < count; ++i) hits += clean_pred[i] == test_labels[i];
  r.clean_accuracy = static_cast<double>(hits) / static_cast<double>(count);
  for (std::size_t l = 0; l < levels; ++l) {
    std::size_t ok = 0;
    for (std::size_t i = 0; i < count; ++i) {
      const auto& rec_i = r.records[l * count + i];
      ok += rec_i.predicted == rec_i.label;
    }
    r.accuracy.push_back(static_cast<double>(ok) / static_cast<double>(count));
  }
  return r;
}

std::vector<std::filesystem::path> write_curves(const std::filesystem::path& dir,
                                                const std::string& scenario,
                                                const std::vector<Curve>& curves,
                                                const std::string& stem) {
  std::vector<ErrorRecord> records;
  std::vector<CurvePoint> points;
  std::vector<AttackAudit> audits;
  std::vector<std::vector<std::string>> fits;
  for (const auto& c : curves) {
    records.insert(records.end(), c.records.begin(), c.records.end());
    points.insert(points.end(), c.points.begin(), c.points.end());
    audits.insert(audits.end(), c.audits.begin(), c.audits.end());
    std::vector<double> xs;
    for (const auto& p : c.points) xs.push_back(p.rel_noise);
    std::sort(xs.begin(), xs.end());
    if (c.points.size() >= 3 && xs.front() < xs.back()) {
      const CurveFit f = fit_robustness_constant(c.points);
      fits.push_back({scenario, c.points[0].method, std::string(noise_kind_name(c.points[0].kind)),
                      fmt(f.slope), fmt(f.intercept), fmt(f.r2)});
    }
  }
  const std::string p = stem.empty() ? "" : stem + "_";
  std::vector<std::filesystem::path> files = {dir / (p + "records.csv"), dir / (p + "points.csv"),
                                              dir / (p + "audits.csv"), dir / (p + "fits.csv"),
                                              dir / (p + "curves.gp")};
  write_records_csv(files[0], records);
  write_points_csv(files[1], scenario, points);
  write_audits_csv(files[2], audits);
  write_table_csv(files[3], {"scenario", "method", "noise_kind", "slope", "intercept", "r2"}, fits);
  write_text_file(files[4], gnuplot_script(scenario + " noise-to-error", points, p + "curves.png"));
  return files;
}

std::filesystem::path write_transfer_csv(const std::filesystem::path& path,
                                         const std::string& scenario,
                                         const std::vector<TransferRecord>& records) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& r : records)
    rows.push_back({scenario, r.source, r.target, fmt(r.rel_noise), std::to_string(r.signal_idx),
                    fmt(r.rel_error)});
  write_table_csv(path, {"scenario", "source", "target", "rel_noise", "signal_idx", "rel_error"}, rows);
  return path;
}

std::vector<std::filesystem::path> write_ablation(const std::filesystem::path& dir,
                                                  const std::string& scenario,
                                                  const std::vector<double>& rel_grid,
                                                  const JitterAblation& ab) {
  auto files = write_curves(dir, scenario, {ab.jittered, ab.plain}, "ablation");
  std::vector<std::vector<std::string>> rows;
  for (std::size_t l = 0; l < rel_grid.size(); ++l)
    rows.push_back({scenario, ab.jittered.points[l].method, ab.plain.points[l].method, fmt(rel_grid[l]),
                    fmt(ab.jittered.points[l].rel_error_mean), fmt(ab.plain.points[l].rel_error_mean),
                    fmt(ab.ratio[l])});
  files.push_back(dir / "ablation_ratio.csv");
  write_table_csv(files.back(),
                  {"scenario", "jittered", "plain", "rel_noise", "jittered_mean", "plain_mean", "ratio"},
                  rows);
  rows.clear();
  for (std::size_t i = 0; i < ab.signal_ratio_at_max.size(); ++i)
    rows.push_back({scenario, std::to_string(i), fmt(ab.signal_ratio_at_max[i])});
  files.push_back(dir / "ablation_signals.csv");
  write_table_csv(files.back(), {"scenario", "signal_idx", "ratio_at_max"}, rows);
  return files;
}

std::vector<std::filesystem::path> write_classify(const std::filesystem::path& dir,
                                                  const std::string& scenario,
                                                  const ClassifyReport& r) {
  std::vector<std::filesystem::path> files = {dir / "classify.csv", dir / "classify_summary.csv"};
  std::vector<std::vector<std::string>> rows;
  for (const auto& c : r.records)
    rows.push_back({scenario, r.method, fmt(c.rel_noise), std::to_string(c.signal_idx),
                    std::to_string(c.label), std::to_string(c.predicted), fmt(c.margin),
                    fmt(c.clean_margin), fmt(c.eta), fmt(c.perturbation_norm), std::to_string(c.seed)});
  write_table_csv(files[0],
                  {"scenario", "method", "rel_noise", "signal_idx", "label", "predicted", "margin",
                   "clean_margin", "eta", "perturbation_norm", "seed"},
                  rows);
  rows.clear();
  const std::string n = std::to_string(r.records.size() / std::max<std::size_t>(1, r.levels.size()));
  rows.push_back({scenario, r.method, "train", "", fmt(r.train_accuracy), std::to_string(r.train_count)});
  rows.push_back({scenario, r.method, "clean", "", fmt(r.clean_accuracy), n});
  for (std::size_t l = 0; l < r.levels.size(); ++l)
    rows.push_back({scenario, r.method, "attack", fmt(r.levels[l]), fmt(r.accuracy[l]), n});
  write_table_csv(files[1], {"scenario", "method", "stage", "rel_noise", "accuracy", "n_signals"}, rows);
  return files;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg, const Log& log) {
  cfg.validate();
  std::filesystem::create_directories(cfg.output);
  ExperimentReport rep;
  const Scenario s = build_scenario(cfg);
  say(log, "scenario " + s.name + ": m=" + std::to_string(s.a->rows()) + " N=" +
               std::to_string(s.a->cols()) + ", " + std::to_string(s.train.size()) + " train, " +
               std::to_string(s.test.size()) + " test");

  std::vector<BuiltMethod> methods;
  for (const auto& mc : cfg.methods) methods.push_back(build_method(cfg, s, mc.name, log));
  for (const auto& m : methods)
    if (m.net && !m.epoch_loss.empty()) {
      rep.files.push_back(cfg.output / "nets" / (m.name + ".advr"));
      write_container(rep.files.back(), nets::net_to_container(*m.net));
    }

  rep.curves = run_curves(cfg, s, methods, log);
  for (auto& f : write_curves(cfg.output, s.name, rep.curves)) rep.files.push_back(f);

  const auto adv = std::find(cfg.noise_kinds.begin(), cfg.noise_kinds.end(), NoiseKind::adversarial);
  if (adv != cfg.noise_kinds.end() && methods.size() > 1) {
    const std::size_t k = static_cast<std::size_t>(adv - cfg.noise_kinds.begin());
    for (std::size_t i = 0; i < methods.size(); ++i)
      for (std::size_t j = 0; j < methods.size(); ++j) {
        if (i == j) continue;
        const Curve& src = rep.curves[i * cfg.noise_kinds.size() + k];
        auto t = run_transfer(s, src, methods[i], methods[j], cfg.eta_grid, cfg.threads);
        rep.transfer.insert(rep.transfer.end(), t.begin(), t.end());
      }
    rep.files.push_back(write_transfer_csv(cfg.output / "transfer.csv", s.name, rep.transfer));
  }

  if (cfg.ablation) {
    rep.ablation = run_ablation(cfg, s, methods, log);
    const auto grid = cfg.ablation->eta_grid.empty() ? cfg.eta_grid : cfg.ablation->eta_grid;
    for (auto& f : write_ablation(cfg.output, s.name, grid, *rep.ablation)) rep.files.push_back(f);
  }
  if (cfg.classify.enabled) {
    rep.classify = run_classify(cfg, s, methods, log);
    for (auto& f : write_classify(cfg.output, s.name, *rep.classify)) rep.files.push_back(f);
  }
  rep.files.push_back(cfg.output / "config.json");
  write_text_file(rep.files.back(), dump_experiment_config(cfg) + "\n");
  return rep;
}

}  // namespace advrecon::bench
