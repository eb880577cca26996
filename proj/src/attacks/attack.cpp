#include "advrecon/attacks/attack.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>

#include "advrecon/bench/metrics.hpp"
#include "advrecon/core/adam.hpp"
#include "advrecon/core/error.hpp"
#include "advrecon/core/parallel.hpp"
#include "advrecon/core/prox.hpp"
#include "advrecon/core/rng.hpp"
#include "json.hpp"

namespace advrecon::attacks {

void AttackConfig::validate() const {
  if (steps < 1) throw ConfigError("attack: steps must be at least 1");
  if (restarts < 1) throw ConfigError("attack: restarts must be at least 1");
  if (!(eta >= 0.0) || !std::isfinite(eta)) throw ConfigError("attack: eta must be finite and nonnegative");
  if (lr && !(*lr >= 0.0)) throw ConfigError("attack: lr must be nonnegative");
  if (refresh_every < 1) throw ConfigError("attack: refresh_every must be at least 1");
  if (threads < 1) throw ConfigError("attack: threads must be at least 1");
}

Tensor sample_ball(std::size_t m, double eta, Rng& rng) {
  expects(m > 0, "sample_ball: empty dimension");
  Tensor g = standard_normal(rng, m);
  const double r = eta * std::pow(uniform(rng, 0.0, 1.0), 1.0 / static_cast<double>(m));
  const double n = norm(g);
  return n > 0.0 ? (r / n) * g : Tensor::zeros(m);
}

namespace {

struct StartOutcome {
  Tensor best_e;
  double best_value = 0.0;
  std::vector<double> trace;
};

StartOutcome run_start(const ReconstructionMap& rec, const Tensor& ybar,
                       const AttackObjective& obj, const AttackConfig& cfg, Tensor e,
                       std::size_t index) {
  const Tensor center = Tensor::zeros(ybar.size());
  auto exact = [&](const Tensor& pert) { return obj.exact(rec.reconstruct(ybar + pert)); };
  const Tensor init = e;
  const double init_value = exact(e);
  StartOutcome out{e, init_value, {}};
  // Checkpoints may be scored from a warm-started anchor; the winner is
  // re-scored with reconstruct() before it is reported.
  bool rescore = false;
  auto consider = [&](const Tensor& cand, double v, bool from_anchor) {
    if (v > out.best_value) {
      out.best_e = cand;
      out.best_value = v;
      rescore = from_anchor;
    }
  };
  auto view = rec.view();
  AdamState adam = AdamState::fresh(e.shape(), cfg.step_size());
  std::vector<double> ascent(e.size());
  out.trace.reserve(static_cast<std::size_t>(cfg.steps));
  for (int step = 0; step < cfg.steps; ++step) {
    try {
      if (step % cfg.refresh_every == 0) {
        view->anchor(ybar + e);
        if (step > 0) {
          const Tensor* xa = view->anchored_output();
          consider(e, xa ? obj.exact(*xa) : exact(e), xa != nullptr);
        }
      }
      Tape tape;
      Var ev = tape.leaf(e);
      Var xhat = view->record(tape, tape.add(tape.constant(ybar), ev));
      Var value = obj.record(tape, xhat);
      out.trace.push_back(obj.report(tape.scalar(value)));
      const Tensor g = tape.backward(value).of(ev);
      if (!g.all_finite()) throw NumericalError("non-finite gradient");
      // On the sphere, drop the outward radial part: Adam rescales coordinates
      // independently, so a dominant radial gradient would otherwise bend the
      // step and park the iterate away from the constrained maximizer.
      double radial = 0.0;
      const double ee = squared_norm(e);
      if (ee >= cfg.eta * cfg.eta * (1.0 - 1e-9)) radial = std::max(0.0, dot(g, e)) / ee;
      for (std::size_t i = 0; i < g.size(); ++i) ascent[i] = -(g[i] - radial * e[i]);
    } catch (const NumericalError& err) {
      throw NumericalError("attack start " + std::to_string(index) + ", step " +
                           std::to_string(step) + ": " + err.what());
    }
    // Cosine decay settles the iterate instead of leaving it circling the
    // optimum at a distance set by the step size.
    adam.lr = 0.5 * cfg.step_size() * (1.0 + std::cos(std::numbers::pi * step / cfg.steps));
    adam_step_in_place(adam, e.span(), ascent);
    e = project_l2_ball(e, center, cfg.eta);
  }
  if (rescore) out.best_value = exact(out.best_e);
  const double final_value = exact(e);
  if (final_value > out.best_value) {
    out.best_e = std::move(e);
    out.best_value = final_value;
  }
  if (init_value > out.best_value) {
    out.best_e = init;
    out.best_value = init_value;
  }
  return out;
}

}  // namespace

AttackResult maximize(const ReconstructionMap& rec, const Tensor& ybar,
                      const AttackObjective& objective, const AttackConfig& cfg,
                      const std::vector<Tensor>& extra_inits) {
  cfg.validate();
  const std::size_t m = rec.input_dim();
  expects(ybar.size() == m, "attack: measurement size does not match the map");
  const Tensor center = Tensor::zeros(m);

  std::vector<std::pair<std::string, Tensor>> starts;
  if (cfg.include_zero_init) starts.emplace_back("zero", Tensor::zeros(m));
  for (const auto& e : extra_inits) {
    expects(e.size() == m, "attack: extra init has the wrong size");
    starts.emplace_back("extra", project_l2_ball(e.reshaped({m}), center, cfg.eta));
  }
  for (int r = 0; r < cfg.restarts; ++r) {
    Rng rng = make_rng(cfg.seed, {hash_name("attack-init"), static_cast<std::uint64_t>(r)});
    starts.emplace_back("random", sample_ball(m, cfg.eta, rng));
  }

  std::vector<StartOutcome> outcomes(starts.size());
  if (cfg.eta == 0.0) {
    // Empty ball: every start is the zero vector.
    const double v = objective.exact(rec.reconstruct(ybar));
    for (auto& o : outcomes) o = {Tensor::zeros(m), v, {v}};
  } else {
    parallel_for(starts.size(), cfg.threads, [&](std::size_t i) {
      outcomes[i] = run_start(rec, ybar, objective, cfg, starts[i].second, i);
    });
  }

  AttackResult result;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    result.per_restart_errors.push_back(outcomes[i].best_value);
    result.restart_inits.push_back(starts[i].first);
    if (i == 0 || outcomes[i].best_value > outcomes[result.best_restart].best_value)
      result.best_restart = i;
  }
  auto& best = outcomes[result.best_restart];
  result.e_adv = std::move(best.best_e);
  result.achieved_error = best.best_value;
  result.trace = std::move(best.trace);
  return result;
}

AttackResult find_adversarial(const ReconstructionMap& rec, const LinearOperator& a,
                              const Tensor& xbar, const AttackConfig& cfg,
                              const std::vector<Tensor>& extra_inits) {
  expects(a.cols() == xbar.size() && a.rows() == rec.input_dim() &&
              rec.output_dim() == xbar.size(),
          "find_adversarial: dimension mismatch");
  const double ref = norm(xbar);
  expects(ref > 0.0, "find_adversarial: zero signal");
  AttackObjective obj;
  obj.record = [&xbar](Tape& t, Var xhat) {
    return t.squared_norm(t.sub(xhat, t.constant(xbar.reshaped(t.value(xhat).shape()))));
  };
  obj.exact = [&xbar](const Tensor& xhat) { return bench::rel_error(xhat.reshaped(xbar.shape()), xbar); };
  obj.report = [ref](double v) { return std::sqrt(v) / ref; };
  return maximize(rec, a.apply(xbar), obj, cfg, extra_inits);
}

double transfer_eval(const ReconstructionMap& rec, const LinearOperator& a, const Tensor& xbar,
                     const Tensor& e) {
  expects(a.cols() == xbar.size() && a.rows() == e.size() && rec.input_dim() == e.size(),
          "transfer_eval: dimension mismatch");
  const Tensor xhat = rec.reconstruct(a.apply(xbar) + e.reshaped({e.size()}));
  return bench::rel_error(xhat.reshaped(xbar.shape()), xbar);
}

namespace {

class LinearView final : public DifferentiableView {
 public:
  explicit LinearView(std::shared_ptr<const LinearOperator> b) : b_(std::move(b)) {}
  Var record(Tape& tape, Var y) override { return tape.matvec(b_, y); }

 private:
  std::shared_ptr<const LinearOperator> b_;
};

}  // namespace

LinearReconstruction::LinearReconstruction(std::shared_ptr<const LinearOperator> b,
                                           std::string label)
    : b_(std::move(b)), label_(std::move(label)) {
  expects(b_ != nullptr, "LinearReconstruction: null operator");
}

std::unique_ptr<DifferentiableView> LinearReconstruction::view() const {
  return std::make_unique<LinearView>(b_);
}

void write_attack_csv(const std::filesystem::path& path, const AttackResult& result) {
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << "restart,init,error,best\n" << std::setprecision(17);
  for (std::size_t i = 0; i < result.per_restart_errors.size(); ++i)
    out << i << ',' << result.restart_inits[i] << ',' << result.per_restart_errors[i] << ','
        << (i == result.best_restart ? 1 : 0) << '\n';
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

Container perturbation_to_container(const AttackResult& result, const std::string& method,
                                    double eta) {
  nlohmann::json meta = {{"format", "advrecon-perturbation"},
                         {"version", 1},
                         {"method", method},
                         {"eta", eta},
                         {"achieved_error", result.achieved_error}};
  Container c;
  c.metadata = meta.dump();
  c.put("e_adv", result.e_adv);
  return c;
}

Tensor perturbation_from_container(const Container& c) {
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(c.metadata);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("perturbation metadata is not JSON: ") + e.what(), 0);
  }
  if (!meta.is_object() || meta.value("format", "") != "advrecon-perturbation")
    throw FormatError("container is not an advrecon perturbation", 0);
  if (meta.value("version", 0) != 1) throw FormatError("unsupported perturbation version", 0);
  return c.get("e_adv");
}

}  // namespace advrecon::attacks
