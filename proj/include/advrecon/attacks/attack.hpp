#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "advrecon/core/container.hpp"
#include "advrecon/core/linear_map.hpp"
#include "advrecon/core/recon_map.hpp"
#include "advrecon/core/rng.hpp"
#include "advrecon/core/tape.hpp"

namespace advrecon::attacks {

struct AttackConfig {
  int steps = 200;
  std::optional<double> lr;  // initial Adam step, cosine-decayed; unset: eta / 10
  int restarts = 5;          // random inits, on top of zero and extra inits
  double eta = 0.0;
  bool include_zero_init = true;
  std::uint64_t seed = 0;
  // Steps between re-anchoring the view (for TV: a full warm-started solve)
  // and exact evaluation of the current candidate.
  int refresh_every = 25;
  int threads = 1;

  void validate() const;
  double step_size() const { return lr ? *lr : eta / 10.0; }
};

struct AttackResult {
  Tensor e_adv;
  double achieved_error = 0.0;
  // One entry per start, in start order: zero init, extra inits, random inits.
  std::vector<double> per_restart_errors;
  std::vector<std::string> restart_inits;
  std::size_t best_restart = 0;
  // Per-step objective of the winning start, on the reported scale.
  std::vector<double> trace;
};

/// What a projected ascent maximizes.
///   record   the objective on a tape, from the reconstruction node
///   exact    the reported value of a reconstruction (used to pick winners)
///   report   maps a recorded value to the reported scale (for the trace)
struct AttackObjective {
  std::function<Var(Tape&, Var xhat)> record;
  std::function<double(const Tensor& xhat)> exact;
  std::function<double(double recorded)> report;
};

/// Projected Adam ascent on e -> objective(rec(ybar + e)) over ||e|| <= eta.
///
/// Every start is evaluated exactly with rec.reconstruct() at its init, every
/// refresh_every steps and after the last step; the best exact value wins,
/// ties going to the earlier start. With include_zero_init the result is never
/// below the unperturbed value, and passing an earlier winner in extra_inits
/// makes results monotone in eta. Starts run in parallel and are reduced in
/// order, so the result does not depend on cfg.threads.
/// Throws NumericalError naming the start and step if a gradient is not finite.
AttackResult maximize(const ReconstructionMap& rec, const Tensor& ybar,
                      const AttackObjective& objective, const AttackConfig& cfg,
                      const std::vector<Tensor>& extra_inits = {});

/// Worst-case perturbation for rec at xbar; achieved_error is the relative
/// error ||rec(A xbar + e) - xbar|| / ||xbar||. The ascent itself uses the
/// squared error.
AttackResult find_adversarial(const ReconstructionMap& rec, const LinearOperator& a,
                              const Tensor& xbar, const AttackConfig& cfg,
                              const std::vector<Tensor>& extra_inits = {});

// Relative error of rec at A xbar + e. Evaluating the map that produced e
// reproduces its achieved_error exactly.
double transfer_eval(const ReconstructionMap& rec, const LinearOperator& a, const Tensor& xbar,
                     const Tensor& e);

// Uniform sample from the eta-ball in R^m (Gaussian direction, radius eta U^(1/m)).
Tensor sample_ball(std::size_t m, double eta, Rng& rng);

/// Linear reconstruction y -> B y.
class LinearReconstruction final : public ReconstructionMap {
 public:
  LinearReconstruction(std::shared_ptr<const LinearOperator> b, std::string label = "linear");

  std::string name() const override { return label_; }
  std::size_t input_dim() const override { return b_->cols(); }
  std::size_t output_dim() const override { return b_->rows(); }
  Tensor reconstruct(const Tensor& y) const override { return b_->apply(y); }
  std::unique_ptr<DifferentiableView> view() const override;

 private:
  std::shared_ptr<const LinearOperator> b_;
  std::string label_;
};

// CSV with header restart,init,error,best; one row per start.
void write_attack_csv(const std::filesystem::path& path, const AttackResult& result);

/// Perturbation container: entry "e_adv" plus metadata
/// {"format":"advrecon-perturbation","version":1,"method","eta","achieved_error"}.
Container perturbation_to_container(const AttackResult& result, const std::string& method,
                                    double eta);
// Throws FormatError if the container is not a perturbation.
Tensor perturbation_from_container(const Container& c);

}  // namespace advrecon::attacks
