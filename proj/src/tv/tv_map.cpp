#include "advrecon/tv/tv_map.hpp"

#include <optional>

#include "advrecon/core/error.hpp"

namespace advrecon::tv {

namespace {

class TvView final : public DifferentiableView {
 public:
  TvView(std::shared_ptr<const AdmmTvSolver> solver, TvObjective objective)
      : solver_(std::move(solver)), objective_(objective) {}

  void anchor(const Tensor& y) override {
    auto sol = solver_->solve(y, objective_, warm_ ? &*warm_ : nullptr);
    warm_ = std::move(sol.state);
    anchored_ = std::move(sol.x);
  }

  const Tensor* anchored_output() const override { return anchored_ ? &*anchored_ : nullptr; }

  Var record(Tape& tape, Var y) override {
    if (!warm_) anchor(tape.value(y));
    return solver_->unrolled(tape, y, objective_, *warm_);
  }

 private:
  std::shared_ptr<const AdmmTvSolver> solver_;
  TvObjective objective_;
  std::optional<AdmmState> warm_;
  std::optional<Tensor> anchored_;
};

}  // namespace

TvMap::TvMap(std::shared_ptr<const AdmmTvSolver> solver, TvObjective objective,
             std::string label)
    : solver_(std::move(solver)), objective_(objective), label_(std::move(label)) {
  expects(solver_ != nullptr, "TvMap: null solver");
  objective_.validate();
  if (label_.empty())
    label_ = objective_.mode == TvMode::constrained ? "tv-eta" : "tv-lambda";
}

Tensor TvMap::reconstruct(const Tensor& y) const {
  return solver_->solve(y, objective_).x;
}

std::unique_ptr<DifferentiableView> TvMap::view() const {
  return std::make_unique<TvView>(solver_, objective_);
}

}  // namespace advrecon::tv
