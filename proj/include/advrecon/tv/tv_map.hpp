#pragma once

#include <memory>
#include <string>

#include "advrecon/core/recon_map.hpp"
#include "advrecon/tv/admm.hpp"

namespace advrecon::tv {

/// TV reconstruction as a ReconstructionMap.
///
/// reconstruct() runs a full solve from the zero state. A view keeps a warm
/// state: anchor(y) refreshes it with a warm-started full solve at y and
/// record() unrolls config().unroll_iters iterations from it.
class TvMap final : public ReconstructionMap {
 public:
  TvMap(std::shared_ptr<const AdmmTvSolver> solver, TvObjective objective,
        std::string label = "");

  std::string name() const override { return label_; }
  std::size_t input_dim() const override { return solver_->op()->rows(); }
  std::size_t output_dim() const override { return solver_->op()->cols(); }
  Tensor reconstruct(const Tensor& y) const override;
  std::unique_ptr<DifferentiableView> view() const override;

  const AdmmTvSolver& solver() const noexcept { return *solver_; }
  const TvObjective& objective() const noexcept { return objective_; }

 private:
  std::shared_ptr<const AdmmTvSolver> solver_;
  TvObjective objective_;
  std::string label_;
};

}  // namespace advrecon::tv
