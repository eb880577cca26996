#pragma once

#include <cstdint>
#include <vector>

#include "advrecon/signals/dataset.hpp"
#include "advrecon/tv/admm.hpp"

namespace advrecon::tv {

struct LambdaChoice {
  double eta = 0.0;
  double lambda = 0.0;
  // Mean relative error for every entry of the lambda grid, in grid order.
  std::vector<double> mean_errors;
};

/// Grid search for the unconstrained TV weight.
///
/// For each eta, every signal of `data` is measured with fresh Gaussian noise
/// of norm level eta (stream derived from seed, eta index and signal index)
/// and reconstructed for each lambda. The chosen lambda minimizes the mean
/// relative l2 error; ties go to the smaller lambda. Grids must be nonempty.
std::vector<LambdaChoice> select_lambda(const AdmmTvSolver& solver,
                                        const std::vector<Tensor>& signals,
                                        const std::vector<double>& eta_grid,
                                        const std::vector<double>& lambda_grid,
                                        std::uint64_t seed, int threads = 1);

}  // namespace advrecon::tv
