#include "advrecon/tv/select_lambda.hpp"

#include "advrecon/attacks/noise.hpp"
#include "advrecon/core/error.hpp"
#include "advrecon/core/parallel.hpp"
#include "advrecon/core/rng.hpp"

namespace advrecon::tv {

std::vector<LambdaChoice> select_lambda(const AdmmTvSolver& solver,
                                        const std::vector<Tensor>& signals,
                                        const std::vector<double>& eta_grid,
                                        const std::vector<double>& lambda_grid,
                                        std::uint64_t seed, int threads) {
  expects(!eta_grid.empty() && !lambda_grid.empty(), "select_lambda: empty grid");
  expects(!signals.empty(), "select_lambda: no signals");
  for (double l : lambda_grid)
    if (!(l > 0.0)) throw ConfigError("select_lambda: lambda grid entries must be positive");
  const auto& a = *solver.op();
  const std::size_t nl = lambda_grid.size();
  const std::size_t ns = signals.size();

  std::vector<LambdaChoice> out;
  for (std::size_t ei = 0; ei < eta_grid.size(); ++ei) {
    const double eta = eta_grid[ei];
    if (!(eta >= 0.0)) throw ConfigError("select_lambda: eta grid entries must be nonnegative");
    std::vector<double> errs(ns * nl);
    parallel_for(ns, threads, [&](std::size_t i) {
      Rng rng = make_rng(seed, {hash_name("select-lambda"), ei, i});
      Tensor y = a.apply(signals[i]) +
                 attacks::sample_statistical_noise(attacks::StatisticalNoise::gaussian,
                                                   a.rows(), eta, rng);
      const double ref = norm(signals[i]);
      for (std::size_t li = 0; li < nl; ++li) {
        Tensor x = solver.solve(y, TvObjective::unconstrained(lambda_grid[li])).x;
        errs[i * nl + li] = norm(x - signals[i]) / ref;
      }
    });
    LambdaChoice c;
    c.eta = eta;
    c.mean_errors.assign(nl, 0.0);
    for (std::size_t i = 0; i < ns; ++i)
      for (std::size_t li = 0; li < nl; ++li) c.mean_errors[li] += errs[i * nl + li];
    std::size_t best = 0;
    for (std::size_t li = 0; li < nl; ++li) {
      c.mean_errors[li] /= static_cast<double>(ns);
      const bool smaller_tie = c.mean_errors[li] == c.mean_errors[best] &&
                               lambda_grid[li] < lambda_grid[best];
      if (c.mean_errors[li] < c.mean_errors[best] || smaller_tie) best = li;
    }
    c.lambda = lambda_grid[best];
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace advrecon::tv
