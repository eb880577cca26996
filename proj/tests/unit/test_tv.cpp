#include <cmath>

#include "advrecon/attacks/noise.hpp"
#include "advrecon/core/error.hpp"
#include "advrecon/operators/gradient.hpp"
#include "advrecon/signals/piecewise.hpp"
#include "advrecon/tv/admm.hpp"
#include "advrecon/tv/select_lambda.hpp"
#include "advrecon/tv/tv_map.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace advrecon;
using namespace advrecon::tv;

namespace {

std::shared_ptr<const LinearOperator> grad1(std::size_t n) {
  return std::make_shared<operators::GradientOp1D>(n);
}

oracle::Mat to_mat(const operators::DenseMatrix& d) {
  oracle::Mat m(d.rows(), oracle::Vec(d.cols()));
  for (std::size_t r = 0; r < d.rows(); ++r)
    for (std::size_t c = 0; c < d.cols(); ++c) m[r][c] = d(r, c);
  return m;
}

Tensor a1_signal(std::uint64_t seed, int max_jumps = 4) {
  signals::PiecewiseConstantSpec s;
  s.jumps_max = max_jumps;
  Rng rng = make_rng(seed);
  return signals::sample_piecewise_constant(s, rng);
}

Tensor noisy(const operators::DenseMatrix& a, const Tensor& x, double rel, std::uint64_t seed) {
  Tensor y = a.apply(x);
  Rng rng = make_rng(seed);
  return y + attacks::sample_statistical_noise(attacks::StatisticalNoise::gaussian, a.rows(),
                                               rel * norm(y), rng);
}

}  // namespace

TEST_SUITE("tv") {

TEST_CASE("zero problem") {
  auto a = operators::sample_gaussian_operator(6, 8, 1);
  AdmmTvSolver s(a, grad1(8));
  auto sol = s.solve(Tensor::zeros(6), TvObjective::constrained(0.0));
  CHECK(sol.converged);
  CHECK(norm(sol.x) == 0.0);
}

TEST_CASE("constrained solve matches an independent primal-dual solver") {
  auto a = operators::sample_gaussian_operator(6, 8, 3);
  Tensor x = Tensor::vector({0, 0, 0, 1, 1, 1, 1, 1});
  Tensor y = a->apply(x);
  AdmmConfig cfg;
  cfg.max_iters = 100000;
  cfg.tol_primal = cfg.tol_dual = 1e-12;
  AdmmTvSolver s(a, grad1(8), cfg);
  auto sol = s.solve(y, TvObjective::constrained(0.0));
  CHECK(sol.converged);
  oracle::Vec ref = oracle::pdhg_constrained_tv(to_mat(*a), oracle::gradient_1d_matrix(8),
                                                y.values(), 0.0, 1000000);
  CHECK(oracle::rel_dist(sol.x.values(), ref) <= 1e-4);
}

TEST_CASE("constrained solve with slack matches the primal-dual solver") {
  auto a = operators::sample_gaussian_operator(6, 8, 4);
  Tensor x = Tensor::vector({0, 0, 2, 2, 2, -1, -1, 0});
  Tensor y = noisy(*a, x, 0.1, 5);
  const double eta = 0.1 * norm(a->apply(x));
  AdmmConfig cfg;
  cfg.max_iters = 100000;
  cfg.tol_primal = cfg.tol_dual = 1e-12;
  auto sol = AdmmTvSolver(a, grad1(8), cfg).solve(y, TvObjective::constrained(eta));
  oracle::Vec ref = oracle::pdhg_constrained_tv(to_mat(*a), oracle::gradient_1d_matrix(8),
                                                y.values(), eta, 1000000);
  CHECK(oracle::rel_dist(sol.x.values(), ref) <= 1e-4);
}

TEST_CASE("noiseless A1 instances are recovered") {
  auto a = operators::sample_gaussian_operator(100, 256, 11);
  AdmmTvSolver s(a, grad1(256));
  for (std::uint64_t k = 0; k < 5; ++k) {
    Tensor x = a1_signal(100 + k);
    auto sol = s.solve(a->apply(x), TvObjective::constrained(0.0));
    INFO("signal " << k << " iters " << sol.iters_used);
    CHECK(sol.converged);
    CHECK(norm(sol.x - x) / norm(x) <= 1e-3);
  }
}

TEST_CASE("constrained output is feasible and residuals meet tolerance") {
  auto a = operators::sample_gaussian_operator(100, 256, 12);
  AdmmTvSolver s(a, grad1(256));
  for (std::uint64_t k = 0; k < 3; ++k) {
    Tensor x = a1_signal(200 + k);
    Tensor y = noisy(*a, x, 0.05, 300 + k);
    const double eta = 0.05 * norm(a->apply(x));
    auto sol = s.solve(y, TvObjective::constrained(eta));
    REQUIRE(sol.converged);
    CHECK(norm(a->apply(sol.x) - y) <= eta * (1.0 + s.config().tol_primal));
    const auto& last = sol.trace.back();
    CHECK(last.primal_residual <= 1e-8 * std::max(1.0, norm(sol.x) * 10));
    CHECK(sol.trace.size() == static_cast<std::size_t>(sol.iters_used));
  }
}

TEST_CASE("unconstrained objective is monotone over accepted iterations") {
  auto a = operators::sample_gaussian_operator(100, 256, 13);
  AdmmTvSolver s(a, grad1(256));
  int rejected = 0, total = 0;
  for (std::uint64_t k = 0; k < 4; ++k) {
    Tensor x = a1_signal(400 + k);
    Tensor y = noisy(*a, x, 0.05, 500 + k);
    auto sol = s.solve(y, TvObjective::unconstrained(0.05));
    double last = std::numeric_limits<double>::infinity();
    for (const auto& it : sol.trace) {
      ++total;
      if (!it.accepted) {
        ++rejected;
        continue;
      }
      CHECK(it.objective <= last + 1e-10);
      last = it.objective;
    }
    CHECK(sol.trace.back().objective ==
          doctest::Approx(tv_objective(s, sol.x, y, TvObjective::unconstrained(0.05))));
  }
  MESSAGE("rejected " << rejected << " of " << total << " iterates");
}

TEST_CASE("solution is invariant to rho") {
  auto a = operators::sample_gaussian_operator(12, 20, 14);
  Tensor x = Tensor::zeros(20);
  for (std::size_t i = 5; i < 12; ++i) x[i] = 1.0;
  for (std::size_t i = 12; i < 16; ++i) x[i] = -0.5;
  Tensor y = noisy(*a, x, 0.05, 15);
  for (auto obj : {TvObjective::unconstrained(0.1), TvObjective::constrained(0.05 * norm(y))}) {
    std::vector<Tensor> xs;
    for (double rho : {0.5, 1.0, 2.0}) {
      AdmmConfig cfg;
      cfg.rho = rho;
      cfg.max_iters = 500000;
      cfg.tol_primal = cfg.tol_dual = 1e-13;
      auto sol = AdmmTvSolver(a, grad1(20), cfg).solve(y, obj);
      CHECK(sol.converged);
      xs.push_back(sol.x);
    }
    CHECK(testing::rel_err(xs[0], xs[1]) <= 1e-8);
    CHECK(testing::rel_err(xs[2], xs[1]) <= 1e-8);
  }
}

TEST_CASE("converged map is continuous in y") {
  auto a = operators::sample_gaussian_operator(100, 256, 16);
  AdmmTvSolver s(a, grad1(256));
  Tensor x = a1_signal(600);
  Tensor y = noisy(*a, x, 0.03, 601);
  Rng rng = make_rng(602);
  Tensor d = standard_normal(rng, 100);
  d = (1e-6 / norm(d)) * d;
  for (auto obj : {TvObjective::constrained(0.03 * norm(a->apply(x))),
                   TvObjective::unconstrained(0.05)}) {
    Tensor x0 = s.solve(y, obj).x;
    Tensor x1 = s.solve(y + d, obj).x;
    CHECK(norm(x1 - x0) <= 1e-3);
  }
}

TEST_CASE("zero-step unroll returns the warm start") {
  auto a = operators::sample_gaussian_operator(6, 8, 17);
  AdmmConfig cfg;
  cfg.unroll_iters = 0;
  AdmmTvSolver s(a, grad1(8), cfg);
  Rng rng = make_rng(18);
  Tensor y = standard_normal(rng, 6);
  auto warm = s.solve(y, TvObjective::constrained(0.1)).state;
  Tape t;
  Var out = s.unrolled(t, t.leaf(y), TvObjective::constrained(0.1), warm);
  CHECK(t.value(out) == warm.x);
}

TEST_CASE("unrolled gradient matches finite differences") {
  for (std::uint64_t seed : {21u, 22u, 23u}) {
    auto a = operators::sample_gaussian_operator(6, 8, seed);
    Tensor xbar = Tensor::vector({0, 0, 1.5, 1.5, 1.5, -0.5, -0.5, 0});
    Tensor y = noisy(*a, xbar, 0.1, seed + 100);
    AdmmTvSolver s(a, grad1(8));
    for (auto obj : {TvObjective::constrained(0.1 * norm(y)), TvObjective::unconstrained(0.05)}) {
      auto warm = s.solve(y, obj).state;
      auto loss = [&](const Tensor& yy, Tensor* grad) {
        Tape t;
        Var yv = t.leaf(yy);
        Var l = t.squared_norm(t.sub(s.unrolled(t, yv, obj, warm), t.constant(xbar)));
        if (grad) *grad = t.backward(l).of(yv);
        return t.scalar(l);
      };
      // perturb y so the unroll is not at a fixed point
      Rng rng = make_rng(seed + 7);
      Tensor y0 = y + 0.05 * standard_normal(rng, 6);
      Tensor g;
      loss(y0, &g);
      oracle::Vec fd = oracle::finite_difference(
          [&](const oracle::Vec& v) { return loss(Tensor::vector(v), nullptr); }, y0.values(),
          1e-5);
      INFO("seed " << seed);
      CHECK(oracle::rel_dist(g.values(), fd) <= 1e-4);
    }
  }
}

TEST_CASE("warm unroll reproduces the converged solution") {
  auto a = operators::sample_gaussian_operator(100, 256, 24);
  AdmmTvSolver s(a, grad1(256));
  Tensor x = a1_signal(700);
  Tensor y = noisy(*a, x, 0.05, 701);
  for (auto obj : {TvObjective::constrained(0.05 * norm(a->apply(x))),
                   TvObjective::unconstrained(0.05)}) {
    auto sol = s.solve(y, obj);
    REQUIRE(sol.converged);
    Tape t;
    Var out = s.unrolled(t, t.leaf(y), obj, sol.state);
    CHECK(testing::rel_err(t.value(out), sol.x) <= 1e-6);
  }
}

TEST_CASE("unroll on a dead tape is a contract violation") {
  auto a = operators::sample_gaussian_operator(6, 8, 25);
  AdmmTvSolver s(a, grad1(8));
  auto warm = s.zero_state(TvMode::constrained);
  Tape t(false);
  CHECK_THROWS_AS(s.unrolled(t, t.leaf(Tensor::zeros(6)), TvObjective::constrained(0.0), warm),
                  ContractViolation);
}

TEST_CASE("configuration errors") {
  AdmmConfig c;
  c.rho = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.max_iters = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  CHECK_THROWS_AS(TvObjective::unconstrained(0.0).validate(), ConfigError);
  CHECK_THROWS_AS(TvObjective::constrained(-1.0).validate(), ConfigError);
}

TEST_CASE("max_iters exhaustion is reported") {
  auto a = operators::sample_gaussian_operator(100, 256, 26);
  AdmmConfig cfg;
  cfg.max_iters = 5;
  AdmmTvSolver s(a, grad1(256), cfg);
  auto sol = s.solve(a->apply(a1_signal(800)), TvObjective::unconstrained(0.01));
  CHECK_FALSE(sol.converged);
  CHECK(sol.iters_used == 5);
}

TEST_CASE("trace csv") {
  auto a = operators::sample_gaussian_operator(6, 8, 27);
  AdmmTvSolver s(a, grad1(8));
  auto sol = s.solve(Tensor::vector({1, 2, 3, 4, 5, 6}), TvObjective::unconstrained(0.1));
  const auto path = std::filesystem::temp_directory_path() / "advrecon_trace.csv";
  write_trace_csv(path, sol.trace);
  auto bytes = read_file_bytes(path);
  std::string text(bytes.begin(), bytes.end());
  CHECK(text.rfind("iter,objective,primal_residual,dual_residual,accepted\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == sol.iters_used + 1);
  std::filesystem::remove(path);
}

TEST_CASE("tv map view anchors and records") {
  auto a = operators::sample_gaussian_operator(20, 40, 28);
  auto solver = std::make_shared<AdmmTvSolver>(a, grad1(40));
  TvMap map(solver, TvObjective::constrained(0.1));
  Rng rng = make_rng(29);
  Tensor y = standard_normal(rng, 20);
  Tensor ref = map.reconstruct(y);
  auto view = map.view();
  view->anchor(y);
  Tape t;
  Var out = view->record(t, t.leaf(y));
  CHECK(testing::rel_err(t.value(out), ref) <= 1e-6);
  CHECK(map.input_dim() == 20);
  CHECK(map.output_dim() == 40);
  CHECK(map.name() == "tv-eta");
}

TEST_CASE("select_lambda") {
  auto a = operators::sample_gaussian_operator(100, 256, 30);
  AdmmTvSolver s(a, grad1(256));
  std::vector<Tensor> sig;
  for (std::uint64_t k = 0; k < 6; ++k) sig.push_back(a1_signal(900 + k));
  auto single = select_lambda(s, sig, {0.0, 0.5}, {0.3}, 1);
  for (const auto& c : single) CHECK(c.lambda == 0.3);

  const std::vector<double> lambdas = {1e-3, 1e-2, 3e-2, 1e-1, 3e-1, 1.0};
  std::vector<double> etas;
  for (double rel : {0.0, 0.02, 0.05, 0.1}) etas.push_back(rel * std::sqrt(100.0 / 256.0) * 3.0);
  auto sel = select_lambda(s, sig, etas, lambdas, 2);
  REQUIRE(sel.size() == etas.size());
  CHECK(sel[0].lambda == lambdas.front());
  bool monotone = true;
  for (std::size_t i = 1; i < sel.size(); ++i) monotone &= sel[i].lambda >= sel[i - 1].lambda;
  std::string picks;
  for (const auto& c : sel) picks += std::to_string(c.lambda) + " ";
  MESSAGE("lambda* over eta grid: " << picks << std::string(monotone ? "(non-decreasing)" : "(NOT monotone)"));
  CHECK_THROWS_AS(select_lambda(s, sig, {}, lambdas, 1), ContractViolation);
}

}
