#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "advrecon/attacks/attack.hpp"
#include "advrecon/attacks/margin.hpp"
#include "advrecon/attacks/noise.hpp"
#include "advrecon/core/error.hpp"
#include "advrecon/nets/recon_net.hpp"
#include "advrecon/operators/dense.hpp"
#include "advrecon/operators/gradient.hpp"
#include "advrecon/operators/tikhonov.hpp"
#include "advrecon/signals/piecewise.hpp"
#include "advrecon/tv/tv_map.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace advrecon;
using namespace advrecon::attacks;

namespace {

using operators::DenseMatrix;

std::shared_ptr<const DenseMatrix> mat(std::size_t r, std::size_t c, std::vector<double> v) {
  return std::make_shared<DenseMatrix>(r, c, std::move(v));
}

Tensor small_signal(std::size_t n, std::uint64_t seed) {
  signals::PiecewiseConstantSpec s;
  s.n = n;
  s.min_gap = 3;
  s.jumps_max = 4;
  Rng rng = make_rng(seed);
  return signals::sample_piecewise_constant(s, rng);
}

struct SmallTv {
  std::shared_ptr<const DenseMatrix> a;
  std::shared_ptr<const tv::AdmmTvSolver> solver;
};

SmallTv small_tv(std::size_t m = 16, std::size_t n = 32) {
  auto a = operators::sample_gaussian_operator(m, n, 3);
  tv::AdmmConfig cfg;
  cfg.unroll_iters = 10;
  return {a, std::make_shared<tv::AdmmTvSolver>(a, std::make_shared<operators::GradientOp1D>(n), cfg)};
}

AttackConfig quick(double eta, int steps = 30, int restarts = 2) {
  AttackConfig c;
  c.eta = eta;
  c.steps = steps;
  c.restarts = restarts;
  c.refresh_every = 10;
  c.seed = 9;
  return c;
}

// Maps y to NaN-producing reconstructions.
class PoisonMap final : public ReconstructionMap {
 public:
  std::string name() const override { return "poison"; }
  std::size_t input_dim() const override { return 2; }
  std::size_t output_dim() const override { return 2; }
  Tensor reconstruct(const Tensor& y) const override { return y; }
  std::unique_ptr<DifferentiableView> view() const override {
    struct V final : DifferentiableView {
      Var record(Tape& t, Var y) override {
        return t.opaque("poison", {y}, Tensor::vector({std::nan(""), 0.0}));
      }
    };
    return std::make_unique<V>();
  }
};

}  // namespace

TEST_SUITE("attacks") {

TEST_CASE("statistical noise has the requested energy") {
  const std::size_t m = 100;
  const double eta = 0.7;
  for (auto kind : {StatisticalNoise::gaussian, StatisticalNoise::uniform,
                    StatisticalNoise::bernoulli}) {
    Rng rng = make_rng(17, {static_cast<std::uint64_t>(kind)});
    double acc = 0.0;
    const int draws = 10000;
    for (int d = 0; d < draws; ++d) acc += squared_norm(sample_statistical_noise(kind, m, eta, rng));
    CHECK(acc / draws == doctest::Approx(eta * eta).epsilon(0.03));
  }
  Rng rng = make_rng(1);
  CHECK(squared_norm(sample_statistical_noise(StatisticalNoise::gaussian, m, 0.0, rng)) == 0.0);
  CHECK_THROWS_AS(sample_statistical_noise(StatisticalNoise::bernoulli, m, 1.0, rng, 0.0), ConfigError);
  CHECK_THROWS_AS(sample_statistical_noise(StatisticalNoise::bernoulli, m, 1.0, rng, 1.0), ConfigError);
  CHECK_THROWS_AS(parse_statistical_noise("laplace"), ConfigError);
}

TEST_CASE("bernoulli support size and levels") {
  const std::size_t m = 100;
  const double p = 0.025, eta = 2.0;
  const double b = eta / std::sqrt(m * p);
  Rng rng = make_rng(23);
  const int draws = 10000;
  double count = 0.0;
  for (int d = 0; d < draws; ++d) {
    const Tensor e = sample_statistical_noise(StatisticalNoise::bernoulli, m, eta, rng, p);
    for (double v : e.values()) {
      if (v == 0.0) continue;
      CHECK(std::abs(std::abs(v) - b) < 1e-12);
      count += 1.0;
    }
  }
  // Binomial(m * draws, p): mean 2.5 per draw, 4 standard errors.
  const double mean = count / draws;
  const double se = std::sqrt(m * p * (1 - p) / draws);
  CHECK(std::abs(mean - 2.5) < 4 * se);
}

TEST_CASE("ball samples are feasible and fill the ball") {
  Rng rng = make_rng(4);
  double inside_half = 0.0;
  for (int i = 0; i < 2000; ++i) {
    const Tensor e = sample_ball(2, 3.0, rng);
    CHECK(norm(e) <= 3.0 * (1 + 1e-12));
    inside_half += norm(e) <= 1.5 ? 1.0 : 0.0;
  }
  // Area fraction of the half-radius disc is 1/4.
  CHECK(inside_half / 2000 == doctest::Approx(0.25).epsilon(0.15));
}

TEST_CASE("zero budget returns zero perturbation and the noiseless error") {
  auto tvs = small_tv();
  const Tensor x = small_signal(32, 2);
  tv::TvMap map(tvs.solver, tv::TvObjective::constrained(0.0));
  const AttackResult r = find_adversarial(map, *tvs.a, x, quick(0.0));
  CHECK(norm(r.e_adv) == 0.0);
  CHECK(r.achieved_error == transfer_eval(map, *tvs.a, x, Tensor::zeros(16)));
  CHECK(r.per_restart_errors.size() == 3);
}

TEST_CASE("linear attack matches the exhaustive boundary search") {
  auto a = mat(2, 2, {1.0, 0.3, -0.2, 0.8});
  auto b = mat(2, 2, {0.9, -1.4, 0.5, 2.1});
  LinearReconstruction rec(b);
  const Tensor x = Tensor::vector({0.6, -1.1});
  const double eta = 0.4;
  const Tensor y = a->apply(x);
  double brute = 0.0;
  const int dirs = 100000;
  for (int k = 0; k < dirs; ++k) {
    const double th = 2.0 * std::numbers::pi * k / dirs;
    const Tensor e = Tensor::vector({eta * std::cos(th), eta * std::sin(th)});
    brute = std::max(brute, norm(b->apply(y + e) - x) / norm(x));
  }
  AttackConfig cfg = quick(eta, 200, 5);
  const AttackResult r = find_adversarial(rec, *a, x, cfg);
  MESSAGE("attack " << r.achieved_error << " brute " << brute);
  CHECK(std::abs(r.achieved_error - brute) <= 1e-3);
  CHECK(r.achieved_error <= brute + 1e-6);
  CHECK(norm(r.e_adv) <= eta * (1 + 1e-9));
}

TEST_CASE("achieved error is the running maximum over restarts") {
  auto tvs = small_tv();
  const Tensor x = small_signal(32, 5);
  const double eta = 0.05 * norm(tvs.a->apply(x));
  tv::TvMap map(tvs.solver, tv::TvObjective::constrained(eta));
  double prev = -1.0;
  for (int r = 1; r <= 3; ++r) {
    const AttackResult res = find_adversarial(map, *tvs.a, x, quick(eta, 20, r));
    CHECK(res.achieved_error ==
          *std::max_element(res.per_restart_errors.begin(), res.per_restart_errors.end()));
    CHECK(res.achieved_error >= prev);
    prev = res.achieved_error;
  }
}

TEST_CASE("TV attack is feasible, dominant and beats random noise") {
  auto tvs = small_tv();
  for (std::uint64_t s = 0; s < 3; ++s) {
    const Tensor x = small_signal(32, 10 + s);
    const double eta = 0.05 * norm(tvs.a->apply(x));
    tv::TvMap map(tvs.solver, tv::TvObjective::constrained(eta));
    const AttackResult r = find_adversarial(map, *tvs.a, x, quick(eta));
    CHECK(norm(r.e_adv) <= eta * (1 + 1e-9));
    const double base = transfer_eval(map, *tvs.a, x, Tensor::zeros(16));
    CHECK(r.achieved_error >= base);
    CHECK(r.per_restart_errors[0] >= base);
    Rng rng = make_rng(s);
    const Tensor g = sample_statistical_noise(StatisticalNoise::gaussian, 16, eta, rng);
    CHECK(r.achieved_error > transfer_eval(map, *tvs.a, x, g));
    CHECK(r.trace.size() == 30);
  }
}

TEST_CASE("nested budgets give monotone results") {
  auto tvs = small_tv();
  const Tensor x = small_signal(32, 7);
  const double base = norm(tvs.a->apply(x));
  std::vector<Tensor> inits;
  double prev = 0.0;
  for (double rel : {0.01, 0.03, 0.06}) {
    tv::TvMap map(tvs.solver, tv::TvObjective::constrained(rel * base));
    const AttackResult r = find_adversarial(map, *tvs.a, x, quick(rel * base, 15, 1), inits);
    CHECK(r.achieved_error >= prev);
    prev = r.achieved_error;
    inits = {r.e_adv};
  }
}

TEST_CASE("attack on a network map") {
  auto a = operators::sample_gaussian_operator(16, 32, 1);
  operators::GradientOp1D g(32);
  nets::NetSpec spec;
  spec.kind = nets::NetKind::iterative;
  spec.enhancer.channels = {3, 4, 5};
  spec.iterations = 2;
  auto net = std::make_shared<nets::ReconNet>(spec, a, operators::tikhonov_inverse(*a, g, 0.02));
  nets::NetMap map(net);
  const Tensor x = small_signal(32, 3);
  const double eta = 0.05 * norm(a->apply(x));
  const AttackResult r = find_adversarial(map, *a, x, quick(eta, 50, 2));
  CHECK(norm(r.e_adv) <= eta * (1 + 1e-9));
  CHECK(r.achieved_error >= transfer_eval(map, *a, x, Tensor::zeros(16)));
  CHECK(transfer_eval(map, *a, x, r.e_adv) == r.achieved_error);
}

TEST_CASE("attacks are deterministic across thread counts") {
  auto tvs = small_tv();
  const Tensor x = small_signal(32, 8);
  const double eta = 0.04 * norm(tvs.a->apply(x));
  tv::TvMap map(tvs.solver, tv::TvObjective::constrained(eta));
  AttackConfig c1 = quick(eta, 20, 3);
  AttackConfig c3 = c1;
  c3.threads = 3;
  const AttackResult r1 = find_adversarial(map, *tvs.a, x, c1);
  const AttackResult r3 = find_adversarial(map, *tvs.a, x, c3);
  CHECK(r1.e_adv == r3.e_adv);
  CHECK(r1.per_restart_errors == r3.per_restart_errors);
  CHECK(r1.trace == r3.trace);
}

TEST_CASE("self transfer reproduces the achieved error") {
  auto tvs = small_tv();
  const Tensor x = small_signal(32, 12);
  const double eta = 0.03 * norm(tvs.a->apply(x));
  tv::TvMap map(tvs.solver, tv::TvObjective::constrained(eta));
  const AttackResult r = find_adversarial(map, *tvs.a, x, quick(eta));
  CHECK(transfer_eval(map, *tvs.a, x, r.e_adv) == r.achieved_error);
}

TEST_CASE("non-finite gradients name the start and step") {
  PoisonMap rec;
  auto a = std::make_shared<DenseMatrix>(DenseMatrix::identity(2));
  try {
    find_adversarial(rec, *a, Tensor::vector({1.0, 2.0}), quick(0.5));
    FAIL("expected NumericalError");
  } catch (const NumericalError& e) {
    const std::string what = e.what();
    CHECK(what.find("start 0") != std::string::npos);
    CHECK(what.find("step 0") != std::string::npos);
  }
}

TEST_CASE("attack config validation") {
  AttackConfig c;
  c.steps = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.restarts = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.eta = -1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.eta = 2.0;
  CHECK(c.step_size() == 0.2);
  c.lr = 0.5;
  CHECK(c.step_size() == 0.5);
}

TEST_CASE("attack CSV and perturbation container") {
  auto a = mat(2, 2, {1.0, 0.0, 0.0, 1.0});
  LinearReconstruction rec(a);
  const AttackResult r = find_adversarial(rec, *a, Tensor::vector({1.0, 0.5}), quick(0.3));
  const auto dir = std::filesystem::temp_directory_path() / "advrecon_attack_test";
  std::filesystem::create_directories(dir);
  write_attack_csv(dir / "attack.csv", r);
  std::ifstream in(dir / "attack.csv");
  std::string header, line;
  std::getline(in, header);
  CHECK(header == "restart,init,error,best");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 3);

  write_container(dir / "e.bin", perturbation_to_container(r, "linear", 0.3));
  CHECK(perturbation_from_container(read_container(dir / "e.bin")) == r.e_adv);
  Container other;
  other.metadata = R"({"format":"advrecon-net"})";
  CHECK_THROWS_AS(perturbation_from_container(other), FormatError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("margin is second-best minus true logit") {
  nets::ClassifierSpec cs;
  cs.classes = 3;
  cs.channels = 2;
  cs.hidden = 4;
  nets::Classifier clf(cs, 8);
  Rng rng = make_rng(77);
  for (auto& [name, v] : clf.params().entries())
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = standard_normal(rng, 1)[0];
  auto id = std::make_shared<DenseMatrix>(DenseMatrix::identity(8));
  LinearReconstruction rec(id);
  const Tensor x = testing::random_tensor(rng, {8});
  const Tensor z = clf.logits(x);
  for (int c = 0; c < 3; ++c) {
    std::vector<double> others;
    for (int k = 0; k < 3; ++k)
      if (k != c) others.push_back(z[static_cast<std::size_t>(k)]);
    const double expected = *std::max_element(others.begin(), others.end()) - z[static_cast<std::size_t>(c)];
    CHECK(logit_margin(z, c) == expected);
    const MarginResult r = margin_attack(rec, clf, *id, x, c, quick(0.0));
    CHECK(r.attack.achieved_error == expected);
  }
  CHECK_THROWS_AS(logit_margin(z, 3), ContractViolation);
}

TEST_CASE("margin attack flips a classifier and is monotone under nesting") {
  nets::ClassifierSpec cs;
  cs.channels = 3;
  cs.hidden = 8;
  nets::Classifier clf(cs, 8);
  Rng rng = make_rng(78);
  for (auto& [name, v] : clf.params().entries())
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = standard_normal(rng, 1)[0];
  // Centre the output bias so both classes occur.
  double gap = 0.0;
  for (int i = 0; i < 200; ++i) {
    const Tensor z = clf.logits(testing::random_tensor(rng, {8}));
    gap += (z[0] - z[1]) / 200.0;
  }
  clf.params().at("fc1.b") = Tensor::vector({-gap / 2.0, gap / 2.0});
  auto id = std::make_shared<DenseMatrix>(DenseMatrix::identity(8));
  LinearReconstruction rec(id);

  std::vector<Tensor> xs;
  std::vector<int> labels;
  // Inputs near the decision boundary, so moderate budgets can flip them.
  for (int i = 0; xs.size() < 6 && i < 5000; ++i) {
    Tensor x = testing::random_tensor(rng, {8});
    const int c = clf.predict(x);
    if (logit_margin(clf.logits(x), c) < -1.5) continue;
    xs.push_back(x);
    labels.push_back(c);
  }
  REQUIRE(xs.size() == 6);
  std::vector<std::vector<Tensor>> inits(xs.size());
  int prev_correct = static_cast<int>(xs.size());
  for (double eta : {0.0, 0.5, 2.0, 8.0, 32.0}) {
    int correct = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const MarginResult r = margin_attack(rec, clf, *id, xs[i], labels[i], quick(eta, 60, 1), inits[i]);
      if (eta == 0.0) {
        CHECK_FALSE(r.flipped);
        CHECK(r.attack.achieved_error < 0.0);
      }
      CHECK(r.flipped == (r.predicted != labels[i]));
      correct += r.flipped ? 0 : 1;
      inits[i] = {r.attack.e_adv};
    }
    CHECK(correct <= prev_correct);
    prev_correct = correct;
  }
  CHECK(prev_correct < static_cast<int>(xs.size()));
}

}  // TEST_SUITE
