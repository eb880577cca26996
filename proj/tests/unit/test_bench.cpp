#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "advrecon/attacks/attack.hpp"
#include "advrecon/bench/config.hpp"
#include "advrecon/bench/csv.hpp"
#include "advrecon/bench/curve.hpp"
#include "advrecon/bench/experiment.hpp"
#include "advrecon/bench/metrics.hpp"
#include "advrecon/bench/plot.hpp"
#include "advrecon/core/error.hpp"
#include "advrecon/operators/dense.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace advrecon;
using namespace advrecon::bench;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("advrecon_bench_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

std::vector<CurvePoint> line_points(std::vector<double> xs, double slope, double icpt) {
  std::vector<CurvePoint> out;
  for (double x : xs) {
    CurvePoint p;
    p.rel_noise = x;
    p.rel_error_mean = slope * x + icpt;
    out.push_back(p);
  }
  return out;
}

// Small but complete: TV plus a postproc net on N = 32.
const char* kTinyConfig = R"({
  "version": 1,
  "scenario": {"name": "tiny", "m": 16, "n": 32, "operator_seed": 4, "jumps_max": 4,
               "min_gap": 3, "train_count": 24, "test_count": 3, "data_seed": 2},
  "methods": [
    {"name": "tv", "type": "tv"},
    {"name": "pp", "type": "postproc", "channels": [4, 8],
     "train": {"epochs": 3, "batch_size": 8, "lr": 0.001}}
  ],
  "eta_grid": [0.01, 0.03, 0.06],
  "noise_kinds": ["adversarial", "gaussian"],
  "draws": 3,
  "attack": {"steps": 12, "restarts": 1, "refresh_every": 6},
  "seed": 5
})";

ExperimentConfig tiny(const std::filesystem::path& out, int threads) {
  ExperimentConfig c = parse_experiment_config(kTinyConfig);
  c.output = out;
  c.threads = threads;
  return c;
}

void check_config_error(const std::string& text, const std::string& needle) {
  try {
    parse_experiment_config(text);
    FAIL("expected ConfigError containing '" << needle << "'");
  } catch (const ConfigError& e) {
    CHECK_MESSAGE(std::string(e.what()).find(needle) != std::string::npos, e.what());
  }
}

}  // namespace

TEST_SUITE("bench") {

TEST_CASE("rel_error and psnr examples") {
  const Tensor xbar(Shape{2}, {1.0, 0.0});
  CHECK(rel_error(Tensor(Shape{2}, {0.0, 1.0}), xbar) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK(rel_error(xbar, xbar) == 0.0);
  CHECK(psnr(xbar, xbar) == kPsnrCap);
  CHECK(rel_error(Tensor(Shape{2}), xbar) == 1.0);
  CHECK_THROWS_AS(rel_error(xbar, Tensor(Shape{2})), ContractViolation);
  CHECK_THROWS_AS(rel_error(Tensor(Shape{3}), xbar), ContractViolation);

  Rng rng = make_rng(1);
  const Tensor a = testing::random_tensor(rng, Shape{20}), b = testing::random_tensor(rng, Shape{20});
  for (double c : {-3.0, 0.5, 1e6})
    CHECK(rel_error(c * a, c * b) == doctest::Approx(rel_error(a, b)).epsilon(1e-13));

  // window 2 (max - min of xbar), mse 0.01 -> 10 log10(4 / 0.01)
  const Tensor x(Shape{2}, {-1.0, 1.0});
  CHECK(psnr(Tensor(Shape{2}, {-0.9, 1.1}), x) == doctest::Approx(10.0 * std::log10(400.0)));
}

TEST_CASE("fit recovers an exact line") {
  const auto pts = line_points({0.005, 0.02, 0.06, 0.1}, 2.5, 0.01);
  const CurveFit f = fit_robustness_constant(pts);
  CHECK(std::abs(f.slope - 2.5) <= 1e-12);
  CHECK(std::abs(f.intercept - 0.01) <= 1e-12);
  CHECK(f.r2 == doctest::Approx(1.0).epsilon(1e-12));

  const CurveFit flat = fit_robustness_constant(line_points({0.0, 0.1, 0.2}, 0.0, 0.3));
  CHECK(flat.slope == 0.0);
  CHECK(flat.r2 == 1.0);

  CHECK_THROWS_AS(fit_robustness_constant(line_points({0.1, 0.2}, 1.0, 0.0)), ConfigError);
  CHECK_THROWS_AS(fit_robustness_constant(line_points({0.1, 0.1, 0.1}, 1.0, 0.0)), ConfigError);
}

TEST_CASE("perfect method at zero noise gives the origin") {
  auto id = std::make_shared<operators::DenseMatrix>(operators::DenseMatrix::identity(6));
  const Method perfect = fixed_method("id", std::make_shared<attacks::LinearReconstruction>(id, "id"));
  Rng rng = make_rng(3);
  const std::vector<Tensor> xs = {testing::random_tensor(rng, Shape{6}), testing::random_tensor(rng, Shape{6})};
  CurveOptions o;
  o.draws = 4;
  for (NoiseKind k : {NoiseKind::gaussian, NoiseKind::adversarial}) {
    o.attack.steps = 5;
    const Curve c = noise_to_error_curve(perfect, *id, xs, {0.0}, k, o);
    REQUIRE(c.points.size() == 1);
    CHECK(c.points[0].rel_noise == 0.0);
    CHECK(c.points[0].rel_error_mean == 0.0);
    CHECK(c.points[0].rel_error_std == 0.0);
  }
  CHECK_THROWS_AS(noise_to_error_curve(perfect, *id, xs, {}, NoiseKind::gaussian, o), ConfigError);
  CHECK_THROWS_AS(noise_to_error_curve(perfect, *id, xs, {-0.1}, NoiseKind::gaussian, o), ConfigError);
}

TEST_CASE("curve means are reproducible from records") {
  auto a = operators::sample_gaussian_operator(5, 8, 2);
  auto pinv = std::make_shared<operators::DenseMatrix>(operators::DenseMatrix::from_operator(*a).transposed());
  const Method m = fixed_method("adjoint", std::make_shared<attacks::LinearReconstruction>(pinv, "adjoint"));
  Rng rng = make_rng(4);
  std::vector<Tensor> xs;
  for (int i = 0; i < 4; ++i) xs.push_back(testing::random_tensor(rng, Shape{8}));
  CurveOptions o;
  o.draws = 7;
  o.threads = 3;
  const std::vector<double> grid = {0.0, 0.05, 0.2};
  const Curve c = noise_to_error_curve(m, *a, xs, grid, NoiseKind::uniform, o);
  REQUIRE(c.records.size() == grid.size() * xs.size() * 7);
  for (std::size_t l = 0; l < grid.size(); ++l) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& r : c.records)
      if (r.rel_noise == grid[l]) {
        sum += r.rel_error;
        ++n;
      }
    CHECK(n == xs.size() * 7);
    CHECK(std::abs(sum / n - c.points[l].rel_error_mean) <= 1e-12);
    CHECK(c.points[l].rel_error_std >= 0.0);
    CHECK(c.points[l].n_signals == xs.size());
    CHECK(c.points[l].n_draws == 7);
  }
  o.threads = 1;
  const Curve c1 = noise_to_error_curve(m, *a, xs, grid, NoiseKind::uniform, o);
  for (std::size_t i = 0; i < c.records.size(); ++i) CHECK(c.records[i].rel_error == c1.records[i].rel_error);
}

TEST_CASE("records csv round-trips bit-exactly") {
  const auto dir = scratch("csv");
  std::vector<ErrorRecord> rs = {
      {"A1", "tv", NoiseKind::adversarial, 0.02, 3, 0, 0.1 / 3.0, 42.123456789012345, 77},
      {"A1", "net", NoiseKind::bernoulli, 0.06, 0, 9, 1e-300, kPsnrCap, 18446744073709551615ull}};
  const auto path = dir / "nested" / "records.csv";
  write_records_csv(path, rs);
  const std::string text = slurp(path);
  CHECK(text.rfind("scenario,method,noise_kind,rel_noise,signal_idx,draw_idx,rel_error,psnr,seed\n", 0) == 0);
  CHECK(text.find('\r') == std::string::npos);
  const auto back = read_records_csv(path);
  REQUIRE(back.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(back[i].method == rs[i].method);
    CHECK(back[i].kind == rs[i].kind);
    CHECK(back[i].rel_noise == rs[i].rel_noise);
    CHECK(back[i].rel_error == rs[i].rel_error);
    CHECK(back[i].psnr == rs[i].psnr);
    CHECK(back[i].seed == rs[i].seed);
    CHECK(back[i].draw_idx == rs[i].draw_idx);
  }
  rs[0].method = "a,b";
  CHECK_THROWS_AS(write_records_csv(dir / "bad.csv", rs), ConfigError);
  std::ofstream(dir / "broken.csv", std::ios::binary)
      << "scenario,method,noise_kind,rel_noise,signal_idx,draw_idx,rel_error,psnr,seed\nA1,tv,gaussian,x\n";
  CHECK_THROWS_AS(read_records_csv(dir / "broken.csv"), FormatError);
  CHECK_THROWS_AS(write_table_csv(dir / "t.csv", {"a", "b"}, {{"1"}}), ContractViolation);
}

TEST_CASE("gnuplot script carries inline data") {
  std::vector<CurvePoint> pts = line_points({0.0, 0.1}, 1.0, 0.0);
  pts[0].method = pts[1].method = "tv";
  pts[0].kind = pts[1].kind = NoiseKind::gaussian;
  const std::string g = gnuplot_script("demo", pts);
  CHECK(g.find("$d0 << EOD\n0 0 0\n0.10000000000000001 0.10000000000000001 0\nEOD\n") != std::string::npos);
  CHECK(g.find("title 'tv gaussian'") != std::string::npos);
}

TEST_CASE("config parses, dumps and round-trips") {
  const ExperimentConfig c = parse_experiment_config(kTinyConfig);
  CHECK(c.scenario.signal.n == 32);
  CHECK(c.methods.size() == 2);
  CHECK(c.methods[1].type == MethodType::postproc);
  CHECK(c.methods[1].net.enhancer.levels == 2);
  CHECK(c.attack.steps == 12);
  CHECK(c.draws == 3);
  CHECK(c.admm.rho == 1.0);
  const std::string d = dump_experiment_config(c);
  CHECK(dump_experiment_config(parse_experiment_config(d)) == d);
  const ExperimentConfig minimal = parse_experiment_config(R"({"version":1,"methods":[{"name":"tv"}]})");
  CHECK(minimal.eta_grid == std::vector<double>{0.005, 0.02, 0.06});
  CHECK(minimal.scenario.m == 100);
}

TEST_CASE("config errors name the field") {
  check_config_error("{", "not valid JSON");
  check_config_error(R"({"methods":[{"name":"tv"}]})", "version: required");
  check_config_error(R"({"version":2,"methods":[{"name":"tv"}]})", "version: unsupported");
  check_config_error(R"({"version":1,"methods":[{"name":"tv","trian":{}}]})", "methods[0].trian: unknown key");
  check_config_error(
      R"({"version":1,"methods":[{"name":"tv"},{"name":"n","type":"iterative","train":{"epochs":1.5}}]})",
      "methods[1].train.epochs: expected an integer");
  check_config_error(R"({"version":1,"methods":[{"name":"tv"},{"name":"tv"}]})", "duplicate");
  check_config_error(R"({"version":1,"methods":[]})", "methods: at least one");
  check_config_error(R"({"version":1,"methods":[{"name":"tv"}],"noise_kinds":["pink"]})", "noise_kinds[0]");
  check_config_error(R"({"version":1,"methods":[{"name":"tv"}],"eta_grid":[0.1,-1]})", "eta_grid[1]");
  check_config_error(R"({"version":1,"methods":[{"name":"tv","type":"cnn"}]})", "methods[0].type");
  check_config_error(R"({"version":1,"methods":[{"name":"tv"}],"scenario":{"m":300}})", "scenario.m");
  check_config_error(R"({"version":1,"methods":[{"name":"tv"}],"ablation":{"jittered":"a","plain":"b"}})",
                     "ablation.jittered: unknown method");
  check_config_error(
      R"({"version":1,"methods":[{"name":"a","type":"iterative","seed":1},{"name":"b","type":"iterative"}],
          "ablation":{"jittered":"a","plain":"b"}})",
      "differ only in jitter_rel");
  check_config_error(R"({"version":1,"methods":[{"name":"tv"}],"classify":{"reconstruction":"net"}})",
                     "classify.reconstruction: unknown method");
  check_config_error(R"({"version":1,"methods":[{"name":"tv"}],"threads":0})", "threads");
  check_config_error(R"({"version":1,"methods":[{"name":"tv"}],"attack":{"lr":"big"}})", "attack.lr");
}

TEST_CASE("run_experiment writes outputs and rejects bad configs up front") {
  const auto dir = scratch("run");
  ExperimentConfig c = tiny(dir / "a" / "b", 2);
  const ExperimentReport r = run_experiment(c);
  for (const char* f : {"records.csv", "points.csv", "audits.csv", "fits.csv", "curves.gp", "transfer.csv",
                        "config.json", "nets/pp.advr"})
    CHECK_MESSAGE(std::filesystem::exists(c.output / f), f);
  REQUIRE(r.curves.size() == 4);
  for (const auto& curve : r.curves)
    for (const auto& a : curve.audits) {
      CHECK(a.feasible());
      CHECK(a.dominant());
    }
  CHECK(r.transfer.size() == 2 * 3 * 3);
  const auto recs = read_records_csv(c.output / "records.csv");
  CHECK(recs.size() == 2 * (3 * 3 + 3 * 3 * 3));

  c.methods[1].name = "tv";
  CHECK_THROWS_AS(run_experiment(c), ConfigError);
  c = tiny(dir / "never", 1);
  c.classify.enabled = true;
  c.classify.reconstruction = "missing";
  CHECK_THROWS_AS(run_experiment(c), ConfigError);
  CHECK_FALSE(std::filesystem::exists(dir / "never"));
}

TEST_CASE("outputs do not depend on threads or method order") {
  const auto dir = scratch("det");
  const ExperimentConfig c1 = tiny(dir / "t1", 1);
  ExperimentConfig c3 = tiny(dir / "t3", 3);
  run_experiment(c1);
  run_experiment(c3);
  for (const char* f : {"records.csv", "points.csv", "audits.csv", "fits.csv", "transfer.csv"})
    CHECK_MESSAGE(slurp(c1.output / f) == slurp(c3.output / f), f);

  ExperimentConfig swapped = tiny(dir / "sw", 2);
  std::swap(swapped.methods[0], swapped.methods[1]);
  run_experiment(swapped);
  auto by_method = [](const std::vector<ErrorRecord>& rs, const std::string& m) {
    std::vector<double> out;
    for (const auto& r : rs)
      if (r.method == m) out.push_back(r.rel_error);
    return out;
  };
  const auto a = read_records_csv(c1.output / "records.csv");
  const auto b = read_records_csv(swapped.output / "records.csv");
  for (const char* m : {"tv", "pp"}) CHECK(by_method(a, m) == by_method(b, m));
}

TEST_CASE("ablation control with identical nets and the classify pipeline") {
  const auto dir = scratch("ab");
  ExperimentConfig c = tiny(dir, 2);
  c.methods[1].type = MethodType::iterative;
  c.methods[1].net.kind = nets::NetKind::iterative;
  c.methods[1].net.iterations = 2;
  c.methods[1].jitter_rel = 0.02;
  MethodConfig twin = c.methods[1];
  twin.name = "pp2";
  c.methods.push_back(twin);
  c.ablation = AblationConfig{"pp", "pp2", {0.02, 0.1}};
  c.noise_kinds = {NoiseKind::gaussian};
  c.classify.enabled = true;
  c.classify.reconstruction = "pp";
  c.classify.train_count = 40;
  c.classify.test_count = 4;
  c.classify.train.epochs = 2;
  c.classify.eta_grid = {0.5, 0.1};
  c.validate();
  const ExperimentReport r = run_experiment(c);
  REQUIRE(r.ablation.has_value());
  REQUIRE(r.ablation->ratio.size() == 2);
  for (double q : r.ablation->ratio) {
    CHECK(q > 0.8);
    CHECK(q < 1.25);
  }
  CHECK(r.ablation->signal_ratio_at_max.size() == 3);
  CHECK(std::filesystem::exists(dir / "ablation_ratio.csv"));

  REQUIRE(r.classify.has_value());
  CHECK(r.classify->levels == std::vector<double>{0.0, 0.1, 0.5});
  REQUIRE(r.classify->accuracy.size() == 3);
  for (std::size_t l = 1; l < 3; ++l) CHECK(r.classify->accuracy[l] <= r.classify->accuracy[l - 1]);
  CHECK(r.classify->records.size() == 3 * 4);
  CHECK(std::filesystem::exists(dir / "classify_summary.csv"));
}

}  // TEST_SUITE
