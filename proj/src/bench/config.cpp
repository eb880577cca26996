#include "advrecon/bench/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>

#include "advrecon/core/error.hpp"
#include "json.hpp"

namespace advrecon::bench {

using nlohmann::json;

std::string_view method_type_name(MethodType t) noexcept {
  switch (t) {
    case MethodType::tv: return "tv";
    case MethodType::postproc: return "postproc";
    case MethodType::fully_learned: return "fully_learned";
    case MethodType::iterative: return "iterative";
  }
  return "unknown";
}

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError("config: " + path + ": " + what);
}

MethodType parse_method_type(const std::string& s, const std::string& path) {
  if (s == "tv") return MethodType::tv;
  if (s == "postproc") return MethodType::postproc;
  if (s == "fully_learned") return MethodType::fully_learned;
  if (s == "iterative") return MethodType::iterative;
  fail(path, "unknown method type '" + s + "'");
}

static_assert(std::is_same_v<std::size_t, std::uint64_t>, "64-bit size_t expected");

// Reads optional members of one JSON object and rejects the ones never asked for.
class Obj {
 public:
  Obj(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_, "expected an object");
  }

  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json* find(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void get(const std::string& key, double& out) {
    if (const json* v = find(key)) {
      if (!v->is_number()) fail(at(key), "expected a number");
      out = v->get<double>();
    }
  }
  void get(const std::string& key, int& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_integer()) fail(at(key), "expected an integer");
      const auto x = v->get<std::int64_t>();
      if (x < INT32_MIN || x > INT32_MAX) fail(at(key), "integer out of range");
      out = static_cast<int>(x);
    }
  }
  void get(const std::string& key, std::uint64_t& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_unsigned()) fail(at(key), "expected a nonnegative integer");
      out = v->get<std::uint64_t>();
    }
  }
  void get(const std::string& key, bool& out) {
    if (const json* v = find(key)) {
      if (!v->is_boolean()) fail(at(key), "expected true or false");
      out = v->get<bool>();
    }
  }
  void get(const std::string& key, std::string& out) {
    if (const json* v = find(key)) {
      if (!v->is_string()) fail(at(key), "expected a string");
      out = v->get<std::string>();
    }
  }
  void get(const std::string& key, std::vector<double>& out) {
    if (const json* v = find(key)) {
      if (!v->is_array()) fail(at(key), "expected an array of numbers");
      out.clear();
      for (std::size_t i = 0; i < v->size(); ++i) {
        if (!(*v)[i].is_number()) fail(at(key) + "[" + std::to_string(i) + "]", "expected a number");
        out.push_back((*v)[i].get<double>());
      }
    }
  }
  void get(const std::string& key, std::vector<std::size_t>& out) {
    if (const json* v = find(key)) {
      if (!v->is_array()) fail(at(key), "expected an array of integers");
      out.clear();
      for (std::size_t i = 0; i < v->size(); ++i) {
        if (!(*v)[i].is_number_unsigned())
          fail(at(key) + "[" + std::to_string(i) + "]", "expected a nonnegative integer");
        out.push_back((*v)[i].get<std::size_t>());
      }
    }
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) fail(at(it.key()), "unknown key");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_scenario(Obj o, ScenarioConfig& s) {
  o.get("name", s.name);
  o.get("source", s.source);
  o.get("m", s.m);
  o.get("n", s.signal.n);
  o.get("operator_seed", s.operator_seed);
  o.get("jumps_min", s.signal.jumps_min);
  o.get("jumps_max", s.signal.jumps_max);
  o.get("amp_min", s.signal.amp_min);
  o.get("amp_max", s.signal.amp_max);
  o.get("min_gap", s.signal.min_gap);
  o.get("idx_images", s.idx_images);
  o.get("train_count", s.train_count);
  o.get("test_count", s.test_count);
  o.get("data_seed", s.data_seed);
  o.finish();
}

void read_admm(Obj o, tv::AdmmConfig& a) {
  o.get("rho", a.rho);
  o.get("max_iters", a.max_iters);
  o.get("tol_primal", a.tol_primal);
  o.get("tol_dual", a.tol_dual);
  o.get("unroll_iters", a.unroll_iters);
  o.get("relaxation", a.relaxation);
  o.finish();
}

void read_attack(Obj o, attacks::AttackConfig& a) {
  o.get("steps", a.steps);
  o.get("restarts", a.restarts);
  o.get("include_zero_init", a.include_zero_init);
  o.get("refresh_every", a.refresh_every);
  if (const json* v = o.find("lr")) {
    if (!v->is_number()) fail(o.at("lr"), "expected a number");
    a.lr = v->get<double>();
  }
  o.finish();
}

void read_method(Obj o, MethodConfig& m) {
  o.get("name", m.name);
  std::string type = "tv";
  o.get("type", type);
  m.type = parse_method_type(type, o.at("type"));
  if (m.type != MethodType::tv)
    m.net.kind = nets::parse_net_kind(method_type_name(m.type));
  o.get("channels", m.net.enhancer.channels);
  m.net.enhancer.levels = static_cast<int>(m.net.enhancer.channels.size());
  o.get("iterations", m.net.iterations);
  o.get("lambda_init", m.net.lambda_init);
  o.get("share_enhancer", m.net.share_enhancer);
  o.get("seed", m.net.seed);
  o.get("tikhonov_alpha", m.tikhonov_alpha);
  o.get("jitter_rel", m.jitter_rel);
  o.get("weights", m.weights);
  if (const json* t = o.find("train")) {
    Obj to(*t, o.at("train"));
    to.get("epochs", m.train.epochs);
    to.get("batch_size", m.train.batch_size);
    to.get("lr", m.train.lr);
    to.get("weight_decay", m.train.weight_decay);
    to.get("seed", m.train.seed);
    to.finish();
  }
  o.finish();
}

void read_classify(Obj o, ClassifyConfig& c, const attacks::AttackConfig& base) {
  o.get("enabled", c.enabled);
  o.get("reconstruction", c.reconstruction);
  o.get("train_count", c.train_count);
  o.get("test_count", c.test_count);
  o.get("channels", c.classifier.channels);
  o.get("hidden", c.classifier.hidden);
  o.get("seed", c.classifier.seed);
  o.get("epochs", c.train.epochs);
  o.get("batch_size", c.train.batch_size);
  o.get("lr", c.train.lr);
  o.get("weight_decay", c.train.weight_decay);
  o.get("eta_grid", c.eta_grid);
  if (const json* v = o.find("attack")) {
    c.attack = base;
    read_attack(Obj(*v, o.at("attack")), *c.attack);
  }
  o.finish();
}

// Runs a component validator and prefixes its message with the field path.
template <class F>
void check(const std::string& path, F&& f) {
  try {
    f();
  } catch (const ConfigError& e) {
    fail(path, e.what());
  } catch (const ContractViolation& e) {
    fail(path, e.what());
  }
}

bool plain_name(const std::string& s) {
  if (s.empty()) return false;
  for (char ch : s)
    if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '_' || ch == '.'))
      return false;
  return true;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (version != kConfigVersion) fail("version", "unsupported version " + std::to_string(version));
  if (!plain_name(scenario.name)) fail("scenario.name", "use letters, digits, '-', '_' or '.'");
  if (scenario.source == "piecewise") {
    check("scenario", [&] { scenario.signal.validate(); });
    if (scenario.m == 0 || scenario.m >= scenario.signal.n)
      fail("scenario.m", "need 0 < m < n");
  } else if (scenario.source == "idx") {
    if (scenario.idx_images.empty()) fail("scenario.idx_images", "required for source 'idx'");
    if (scenario.m == 0) fail("scenario.m", "must be positive");
  } else {
    fail("scenario.source", "expected 'piecewise' or 'idx'");
  }
  if (scenario.test_count == 0) fail("scenario.test_count", "must be positive");
  check("admm", [&] { admm.validate(); });
  if (methods.empty()) fail("methods", "at least one method is required");
  std::set<std::string> names;
  for (std::size_t i = 0; i < methods.size(); ++i) {
    const auto& m = methods[i];
    const std::string p = "methods[" + std::to_string(i) + "]";
    if (!plain_name(m.name)) fail(p + ".name", "use letters, digits, '-', '_' or '.'");
    if (!names.insert(m.name).second) fail(p + ".name", "duplicate method name '" + m.name + "'");
    if (m.type == MethodType::tv) continue;
    check(p, [&] { m.net.validate(); });
    check(p + ".train", [&] { m.train.validate(); });
    if (!(m.tikhonov_alpha > 0.0)) fail(p + ".tikhonov_alpha", "must be positive");
    if (!(m.jitter_rel >= 0.0)) fail(p + ".jitter_rel", "must be nonnegative");
    if (m.weights.empty() && scenario.train_count == 0)
      fail("scenario.train_count", "learned method '" + m.name + "' needs training signals");
  }
  if (eta_grid.empty()) fail("eta_grid", "must not be empty");
  for (std::size_t i = 0; i < eta_grid.size(); ++i)
    if (!(eta_grid[i] >= 0.0) || !std::isfinite(eta_grid[i]))
      fail("eta_grid[" + std::to_string(i) + "]", "must be finite and nonnegative");
  if (noise_kinds.empty()) fail("noise_kinds", "must not be empty");
  if (draws == 0) fail("draws", "must be positive");
  if (!(bernoulli_p > 0.0 && bernoulli_p < 1.0)) fail("bernoulli_p", "need 0 < p < 1");
  check("attack", [&] { attack.validate(); });
  if (ablation) {
    for (const auto& [key, name] : {std::pair{"jittered", ablation->jittered}, std::pair{"plain", ablation->plain}}) {
      if (!names.count(name)) fail(std::string("ablation.") + key, "unknown method '" + name + "'");
      if (method(name).type == MethodType::tv)
        fail(std::string("ablation.") + key, "must be a learned method");
    }
    const MethodConfig& j = method(ablation->jittered);
    const MethodConfig& p = method(ablation->plain);
    const bool same = j.type == p.type && j.net.enhancer.channels == p.net.enhancer.channels &&
                      j.net.iterations == p.net.iterations && j.net.lambda_init == p.net.lambda_init &&
                      j.net.share_enhancer == p.net.share_enhancer && j.net.seed == p.net.seed &&
                      j.train.epochs == p.train.epochs && j.train.batch_size == p.train.batch_size &&
                      j.train.lr == p.train.lr && j.train.weight_decay == p.train.weight_decay &&
                      j.train.seed == p.train.seed && j.tikhonov_alpha == p.tikhonov_alpha;
    if (!same) fail("ablation", "methods must differ only in jitter_rel");
    for (double e : ablation->eta_grid)
      if (!(e >= 0.0) || !std::isfinite(e)) fail("ablation.eta_grid", "levels must be finite and nonnegative");
  }
  if (classify.enabled) {
    if (scenario.source != "piecewise") fail("classify", "needs the piecewise scenario (jump-parity labels)");
    if (!names.count(classify.reconstruction))
      fail("classify.reconstruction", "unknown method '" + classify.reconstruction + "'");
    if (classify.train_count == 0) fail("classify.train_count", "must be positive");
    if (classify.test_count == 0) fail("classify.test_count", "must be positive");
    if (classify.eta_grid.empty()) fail("classify.eta_grid", "must not be empty");
    for (double e : classify.eta_grid)
      if (!(e >= 0.0) || !std::isfinite(e)) fail("classify.eta_grid", "levels must be finite and nonnegative");
    check("classify", [&] { classify.classifier.validate(); });
    check("classify", [&] { classify.train.validate(); });
    if (classify.attack) check("classify.attack", [&] { classify.attack->validate(); });
  }
  if (threads < 1) fail("threads", "must be at least 1");
  if (output.empty()) fail("output", "must not be empty");
}

const MethodConfig& ExperimentConfig::method(const std::string& name) const {
  for (const auto& m : methods)
    if (m.name == name) return m;
  throw ConfigError("config: no method named '" + name + "'");
}

ExperimentConfig parse_experiment_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: not valid JSON: ") + e.what());
  }
  ExperimentConfig cfg;
  Obj o(root, "");
  if (!o.find("version")) fail("version", "required");
  o.get("version", cfg.version);
  if (cfg.version != kConfigVersion) fail("version", "unsupported version " + std::to_string(cfg.version));
  if (const json* v = o.find("scenario")) read_scenario(Obj(*v, "scenario"), cfg.scenario);
  if (const json* v = o.find("admm")) read_admm(Obj(*v, "admm"), cfg.admm);
  if (const json* v = o.find("methods")) {
    if (!v->is_array()) fail("methods", "expected an array");
    for (std::size_t i = 0; i < v->size(); ++i) {
      MethodConfig m;
      read_method(Obj((*v)[i], "methods[" + std::to_string(i) + "]"), m);
      cfg.methods.push_back(std::move(m));
    }
  }
  o.get("eta_grid", cfg.eta_grid);
  if (const json* v = o.find("noise_kinds")) {
    if (!v->is_array()) fail("noise_kinds", "expected an array of names");
    cfg.noise_kinds.clear();
    for (std::size_t i = 0; i < v->size(); ++i) {
      const std::string p = "noise_kinds[" + std::to_string(i) + "]";
      if (!(*v)[i].is_string()) fail(p, "expected a string");
      check(p, [&] { cfg.noise_kinds.push_back(parse_noise_kind((*v)[i].get<std::string>())); });
    }
  }
  o.get("draws", cfg.draws);
  o.get("bernoulli_p", cfg.bernoulli_p);
  if (const json* v = o.find("attack")) read_attack(Obj(*v, "attack"), cfg.attack);
  if (const json* v = o.find("ablation")) {
    Obj a(*v, "ablation");
    AblationConfig ab;
    a.get("jittered", ab.jittered);
    a.get("plain", ab.plain);
    a.get("eta_grid", ab.eta_grid);
    a.finish();
    if (ab.jittered.empty()) fail("ablation.jittered", "required");
    if (ab.plain.empty()) fail("ablation.plain", "required");
    cfg.ablation = std::move(ab);
  }
  if (const json* v = o.find("classify")) {
    read_classify(Obj(*v, "classify"), cfg.classify, cfg.attack);
    cfg.classify.enabled = cfg.classify.enabled || !v->contains("enabled");
  }
  o.get("seed", cfg.seed);
  o.get("threads", cfg.threads);
  std::string out = cfg.output.string();
  o.get("output", out);
  cfg.output = out;
  o.finish();
  cfg.validate();
  return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_experiment_config(text.str());
}

std::string dump_experiment_config(const ExperimentConfig& c) {
  const auto& s = c.scenario;
  json j;
  j["version"] = c.version;
  j["scenario"] = {{"name", s.name},
                   {"source", s.source},
                   {"m", s.m},
                   {"n", s.signal.n},
                   {"operator_seed", s.operator_seed},
                   {"jumps_min", s.signal.jumps_min},
                   {"jumps_max", s.signal.jumps_max},
                   {"amp_min", s.signal.amp_min},
                   {"amp_max", s.signal.amp_max},
                   {"min_gap", s.signal.min_gap},
                   {"idx_images", s.idx_images},
                   {"train_count", s.train_count},
                   {"test_count", s.test_count},
                   {"data_seed", s.data_seed}};
  j["admm"] = {{"rho", c.admm.rho},
               {"max_iters", c.admm.max_iters},
               {"tol_primal", c.admm.tol_primal},
               {"tol_dual", c.admm.tol_dual},
               {"unroll_iters", c.admm.unroll_iters},
               {"relaxation", c.admm.relaxation}};
  j["methods"] = json::array();
  for (const auto& m : c.methods) {
    json mj = {{"name", m.name}, {"type", method_type_name(m.type)}};
    if (m.type != MethodType::tv) {
      mj["channels"] = m.net.enhancer.channels;
      mj["iterations"] = m.net.iterations;
      mj["lambda_init"] = m.net.lambda_init;
      mj["share_enhancer"] = m.net.share_enhancer;
      mj["seed"] = m.net.seed;
      mj["tikhonov_alpha"] = m.tikhonov_alpha;
      mj["jitter_rel"] = m.jitter_rel;
      mj["weights"] = m.weights;
      mj["train"] = {{"epochs", m.train.epochs},
                     {"batch_size", m.train.batch_size},
                     {"lr", m.train.lr},
                     {"weight_decay", m.train.weight_decay},
                     {"seed", m.train.seed}};
    }
    j["methods"].push_back(std::move(mj));
  }
  j["eta_grid"] = c.eta_grid;
  j["noise_kinds"] = json::array();
  for (auto k : c.noise_kinds) j["noise_kinds"].push_back(std::string(noise_kind_name(k)));
  j["draws"] = c.draws;
  j["bernoulli_p"] = c.bernoulli_p;
  j["attack"] = {{"steps", c.attack.steps},
                 {"restarts", c.attack.restarts},
                 {"include_zero_init", c.attack.include_zero_init},
                 {"refresh_every", c.attack.refresh_every}};
  if (c.attack.lr) j["attack"]["lr"] = *c.attack.lr;
  if (c.ablation)
    j["ablation"] = {{"jittered", c.ablation->jittered},
                     {"plain", c.ablation->plain},
                     {"eta_grid", c.ablation->eta_grid}};
  if (c.classify.enabled) {
    const auto& k = c.classify;
    j["classify"] = {{"enabled", true},
                     {"reconstruction", k.reconstruction},
                     {"train_count", k.train_count},
                     {"test_count", k.test_count},
                     {"channels", k.classifier.channels},
                     {"hidden", k.classifier.hidden},
                     {"seed", k.classifier.seed},
                     {"epochs", k.train.epochs},
                     {"batch_size", k.train.batch_size},
                     {"lr", k.train.lr},
                     {"weight_decay", k.train.weight_decay},
                     {"eta_grid", k.eta_grid}};
    if (k.attack) {
      j["classify"]["attack"] = {{"steps", k.attack->steps},
                                 {"restarts", k.attack->restarts},
                                 {"include_zero_init", k.attack->include_zero_init},
                                 {"refresh_every", k.attack->refresh_every}};
      if (k.attack->lr) j["classify"]["attack"]["lr"] = *k.attack->lr;
    }
  }
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  j["output"] = c.output.string();
  return j.dump(2);
}

}  // namespace advrecon::bench
