#include "advrecon/nets/serialize.hpp"

#include "advrecon/core/error.hpp"
#include "json.hpp"

namespace advrecon::nets {

using nlohmann::json;

namespace {

constexpr int kVersion = 1;
const std::string kParam = "param/";

json parse_manifest(const Container& c, const char* format) {
  json j;
  try {
    j = json::parse(c.metadata);
  } catch (const json::exception& e) {
    throw FormatError(std::string("container manifest is not valid JSON: ") + e.what(), 0);
  }
  if (j.value("format", "") != format)
    throw FormatError(std::string("container is not a ") + format + " file", 0);
  if (j.value("version", 0) != kVersion)
    throw FormatError("unsupported " + std::string(format) + " version", 0);
  return j;
}

ParamSet params_from(const Container& c) {
  ParamSet ps;
  for (const auto& [name, value] : c.entries)
    if (name.rfind(kParam, 0) == 0) ps.add(name.substr(kParam.size()), value);
  return ps;
}

template <typename T>
T field(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw FormatError(std::string("manifest field '") + key + "' missing or mistyped", 0);
  }
}

}  // namespace

Container net_to_container(const ReconNet& net) {
  const NetSpec& s = net.spec();
  json j = {{"format", "advrecon-net"},
            {"version", kVersion},
            {"kind", std::string(net_kind_name(s.kind))},
            {"iterations", s.iterations},
            {"lambda_init", s.lambda_init},
            {"share_enhancer", s.share_enhancer},
            {"seed", s.seed},
            {"levels", s.enhancer.levels},
            {"channels", s.enhancer.channels},
            {"alpha", net.tikhonov().alpha},
            {"m", net.input_dim()},
            {"N", net.output_dim()}};
  Container c;
  c.metadata = j.dump();
  c.put("tikhonov", net.tikhonov().matrix->as_tensor());
  for (const auto& [name, value] : net.params().entries()) c.put(kParam + name, value);
  return c;
}

ReconNet net_from_container(const Container& c, std::shared_ptr<const operators::DenseMatrix> a) {
  const json j = parse_manifest(c, "advrecon-net");
  expects(a != nullptr, "net_from_container: null operator");
  if (field<std::size_t>(j, "m") != a->rows() || field<std::size_t>(j, "N") != a->cols())
    throw FormatError("network was trained for a different operator size", 0);
  NetSpec s;
  try {
    s.kind = parse_net_kind(field<std::string>(j, "kind"));
  } catch (const ConfigError& e) {
    throw FormatError(e.what(), 0);
  }
  s.iterations = field<int>(j, "iterations");
  s.lambda_init = field<double>(j, "lambda_init");
  s.share_enhancer = field<bool>(j, "share_enhancer");
  s.seed = field<std::uint64_t>(j, "seed");
  s.enhancer.levels = field<int>(j, "levels");
  s.enhancer.channels = field<std::vector<std::size_t>>(j, "channels");
  operators::TikhonovInverse t;
  t.alpha = field<double>(j, "alpha");
  t.matrix = std::make_shared<operators::DenseMatrix>(
      operators::DenseMatrix::from_tensor(c.get("tikhonov")));
  try {
    return ReconNet(s, std::move(a), std::move(t), params_from(c));
  } catch (const ContractViolation& e) {
    throw FormatError(std::string("network parameters do not match the manifest: ") + e.what(), 0);
  }
}

Container classifier_to_container(const Classifier& clf) {
  const auto& s = clf.spec();
  json j = {{"format", "advrecon-classifier"},
            {"version", kVersion},
            {"channels", s.channels},
            {"hidden", s.hidden},
            {"classes", s.classes},
            {"seed", s.seed},
            {"length", clf.length()}};
  Container c;
  c.metadata = j.dump();
  for (const auto& [name, value] : clf.params().entries()) c.put(kParam + name, value);
  return c;
}

Classifier classifier_from_container(const Container& c) {
  const json j = parse_manifest(c, "advrecon-classifier");
  ClassifierSpec s;
  s.channels = field<std::size_t>(j, "channels");
  s.hidden = field<std::size_t>(j, "hidden");
  s.classes = field<std::size_t>(j, "classes");
  s.seed = field<std::uint64_t>(j, "seed");
  try {
    return Classifier(s, field<std::size_t>(j, "length"), params_from(c));
  } catch (const ContractViolation& e) {
    throw FormatError(std::string("classifier parameters do not match the manifest: ") + e.what(),
                      0);
  }
}

}  // namespace advrecon::nets
