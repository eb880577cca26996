#include "advrecon/nets/unet.hpp"

#include <cmath>

#include "advrecon/core/error.hpp"
#include "advrecon/core/rng.hpp"

namespace advrecon::nets {

void ConvBlockSpec::validate() const {
  if (kernel != 3) throw ConfigError("enhancer: kernel must be 3");
  if (pool != 2) throw ConfigError("enhancer: pool must be 2");
  if (levels < 1) throw ConfigError("enhancer: levels must be at least 1");
  if (channels.size() != static_cast<std::size_t>(levels))
    throw ConfigError("enhancer: channels must have one entry per level");
  for (std::size_t c : channels)
    if (c == 0) throw ConfigError("enhancer: channel counts must be positive");
}

std::size_t ConvBlockSpec::length_multiple() const {
  return std::size_t{1} << static_cast<unsigned>(levels - 1);
}

namespace {

std::string name(const std::string& prefix, const std::string& block, int level, int j) {
  return prefix + block + std::to_string(level) + ".conv" + std::to_string(j);
}

void add_conv(ParamSet& ps, const std::string& base, std::size_t cin, std::size_t cout,
              std::uint64_t seed, bool zero) {
  Tensor w(Shape{cout, cin, 3});
  if (!zero) {
    Rng rng = make_rng(seed, {hash_name(base)});
    const double stddev = std::sqrt(2.0 / static_cast<double>(3 * cin));
    Tensor g = standard_normal(rng, w.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = stddev * g[i];
  }
  ps.add(base + ".w", std::move(w));
  ps.add(base + ".b", Tensor::zeros(cout));
}

Var conv(Tape& t, const Bound& p, const std::string& base, Var x) {
  return t.conv1d(x, p(base + ".w"), p(base + ".b"));
}

}  // namespace

void init_unet(ParamSet& ps, const std::string& prefix, const ConvBlockSpec& spec,
               std::uint64_t seed) {
  spec.validate();
  const auto& c = spec.channels;
  for (int l = 0; l < spec.levels; ++l) {
    const std::size_t cin = l == 0 ? 1 : c[l - 1];
    add_conv(ps, name(prefix, "enc", l, 0), cin, c[l], seed, false);
    add_conv(ps, name(prefix, "enc", l, 1), c[l], c[l], seed, false);
  }
  for (int l = spec.levels - 2; l >= 0; --l) {
    add_conv(ps, name(prefix, "dec", l, 0), c[l] + c[l + 1], c[l], seed, false);
    add_conv(ps, name(prefix, "dec", l, 1), c[l], c[l], seed, false);
  }
  add_conv(ps, prefix + "out", c[0], 1, seed, true);
}

Var unet_forward(Tape& t, const Bound& p, const std::string& prefix, const ConvBlockSpec& spec,
                 Var x) {
  const std::size_t n = t.value(x).size();
  expects(n % spec.length_multiple() == 0,
          "enhancer: signal length " + std::to_string(n) + " is not divisible by " +
              std::to_string(spec.length_multiple()));
  std::vector<Var> skips;
  Var h = x;
  for (int l = 0; l < spec.levels; ++l) {
    if (l > 0) h = t.max_pool2(h);
    h = t.relu(conv(t, p, name(prefix, "enc", l, 0), h));
    h = t.relu(conv(t, p, name(prefix, "enc", l, 1), h));
    skips.push_back(h);
  }
  for (int l = spec.levels - 2; l >= 0; --l) {
    h = t.concat(skips[static_cast<std::size_t>(l)], t.upsample2(h));
    h = t.relu(conv(t, p, name(prefix, "dec", l, 0), h));
    h = t.relu(conv(t, p, name(prefix, "dec", l, 1), h));
  }
  return t.add(x, conv(t, p, prefix + "out", h));
}

}  // namespace advrecon::nets
