#include "advrecon/signals/piecewise.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "advrecon/core/error.hpp"

namespace advrecon::signals {

void PiecewiseConstantSpec::validate() const {
  if (n < 2) throw ConfigError("piecewise spec: n must be at least 2");
  if (jumps_min < 0 || jumps_min > jumps_max)
    throw ConfigError("piecewise spec: need 0 <= jumps_min <= jumps_max");
  if (jumps_min == 1 && jumps_max == 1)
    throw ConfigError("piecewise spec: a single jump cannot return to the zero boundary");
  if (jumps_max > 0) {
    if (!(amp_min > 0.0) || amp_min > amp_max)
      throw ConfigError("piecewise spec: need 0 < amp_min <= amp_max");
    if (min_gap < 1) throw ConfigError("piecewise spec: min_gap must be at least 1");
    if ((static_cast<std::size_t>(jumps_max) + 1) * min_gap > n)
      throw ConfigError("piecewise spec: (jumps_max + 1) * min_gap exceeds n");
  }
}

namespace {

// Jump values d_1..d_k with |d_j| in [lo, hi] that sum to zero, so the last
// segment returns to 0. Rejection on the final, determined jump.
std::vector<double> sample_jumps(int k, double lo, double hi, Rng& rng) {
  std::uniform_real_distribution<double> mag(lo, hi);
  std::bernoulli_distribution sign(0.5);
  std::vector<double> d(static_cast<std::size_t>(k));
  for (int attempt = 0; attempt < 100000; ++attempt) {
    double level = 0.0;
    for (int j = 0; j + 1 < k; ++j) {
      d[j] = sign(rng) ? mag(rng) : -mag(rng);
      level += d[j];
    }
    const double last = -level;
    if (std::abs(last) >= lo && std::abs(last) <= hi) {
      d[k - 1] = last;
      return d;
    }
  }
  throw ConfigError("piecewise spec: could not draw jump amplitudes returning to zero");
}

}  // namespace

Tensor sample_piecewise_constant(const PiecewiseConstantSpec& spec, Rng& rng) {
  spec.validate();
  std::vector<int> choices;
  for (int k = spec.jumps_min; k <= spec.jumps_max; ++k)
    if (k != 1) choices.push_back(k);
  const int k = choices[std::uniform_int_distribution<std::size_t>(0, choices.size() - 1)(rng)];

  Tensor x = Tensor::zeros(spec.n);
  if (k == 0) return x;

  // Segment lengths min_gap + s_j with the slack split by k sorted cut points.
  const std::size_t segments = static_cast<std::size_t>(k) + 1;
  const std::size_t slack = spec.n - segments * spec.min_gap;
  std::uniform_int_distribution<std::size_t> cut(0, slack);
  std::vector<std::size_t> cuts(static_cast<std::size_t>(k));
  for (auto& c : cuts) c = cut(rng);
  std::sort(cuts.begin(), cuts.end());

  const std::vector<double> jumps = sample_jumps(k, spec.amp_min, spec.amp_max, rng);
  std::size_t pos = 0;
  std::size_t prev_cut = 0;
  double level = 0.0;
  for (std::size_t s = 0; s < segments; ++s) {
    const std::size_t extra = (s < cuts.size() ? cuts[s] : slack) - prev_cut;
    if (s < cuts.size()) prev_cut = cuts[s];
    const std::size_t len = spec.min_gap + extra;
    for (std::size_t i = 0; i < len; ++i) x[pos + i] = level;
    pos += len;
    if (s < jumps.size()) level += jumps[s];
  }
  return x;
}

int count_jumps(const Tensor& x) {
  int count = 0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i)
    if (x[i + 1] != x[i]) ++count;
  return count;
}

}  // namespace advrecon::signals
