#include "advrecon/attacks/margin.hpp"

#include <algorithm>
#include <limits>

#include "advrecon/core/error.hpp"

namespace advrecon::attacks {

namespace {

std::size_t best_competitor(const Tensor& z, std::size_t c) {
  std::size_t best = c == 0 ? 1 : 0;
  for (std::size_t k = 0; k < z.size(); ++k)
    if (k != c && z[k] > z[best]) best = k;
  return best;
}

}  // namespace

double logit_margin(const Tensor& logits, int true_class) {
  expects(logits.size() >= 2, "logit_margin: need at least two classes");
  expects(true_class >= 0 && static_cast<std::size_t>(true_class) < logits.size(),
          "logit_margin: class index out of range");
  const auto c = static_cast<std::size_t>(true_class);
  return logits[best_competitor(logits, c)] - logits[c];
}

MarginResult margin_attack(const ReconstructionMap& rec, const nets::Classifier& clf,
                           const LinearOperator& a, const Tensor& xbar, int true_class,
                           const AttackConfig& cfg, const std::vector<Tensor>& extra_inits) {
  expects(a.cols() == xbar.size() && a.rows() == rec.input_dim() &&
              rec.output_dim() == clf.length(),
          "margin_attack: dimension mismatch");
  expects(true_class >= 0 && static_cast<std::size_t>(true_class) < clf.spec().classes,
          "margin_attack: class index out of range");
  const auto c = static_cast<std::size_t>(true_class);
  AttackObjective obj;
  obj.record = [&clf, c](Tape& t, Var xhat) {
    nets::Bound p(t, clf.params(), false);
    Var z = clf.logits(t, p, xhat);
    const std::size_t k = best_competitor(t.value(z), c);
    return t.sub(t.element(z, k), t.element(z, c));
  };
  obj.exact = [&clf, true_class](const Tensor& xhat) {
    return logit_margin(clf.logits(xhat), true_class);
  };
  obj.report = [](double v) { return v; };

  MarginResult out;
  out.attack = maximize(rec, a.apply(xbar), obj, cfg, extra_inits);
  out.predicted = clf.predict(rec.reconstruct(a.apply(xbar) + out.attack.e_adv));
  out.flipped = out.predicted != true_class;
  return out;
}

}  // namespace advrecon::attacks
