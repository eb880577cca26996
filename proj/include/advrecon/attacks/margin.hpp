#pragma once

#include <vector>

#include "advrecon/attacks/attack.hpp"
#include "advrecon/nets/classifier.hpp"

namespace advrecon::attacks {

// max_{k != c} z_k - z_c. Positive means class c is not predicted.
double logit_margin(const Tensor& logits, int true_class);

struct MarginResult {
  AttackResult attack;  // achieved_error holds the best margin
  int predicted = 0;    // class predicted at ybar + e_adv
  bool flipped = false;
};

/// Projected ascent on the logit margin of clf(rec(A xbar + e)). On the tape
/// the max over k != c uses the currently largest competitor.
MarginResult margin_attack(const ReconstructionMap& rec, const nets::Classifier& clf,
                           const LinearOperator& a, const Tensor& xbar, int true_class,
                           const AttackConfig& cfg, const std::vector<Tensor>& extra_inits = {});

}  // namespace advrecon::attacks
