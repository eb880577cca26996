#pragma once

#include <memory>
#include <string>

#include "advrecon/core/tape.hpp"
#include "advrecon/core/tensor.hpp"

namespace advrecon {

/// Stateful differentiable handle on a reconstruction map, owned by one
/// optimization loop (one attack restart).
class DifferentiableView {
 public:
  virtual ~DifferentiableView() = default;

  // Re-linearize around measurements y. Maps whose recorded graph depends on
  // solver state (warm-started unrolling) refresh it here; others ignore it.
  virtual void anchor(const Tensor& /*y*/) {}

  // Converged reconstruction computed by the last anchor(), if the map
  // produces one as a by-product; nullptr otherwise.
  virtual const Tensor* anchored_output() const { return nullptr; }

  // Record Rec(y) on the tape; the result must be differentiable w.r.t. y.
  virtual Var record(Tape& tape, Var y) = 0;
};

/// Rec: R^m -> R^N.
class ReconstructionMap {
 public:
  virtual ~ReconstructionMap() = default;

  virtual std::string name() const = 0;
  virtual std::size_t input_dim() const = 0;
  virtual std::size_t output_dim() const = 0;

  // Reference evaluation (for TV: a fully converged solve). Thread-safe.
  virtual Tensor reconstruct(const Tensor& y) const = 0;

  virtual std::unique_ptr<DifferentiableView> view() const = 0;
};

}  // namespace advrecon
