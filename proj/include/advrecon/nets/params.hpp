#pragma once

#include <string>
#include <utility>
#include <vector>

#include "advrecon/core/tape.hpp"
#include "advrecon/core/tensor.hpp"

namespace advrecon::nets {

/// Ordered set of named parameter tensors.
class ParamSet {
 public:
  void add(std::string name, Tensor value);
  bool contains(const std::string& name) const;
  Tensor& at(const std::string& name);
  const Tensor& at(const std::string& name) const;

  std::size_t count() const noexcept { return entries_.size(); }
  std::size_t total_size() const;
  double squared_norm() const;

  std::vector<std::pair<std::string, Tensor>>& entries() noexcept { return entries_; }
  const std::vector<std::pair<std::string, Tensor>>& entries() const noexcept { return entries_; }

  friend bool operator==(const ParamSet&, const ParamSet&) = default;

 private:
  std::size_t index_of(const std::string& name) const;
  std::vector<std::pair<std::string, Tensor>> entries_;
};

/// Parameters recorded on one tape, in ParamSet order.
class Bound {
 public:
  Bound(Tape& tape, const ParamSet& params, bool requires_grad);

  Var operator()(const std::string& name) const;
  const std::vector<Var>& vars() const noexcept { return vars_; }

  // Gradients of every parameter in ParamSet order.
  std::vector<Tensor> gradients(const Gradients& g) const;

 private:
  const ParamSet* params_;
  std::vector<Var> vars_;
};

}  // namespace advrecon::nets
