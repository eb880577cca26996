#include "advrecon/nets/params.hpp"

#include "advrecon/core/error.hpp"

namespace advrecon::nets {

std::size_t ParamSet::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < entries_.size(); ++i)
    if (entries_[i].first == name) return i;
  throw ContractViolation("unknown parameter '" + name + "'");
}

void ParamSet::add(std::string name, Tensor value) {
  expects(!contains(name), "duplicate parameter '" + name + "'");
  entries_.emplace_back(std::move(name), std::move(value));
}

bool ParamSet::contains(const std::string& name) const {
  for (const auto& e : entries_)
    if (e.first == name) return true;
  return false;
}

Tensor& ParamSet::at(const std::string& name) { return entries_[index_of(name)].second; }
const Tensor& ParamSet::at(const std::string& name) const {
  return entries_[index_of(name)].second;
}

std::size_t ParamSet::total_size() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.second.size();
  return n;
}

double ParamSet::squared_norm() const {
  double s = 0.0;
  for (const auto& e : entries_) s += advrecon::squared_norm(e.second);
  return s;
}

Bound::Bound(Tape& tape, const ParamSet& params, bool requires_grad) : params_(&params) {
  vars_.reserve(params.count());
  for (const auto& e : params.entries())
    vars_.push_back(requires_grad ? tape.leaf(e.second) : tape.constant(e.second));
}

Var Bound::operator()(const std::string& name) const {
  const auto& es = params_->entries();
  for (std::size_t i = 0; i < es.size(); ++i)
    if (es[i].first == name) return vars_[i];
  throw ContractViolation("unknown parameter '" + name + "'");
}

std::vector<Tensor> Bound::gradients(const Gradients& g) const {
  std::vector<Tensor> out;
  out.reserve(vars_.size());
  for (Var v : vars_) out.push_back(g.of(v));
  return out;
}

}  // namespace advrecon::nets
