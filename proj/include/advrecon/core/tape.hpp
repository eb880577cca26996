#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "advrecon/core/cholesky.hpp"
#include "advrecon/core/linear_map.hpp"
#include "advrecon/core/tensor.hpp"

namespace advrecon {

/// Handle to a node recorded on a Tape. Only meaningful for the tape that
/// produced it.
struct Var {
  std::uint32_t id = 0;
};

enum class OpKind : std::uint8_t {
  leaf,
  constant,
  add,
  sub,
  scale,
  mul_scalar,
  matvec,
  matvec_adjoint,
  matvec_param,
  conv1d,
  relu,
  soft_threshold,
  squared_norm,
  norm,
  solve,
  max_pool2,
  upsample2,
  concat,
  project_ball,
  sum,
  element,
  log_sum_exp,
  opaque,
};

std::string_view op_name(OpKind kind) noexcept;

class Tape;

/// Adjoints produced by Tape::backward, one per recorded node.
class Gradients {
 public:
  // Gradient of the differentiated output w.r.t. v (zeros if v does not
  // influence the output).
  Tensor of(Var v) const;

 private:
  friend class Tape;
  std::vector<Shape> shapes_;
  std::vector<std::vector<double>> adjoints_;
};

/// Reverse-mode differentiation over vector primitives.
///
/// Nodes are appended in evaluation order, so inputs always precede their
/// consumers; backward visits each node once in reverse. Every primitive
/// checks its output for non-finite values and reports the offending node.
/// A tape constructed with live = false computes values only and refuses
/// backward().
class Tape {
 public:
  explicit Tape(bool live = true) : live_(live) {}

  bool live() const noexcept { return live_; }
  std::size_t size() const noexcept { return nodes_.size(); }

  Var leaf(Tensor value, bool requires_grad = true);
  Var constant(Tensor value);

  const Tensor& value(Var v) const { return nodes_.at(v.id).value; }
  double scalar(Var v) const;
  OpKind kind(Var v) const { return nodes_.at(v.id).kind; }

  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var scale(Var a, double c);
  // s must hold a single entry.
  Var mul_scalar(Var s, Var v);
  Var matvec(std::shared_ptr<const LinearOperator> op, Var x);
  Var matvec_adjoint(std::shared_ptr<const LinearOperator> op, Var y);
  // w has shape [rows, cols]; x has cols entries.
  Var matvec_param(Var w, Var x);
  // x: [cin, len] (rank 1 means cin = 1), w: [cout, cin, 3], b: [cout].
  // Zero-padded "same" convolution, output [cout, len].
  Var conv1d(Var x, Var w, Var b);
  Var relu(Var x);
  Var soft_threshold(Var x, double tau);
  Var squared_norm(Var x);
  Var norm(Var x);
  Var solve(std::shared_ptr<const CholeskyFactor> factor, Var rhs);
  // [c, len] -> [c, len / 2]; len must be even.
  Var max_pool2(Var x);
  // [c, len] -> [c, 2 len], nearest neighbour.
  Var upsample2(Var x);
  // Channel concatenation of [ca, len] and [cb, len].
  Var concat(Var a, Var b);
  Var project_l2_ball(Var e, Var center, double radius);
  Var sum(Var x);
  Var element(Var x, std::size_t index);
  Var log_sum_exp(Var x);
  // Value-only node without a registered derivative; backward raises
  // UnsupportedOperation if a gradient has to flow through it.
  Var opaque(std::string name, std::vector<Var> inputs, Tensor value);

  // output must be a single-entry node.
  Gradients backward(Var output) const;

 private:
  struct Node {
    OpKind kind = OpKind::leaf;
    std::array<std::uint32_t, 3> in{};
    std::uint8_t arity = 0;
    bool needs_grad = false;
    double param = 0.0;
    std::size_t index = 0;
    std::shared_ptr<const LinearOperator> op;
    std::shared_ptr<const CholeskyFactor> factor;
    std::string label;
    Tensor value;
  };

  Var push(Node node);
  const Node& node(Var v) const { return nodes_.at(v.id); }
  bool wants(std::uint32_t id) const { return nodes_[id].needs_grad; }

  bool live_;
  std::vector<Node> nodes_;
};

/// A differentiable scalar program built from tape primitives.
using Program = std::function<Var(Tape&, Var)>;

struct ValueAndGradient {
  double value = 0.0;
  Tensor gradient;
};

ValueAndGradient evaluate_and_gradient(const Program& program, const Tensor& input);

}  // namespace advrecon
