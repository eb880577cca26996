#include "advrecon/core/tape.hpp"

#include <algorithm>
#include <cmath>

#include "advrecon/core/error.hpp"
#include "advrecon/core/kernels.hpp"

namespace advrecon {

std::string_view op_name(OpKind kind) noexcept {
  switch (kind) {
    case OpKind::leaf: return "leaf";
    case OpKind::constant: return "constant";
    case OpKind::add: return "add";
    case OpKind::sub: return "sub";
    case OpKind::scale: return "scale";
    case OpKind::mul_scalar: return "mul_scalar";
    case OpKind::matvec: return "matvec";
    case OpKind::matvec_adjoint: return "matvec_adjoint";
    case OpKind::matvec_param: return "matvec_param";
    case OpKind::conv1d: return "conv1d";
    case OpKind::relu: return "relu";
    case OpKind::soft_threshold: return "soft_threshold";
    case OpKind::squared_norm: return "squared_norm";
    case OpKind::norm: return "norm";
    case OpKind::solve: return "solve";
    case OpKind::max_pool2: return "max_pool2";
    case OpKind::upsample2: return "upsample2";
    case OpKind::concat: return "concat";
    case OpKind::project_ball: return "project_ball";
    case OpKind::sum: return "sum";
    case OpKind::element: return "element";
    case OpKind::log_sum_exp: return "log_sum_exp";
    case OpKind::opaque: return "opaque";
  }
  return "unknown";
}

Tensor Gradients::of(Var v) const {
  expects(v.id < shapes_.size(), "Gradients::of: variable does not belong to this tape");
  const auto& adj = adjoints_[v.id];
  if (adj.empty()) return Tensor(shapes_[v.id]);
  return Tensor(shapes_[v.id], adj);
}

namespace {

struct ChannelLayout {
  std::size_t channels;
  std::size_t length;
};

ChannelLayout layout_of(const Tensor& t) {
  if (t.rank() == 2) return {t.shape()[0], t.shape()[1]};
  expects(t.rank() == 1, "expected a [channels, length] or flat tensor");
  return {1, t.size()};
}

}  // namespace

Var Tape::push(Node n) {
  if (!n.value.all_finite()) {
    throw NumericalError("non-finite value produced by node #" + std::to_string(nodes_.size()) +
                         " (" + std::string(op_name(n.kind)) +
                         (n.label.empty() ? "" : ": " + n.label) + ")");
  }
  if (!live_) n.needs_grad = false;
  nodes_.push_back(std::move(n));
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

double Tape::scalar(Var v) const {
  const Tensor& t = value(v);
  expects(t.size() == 1, "Tape::scalar: node does not hold a single value");
  return t[0];
}

Var Tape::leaf(Tensor value, bool requires_grad) {
  Node n;
  n.kind = requires_grad ? OpKind::leaf : OpKind::constant;
  n.needs_grad = requires_grad;
  n.value = std::move(value);
  return push(std::move(n));
}

Var Tape::constant(Tensor value) { return leaf(std::move(value), false); }

#define ADVRECON_UNARY(kind_, a_)      \
  Node n;                              \
  n.kind = OpKind::kind_;              \
  n.in[0] = (a_).id;                   \
  n.arity = 1;                         \
  n.needs_grad = wants((a_).id)

#define ADVRECON_BINARY(kind_, a_, b_)                 \
  Node n;                                              \
  n.kind = OpKind::kind_;                              \
  n.in[0] = (a_).id;                                   \
  n.in[1] = (b_).id;                                   \
  n.arity = 2;                                         \
  n.needs_grad = wants((a_).id) || wants((b_).id)

Var Tape::add(Var a, Var b) {
  const Tensor& va = value(a);
  const Tensor& vb = value(b);
  expects(va.size() == vb.size(), "add: size mismatch");
  ADVRECON_BINARY(add, a, b);
  n.value = va;
  kernels::axpy(1.0, vb.data(), n.value.data(), vb.size());
  return push(std::move(n));
}

Var Tape::sub(Var a, Var b) {
  const Tensor& va = value(a);
  const Tensor& vb = value(b);
  expects(va.size() == vb.size(), "sub: size mismatch");
  ADVRECON_BINARY(sub, a, b);
  n.value = va;
  kernels::axpy(-1.0, vb.data(), n.value.data(), vb.size());
  return push(std::move(n));
}

Var Tape::scale(Var a, double c) {
  ADVRECON_UNARY(scale, a);
  n.param = c;
  n.value = c * value(a);
  return push(std::move(n));
}

Var Tape::mul_scalar(Var s, Var v) {
  expects(value(s).size() == 1, "mul_scalar: first argument must be a single value");
  ADVRECON_BINARY(mul_scalar, s, v);
  n.value = value(s)[0] * value(v);
  return push(std::move(n));
}

Var Tape::matvec(std::shared_ptr<const LinearOperator> op, Var x) {
  expects(op != nullptr, "matvec: null operator");
  expects(value(x).size() == op->cols(), "matvec: input length mismatch");
  ADVRECON_UNARY(matvec, x);
  n.value = op->apply(value(x).reshaped({op->cols()}));
  n.op = std::move(op);
  return push(std::move(n));
}

Var Tape::matvec_adjoint(std::shared_ptr<const LinearOperator> op, Var y) {
  expects(op != nullptr, "matvec_adjoint: null operator");
  expects(value(y).size() == op->rows(), "matvec_adjoint: input length mismatch");
  ADVRECON_UNARY(matvec_adjoint, y);
  n.value = op->adjoint(value(y).reshaped({op->rows()}));
  n.op = std::move(op);
  return push(std::move(n));
}

Var Tape::matvec_param(Var w, Var x) {
  const Tensor& vw = value(w);
  const Tensor& vx = value(x);
  expects(vw.rank() == 2 && vw.shape()[1] == vx.size(), "matvec_param: shape mismatch");
  ADVRECON_BINARY(matvec_param, w, x);
  n.value = Tensor::zeros(vw.shape()[0]);
  kernels::gemv(vw.data(), vw.shape()[0], vw.shape()[1], vx.data(), n.value.data());
  return push(std::move(n));
}

Var Tape::conv1d(Var x, Var w, Var b) {
  const Tensor& vx = value(x);
  const Tensor& vw = value(w);
  const Tensor& vb = value(b);
  const auto [cin, len] = layout_of(vx);
  expects(vw.rank() == 3 && vw.shape()[1] == cin && vw.shape()[2] == 3,
          "conv1d: weight must be [cout, cin, 3] with matching cin");
  const std::size_t cout = vw.shape()[0];
  expects(vb.size() == cout, "conv1d: bias length must equal cout");
  Node n;
  n.kind = OpKind::conv1d;
  n.in = {x.id, w.id, b.id};
  n.arity = 3;
  n.needs_grad = wants(x.id) || wants(w.id) || wants(b.id);
  n.value = Tensor(Shape{cout, len});
  double* out = n.value.data();
  for (std::size_t o = 0; o < cout; ++o) {
    double* row = out + o * len;
    std::fill(row, row + len, vb[o]);
    for (std::size_t c = 0; c < cin; ++c) {
      const double* k = vw.data() + (o * cin + c) * 3;
      kernels::conv3(vx.data() + c * len, row, len, k[0], k[1], k[2]);
    }
  }
  return push(std::move(n));
}

Var Tape::relu(Var x) {
  ADVRECON_UNARY(relu, x);
  n.value = value(x);
  for (double& v : n.value.span()) v = v > 0.0 ? v : 0.0;
  return push(std::move(n));
}

Var Tape::soft_threshold(Var x, double tau) {
  expects(tau >= 0.0, "soft_threshold: tau must be nonnegative");
  ADVRECON_UNARY(soft_threshold, x);
  n.param = tau;
  n.value = value(x);
  for (double& v : n.value.span()) {
    const double a = std::abs(v) - tau;
    v = a > 0.0 ? std::copysign(a, v) : 0.0;
  }
  return push(std::move(n));
}

Var Tape::squared_norm(Var x) {
  ADVRECON_UNARY(squared_norm, x);
  n.value = Tensor::scalar(advrecon::squared_norm(value(x)));
  return push(std::move(n));
}

Var Tape::norm(Var x) {
  ADVRECON_UNARY(norm, x);
  n.value = Tensor::scalar(advrecon::norm(value(x)));
  return push(std::move(n));
}

Var Tape::solve(std::shared_ptr<const CholeskyFactor> factor, Var rhs) {
  expects(factor != nullptr, "solve: null factorization");
  expects(value(rhs).size() == factor->dim(), "solve: rhs length mismatch");
  ADVRECON_UNARY(solve, rhs);
  n.value = factor->solve(value(rhs).reshaped({factor->dim()}));
  n.factor = std::move(factor);
  return push(std::move(n));
}

Var Tape::max_pool2(Var x) {
  const Tensor& vx = value(x);
  const auto [c, len] = layout_of(vx);
  expects(len % 2 == 0, "max_pool2: length must be even");
  ADVRECON_UNARY(max_pool2, x);
  const std::size_t half = len / 2;
  n.value = Tensor(Shape{c, half});
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t i = 0; i < half; ++i)
      n.value[ch * half + i] = std::max(vx[ch * len + 2 * i], vx[ch * len + 2 * i + 1]);
  return push(std::move(n));
}

Var Tape::upsample2(Var x) {
  const Tensor& vx = value(x);
  const auto [c, len] = layout_of(vx);
  ADVRECON_UNARY(upsample2, x);
  n.value = Tensor(Shape{c, 2 * len});
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t i = 0; i < len; ++i) {
      n.value[ch * 2 * len + 2 * i] = vx[ch * len + i];
      n.value[ch * 2 * len + 2 * i + 1] = vx[ch * len + i];
    }
  return push(std::move(n));
}

Var Tape::concat(Var a, Var b) {
  const Tensor& va = value(a);
  const Tensor& vb = value(b);
  const auto la = layout_of(va);
  const auto lb = layout_of(vb);
  expects(la.length == lb.length, "concat: lengths differ");
  ADVRECON_BINARY(concat, a, b);
  std::vector<double> data(va.values());
  data.insert(data.end(), vb.values().begin(), vb.values().end());
  n.value = Tensor(Shape{la.channels + lb.channels, la.length}, std::move(data));
  return push(std::move(n));
}

Var Tape::project_l2_ball(Var e, Var center, double radius) {
  expects(radius >= 0.0, "project_l2_ball: radius must be nonnegative");
  const Tensor& ve = value(e);
  const Tensor& vc = value(center);
  expects(ve.size() == vc.size(), "project_l2_ball: shape mismatch");
  ADVRECON_BINARY(project_ball, e, center);
  n.param = radius;
  if (radius == 0.0) {
    n.value = vc;
  } else {
    const Tensor d = ve - vc;
    const double dn = advrecon::norm(d);
    n.value = dn <= radius ? ve : vc + (radius / dn) * d;
  }
  return push(std::move(n));
}

Var Tape::sum(Var x) {
  ADVRECON_UNARY(sum, x);
  n.value = Tensor::scalar(advrecon::sum(value(x)));
  return push(std::move(n));
}

Var Tape::element(Var x, std::size_t index) {
  expects(index < value(x).size(), "element: index out of range");
  ADVRECON_UNARY(element, x);
  n.index = index;
  n.value = Tensor::scalar(value(x)[index]);
  return push(std::move(n));
}

Var Tape::log_sum_exp(Var x) {
  const Tensor& vx = value(x);
  expects(vx.size() > 0, "log_sum_exp: empty input");
  ADVRECON_UNARY(log_sum_exp, x);
  const double mx = *std::max_element(vx.values().begin(), vx.values().end());
  double acc = 0.0;
  for (double v : vx.values()) acc += std::exp(v - mx);
  n.value = Tensor::scalar(mx + std::log(acc));
  return push(std::move(n));
}

Var Tape::opaque(std::string name, std::vector<Var> inputs, Tensor value) {
  expects(inputs.size() <= 3, "opaque: at most three inputs");
  Node n;
  n.kind = OpKind::opaque;
  n.label = std::move(name);
  n.arity = static_cast<std::uint8_t>(inputs.size());
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    n.in[i] = inputs[i].id;
    n.needs_grad = n.needs_grad || wants(inputs[i].id);
  }
  n.value = std::move(value);
  return push(std::move(n));
}

#undef ADVRECON_UNARY
#undef ADVRECON_BINARY

Gradients Tape::backward(Var output) const {
  if (!live_) throw ContractViolation("backward called on a tape that is not live");
  expects(output.id < nodes_.size(), "backward: variable does not belong to this tape");
  expects(node(output).value.size() == 1, "backward: output must be a single value");

  Gradients grads;
  grads.shapes_.reserve(nodes_.size());
  for (const auto& nd : nodes_) grads.shapes_.push_back(nd.value.shape());
  auto& adj = grads.adjoints_;
  adj.resize(nodes_.size());

  auto sink = [&](std::uint32_t id) -> std::vector<double>& {
    auto& a = adj[id];
    if (a.empty()) a.assign(nodes_[id].value.size(), 0.0);
    return a;
  };

  adj[output.id] = {1.0};
  for (std::size_t k = output.id + 1; k-- > 0;) {
    const Node& nd = nodes_[k];
    if (adj[k].empty() || !nd.needs_grad) continue;
    const std::vector<double>& g = adj[k];
    const std::uint32_t a = nd.in[0];
    const std::uint32_t b = nd.in[1];

    switch (nd.kind) {
      case OpKind::leaf:
      case OpKind::constant:
        break;
      case OpKind::add:
        if (wants(a)) kernels::axpy(1.0, g.data(), sink(a).data(), g.size());
        if (wants(b)) kernels::axpy(1.0, g.data(), sink(b).data(), g.size());
        break;
      case OpKind::sub:
        if (wants(a)) kernels::axpy(1.0, g.data(), sink(a).data(), g.size());
        if (wants(b)) kernels::axpy(-1.0, g.data(), sink(b).data(), g.size());
        break;
      case OpKind::scale:
        kernels::axpy(nd.param, g.data(), sink(a).data(), g.size());
        break;
      case OpKind::mul_scalar: {
        const Tensor& s = nodes_[a].value;
        const Tensor& v = nodes_[b].value;
        if (wants(a)) sink(a)[0] += kernels::dot(g.data(), v.data(), g.size());
        if (wants(b)) kernels::axpy(s[0], g.data(), sink(b).data(), g.size());
        break;
      }
      case OpKind::matvec: {
        std::vector<double> tmp(nd.op->cols());
        nd.op->adjoint(g, tmp);
        kernels::axpy(1.0, tmp.data(), sink(a).data(), tmp.size());
        break;
      }
      case OpKind::matvec_adjoint: {
        std::vector<double> tmp(nd.op->rows());
        nd.op->apply(g, tmp);
        kernels::axpy(1.0, tmp.data(), sink(a).data(), tmp.size());
        break;
      }
      case OpKind::matvec_param: {
        const Tensor& w = nodes_[a].value;
        const Tensor& x = nodes_[b].value;
        const std::size_t rows = w.shape()[0];
        const std::size_t cols = w.shape()[1];
        if (wants(a)) {
          auto& gw = sink(a);
          for (std::size_t r = 0; r < rows; ++r)
            if (g[r] != 0.0) kernels::axpy(g[r], x.data(), gw.data() + r * cols, cols);
        }
        if (wants(b)) {
          std::vector<double> tmp(cols);
          kernels::gemv_t(w.data(), rows, cols, g.data(), tmp.data());
          kernels::axpy(1.0, tmp.data(), sink(b).data(), cols);
        }
        break;
      }
      case OpKind::conv1d: {
        const std::uint32_t c_id = nd.in[2];
        const Tensor& x = nodes_[a].value;
        const Tensor& w = nodes_[b].value;
        const auto [cin, len] = layout_of(x);
        const std::size_t cout = w.shape()[0];
        double* gx = wants(a) ? sink(a).data() : nullptr;
        double* gw = wants(b) ? sink(b).data() : nullptr;
        double* gb = wants(c_id) ? sink(c_id).data() : nullptr;
        for (std::size_t o = 0; o < cout; ++o) {
          const double* go = g.data() + o * len;
          if (gb) {
            double acc = 0.0;
            for (std::size_t i = 0; i < len; ++i) acc += go[i];
            gb[o] += acc;
          }
          for (std::size_t c = 0; c < cin; ++c) {
            const double* k = w.data() + (o * cin + c) * 3;
            const double* xc = x.data() + c * len;
            if (gx) kernels::conv3(go, gx + c * len, len, k[2], k[1], k[0]);
            if (gw && len > 0) {
              double* gk = gw + (o * cin + c) * 3;
              gk[1] += kernels::dot(go, xc, len);
              if (len > 1) {
                gk[0] += kernels::dot(go + 1, xc, len - 1);
                gk[2] += kernels::dot(go, xc + 1, len - 1);
              }
            }
          }
        }
        break;
      }
      case OpKind::relu: {
        const Tensor& x = nodes_[a].value;
        auto& ga = sink(a);
        for (std::size_t i = 0; i < g.size(); ++i)
          if (x[i] > 0.0) ga[i] += g[i];
        break;
      }
      case OpKind::soft_threshold: {
        const Tensor& x = nodes_[a].value;
        auto& ga = sink(a);
        for (std::size_t i = 0; i < g.size(); ++i)
          if (std::abs(x[i]) > nd.param) ga[i] += g[i];
        break;
      }
      case OpKind::squared_norm: {
        const Tensor& x = nodes_[a].value;
        kernels::axpy(2.0 * g[0], x.data(), sink(a).data(), x.size());
        break;
      }
      case OpKind::norm: {
        const Tensor& x = nodes_[a].value;
        const double nx = nd.value[0];
        if (nx > 0.0) kernels::axpy(g[0] / nx, x.data(), sink(a).data(), x.size());
        break;
      }
      case OpKind::solve: {
        std::vector<double> tmp(g);
        nd.factor->solve_in_place(tmp);
        kernels::axpy(1.0, tmp.data(), sink(a).data(), tmp.size());
        break;
      }
      case OpKind::max_pool2: {
        const Tensor& x = nodes_[a].value;
        const auto [c, len] = layout_of(x);
        const std::size_t half = len / 2;
        auto& ga = sink(a);
        for (std::size_t ch = 0; ch < c; ++ch)
          for (std::size_t i = 0; i < half; ++i) {
            const std::size_t l = ch * len + 2 * i;
            ga[x[l] >= x[l + 1] ? l : l + 1] += g[ch * half + i];
          }
        break;
      }
      case OpKind::upsample2: {
        const auto [c, len] = layout_of(nodes_[a].value);
        auto& ga = sink(a);
        for (std::size_t ch = 0; ch < c; ++ch)
          for (std::size_t i = 0; i < len; ++i)
            ga[ch * len + i] += g[ch * 2 * len + 2 * i] + g[ch * 2 * len + 2 * i + 1];
        break;
      }
      case OpKind::concat: {
        const std::size_t na = nodes_[a].value.size();
        const std::size_t nb = nodes_[b].value.size();
        if (wants(a)) kernels::axpy(1.0, g.data(), sink(a).data(), na);
        if (wants(b)) kernels::axpy(1.0, g.data() + na, sink(b).data(), nb);
        break;
      }
      case OpKind::project_ball: {
        const Tensor& e = nodes_[a].value;
        const Tensor& c = nodes_[b].value;
        const double r = nd.param;
        const std::size_t m = e.size();
        if (r == 0.0) {
          if (wants(b)) kernels::axpy(1.0, g.data(), sink(b).data(), m);
          break;
        }
        const Tensor d = e - c;
        const double dn = advrecon::norm(d);
        if (dn <= r) {
          if (wants(a)) kernels::axpy(1.0, g.data(), sink(a).data(), m);
          break;
        }
        // J = (r / |d|) (I - d d^T / |d|^2); d(out)/de = J, d(out)/dc = I - J.
        const double s = r / dn;
        const double proj = kernels::dot(d.data(), g.data(), m) / (dn * dn);
        std::vector<double> jg(m);
        for (std::size_t i = 0; i < m; ++i) jg[i] = s * (g[i] - proj * d[i]);
        if (wants(a)) kernels::axpy(1.0, jg.data(), sink(a).data(), m);
        if (wants(b)) {
          auto& gc = sink(b);
          for (std::size_t i = 0; i < m; ++i) gc[i] += g[i] - jg[i];
        }
        break;
      }
      case OpKind::sum: {
        auto& ga = sink(a);
        for (double& v : ga) v += g[0];
        break;
      }
      case OpKind::element:
        sink(a)[nd.index] += g[0];
        break;
      case OpKind::log_sum_exp: {
        const Tensor& x = nodes_[a].value;
        auto& ga = sink(a);
        const double lse = nd.value[0];
        for (std::size_t i = 0; i < x.size(); ++i) ga[i] += g[0] * std::exp(x[i] - lse);
        break;
      }
      case OpKind::opaque:
        throw UnsupportedOperation("no derivative registered for operation '" + nd.label +
                                   "' (node #" + std::to_string(k) + ")");
    }
  }

  for (std::size_t k = 0; k < adj.size(); ++k) {
    for (double v : adj[k])
      if (!std::isfinite(v))
        throw NumericalError("non-finite adjoint at node #" + std::to_string(k) + " (" +
                             std::string(op_name(nodes_[k].kind)) + ")");
  }
  return grads;
}

ValueAndGradient evaluate_and_gradient(const Program& program, const Tensor& input) {
  expects(input.all_finite(), "evaluate_and_gradient: input must be finite");
  Tape tape;
  const Var x = tape.leaf(input);
  const Var out = program(tape, x);
  ValueAndGradient result;
  result.value = tape.scalar(out);
  result.gradient = tape.backward(out).of(x);
  return result;
}

}  // namespace advrecon
