#include "advrecon/nets/recon_net.hpp"

#include "advrecon/core/error.hpp"

namespace advrecon::nets {

std::string_view net_kind_name(NetKind kind) noexcept {
  switch (kind) {
    case NetKind::postproc: return "postproc";
    case NetKind::fully_learned: return "fully_learned";
    case NetKind::iterative: return "iterative";
  }
  return "?";
}

NetKind parse_net_kind(std::string_view name) {
  if (name == "postproc") return NetKind::postproc;
  if (name == "fully_learned") return NetKind::fully_learned;
  if (name == "iterative") return NetKind::iterative;
  throw ConfigError("unknown network kind '" + std::string(name) +
                    "' (expected postproc, fully_learned or iterative)");
}

void NetSpec::validate() const {
  enhancer.validate();
  if (kind == NetKind::iterative && iterations < 1)
    throw ConfigError("network: iterative kind needs at least one iteration");
}

Tensor dc_layer(const Tensor& x, const Tensor& y, const LinearOperator& a, double lam) {
  expects(x.size() == a.cols() && y.size() == a.rows(), "dc_layer: dimension mismatch");
  Tensor r = a.apply(x) - y;
  return x - lam * a.adjoint(r);
}

Var dc_layer(Tape& t, Var x, Var y, const std::shared_ptr<const LinearOperator>& a, Var lam) {
  Var r = t.sub(t.matvec(a, x), y);
  return t.sub(x, t.mul_scalar(lam, t.matvec_adjoint(a, r)));
}

ReconNet::ReconNet(NetSpec spec, std::shared_ptr<const operators::DenseMatrix> a,
                   operators::TikhonovInverse tikhonov)
    : spec_(std::move(spec)), a_(std::move(a)), tikhonov_(std::move(tikhonov)) {
  spec_.validate();
  expects(a_ != nullptr && tikhonov_.matrix != nullptr, "ReconNet: missing operator");
  expects(tikhonov_.matrix->rows() == a_->cols() && tikhonov_.matrix->cols() == a_->rows(),
          "ReconNet: Tikhonov matrix does not match the operator");
  if (a_->cols() % spec_.enhancer.length_multiple() != 0)
    throw ConfigError("network: signal length " + std::to_string(a_->cols()) +
                      " is not divisible by " + std::to_string(spec_.enhancer.length_multiple()));
  if (spec_.kind == NetKind::fully_learned) params_.add("inversion", tikhonov_.matrix->as_tensor());
  if (spec_.kind == NetKind::iterative) {
    Tensor lam = Tensor::zeros(static_cast<std::size_t>(spec_.iterations));
    for (std::size_t k = 0; k < lam.size(); ++k) lam[k] = spec_.lambda_init;
    params_.add("lambda", std::move(lam));
    const int copies = spec_.share_enhancer ? 1 : spec_.iterations;
    for (int k = 0; k < copies; ++k)
      init_unet(params_, enhancer_prefix(k), spec_.enhancer, spec_.seed);
  } else {
    init_unet(params_, enhancer_prefix(0), spec_.enhancer, spec_.seed);
  }
}

ReconNet::ReconNet(NetSpec spec, std::shared_ptr<const operators::DenseMatrix> a,
                   operators::TikhonovInverse tikhonov, ParamSet params)
    : ReconNet(std::move(spec), std::move(a), std::move(tikhonov)) {
  expects(params.count() == params_.count(), "ReconNet: parameter count mismatch");
  for (const auto& [name, value] : params_.entries()) {
    const Tensor& given = params.at(name);
    if (given.shape() != value.shape())
      throw FormatError("parameter '" + name + "' has shape " + shape_string(given.shape()) +
                            ", expected " + shape_string(value.shape()),
                        0);
  }
  params_ = std::move(params);
}

std::string ReconNet::enhancer_prefix(int k) const {
  if (spec_.kind != NetKind::iterative || spec_.share_enhancer) return "enh.";
  return "enh" + std::to_string(k) + ".";
}

Var ReconNet::record(Tape& t, const Bound& p, Var y) const {
  std::shared_ptr<const LinearOperator> a = a_;
  Var x = spec_.kind == NetKind::fully_learned
              ? t.matvec_param(p("inversion"), y)
              : t.matvec(tikhonov_.matrix, y);
  if (spec_.kind != NetKind::iterative)
    return unet_forward(t, p, enhancer_prefix(0), spec_.enhancer, x);
  Var lam = p("lambda");
  for (int k = 0; k < spec_.iterations; ++k) {
    x = unet_forward(t, p, enhancer_prefix(k), spec_.enhancer, x);
    x = dc_layer(t, x, y, a, t.element(lam, static_cast<std::size_t>(k)));
  }
  return x;
}

Tensor ReconNet::forward(const Tensor& y) const {
  expects(y.size() == input_dim(), "ReconNet::forward: measurement length mismatch");
  Tape t(false);
  Bound p(t, params_, false);
  return t.value(record(t, p, t.constant(y)));
}

namespace {

class NetView final : public DifferentiableView {
 public:
  explicit NetView(std::shared_ptr<const ReconNet> net) : net_(std::move(net)) {}
  Var record(Tape& tape, Var y) override {
    Bound p(tape, net_->params(), false);
    return net_->record(tape, p, y);
  }

 private:
  std::shared_ptr<const ReconNet> net_;
};

}  // namespace

NetMap::NetMap(std::shared_ptr<const ReconNet> net, std::string label)
    : net_(std::move(net)), label_(std::move(label)) {
  expects(net_ != nullptr, "NetMap: null network");
  if (label_.empty()) label_ = std::string(net_kind_name(net_->spec().kind));
}

std::unique_ptr<DifferentiableView> NetMap::view() const {
  return std::make_unique<NetView>(net_);
}

}  // namespace advrecon::nets
