#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>

#include "advrecon/core/recon_map.hpp"
#include "advrecon/nets/params.hpp"
#include "advrecon/nets/unet.hpp"
#include "advrecon/operators/dense.hpp"
#include "advrecon/operators/tikhonov.hpp"

namespace advrecon::nets {

enum class NetKind { postproc, fully_learned, iterative };

std::string_view net_kind_name(NetKind kind) noexcept;
// Throws ConfigError for unknown names.
NetKind parse_net_kind(std::string_view name);

struct NetSpec {
  NetKind kind = NetKind::postproc;
  ConvBlockSpec enhancer;
  int iterations = 8;          // K, iterative only
  double lambda_init = 0.1;    // initial DC step sizes
  bool share_enhancer = true;  // iterative: one enhancer reused K times
  std::uint64_t seed = 0;

  void validate() const;
};

// x - lam * A^T (A x - y)
Tensor dc_layer(const Tensor& x, const Tensor& y, const LinearOperator& a, double lam);
Var dc_layer(Tape& tape, Var x, Var y, const std::shared_ptr<const LinearOperator>& a, Var lam);

/// Reconstruction network y -> x.
///
///   postproc:      E(T y)
///   fully_learned: E(L y), L learnable and initialized to T
///   iterative:     x0 = T y, x_k = DC_{lam_k}(E_k(x_{k-1})), k = 1..K
///
/// T is the fixed Tikhonov matrix. Parameter names: "inversion" (L),
/// "lambda" ([K]), and enhancer weights under "enh." or "enh<k>.".
class ReconNet {
 public:
  ReconNet(NetSpec spec, std::shared_ptr<const operators::DenseMatrix> a,
           operators::TikhonovInverse tikhonov);
  // Restores a network from explicit parameters (see serialize.hpp).
  ReconNet(NetSpec spec, std::shared_ptr<const operators::DenseMatrix> a,
           operators::TikhonovInverse tikhonov, ParamSet params);

  const NetSpec& spec() const noexcept { return spec_; }
  const std::shared_ptr<const operators::DenseMatrix>& op() const noexcept { return a_; }
  const operators::TikhonovInverse& tikhonov() const noexcept { return tikhonov_; }
  ParamSet& params() noexcept { return params_; }
  const ParamSet& params() const noexcept { return params_; }

  std::size_t input_dim() const { return a_->rows(); }
  std::size_t output_dim() const { return a_->cols(); }

  Tensor forward(const Tensor& y) const;
  Var record(Tape& tape, const Bound& params, Var y) const;

 private:
  std::string enhancer_prefix(int k) const;

  NetSpec spec_;
  std::shared_ptr<const operators::DenseMatrix> a_;
  operators::TikhonovInverse tikhonov_;
  ParamSet params_;
};

/// Frozen network as a ReconstructionMap (parameters enter as constants).
class NetMap final : public ReconstructionMap {
 public:
  explicit NetMap(std::shared_ptr<const ReconNet> net, std::string label = "");

  std::string name() const override { return label_; }
  std::size_t input_dim() const override { return net_->input_dim(); }
  std::size_t output_dim() const override { return net_->output_dim(); }
  Tensor reconstruct(const Tensor& y) const override { return net_->forward(y); }
  std::unique_ptr<DifferentiableView> view() const override;

  const ReconNet& net() const noexcept { return *net_; }

 private:
  std::shared_ptr<const ReconNet> net_;
  std::string label_;
};

}  // namespace advrecon::nets
