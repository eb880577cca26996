#pragma once

#include <cstdint>
#include <vector>

#include "advrecon/nets/params.hpp"
#include "advrecon/nets/train.hpp"

namespace advrecon::nets {

struct ClassifierSpec {
  std::size_t channels = 8;
  std::size_t hidden = 32;
  std::size_t classes = 2;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Small 1D convolutional classifier on reconstructions:
/// conv+ReLU, conv+ReLU, per-channel sum pooling, dense+ReLU, dense -> logits.
/// The last dense layer starts at zero, so an untrained classifier outputs
/// the uniform distribution.
class Classifier {
 public:
  Classifier(ClassifierSpec spec, std::size_t length);
  Classifier(ClassifierSpec spec, std::size_t length, ParamSet params);

  const ClassifierSpec& spec() const noexcept { return spec_; }
  std::size_t length() const noexcept { return length_; }
  ParamSet& params() noexcept { return params_; }
  const ParamSet& params() const noexcept { return params_; }

  Var logits(Tape& tape, const Bound& params, Var x) const;
  Tensor logits(const Tensor& x) const;
  Tensor probabilities(const Tensor& x) const;
  int predict(const Tensor& x) const;

 private:
  ClassifierSpec spec_;
  std::size_t length_;
  ParamSet params_;
};

// Numerically stable softmax.
Tensor softmax(const Tensor& logits);

struct ClassifierTrainConfig {
  int epochs = 60;
  std::size_t batch_size = 32;
  double lr = 1e-2;
  double weight_decay = 0.0;
  std::uint64_t seed = 0;
  int threads = 1;

  void validate() const;
};

/// Mini-batch Adam on the mean cross-entropy. Throws ConfigError when labels
/// are missing, mismatched or out of range.
TrainReport train_classifier(Classifier& clf, const std::vector<Tensor>& features,
                             const std::vector<int>& labels, const ClassifierTrainConfig& cfg);

double accuracy(const Classifier& clf, const std::vector<Tensor>& features,
                const std::vector<int>& labels, int threads = 1);

// Jump-count parity (0 even, 1 odd) of piecewise-constant signals.
std::vector<int> parity_labels(const std::vector<Tensor>& signals);

}  // namespace advrecon::nets
