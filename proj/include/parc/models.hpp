#pragma once

// Feedforward networks with hand-written backpropagation. Samples are stored
// column-wise: a batch of N inputs of width d is a (d x N) matrix.

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "parc/homotopy.hpp"
#include "parc/param_space.hpp"

namespace parc {

enum class LossKind { MseFrobenius, SoftmaxCrossEntropy };

enum class InitScheme { XavierUniform, Zeros };

struct LayerShape {
  Eigen::Index in = 0;
  Eigen::Index out = 0;
};

struct Batch {
  Eigen::MatrixXd x;
  /// Regression targets (output width x N); unused for autoencoders, which
  /// reconstruct their (possibly brightness-transformed) input.
  Eigen::MatrixXd y;
  /// Class labels for cross-entropy.
  std::vector<int> labels;

  Eigen::Index size() const { return x.cols(); }
};

std::string to_string(LossKind kind);

class MlpModel {
 public:
  MlpModel(std::vector<LayerShape> layers, HomotopySpec homotopy, LossKind loss,
           bool autoencoding = false);

  /// 36 -> 16 -> 8 -> 16 -> 36, MSE reconstruction of the input.
  static MlpModel autoencoder(HomotopySpec homotopy);
  /// 36 -> 10, activation on the logits, softmax cross-entropy.
  static MlpModel classifier(HomotopySpec homotopy);

  const std::vector<LayerShape>& layers() const { return layers_; }
  const HomotopySpec& homotopy() const { return homotopy_; }
  LossKind loss_kind() const { return loss_; }
  bool autoencoding() const { return autoencoding_; }
  Eigen::Index param_count() const { return param_count_; }
  Eigen::Index input_dim() const { return layers_.front().in; }
  Eigen::Index output_dim() const { return layers_.back().out; }

  /// Offset of layer `l`'s weights inside a flattened parameter vector.
  Eigen::Index weight_offset(std::size_t l) const { return offsets_[l]; }
  Eigen::Index bias_offset(std::size_t l) const {
    return offsets_[l] + layers_[l].in * layers_[l].out;
  }

  /// Zero-filled LayerParams with this model's shapes, for flatten/unflatten.
  std::vector<LayerParams> layer_templates() const;

 private:
  std::vector<LayerShape> layers_;
  std::vector<Eigen::Index> offsets_;
  HomotopySpec homotopy_;
  LossKind loss_;
  bool autoencoding_;
  Eigen::Index param_count_ = 0;
};

/// Network output for a batch (after the last activation site; logits for
/// classifiers).
Eigen::MatrixXd forward(const MlpModel& model, const ParamVector& theta, const Eigen::MatrixXd& x,
                        double lambda);

/// Mean loss over the batch with exact gradients in theta and lambda.
/// Throws NumericalDivergence if the loss is not finite.
LossGrad loss_and_grads(const MlpModel& model, const ParamVector& theta, const Batch& batch,
                        double lambda);

/// Loss value only (no backward pass).
double loss_value(const MlpModel& model, const ParamVector& theta, const Batch& batch,
                  double lambda);

/// Fraction of samples whose arg-max output matches the label.
double accuracy(const MlpModel& model, const ParamVector& theta, const Batch& batch,
                double lambda);

/// Xavier-uniform weights in +-sqrt(6 / (in + out)) and zero biases.
ParamVector init_params(const MlpModel& model, InitScheme scheme, std::uint64_t seed);

}  // namespace parc
