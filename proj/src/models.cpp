#include "parc/models.hpp"

#include <cmath>
#include <random>
#include <utility>

#include "parc/errors.hpp"

namespace parc {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using WeightMap = Eigen::Map<const RowMajorMatrix>;
using BiasMap = Eigen::Map<const Eigen::VectorXd>;

// How one forward pass treats its activation sites and its input.
struct PassRule {
  Activation act = Activation::Relu;
  double site_lambda = 1.0;
  bool sites_track_lambda = false;
  bool brightness = false;
};

PassRule target_rule(const HomotopySpec& spec, double lambda) {
  PassRule rule;
  rule.act = spec.activation;
  switch (spec.kind) {
    case HomotopyKind::HRelu:
    case HomotopyKind::HSigmoid:
      rule.site_lambda = lambda;
      rule.sites_track_lambda = true;
      break;
    case HomotopyKind::HBrightness:
      rule.brightness = true;
      break;
    case HomotopyKind::None:
    case HomotopyKind::LossBlend:
      break;
  }
  return rule;
}

struct Pass {
  MatrixXd input;
  std::vector<MatrixXd> pre;
  std::vector<MatrixXd> post;
};

void check_shapes(const MlpModel& model, const ParamVector& theta, const MatrixXd& x) {
  if (theta.size() != model.param_count()) {
    throw DimensionMismatch("theta has length " + std::to_string(theta.size()) + ", model expects " +
                            std::to_string(model.param_count()));
  }
  if (x.rows() != model.input_dim()) {
    throw DimensionMismatch("input width " + std::to_string(x.rows()) + ", model expects " +
                            std::to_string(model.input_dim()));
  }
}

WeightMap weights(const MlpModel& model, const ParamVector& theta, std::size_t l) {
  const auto& shape = model.layers()[l];
  return WeightMap(theta.data() + model.weight_offset(l), shape.out, shape.in);
}

BiasMap bias(const MlpModel& model, const ParamVector& theta, std::size_t l) {
  return BiasMap(theta.data() + model.bias_offset(l), model.layers()[l].out);
}

Pass run_forward(const MlpModel& model, const ParamVector& theta, const MatrixXd& x, double lambda,
                 const PassRule& rule) {
  Pass pass;
  if (rule.brightness) {
    pass.input = h_brightness(x.array(), lambda, model.homotopy().baseline_value).matrix();
  } else {
    pass.input = x;
  }
  const std::size_t depth = model.layers().size();
  pass.pre.reserve(depth);
  pass.post.reserve(depth);
  for (std::size_t l = 0; l < depth; ++l) {
    const MatrixXd& prev = l == 0 ? pass.input : pass.post.back();
    MatrixXd z = weights(model, theta, l) * prev;
    z.colwise() += bias(model, theta, l);
    pass.post.push_back(h_activation(z.array(), rule.site_lambda, rule.act).matrix());
    pass.pre.push_back(std::move(z));
  }
  return pass;
}

MatrixXd targets_for(const MlpModel& model, const Batch& batch, const Pass& pass) {
  if (model.autoencoding()) {
    return pass.input;
  }
  return batch.y;
}

void check_batch(const MlpModel& model, const Batch& batch) {
  if (batch.size() == 0) {
    throw DimensionMismatch("empty batch");
  }
  if (model.loss_kind() == LossKind::SoftmaxCrossEntropy) {
    if (static_cast<Index>(batch.labels.size()) != batch.size()) {
      throw DimensionMismatch("label count does not match batch size");
    }
  } else if (!model.autoencoding() &&
             (batch.y.rows() != model.output_dim() || batch.y.cols() != batch.size())) {
    throw DimensionMismatch("target shape does not match model output");
  }
}

// Column-wise log-softmax.
MatrixXd log_softmax(const MatrixXd& logits) {
  MatrixXd out(logits.rows(), logits.cols());
  for (Index j = 0; j < logits.cols(); ++j) {
    const double mx = logits.col(j).maxCoeff();
    const double lse = mx + std::log((logits.col(j).array() - mx).exp().sum());
    out.col(j) = logits.col(j).array() - lse;
  }
  return out;
}

struct TaskLoss {
  double value = 0.0;
  MatrixXd d_output;
  // Gradient of the loss with respect to the target matrix (autoencoders).
  MatrixXd d_target;
};

TaskLoss task_loss(const MlpModel& model, const Batch& batch, const Pass& pass, bool with_grad) {
  const MatrixXd& out = pass.post.back();
  const double n = static_cast<double>(batch.size());
  TaskLoss loss;
  if (model.loss_kind() == LossKind::MseFrobenius) {
    const MatrixXd residual = out - targets_for(model, batch, pass);
    loss.value = residual.squaredNorm() / n;
    if (with_grad) {
      loss.d_output = (2.0 / n) * residual;
      if (model.autoencoding()) {
        loss.d_target = -loss.d_output;
      }
    }
    return loss;
  }
  const MatrixXd logp = log_softmax(out);
  double total = 0.0;
  for (Index j = 0; j < batch.size(); ++j) {
    const int label = batch.labels[static_cast<std::size_t>(j)];
    if (label < 0 || label >= out.rows()) {
      throw DimensionMismatch("label " + std::to_string(label) + " out of range");
    }
    total -= logp(label, j);
  }
  loss.value = total / n;
  if (with_grad) {
    loss.d_output = logp.array().exp().matrix();
    for (Index j = 0; j < batch.size(); ++j) {
      loss.d_output(batch.labels[static_cast<std::size_t>(j)], j) -= 1.0;
    }
    loss.d_output /= n;
  }
  return loss;
}

LossGrad evaluate_pass(const MlpModel& model, const ParamVector& theta, const Batch& batch,
                       double lambda, const PassRule& rule) {
  const Pass pass = run_forward(model, theta, batch.x, lambda, rule);
  TaskLoss loss = task_loss(model, batch, pass, true);
  if (!std::isfinite(loss.value)) {
    throw NumericalDivergence("non-finite loss in forward pass");
  }

  LossGrad result;
  result.value = loss.value;
  result.grad_theta = ParamVector::Zero(model.param_count());
  double grad_lambda = 0.0;

  MatrixXd d_post = std::move(loss.d_output);
  for (std::size_t l = model.layers().size(); l-- > 0;) {
    const MatrixXd& z = pass.pre[l];
    const auto site = h_activation_grad(z.array(), rule.site_lambda, rule.act);
    if (rule.sites_track_lambda) {
      grad_lambda += (d_post.array() * site.d_lambda).sum();
    }
    const MatrixXd d_pre = (d_post.array() * site.d_z).matrix();
    const MatrixXd& prev = l == 0 ? pass.input : pass.post[l - 1];
    const auto& shape = model.layers()[l];
    Eigen::Map<RowMajorMatrix>(result.grad_theta.data() + model.weight_offset(l), shape.out,
                               shape.in) = d_pre * prev.transpose();
    result.grad_theta.segment(model.bias_offset(l), shape.out) = d_pre.rowwise().sum();
    if (l > 0 || rule.brightness) {
      d_post = weights(model, theta, l).transpose() * d_pre;
    }
  }

  if (rule.brightness) {
    // input = (1 - lambda) * baseline + lambda * x
    const Eigen::ArrayXXd d_input_d_lambda =
        batch.x.array() - model.homotopy().baseline_value;
    grad_lambda += (d_post.array() * d_input_d_lambda).sum();
    if (model.autoencoding()) {
      grad_lambda += (loss.d_target.array() * d_input_d_lambda).sum();
    }
  }
  result.grad_lambda = grad_lambda;
  if (!result.grad_theta.allFinite() || !std::isfinite(result.grad_lambda)) {
    throw NumericalDivergence("non-finite gradient");
  }
  return result;
}

}  // namespace

std::string to_string(LossKind kind) {
  return kind == LossKind::MseFrobenius ? "mse" : "cross-entropy";
}

MlpModel::MlpModel(std::vector<LayerShape> layers, HomotopySpec homotopy, LossKind loss,
                   bool autoencoding)
    : layers_(std::move(layers)), homotopy_(homotopy), loss_(loss), autoencoding_(autoencoding) {
  if (layers_.empty()) {
    throw DimensionMismatch("model needs at least one layer");
  }
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    if (layers_[l].in <= 0 || layers_[l].out <= 0) {
      throw DimensionMismatch("layer " + std::to_string(l) + " has a zero dimension");
    }
    if (l > 0 && layers_[l].in != layers_[l - 1].out) {
      throw DimensionMismatch("layer " + std::to_string(l) + " input width does not match layer " +
                              std::to_string(l - 1) + " output");
    }
    offsets_.push_back(param_count_);
    param_count_ += layers_[l].in * layers_[l].out + layers_[l].out;
  }
  if (autoencoding_ && (loss_ != LossKind::MseFrobenius || input_dim() != output_dim())) {
    throw DimensionMismatch("autoencoders need MSE loss and matching input/output widths");
  }
}

MlpModel MlpModel::autoencoder(HomotopySpec homotopy) {
  return MlpModel({{36, 16}, {16, 8}, {8, 16}, {16, 36}}, homotopy, LossKind::MseFrobenius, true);
}

MlpModel MlpModel::classifier(HomotopySpec homotopy) {
  return MlpModel({{36, 10}}, homotopy, LossKind::SoftmaxCrossEntropy, false);
}

std::vector<LayerParams> MlpModel::layer_templates() const {
  std::vector<LayerParams> out;
  for (const auto& shape : layers_) {
    out.push_back({RowMajorMatrix::Zero(shape.out, shape.in), ParamVector::Zero(shape.out)});
  }
  return out;
}

MatrixXd forward(const MlpModel& model, const ParamVector& theta, const MatrixXd& x,
                 double lambda) {
  check_shapes(model, theta, x);
  // For a loss blend this is the target (lambda = 1) network.
  const PassRule rule = target_rule(model.homotopy(), lambda);
  return std::move(run_forward(model, theta, x, lambda, rule).post.back());
}

LossGrad loss_and_grads(const MlpModel& model, const ParamVector& theta, const Batch& batch,
                        double lambda) {
  check_shapes(model, theta, batch.x);
  check_batch(model, batch);
  const PassRule rule = target_rule(model.homotopy(), lambda);
  if (model.homotopy().kind != HomotopyKind::LossBlend) {
    return evaluate_pass(model, theta, batch, lambda, rule);
  }
  // The easy problem is the same network with every activation replaced by
  // the identity, i.e. the lambda = 0 end of the activation homotopy.
  PassRule easy_rule = rule;
  easy_rule.site_lambda = 0.0;
  const LossGrad hard = evaluate_pass(model, theta, batch, lambda, rule);
  const LossGrad easy = evaluate_pass(model, theta, batch, lambda, easy_rule);
  return blended_loss(hard, easy, lambda);
}

double loss_value(const MlpModel& model, const ParamVector& theta, const Batch& batch,
                  double lambda) {
  check_shapes(model, theta, batch.x);
  check_batch(model, batch);
  const PassRule rule = target_rule(model.homotopy(), lambda);
  const double hard = task_loss(model, batch, run_forward(model, theta, batch.x, lambda, rule), false).value;
  if (model.homotopy().kind != HomotopyKind::LossBlend) {
    return hard;
  }
  PassRule easy_rule = rule;
  easy_rule.site_lambda = 0.0;
  const double easy =
      task_loss(model, batch, run_forward(model, theta, batch.x, lambda, easy_rule), false).value;
  return lambda * hard + (1.0 - lambda) * easy;
}

double accuracy(const MlpModel& model, const ParamVector& theta, const Batch& batch,
                double lambda) {
  if (static_cast<Index>(batch.labels.size()) != batch.size() || batch.size() == 0) {
    throw DimensionMismatch("accuracy needs one label per sample");
  }
  const MatrixXd out = forward(model, theta, batch.x, lambda);
  Index correct = 0;
  for (Index j = 0; j < out.cols(); ++j) {
    Index best = 0;
    out.col(j).maxCoeff(&best);
    if (best == batch.labels[static_cast<std::size_t>(j)]) {
      ++correct;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(out.cols());
}

ParamVector init_params(const MlpModel& model, InitScheme scheme, std::uint64_t seed) {
  ParamVector theta = ParamVector::Zero(model.param_count());
  if (scheme == InitScheme::Zeros) {
    return theta;
  }
  std::mt19937_64 rng(seed);
  for (std::size_t l = 0; l < model.layers().size(); ++l) {
    const auto& shape = model.layers()[l];
    const double bound = std::sqrt(6.0 / static_cast<double>(shape.in + shape.out));
    std::uniform_real_distribution<double> dist(-bound, bound);
    auto w = theta.segment(model.weight_offset(l), shape.in * shape.out);
    for (Index i = 0; i < w.size(); ++i) {
      w[i] = dist(rng);
    }
  }
  return theta;
}

}  // namespace parc
