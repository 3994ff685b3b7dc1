#pragma once

// Activation, brightness and loss-blend homotopies. The functions accept any
// Eigen array expression and evaluate elementwise.

#include <cmath>
#include <string>

#include <Eigen/Core>

#include "parc/errors.hpp"
#include "parc/param_space.hpp"

namespace parc {

enum class Activation { Identity, Relu, Sigmoid };

enum class HomotopyKind { None, HRelu, HSigmoid, HBrightness, LossBlend };

/// Which homotopy is embedded in a model.
///
/// `activation` is the nonlinearity of the target (lambda = 1) network. For
/// HRelu/HSigmoid it is implied by the kind; for None, HBrightness and
/// LossBlend it selects the plain activation used between layers.
struct HomotopySpec {
  HomotopyKind kind = HomotopyKind::None;
  Activation activation = Activation::Relu;
  double baseline_value = 0.0;

  static HomotopySpec none(Activation act) { return {HomotopyKind::None, act, 0.0}; }
  static HomotopySpec h_relu() { return {HomotopyKind::HRelu, Activation::Relu, 0.0}; }
  static HomotopySpec h_sigmoid() { return {HomotopyKind::HSigmoid, Activation::Sigmoid, 0.0}; }
  static HomotopySpec h_brightness(Activation act, double baseline = 0.0) {
    return {HomotopyKind::HBrightness, act, baseline};
  }
  static HomotopySpec loss_blend(Activation act) { return {HomotopyKind::LossBlend, act, 0.0}; }

  bool activation_homotopy() const {
    return kind == HomotopyKind::HRelu || kind == HomotopyKind::HSigmoid;
  }
};

std::string to_string(Activation act);
std::string to_string(HomotopyKind kind);
/// Accepts the table names: relu, sigmoid, h-relu, h-sigmoid, h-brightness,
/// loss-blend (optionally suffixed ":relu" / ":sigmoid" for the last two).
HomotopySpec homotopy_from_string(const std::string& name);
std::string to_string(const HomotopySpec& spec);

inline double sigmoid(double z) {
  if (z >= 0.0) {
    return 1.0 / (1.0 + std::exp(-z));
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

template <typename Derived>
auto activate(const Eigen::ArrayBase<Derived>& z, Activation act) {
  using Array = Eigen::Array<typename Derived::Scalar, Derived::RowsAtCompileTime,
                             Derived::ColsAtCompileTime>;
  switch (act) {
    case Activation::Relu:
      return Array(z.max(typename Derived::Scalar(0)));
    case Activation::Sigmoid:
      return Array(z.unaryExpr([](typename Derived::Scalar v) { return sigmoid(v); }));
    case Activation::Identity:
      break;
  }
  return Array(z);
}

/// act'(z); relu'(0) is taken as 0.
template <typename Derived>
auto activate_derivative(const Eigen::ArrayBase<Derived>& z, Activation act) {
  using Scalar = typename Derived::Scalar;
  using Array = Eigen::Array<Scalar, Derived::RowsAtCompileTime, Derived::ColsAtCompileTime>;
  switch (act) {
    case Activation::Relu:
      return Array((z > Scalar(0)).template cast<Scalar>());
    case Activation::Sigmoid:
      return Array(z.unaryExpr([](Scalar v) {
        const Scalar s = sigmoid(v);
        return s * (Scalar(1) - s);
      }));
    case Activation::Identity:
      break;
  }
  return Array(Array::Ones(z.rows(), z.cols()));
}

/// (1 - lambda) * z + lambda * act(z), elementwise.
template <typename Derived>
auto h_activation(const Eigen::ArrayBase<Derived>& z, double lambda, Activation base) {
  using Array = Eigen::Array<typename Derived::Scalar, Derived::RowsAtCompileTime,
                             Derived::ColsAtCompileTime>;
  return Array((1.0 - lambda) * z + lambda * activate(z, base));
}

template <typename Array>
struct ActivationGrad {
  Array d_z;
  Array d_lambda;
};

template <typename Derived>
auto h_activation_grad(const Eigen::ArrayBase<Derived>& z, double lambda, Activation base) {
  using Array = Eigen::Array<typename Derived::Scalar, Derived::RowsAtCompileTime,
                             Derived::ColsAtCompileTime>;
  return ActivationGrad<Array>{
      Array((1.0 - lambda) + lambda * activate_derivative(z, base)),
      Array(activate(z, base) - z),
  };
}

/// (1 - lambda) * baseline + lambda * x; lambda = 1 returns x bit-exactly.
template <typename Derived>
auto h_brightness(const Eigen::ArrayBase<Derived>& x, double lambda, double baseline) {
  using Array = Eigen::Array<typename Derived::Scalar, Derived::RowsAtCompileTime,
                             Derived::ColsAtCompileTime>;
  return Array((1.0 - lambda) * baseline + lambda * x);
}

/// A loss value with its gradients in theta and lambda.
struct LossGrad {
  double value = 0.0;
  ParamVector grad_theta;
  double grad_lambda = 0.0;
};

/// lambda * hard + (1 - lambda) * easy. Both inputs must be evaluated at the
/// same theta; their own lambda gradients are ignored.
inline LossGrad blended_loss(const LossGrad& hard, const LossGrad& easy, double lambda) {
  if (hard.grad_theta.size() != easy.grad_theta.size()) {
    throw DimensionMismatch("blended_loss: gradient lengths differ");
  }
  LossGrad out;
  out.value = lambda * hard.value + (1.0 - lambda) * easy.value;
  out.grad_theta = lambda * hard.grad_theta + (1.0 - lambda) * easy.grad_theta;
  out.grad_lambda = hard.value - easy.value;
  return out;
}

}  // namespace parc
