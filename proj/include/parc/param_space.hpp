#pragma once

// Dense algebra over flattened network parameters and joint (theta, lambda)
// states. Everything here is templated on the scalar type; the rest of the
// library instantiates it with double.

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "parc/errors.hpp"

namespace parc {

template <typename Scalar>
using ParamVectorT = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using RowMajorMatrixT =
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// A point on (or near) the solution path of the homotopy.
template <typename Scalar>
struct HomotopyPointT {
  ParamVectorT<Scalar> theta;
  Scalar lambda{0};
};

/// Direction between two consecutive accepted path points.
template <typename Scalar>
struct SecantT {
  ParamVectorT<Scalar> d_theta;
  Scalar d_lambda{0};
};

/// Weights are stored (out x in) so that a layer computes W * x + b.
template <typename Scalar>
struct LayerParamsT {
  RowMajorMatrixT<Scalar> weights;
  ParamVectorT<Scalar> bias;
};

enum class NormalizationMode {
  /// Unit tangent in R^{m+1}.
  Joint,
  /// theta and lambda components normalized separately (each has unit norm).
  PaperLiteral,
};

using ParamVector = ParamVectorT<double>;
using RowMajorMatrix = RowMajorMatrixT<double>;
using HomotopyPoint = HomotopyPointT<double>;
using Secant = SecantT<double>;
using LayerParams = LayerParamsT<double>;

inline constexpr double kDefaultSecantTolerance = 1e-14;

inline std::string to_string(NormalizationMode mode) {
  return mode == NormalizationMode::Joint ? "joint" : "paper_literal";
}

inline NormalizationMode normalization_mode_from_string(const std::string& name) {
  if (name == "joint") return NormalizationMode::Joint;
  if (name == "paper_literal" || name == "paper-literal") return NormalizationMode::PaperLiteral;
  throw ConfigError("unknown normalization mode '" + name + "'");
}

template <typename Scalar>
Eigen::Index param_count(std::span<const LayerParamsT<Scalar>> layers) {
  Eigen::Index count = 0;
  for (const auto& layer : layers) {
    count += layer.weights.size() + layer.bias.size();
  }
  return count;
}

/// Layer index ascending; within a layer the weights row-major, then biases.
template <typename Scalar>
ParamVectorT<Scalar> flatten(std::span<const LayerParamsT<Scalar>> layers) {
  ParamVectorT<Scalar> out(param_count(layers));
  Eigen::Index offset = 0;
  for (const auto& layer : layers) {
    const Eigen::Index nw = layer.weights.size();
    out.segment(offset, nw) = Eigen::Map<const ParamVectorT<Scalar>>(layer.weights.data(), nw);
    offset += nw;
    out.segment(offset, layer.bias.size()) = layer.bias;
    offset += layer.bias.size();
  }
  return out;
}

/// Inverse of flatten. `shapes` supplies (weights rows, weights cols, bias
/// length) for each layer through the template layers.
template <typename Scalar>
std::vector<LayerParamsT<Scalar>> unflatten(
    const Eigen::Ref<const ParamVectorT<Scalar>>& values,
    std::span<const LayerParamsT<Scalar>> shapes) {
  if (values.size() != param_count(shapes)) {
    throw DimensionMismatch("unflatten: vector length " + std::to_string(values.size()) +
                            " does not match parameter count " +
                            std::to_string(param_count(shapes)));
  }
  std::vector<LayerParamsT<Scalar>> layers;
  layers.reserve(shapes.size());
  Eigen::Index offset = 0;
  for (const auto& shape : shapes) {
    LayerParamsT<Scalar> layer;
    layer.weights.resize(shape.weights.rows(), shape.weights.cols());
    const Eigen::Index nw = layer.weights.size();
    Eigen::Map<ParamVectorT<Scalar>>(layer.weights.data(), nw) = values.segment(offset, nw);
    offset += nw;
    layer.bias = values.segment(offset, shape.bias.size());
    offset += shape.bias.size();
    layers.push_back(std::move(layer));
  }
  return layers;
}

template <typename Scalar>
void check_same_dimension(const HomotopyPointT<Scalar>& a, const HomotopyPointT<Scalar>& b) {
  if (a.theta.size() != b.theta.size()) {
    throw DimensionMismatch("homotopy points have different parameter counts (" +
                            std::to_string(a.theta.size()) + " vs " +
                            std::to_string(b.theta.size()) + ")");
  }
}

/// Componentwise a - b, returned as a (non-normalized) secant-shaped pair.
template <typename Scalar>
SecantT<Scalar> joint_diff(const HomotopyPointT<Scalar>& a, const HomotopyPointT<Scalar>& b) {
  check_same_dimension(a, b);
  return {a.theta - b.theta, a.lambda - b.lambda};
}

template <typename Scalar>
Scalar joint_norm(const SecantT<Scalar>& v) {
  return std::sqrt(v.d_theta.squaredNorm() + v.d_lambda * v.d_lambda);
}

template <typename Scalar>
Scalar joint_distance(const HomotopyPointT<Scalar>& a, const HomotopyPointT<Scalar>& b) {
  return joint_norm(joint_diff(a, b));
}

/// Inner product of two joint vectors.
template <typename Scalar>
Scalar joint_dot(const SecantT<Scalar>& a, const SecantT<Scalar>& b) {
  return a.d_theta.dot(b.d_theta) + a.d_lambda * b.d_lambda;
}

template <typename Scalar>
SecantT<Scalar> secant_from(const HomotopyPointT<Scalar>& prev, const HomotopyPointT<Scalar>& curr,
                            NormalizationMode mode,
                            Scalar tol = Scalar(kDefaultSecantTolerance)) {
  SecantT<Scalar> diff = joint_diff(curr, prev);
  const Scalar dist = joint_norm(diff);
  if (!(dist > tol)) {
    throw DegenerateSecant("secant between coincident points (joint distance " +
                           std::to_string(static_cast<double>(dist)) + ")");
  }
  if (mode == NormalizationMode::Joint) {
    diff.d_theta /= dist;
    diff.d_lambda /= dist;
    return diff;
  }
  // Each component is scaled to unit length on its own; a zero component
  // stays zero.
  const Scalar theta_norm = diff.d_theta.norm();
  if (theta_norm > tol) {
    diff.d_theta /= theta_norm;
  }
  const Scalar lambda_abs = std::abs(diff.d_lambda);
  if (lambda_abs > tol) {
    diff.d_lambda /= lambda_abs;
  }
  return diff;
}

template <typename Scalar>
HomotopyPointT<Scalar> step_along(const HomotopyPointT<Scalar>& from, const SecantT<Scalar>& dir,
                                  Scalar ds) {
  return {from.theta + ds * dir.d_theta, from.lambda + ds * dir.d_lambda};
}

template <typename Scalar>
bool all_finite(const HomotopyPointT<Scalar>& p) {
  return p.theta.allFinite() && std::isfinite(p.lambda);
}

}  // namespace parc
