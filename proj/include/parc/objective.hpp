#pragma once

#include <cstdint>

#include "parc/homotopy.hpp"
#include "parc/param_space.hpp"

namespace parc {

/// A homotopy loss L(theta, lambda) seen by the correctors.
class Objective {
 public:
  virtual ~Objective() = default;

  virtual Eigen::Index dimension() const = 0;

  /// Loss and gradients for one corrector step. May be stochastic (e.g. a
  /// minibatch) and may advance internal state.
  virtual LossGrad evaluate(const ParamVector& theta, double lambda) = 0;

  /// Deterministic evaluation used for trace records and diagnostics. Must
  /// not advance any state that `evaluate` depends on.
  virtual LossGrad evaluate_reference(const ParamVector& theta, double lambda) = 0;

  std::int64_t evaluations() const { return evaluations_; }

 protected:
  void count_evaluation() { ++evaluations_; }

 private:
  std::int64_t evaluations_ = 0;
};

}  // namespace parc
