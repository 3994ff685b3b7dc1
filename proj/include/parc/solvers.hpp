#pragma once

#include <cstdint>
#include <string>

#include "parc/param_space.hpp"

namespace parc {

struct AdamConfig {
  double alpha = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  ParamVector m;
  ParamVector v;
  std::int64_t t = 0;
  AdamConfig config;

  static AdamState zeros(Eigen::Index dim, AdamConfig config = {});
};

struct AdamResult {
  AdamState state;
  ParamVector theta;
};

/// One bias-corrected ADAM update. Throws NumericalDivergence on a non-finite
/// gradient.
AdamResult adam_step(const AdamState& state, const ParamVector& theta, const ParamVector& grad);

/// In-place variant used by the training loops.
void adam_update(AdamState& state, ParamVector& theta, const ParamVector& grad);

ParamVector sgd_step(const ParamVector& theta, const ParamVector& grad, double alpha);

enum class SolverKind { Adam, Sgd };

std::string to_string(SolverKind kind);

struct SolverConfig {
  SolverKind kind = SolverKind::Adam;
  AdamConfig adam;

  double learning_rate() const { return adam.alpha; }
};

/// A first-order solver with its own state; reset between corrector runs.
class Solver {
 public:
  explicit Solver(SolverConfig config = {}) : config_(config) {}

  void reset(Eigen::Index dim);
  void step(ParamVector& x, const ParamVector& grad);

  const SolverConfig& config() const { return config_; }
  std::int64_t steps_taken() const { return state_.t; }

 private:
  SolverConfig config_;
  AdamState state_;
};

}  // namespace parc
