#include "parc/solvers.hpp"

#include "parc/errors.hpp"

namespace parc {

AdamState AdamState::zeros(Eigen::Index dim, AdamConfig config) {
  return {ParamVector::Zero(dim), ParamVector::Zero(dim), 0, config};
}

void adam_update(AdamState& state, ParamVector& theta, const ParamVector& grad) {
  if (grad.size() != theta.size() || state.m.size() != theta.size()) {
    throw DimensionMismatch("adam: gradient, state and parameter lengths differ");
  }
  if (!grad.allFinite()) {
    throw NumericalDivergence("adam: non-finite gradient");
  }
  const AdamConfig& c = state.config;
  state.t += 1;
  state.m = c.beta1 * state.m + (1.0 - c.beta1) * grad;
  state.v = c.beta2 * state.v + (1.0 - c.beta2) * grad.cwiseAbs2();
  const double m_corr = 1.0 - std::pow(c.beta1, static_cast<double>(state.t));
  const double v_corr = 1.0 - std::pow(c.beta2, static_cast<double>(state.t));
  theta.array() -=
      c.alpha * (state.m.array() / m_corr) / ((state.v.array() / v_corr).sqrt() + c.epsilon);
}

AdamResult adam_step(const AdamState& state, const ParamVector& theta, const ParamVector& grad) {
  AdamResult out{state, theta};
  adam_update(out.state, out.theta, grad);
  return out;
}

ParamVector sgd_step(const ParamVector& theta, const ParamVector& grad, double alpha) {
  if (grad.size() != theta.size()) {
    throw DimensionMismatch("sgd: gradient and parameter lengths differ");
  }
  return theta - alpha * grad;
}

std::string to_string(SolverKind kind) { return kind == SolverKind::Adam ? "adam" : "sgd"; }

void Solver::reset(Eigen::Index dim) { state_ = AdamState::zeros(dim, config_.adam); }

void Solver::step(ParamVector& x, const ParamVector& grad) {
  if (x.size() != state_.m.size()) {
    reset(x.size());
  }
  if (config_.kind == SolverKind::Adam) {
    adam_update(state_, x, grad);
    return;
  }
  if (!grad.allFinite()) {
    throw NumericalDivergence("sgd: non-finite gradient");
  }
  state_.t += 1;
  x -= config_.adam.alpha * grad;
}

}  // namespace parc
