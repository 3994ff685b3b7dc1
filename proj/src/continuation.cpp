#include "parc/continuation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace parc {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

TracePoint make_trace_point(Objective& objective, const HomotopyPoint& point,
                            const CorrectorDiagnostics& diag, double warm_start_loss,
                            Clock::time_point started) {
  const LossGrad ref = objective.evaluate_reference(point.theta, point.lambda);
  TracePoint tp;
  tp.point = point;
  tp.loss = ref.value;
  tp.grad_norm = ref.grad_theta.norm();
  tp.corrector_steps = diag.steps;
  tp.penalty_residual = diag.penalty_residual;
  tp.warm_start_loss = warm_start_loss;
  tp.wall_ms = elapsed_ms(started);
  return tp;
}

double reference_loss(Objective& objective, const HomotopyPoint& point) {
  return objective.evaluate_reference(point.theta, point.lambda).value;
}

// Offset of `z` from the predicted point projected on the secant.
double constraint_value(const ParamVector& theta, double lambda, const HomotopyPoint& predicted,
                        const Secant& secant) {
  return (theta - predicted.theta).dot(secant.d_theta) +
         (lambda - predicted.lambda) * secant.d_lambda;
}

}  // namespace

std::string to_string(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::Standard: return "standard";
    case ScheduleKind::Npc: return "npc";
    case ScheduleKind::Parc: return "parc";
  }
  return "?";
}

std::string to_string(PenaltyForm form) {
  return form == PenaltyForm::Squared ? "squared" : "linear";
}

PenaltyForm penalty_form_from_string(const std::string& name) {
  if (name == "squared") return PenaltyForm::Squared;
  if (name == "linear") return PenaltyForm::Linear;
  throw ConfigError("unknown penalty form '" + name + "'");
}

void ContinuationTrace::append(TracePoint p) {
  if (!points.empty()) {
    p.s = points.back().s + joint_distance(p.point, points.back().point);
  } else {
    p.s = 0.0;
  }
  points.push_back(std::move(p));
}

void ParcConfig::validate() const {
  if (!(ds > 0.0)) throw ConfigError("ds must be positive");
  if (!(gamma >= 0.0)) throw ConfigError("gamma must be non-negative");
  if (max_steps < 0) throw ConfigError("max_steps must be non-negative");
  if (bootstrap_dlambda == 0.0 && !frozen_schedule_steps) {
    throw ConfigError("bootstrap_dlambda must be non-zero");
  }
  if (frozen_schedule_steps && *frozen_schedule_steps < 1) {
    throw ConfigError("frozen schedule needs at least one step");
  }
}

double npc_lambda(double a, double b, int l, int n) {
  if (l == n) return b;
  return a + (b - a) * l / n;
}

CorrectorResult correct_fixed_lambda(Objective& objective, const ParamVector& theta0, double lambda,
                                     Solver& solver, const CorrectorCriteria& criteria) {
  solver.reset(theta0.size());
  ParamVector theta = theta0;
  CorrectorDiagnostics diag;
  const bool check_tol = criteria.grad_norm_tol > 0.0;
  ParamVector best = theta0;
  double best_norm = std::numeric_limits<double>::infinity();
  while (true) {
    if (diag.steps == criteria.max_steps && !check_tol) break;
    const LossGrad eval = objective.evaluate(theta, lambda);
    diag.final_loss = eval.value;
    diag.grad_norm = eval.grad_theta.norm();
    if (diag.grad_norm < best_norm) {
      best_norm = diag.grad_norm;
      best = theta;
    }
    if (check_tol && diag.grad_norm <= criteria.grad_norm_tol) {
      diag.converged = true;
      break;
    }
    if (diag.steps == criteria.max_steps) break;
    solver.step(theta, eval.grad_theta);
    ++diag.steps;
    if (!theta.allFinite()) {
      throw NumericalDivergence("fixed-lambda corrector diverged");
    }
  }
  if (criteria.require_convergence && !diag.converged) {
    throw CorrectorFailed("fixed-lambda corrector did not converge in " +
                              std::to_string(criteria.max_steps) + " steps",
                          {best, lambda}, diag);
  }
  return {{std::move(theta), lambda}, diag};
}

CorrectorResult parc_correct(Objective& objective, const HomotopyPoint& predicted,
                             const Secant& secant, Solver& solver, const PenaltyOptions& penalty,
                             const CorrectorCriteria& criteria) {
  if (!(penalty.gamma >= 0.0)) throw ConfigError("gamma must be non-negative");
  if (predicted.theta.size() != secant.d_theta.size()) {
    throw DimensionMismatch("secant and predicted point have different dimensions");
  }
  const Eigen::Index m = predicted.theta.size();
  const bool free_lambda = !penalty.freeze_lambda;
  // Joint iterate: theta followed by lambda when lambda is free.
  ParamVector z(free_lambda ? m + 1 : m);
  z.head(m) = predicted.theta;
  if (free_lambda) z[m] = predicted.lambda;
  solver.reset(z.size());

  auto lambda_of = [&](const ParamVector& v) { return free_lambda ? v[m] : predicted.lambda; };

  CorrectorDiagnostics diag;
  const bool check_tol = criteria.grad_norm_tol > 0.0;
  ParamVector best = z;
  double best_norm = std::numeric_limits<double>::infinity();
  ParamVector grad(z.size());
  while (true) {
    if (diag.steps == criteria.max_steps && !check_tol) break;
    const double lambda = lambda_of(z);
    const ParamVector theta = z.head(m);
    const LossGrad eval = objective.evaluate(theta, lambda);
    const double c = constraint_value(theta, lambda, predicted, secant);
    // d(penalty)/dc
    const double dpen =
        penalty.form == PenaltyForm::Squared ? 2.0 * penalty.gamma * c : penalty.gamma;
    grad.head(m) = eval.grad_theta + dpen * secant.d_theta;
    if (free_lambda) grad[m] = eval.grad_lambda + dpen * secant.d_lambda;
    diag.final_loss = eval.value + (penalty.form == PenaltyForm::Squared
                                        ? penalty.gamma * c * c
                                        : penalty.gamma * c);
    diag.grad_norm = grad.norm();
    if (diag.grad_norm < best_norm) {
      best_norm = diag.grad_norm;
      best = z;
    }
    if (check_tol && diag.grad_norm <= criteria.grad_norm_tol) {
      diag.converged = true;
      break;
    }
    if (diag.steps == criteria.max_steps) break;
    solver.step(z, grad);
    ++diag.steps;
    if (!z.allFinite()) {
      throw NumericalDivergence("pseudo-arclength corrector diverged");
    }
  }
  HomotopyPoint out{z.head(m), lambda_of(z)};
  diag.penalty_residual = std::abs(constraint_value(out.theta, out.lambda, predicted, secant));
  if (criteria.require_convergence && !diag.converged) {
    throw CorrectorFailed("pseudo-arclength corrector did not converge in " +
                              std::to_string(criteria.max_steps) + " steps",
                          {best.head(m), lambda_of(best)}, diag);
  }
  return {std::move(out), diag};
}

HomotopyPoint parc_predict(const HomotopyPoint& prev, const HomotopyPoint& curr, double ds,
                           NormalizationMode mode) {
  return step_along(curr, secant_from(prev, curr, mode), ds);
}

ContinuationTrace npc_run(Objective& objective, const SolverConfig& solver_config,
                          const NpcConfig& config, const ParamVector& theta0) {
  if (config.n_steps < 1) throw ConfigError("NPC needs at least one step");
  if (theta0.size() != objective.dimension()) {
    throw DimensionMismatch("theta0 does not match the objective dimension");
  }
  Solver solver(solver_config);
  ContinuationTrace trace;
  trace.kind = ScheduleKind::Npc;
  ParamVector theta = theta0;
  for (int l = 0; l <= config.n_steps; ++l) {
    const auto started = Clock::now();
    const double lambda = npc_lambda(config.lambda_start, config.lambda_end, l, config.n_steps);
    const double warm = reference_loss(objective, {theta, lambda});
    CorrectorResult result;
    try {
      result = correct_fixed_lambda(objective, theta, lambda, solver,
                                    l == 0                 ? config.initial
                                    : l == config.n_steps ? config.final.value_or(config.step)
                                                          : config.step);
    } catch (const CorrectorFailed& e) {
      trace.gradient_steps += e.diagnostics.steps;
      throw ContinuationStalled("NPC stalled at lambda=" + std::to_string(lambda) + ": " + e.what(),
                                static_cast<std::size_t>(l), trace);
    } catch (const NumericalDivergence& e) {
      throw ContinuationStalled("NPC diverged at lambda=" + std::to_string(lambda) + ": " + e.what(),
                                static_cast<std::size_t>(l), trace);
    }
    trace.gradient_steps += result.diagnostics.steps;
    theta = result.point.theta;
    trace.append(make_trace_point(objective, result.point, result.diagnostics, warm, started));
  }
  return trace;
}

ContinuationTrace parc_run(Objective& objective, const SolverConfig& solver_config,
                           const ParcConfig& config, const ParamVector& theta0) {
  config.validate();
  if (theta0.size() != objective.dimension()) {
    throw DimensionMismatch("theta0 does not match the objective dimension");
  }
  Solver solver(solver_config);
  ContinuationTrace trace;
  trace.kind = ScheduleKind::Parc;

  auto fixed_stage = [&](const ParamVector& theta, double lambda, const CorrectorCriteria& criteria,
                         std::size_t step_index) {
    const auto started = Clock::now();
    const double warm = reference_loss(objective, {theta, lambda});
    try {
      CorrectorResult r = correct_fixed_lambda(objective, theta, lambda, solver, criteria);
      trace.gradient_steps += r.diagnostics.steps;
      trace.append(make_trace_point(objective, r.point, r.diagnostics, warm, started));
    } catch (const CorrectorFailed& e) {
      trace.gradient_steps += e.diagnostics.steps;
      throw ContinuationStalled(std::string("fixed-lambda stage failed: ") + e.what(), step_index,
                                trace);
    } catch (const NumericalDivergence& e) {
      throw ContinuationStalled(std::string("fixed-lambda stage diverged: ") + e.what(), step_index,
                                trace);
    }
  };

  const int frozen_n = config.frozen_schedule_steps.value_or(0);
  fixed_stage(theta0, config.lambda_start, config.initial, 0);
  const double bootstrap_lambda =
      frozen_n > 0 ? npc_lambda(config.lambda_start, config.lambda_target, 1, frozen_n)
                   : config.lambda_start + config.bootstrap_dlambda;
  fixed_stage(trace.back().point.theta, bootstrap_lambda, config.step, 1);

  PenaltyOptions penalty{config.gamma, config.penalty_form, frozen_n > 0};
  std::int64_t loop_spent = 0;
  bool reached_floor = false;
  int loop_steps = 0;
  while (true) {
    const HomotopyPoint& curr = trace.back().point;
    if (curr.lambda >= config.lambda_target) break;
    if (config.lambda_floor && curr.lambda < *config.lambda_floor) {
      reached_floor = true;
      break;
    }
    if (config.loop_budget && *config.loop_budget - loop_spent < config.step.max_steps) break;
    if (loop_steps == config.max_steps) {
      if (config.finalize_at_target) break;
      throw MaxStepsExceeded("PARC hit max_steps=" + std::to_string(config.max_steps) +
                                 " before reaching lambda_target",
                             trace);
    }
    const HomotopyPoint& prev = trace.points[trace.size() - 2].point;
    const auto started = Clock::now();

    auto attempt = [&](double ds) -> std::pair<CorrectorResult, double> {
      HomotopyPoint predicted;
      Secant secant;
      if (frozen_n > 0) {
        predicted = {curr.theta, npc_lambda(config.lambda_start, config.lambda_target,
                                            loop_steps + 2, frozen_n)};
        secant = {ParamVector::Zero(curr.theta.size()), 1.0};
      } else {
        secant = secant_from(prev, curr, config.normalization_mode);
        predicted = step_along(curr, secant, ds);
      }
      const double warm = reference_loss(objective, predicted);
      return {parc_correct(objective, predicted, secant, solver, penalty, config.step), warm};
    };

    std::pair<CorrectorResult, double> accepted;
    try {
      accepted = attempt(config.ds);
    } catch (const std::runtime_error& first) {
      const auto* failed = dynamic_cast<const CorrectorFailed*>(&first);
      if (failed == nullptr && dynamic_cast<const NumericalDivergence*>(&first) == nullptr) throw;
      if (failed != nullptr) trace.gradient_steps += failed->diagnostics.steps;
      try {
        accepted = attempt(0.5 * config.ds);
      } catch (const CorrectorFailed& second) {
        trace.gradient_steps += second.diagnostics.steps;
        throw ContinuationStalled(std::string("PARC corrector failed twice: ") + second.what(),
                                  trace.size(), trace);
      } catch (const NumericalDivergence& second) {
        throw ContinuationStalled(std::string("PARC corrector diverged twice: ") + second.what(),
                                  trace.size(), trace);
      }
    }
    auto& [result, warm] = accepted;
    trace.gradient_steps += result.diagnostics.steps;
    loop_spent += result.diagnostics.steps;
    ++loop_steps;
    trace.append(make_trace_point(objective, result.point, result.diagnostics, warm, started));
  }

  if (config.finalize_at_target && !reached_floor &&
      trace.back().point.lambda != config.lambda_target) {
    CorrectorCriteria final_criteria = config.final;
    if (config.total_budget) {
      final_criteria.max_steps = static_cast<int>(std::max<std::int64_t>(
          final_criteria.max_steps, *config.total_budget - trace.gradient_steps));
    }
    fixed_stage(trace.back().point.theta, config.lambda_target, final_criteria, trace.size());
  }
  return trace;
}

double critical_residual(Objective& objective, const HomotopyPoint& point) {
  return objective.evaluate_reference(point.theta, point.lambda).grad_theta.norm();
}

}  // namespace parc
