#pragma once

// Natural parameter continuation (NPC) and first-order pseudo-arclength
// continuation (PARC) over an arbitrary Objective.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "parc/objective.hpp"
#include "parc/param_space.hpp"
#include "parc/solvers.hpp"

namespace parc {

enum class ScheduleKind { Standard, Npc, Parc };

std::string to_string(ScheduleKind kind);

struct TracePoint {
  HomotopyPoint point;
  /// Cumulative joint distance travelled along the trace.
  double s = 0.0;
  double loss = 0.0;
  /// ||grad_theta loss|| of the deterministic objective at the point.
  double grad_norm = 0.0;
  int corrector_steps = 0;
  double penalty_residual = 0.0;
  /// Deterministic loss at the warm-start (predicted) point.
  double warm_start_loss = 0.0;
  double wall_ms = 0.0;
};

struct ContinuationTrace {
  ScheduleKind kind = ScheduleKind::Npc;
  std::vector<TracePoint> points;
  /// Corrector gradient steps consumed across the whole run.
  std::int64_t gradient_steps = 0;

  /// Appends `p`, filling in its arclength from the previous point.
  void append(TracePoint p);
  const TracePoint& back() const { return points.back(); }
  bool empty() const { return points.empty(); }
  std::size_t size() const { return points.size(); }
};

struct CorrectorCriteria {
  int max_steps = 1000;
  /// Stop once the joint gradient norm of the corrected loss is below this;
  /// 0 disables the check (fixed-budget corrector).
  double grad_norm_tol = 0.0;
  /// If set, hitting max_steps above grad_norm_tol is a CorrectorFailed.
  bool require_convergence = false;
};

struct CorrectorDiagnostics {
  int steps = 0;
  double final_loss = 0.0;
  double grad_norm = 0.0;
  double penalty_residual = 0.0;
  bool converged = false;
};

struct CorrectorResult {
  HomotopyPoint point;
  CorrectorDiagnostics diagnostics;
};

struct CorrectorFailed : std::runtime_error {
  CorrectorFailed(const std::string& what, HomotopyPoint best_iterate, CorrectorDiagnostics diag)
      : std::runtime_error(what), best(std::move(best_iterate)), diagnostics(diag) {}
  HomotopyPoint best;
  CorrectorDiagnostics diagnostics;
};

struct ContinuationStalled : std::runtime_error {
  ContinuationStalled(const std::string& what, std::size_t at_step, ContinuationTrace partial_trace)
      : std::runtime_error(what), step(at_step), partial(std::move(partial_trace)) {}
  std::size_t step;
  ContinuationTrace partial;
};

struct MaxStepsExceeded : std::runtime_error {
  MaxStepsExceeded(const std::string& what, ContinuationTrace partial_trace)
      : std::runtime_error(what), partial(std::move(partial_trace)) {}
  ContinuationTrace partial;
};

enum class PenaltyForm {
  /// gamma * (dz . zdot)^2
  Squared,
  /// gamma * (dz . zdot). Unbounded below; kept for comparison runs.
  Linear,
};

std::string to_string(PenaltyForm form);
PenaltyForm penalty_form_from_string(const std::string& name);

struct PenaltyOptions {
  double gamma = 10.0;
  PenaltyForm form = PenaltyForm::Squared;
  /// Keep lambda at its predicted value (NPC-style corrector).
  bool freeze_lambda = false;
};

struct NpcConfig {
  int n_steps = 10;
  double lambda_start = 0.0;
  double lambda_end = 1.0;
  CorrectorCriteria initial;
  CorrectorCriteria step;
  /// Criteria for the last stage (lambda = lambda_end); defaults to `step`.
  std::optional<CorrectorCriteria> final;
};

struct ParcConfig {
  double ds = 0.05;
  double gamma = 10.0;
  PenaltyForm penalty_form = PenaltyForm::Squared;
  NormalizationMode normalization_mode = NormalizationMode::Joint;
  double bootstrap_dlambda = 0.02;
  int max_steps = 200;
  double lambda_start = 0.0;
  double lambda_target = 1.0;
  /// Stop (successfully) once lambda drops below this after leaving the
  /// start; used to follow a path back around a fold.
  std::optional<double> lambda_floor;
  /// Run one fixed-lambda correction at exactly lambda_target at the end.
  bool finalize_at_target = true;
  /// Gradient steps available to the predict/correct loop; once fewer than
  /// one corrector's worth remain the loop ends and finalization follows.
  std::optional<std::int64_t> loop_budget;
  /// Replace the secant predictor by the NPC grid lambda_k = a + (b-a)k/N
  /// with theta unchanged and lambda frozen in the corrector.
  std::optional<int> frozen_schedule_steps;
  /// When set, the final correction's step cap is raised to spend whatever
  /// is left of this many gradient steps.
  std::optional<std::int64_t> total_budget;

  CorrectorCriteria initial;
  CorrectorCriteria step;
  CorrectorCriteria final;

  void validate() const;
};

/// Gradient corrector at fixed lambda (the NPC corrector).
CorrectorResult correct_fixed_lambda(Objective& objective, const ParamVector& theta0, double lambda,
                                     Solver& solver, const CorrectorCriteria& criteria);

/// Penalized corrector: minimizes loss + penalty(dz . secant) over (theta,
/// lambda), starting from the predicted point.
CorrectorResult parc_correct(Objective& objective, const HomotopyPoint& predicted,
                             const Secant& secant, Solver& solver, const PenaltyOptions& penalty,
                             const CorrectorCriteria& criteria);

/// curr + ds * secant_from(prev, curr, mode).
HomotopyPoint parc_predict(const HomotopyPoint& prev, const HomotopyPoint& curr, double ds,
                           NormalizationMode mode);

/// The NPC grid value a + (b - a) * l / n, exact at both ends.
double npc_lambda(double a, double b, int l, int n);

ContinuationTrace npc_run(Objective& objective, const SolverConfig& solver, const NpcConfig& config,
                          const ParamVector& theta0);

ContinuationTrace parc_run(Objective& objective, const SolverConfig& solver,
                           const ParcConfig& config, const ParamVector& theta0);

/// ||grad_theta L(theta, lambda)|| on the deterministic objective.
double critical_residual(Objective& objective, const HomotopyPoint& point);

}  // namespace parc
