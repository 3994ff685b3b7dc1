#include "parc/analytic_testbed.hpp"

#include <chrono>
#include <cmath>

#include <Eigen/LU>

namespace parc {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

TracePoint analytic_point(const RootProblem& problem, const HomotopyPoint& point, int iterations,
                          double constraint_residual) {
  const VectorXd h = problem.residual(point.theta, point.lambda);
  const MatrixXd jac = problem.jacobian(point.theta, point.lambda);
  TracePoint tp;
  tp.point = point;
  tp.loss = 0.5 * h.squaredNorm();
  tp.grad_norm = (jac.leftCols(problem.dimension).transpose() * h).norm();
  tp.corrector_steps = iterations;
  tp.penalty_residual = constraint_residual;
  tp.warm_start_loss = tp.loss;
  return tp;
}

VectorXd solve_checked(const MatrixXd& a, const VectorXd& b, double singular_rcond) {
  Eigen::PartialPivLU<MatrixXd> lu(a);
  if (!(lu.rcond() > singular_rcond)) {
    throw SingularSystem("Newton system is singular (rcond " + std::to_string(lu.rcond()) + ")");
  }
  return lu.solve(b);
}

}  // namespace

RootProblem fold_problem() {
  RootProblem p;
  p.name = "fold";
  p.dimension = 1;
  p.residual = [](const ParamVector& theta, double lambda) {
    VectorXd h(1);
    h[0] = theta[0] * theta[0] + lambda - 1.0;
    return h;
  };
  p.jacobian = [](const ParamVector& theta, double) {
    MatrixXd j(1, 2);
    j << 2.0 * theta[0], 1.0;
    return j;
  };
  return p;
}

RootProblem logistic_fixed_points() {
  RootProblem p;
  p.name = "logistic";
  p.dimension = 1;
  p.residual = [](const ParamVector& theta, double lambda) {
    VectorXd h(1);
    const double x = theta[0];
    h[0] = lambda * x * (1.0 - x) - x;
    return h;
  };
  p.jacobian = [](const ParamVector& theta, double lambda) {
    const double x = theta[0];
    MatrixXd j(1, 2);
    j << lambda * (1.0 - 2.0 * x) - 1.0, x * (1.0 - x);
    return j;
  };
  return p;
}

NewtonResult newton_corrector(const RootProblem& problem, const HomotopyPoint& predicted,
                              const Secant& secant, const NewtonOptions& options) {
  const Eigen::Index n = problem.dimension;
  if (predicted.theta.size() != n || secant.d_theta.size() != n) {
    throw DimensionMismatch("newton_corrector: point/secant dimension does not match problem");
  }
  NewtonResult result;
  ParamVector theta = predicted.theta;
  double lambda = predicted.lambda;
  MatrixXd aug(n + 1, n + 1);
  VectorXd rhs(n + 1);
  for (int k = 0;; ++k) {
    const VectorXd h = problem.residual(theta, lambda);
    const double c = (theta - predicted.theta).dot(secant.d_theta) +
                     (lambda - predicted.lambda) * secant.d_lambda;
    const double h_norm = h.lpNorm<Eigen::Infinity>();
    result.residual_history.push_back(std::max(h_norm, std::abs(c)));
    if (h_norm <= options.tol && std::abs(c) <= options.tol) {
      result.iterations = k;
      result.point = {theta, lambda};
      return result;
    }
    if (k == options.max_iters || !std::isfinite(result.residual_history.back())) {
      throw CorrectorFailed("augmented Newton did not converge in " +
                                std::to_string(options.max_iters) + " iterations",
                            {theta, lambda}, CorrectorDiagnostics{k, 0.5 * h.squaredNorm(), h_norm,
                                                                  std::abs(c), false});
    }
    aug.topRows(n) = problem.jacobian(theta, lambda);
    aug.row(n).head(n) = secant.d_theta.transpose();
    aug(n, n) = secant.d_lambda;
    rhs.head(n) = -h;
    rhs[n] = -c;
    const VectorXd dz = solve_checked(aug, rhs, options.singular_rcond);
    theta += dz.head(n);
    lambda += dz[n];
  }
}

NewtonResult newton_fixed_lambda(const RootProblem& problem, const ParamVector& theta0,
                                 double lambda, const NewtonOptions& options) {
  const Eigen::Index n = problem.dimension;
  if (theta0.size() != n) {
    throw DimensionMismatch("newton_fixed_lambda: theta dimension does not match problem");
  }
  NewtonResult result;
  ParamVector theta = theta0;
  for (int k = 0;; ++k) {
    const VectorXd h = problem.residual(theta, lambda);
    const double h_norm = h.lpNorm<Eigen::Infinity>();
    result.residual_history.push_back(h_norm);
    if (h_norm <= options.tol) {
      result.iterations = k;
      result.point = {theta, lambda};
      return result;
    }
    if (k == options.max_iters || !std::isfinite(h_norm)) {
      throw CorrectorFailed("fixed-lambda Newton did not converge in " +
                                std::to_string(options.max_iters) + " iterations at lambda=" +
                                std::to_string(lambda),
                            {theta, lambda},
                            CorrectorDiagnostics{k, 0.5 * h.squaredNorm(), h_norm, 0.0, false});
    }
    const MatrixXd jac = problem.jacobian(theta, lambda).leftCols(n);
    theta += solve_checked(jac, -h, options.singular_rcond);
  }
}

ContinuationTrace parc_run_analytic(const RootProblem& problem, const ParamVector& theta0,
                                    const AnalyticRunConfig& config) {
  if (!(config.ds > 0.0)) throw ConfigError("ds must be positive");
  ContinuationTrace trace;
  trace.kind = ScheduleKind::Parc;

  auto fixed = [&](const ParamVector& theta, double lambda) {
    try {
      const NewtonResult r = newton_fixed_lambda(problem, theta, lambda, config.newton);
      trace.gradient_steps += r.iterations;
      trace.append(analytic_point(problem, r.point, r.iterations, 0.0));
    } catch (const std::runtime_error& e) {
      throw ContinuationStalled(std::string("start-up Newton failed: ") + e.what(), trace.size(),
                                trace);
    }
  };
  fixed(theta0, config.lambda_start);
  fixed(trace.back().point.theta, config.lambda_start + config.bootstrap_dlambda);

  for (int step = 0; step < config.max_steps; ++step) {
    const HomotopyPoint& curr = trace.back().point;
    if (config.lambda_floor && curr.lambda < *config.lambda_floor) break;
    if (config.lambda_ceiling && curr.lambda >= *config.lambda_ceiling) break;
    const HomotopyPoint& prev = trace.points[trace.size() - 2].point;
    const auto started = std::chrono::steady_clock::now();
    const Secant secant = secant_from(prev, curr, NormalizationMode::Joint);
    const HomotopyPoint predicted = step_along(curr, secant, config.ds);
    NewtonResult r;
    try {
      r = newton_corrector(problem, predicted, secant, config.newton);
    } catch (const std::runtime_error& e) {
      throw ContinuationStalled(std::string("augmented Newton failed: ") + e.what(), trace.size(),
                                trace);
    }
    const double c = (r.point.theta - predicted.theta).dot(secant.d_theta) +
                     (r.point.lambda - predicted.lambda) * secant.d_lambda;
    trace.gradient_steps += r.iterations;
    TracePoint tp = analytic_point(problem, r.point, r.iterations, std::abs(c));
    tp.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                           started)
                     .count();
    trace.append(std::move(tp));
  }
  return trace;
}

ContinuationTrace npc_run_analytic(const RootProblem& problem, const ParamVector& theta0,
                                   int n_steps, double lambda_start, double lambda_end,
                                   const NewtonOptions& options) {
  if (n_steps < 1) throw ConfigError("NPC needs at least one step");
  ContinuationTrace trace;
  trace.kind = ScheduleKind::Npc;
  ParamVector theta = theta0;
  for (int l = 0; l <= n_steps; ++l) {
    const double lambda = npc_lambda(lambda_start, lambda_end, l, n_steps);
    NewtonResult r;
    try {
      r = newton_fixed_lambda(problem, theta, lambda, options);
    } catch (const std::runtime_error& e) {
      throw ContinuationStalled(std::string("NPC stalled: ") + e.what(),
                                static_cast<std::size_t>(l), trace);
    }
    trace.gradient_steps += r.iterations;
    theta = r.point.theta;
    trace.append(analytic_point(problem, r.point, r.iterations, 0.0));
  }
  return trace;
}

LossGrad LeastSquaresObjective::evaluate(const ParamVector& theta, double lambda) {
  count_evaluation();
  return evaluate_reference(theta, lambda);
}

LossGrad LeastSquaresObjective::evaluate_reference(const ParamVector& theta, double lambda) {
  const VectorXd h = problem_.residual(theta, lambda);
  const MatrixXd jac = problem_.jacobian(theta, lambda);
  LossGrad out;
  out.value = 0.5 * h.squaredNorm();
  out.grad_theta = jac.leftCols(problem_.dimension).transpose() * h;
  out.grad_lambda = jac.col(problem_.dimension).dot(h);
  return out;
}

}  // namespace parc
