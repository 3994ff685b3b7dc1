#pragma once

// Low-dimensional root systems H(theta, lambda) = 0 with known solution paths,
// traced with an augmented-system Newton corrector.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "parc/continuation.hpp"
#include "parc/objective.hpp"
#include "parc/param_space.hpp"

namespace parc {

struct RootProblem {
  std::string name;
  Eigen::Index dimension = 1;
  /// H(theta, lambda) in R^n.
  std::function<Eigen::VectorXd(const ParamVector&, double)> residual;
  /// n x (n + 1) Jacobian; the last column is dH/dlambda.
  std::function<Eigen::MatrixXd(const ParamVector&, double)> jacobian;
};

/// H(theta, lambda) = theta^2 + lambda - 1: branches theta = +-sqrt(1 - lambda)
/// joined by a fold at (0, 1).
RootProblem fold_problem();

/// H(theta, lambda) = lambda * theta * (1 - theta) - theta: fixed points of
/// the logistic map, branches theta = 0 and theta = 1 - 1/lambda crossing at
/// (0, 1).
RootProblem logistic_fixed_points();

struct NewtonOptions {
  double tol = 1e-10;
  int max_iters = 8;
  /// Reciprocal condition estimate below which the system counts as singular.
  double singular_rcond = 1e-13;
};

struct NewtonResult {
  HomotopyPoint point;
  int iterations = 0;
  /// Max-norm of the full residual before each iteration (and at the end).
  std::vector<double> residual_history;
};

/// Newton on the square system [H(theta, lambda); (z - predicted) . secant] = 0.
/// Throws SingularSystem or CorrectorFailed.
NewtonResult newton_corrector(const RootProblem& problem, const HomotopyPoint& predicted,
                              const Secant& secant, const NewtonOptions& options = {});

/// Newton in theta alone at fixed lambda (the NPC corrector).
NewtonResult newton_fixed_lambda(const RootProblem& problem, const ParamVector& theta0,
                                 double lambda, const NewtonOptions& options = {});

struct AnalyticRunConfig {
  double ds = 0.05;
  double bootstrap_dlambda = 0.05;
  double lambda_start = 0.0;
  int max_steps = 200;
  /// Stop once lambda falls below this value.
  std::optional<double> lambda_floor = 0.0;
  /// Stop once lambda reaches this value.
  std::optional<double> lambda_ceiling;
  NewtonOptions newton;
};

/// Secant predictor (joint normalization) plus augmented Newton corrector.
ContinuationTrace parc_run_analytic(const RootProblem& problem, const ParamVector& theta0,
                                    const AnalyticRunConfig& config);

/// NPC on the grid lambda_l = a + (b - a) l / n with a fixed-lambda Newton
/// corrector. Throws ContinuationStalled when Newton fails.
ContinuationTrace npc_run_analytic(const RootProblem& problem, const ParamVector& theta0,
                                   int n_steps, double lambda_start, double lambda_end,
                                   const NewtonOptions& options = {});

/// 0.5 * ||H||^2 as an Objective, so the penalty corrector can run on a root
/// problem.
class LeastSquaresObjective final : public Objective {
 public:
  explicit LeastSquaresObjective(RootProblem problem) : problem_(std::move(problem)) {}

  Eigen::Index dimension() const override { return problem_.dimension; }
  LossGrad evaluate(const ParamVector& theta, double lambda) override;
  LossGrad evaluate_reference(const ParamVector& theta, double lambda) override;

  const RootProblem& problem() const { return problem_; }

 private:
  RootProblem problem_;
};

}  // namespace parc
