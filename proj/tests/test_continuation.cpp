#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "parc/continuation.hpp"
#include "parc/data.hpp"
#include "parc/models.hpp"
#include "parc/network_objective.hpp"
#include "parc/trace_io.hpp"

using namespace parc;

namespace {

// L = 0.5 ||theta - lambda a||^2 + offset: critical points theta = lambda a.
class ShiftedQuadratic final : public Objective {
 public:
  ShiftedQuadratic(ParamVector a, double offset = 0.0, double blowup_above = 2.0)
      : a_(std::move(a)), offset_(offset), blowup_above_(blowup_above) {}

  Eigen::Index dimension() const override { return a_.size(); }
  LossGrad evaluate(const ParamVector& theta, double lambda) override {
    count_evaluation();
    return evaluate_reference(theta, lambda);
  }
  LossGrad evaluate_reference(const ParamVector& theta, double lambda) override {
    const ParamVector r = theta - lambda * a_;
    LossGrad out{0.5 * r.squaredNorm() + offset_, r, -a_.dot(r)};
    if (lambda > blowup_above_) out.grad_theta.setConstant(std::numeric_limits<double>::quiet_NaN());
    return out;
  }

 private:
  ParamVector a_;
  double offset_;
  double blowup_above_;
};

class ZeroObjective final : public Objective {
 public:
  explicit ZeroObjective(Eigen::Index n) : n_(n) {}
  Eigen::Index dimension() const override { return n_; }
  LossGrad evaluate(const ParamVector& theta, double) override {
    count_evaluation();
    return {0.0, ParamVector::Zero(theta.size()), 0.0};
  }
  LossGrad evaluate_reference(const ParamVector& theta, double l) override { return evaluate(theta, l); }

 private:
  Eigen::Index n_;
};

SolverConfig sgd(double alpha) {
  SolverConfig c;
  c.kind = SolverKind::Sgd;
  c.adam.alpha = alpha;
  return c;
}

ParamVector vec(std::initializer_list<double> v) {
  ParamVector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

CorrectorCriteria tol_criteria(double tol, int max_steps = 20000) {
  return {max_steps, tol, true};
}

}  // namespace

TEST_CASE("parc_predict examples") {
  const HomotopyPoint prev{vec({0.0}), 0.0};
  const HomotopyPoint curr{vec({0.6}), 0.8};
  const HomotopyPoint p = parc_predict(prev, curr, 0.1, NormalizationMode::Joint);
  CHECK(p.theta[0] == doctest::Approx(0.66).epsilon(1e-14));
  CHECK(p.lambda == doctest::Approx(0.88).epsilon(1e-14));

  const HomotopyPoint same = parc_predict(prev, curr, 0.0, NormalizationMode::Joint);
  CHECK(same.theta == curr.theta);
  CHECK(same.lambda == curr.lambda);

  const HomotopyPoint lit = parc_predict(prev, curr, 0.1, NormalizationMode::PaperLiteral);
  CHECK(lit.theta[0] == doctest::Approx(0.7).epsilon(1e-14));
  CHECK(lit.lambda == doctest::Approx(0.9).epsilon(1e-14));

  CHECK_THROWS_AS(parc_predict(curr, curr, 0.1, NormalizationMode::Joint), DegenerateSecant);
}

TEST_CASE("npc grid is exact") {
  CHECK(npc_lambda(0.0, 1.0, 0, 10) == 0.0);
  CHECK(npc_lambda(0.0, 1.0, 10, 10) == 1.0);
  CHECK(npc_lambda(0.0, 1.0, 3, 10) == 0.3);

  ShiftedQuadratic obj(vec({1.0, -2.0}));
  NpcConfig cfg;
  cfg.n_steps = 7;
  cfg.initial = cfg.step = {50, 0.0, false};
  const ContinuationTrace trace = npc_run(obj, sgd(0.1), cfg, ParamVector::Zero(2));
  REQUIRE(trace.size() == 8);
  for (int l = 0; l <= 7; ++l) CHECK(trace.points[l].point.lambda == static_cast<double>(l) / 7);
  CHECK(trace.back().point.lambda == 1.0);
  CHECK(trace.gradient_steps == 8 * 50);
  for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace.points[i].s > trace.points[i - 1].s);
}

TEST_CASE("npc with one step is two-phase training") {
  ShiftedQuadratic obj(vec({2.0}));
  NpcConfig cfg;
  cfg.n_steps = 1;
  cfg.initial = cfg.step = tol_criteria(1e-10);
  const ContinuationTrace trace = npc_run(obj, sgd(0.5), cfg, vec({5.0}));
  REQUIRE(trace.size() == 2);
  CHECK(trace.points[0].point.lambda == 0.0);
  CHECK(std::abs(trace.points[0].point.theta[0]) <= 1e-10);
  CHECK(trace.points[1].point.theta[0] == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("npc without homotopy equals plain ADAM with per-stage restarts") {
  const Dataset train = synthetic_dataset(40, 3);
  const MlpModel model = MlpModel::autoencoder(HomotopySpec::none(Activation::Sigmoid));
  NetworkObjective obj(model, train, 0, 1);
  const ParamVector theta0 = init_params(model, InitScheme::XavierUniform, 9);

  NpcConfig cfg;
  cfg.n_steps = 3;
  cfg.initial = cfg.step = {25, 0.0, false};
  SolverConfig adam;
  adam.adam.alpha = 0.01;
  const ContinuationTrace trace = npc_run(obj, adam, cfg, theta0);

  const Batch batch = train.as_batch();
  ParamVector theta = theta0;
  for (int stage = 0; stage <= 3; ++stage) {
    AdamState st = AdamState::zeros(theta.size(), adam.adam);
    for (int k = 0; k < 25; ++k) {
      adam_update(st, theta, loss_and_grads(model, theta, batch, 1.0).grad_theta);
    }
    CHECK(trace.points[stage].loss == loss_value(model, theta, batch, 1.0));
  }
}

TEST_CASE("npc divergence raises ContinuationStalled with the partial trace") {
  ShiftedQuadratic obj(vec({1.0}), 0.0, 0.55);
  NpcConfig cfg;
  cfg.n_steps = 4;
  cfg.initial = cfg.step = {10, 0.0, false};
  try {
    npc_run(obj, sgd(0.1), cfg, vec({0.0}));
    FAIL("expected ContinuationStalled");
  } catch (const ContinuationStalled& e) {
    CHECK(e.step == 3);
    CHECK(e.partial.size() == 3);
  }
  cfg.n_steps = 0;
  CHECK_THROWS_AS(npc_run(obj, sgd(0.1), cfg, vec({0.0})), ConfigError);
}

TEST_CASE("penalty-free frozen corrector is the fixed-lambda corrector") {
  ShiftedQuadratic obj(vec({1.0, 3.0, -1.0}));
  const HomotopyPoint predicted{vec({0.2, 0.1, -0.4}), 0.35};
  const Secant secant{vec({0.6, 0.0, 0.0}), 0.8};
  const CorrectorCriteria crit{40, 0.0, false};
  SolverConfig adam;
  adam.adam.alpha = 0.05;
  Solver s1(adam), s2(adam);
  const CorrectorResult a = parc_correct(obj, predicted, secant, s1, {0.0, PenaltyForm::Squared, true}, crit);
  const CorrectorResult b = correct_fixed_lambda(obj, predicted.theta, predicted.lambda, s2, crit);
  CHECK(a.point.theta == b.point.theta);
  CHECK(a.point.lambda == b.point.lambda);
  CHECK(a.diagnostics.steps == b.diagnostics.steps);
}

TEST_CASE("corrector on a zero loss leaves the predicted point alone") {
  ZeroObjective obj(2);
  const HomotopyPoint predicted{vec({0.3, -0.2}), 0.4};
  const Secant secant{vec({0.0, 0.6}), 0.8};
  Solver solver;
  for (PenaltyForm form : {PenaltyForm::Squared}) {
    const CorrectorResult r = parc_correct(obj, predicted, secant, solver, {10.0, form, false}, {100, 0.0, false});
    CHECK(r.point.theta == predicted.theta);
    CHECK(r.point.lambda == predicted.lambda);
    CHECK(r.diagnostics.penalty_residual == 0.0);
  }
}

TEST_CASE("corrector lands on the secant hyperplane and the path") {
  ShiftedQuadratic obj(vec({1.0, 2.0}));
  const HomotopyPoint prev{vec({0.0, 0.0}), 0.0};
  const HomotopyPoint curr{vec({0.2, 0.4}), 0.2};
  const Secant secant = secant_from(prev, curr, NormalizationMode::Joint);
  const HomotopyPoint predicted = step_along(curr, secant, 0.1);
  Solver solver(sgd(0.02));
  const CorrectorResult r =
      parc_correct(obj, predicted, secant, solver, {10.0, PenaltyForm::Squared, false}, tol_criteria(1e-10));
  CHECK(r.diagnostics.converged);
  CHECK(r.diagnostics.penalty_residual <= 1e-9);
  CHECK((r.point.theta - r.point.lambda * vec({1.0, 2.0})).norm() <= 1e-9);
  // Already on the straight path, so the prediction is exact.
  CHECK(r.point.lambda == doctest::Approx(predicted.lambda).epsilon(1e-9));
}

TEST_CASE("linear penalty gradient is constant") {
  ZeroObjective obj(1);
  const HomotopyPoint predicted{vec({0.0}), 0.5};
  const Secant secant{vec({0.6}), 0.8};
  Solver solver(sgd(0.1));
  const CorrectorResult r =
      parc_correct(obj, predicted, secant, solver, {1.0, PenaltyForm::Linear, false}, {3, 0.0, false});
  CHECK(r.point.theta[0] == doctest::Approx(-3 * 0.1 * 0.6));
  CHECK(r.point.lambda == doctest::Approx(0.5 - 3 * 0.1 * 0.8));
}

TEST_CASE("parc trace invariants on a convex path") {
  const ParamVector a = vec({1.0, -0.5, 0.25});
  ShiftedQuadratic obj(a, 1.0);
  ParcConfig cfg;
  cfg.ds = 0.1;
  cfg.bootstrap_dlambda = 0.05;
  const double tol = 1e-8;
  cfg.initial = cfg.step = cfg.final = tol_criteria(tol);
  const ContinuationTrace trace = parc_run(obj, sgd(0.04), cfg, ParamVector::Zero(3));

  REQUIRE(trace.size() > 5);
  CHECK(trace.points.front().point.lambda == 0.0);
  CHECK(trace.back().point.lambda == 1.0);
  // Loop points: bootstrap onwards, excluding the final landing.
  for (std::size_t i = 2; i + 1 < trace.size(); ++i) {
    const double d = joint_distance(trace.points[i].point, trace.points[i - 1].point);
    CHECK(d >= 0.5 * cfg.ds);
    CHECK(d <= 1.5 * cfg.ds);
  }
  for (std::size_t i = 1; i < trace.size(); ++i) {
    CHECK(trace.points[i].s > trace.points[i - 1].s);
    CHECK(critical_residual(obj, trace.points[i].point) <= 10 * tol);
    // Warm-start ratio against the previous accepted loss.
    CHECK(trace.points[i].warm_start_loss / trace.points[i - 1].loss < 10.0);
  }
}

TEST_CASE("parc frozen schedule reproduces npc") {
  ShiftedQuadratic obj(vec({1.0, 2.0}));
  SolverConfig adam;
  adam.adam.alpha = 0.05;
  NpcConfig npc;
  npc.n_steps = 6;
  npc.initial = npc.step = {30, 0.0, false};
  ParcConfig parc;
  parc.gamma = 0.0;
  parc.frozen_schedule_steps = 6;
  parc.initial = parc.step = parc.final = {30, 0.0, false};
  const ParamVector theta0 = vec({0.3, -0.1});
  const ContinuationTrace a = npc_run(obj, adam, npc, theta0);
  const ContinuationTrace b = parc_run(obj, adam, parc, theta0);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.points[i].point.lambda == b.points[i].point.lambda);
    CHECK((a.points[i].point.theta - b.points[i].point.theta).cwiseAbs().maxCoeff() <= 1e-12);
  }
  CHECK(a.gradient_steps == b.gradient_steps);
}

TEST_CASE("parc stalls after a failed retry") {
  ShiftedQuadratic obj(vec({1.0}), 0.0, 0.5);
  ParcConfig cfg;
  cfg.ds = 0.1;
  cfg.initial = cfg.step = cfg.final = tol_criteria(1e-8);
  try {
    parc_run(obj, sgd(0.05), cfg, vec({0.0}));
    FAIL("expected ContinuationStalled");
  } catch (const ContinuationStalled& e) {
    REQUIRE(!e.partial.empty());
    CHECK(e.partial.back().point.lambda <= 0.5);
    CHECK(e.partial.back().point.lambda > 0.3);
  }
}

TEST_CASE("parc max_steps") {
  ShiftedQuadratic obj(vec({1.0}));
  ParcConfig cfg;
  cfg.ds = 0.05;
  cfg.max_steps = 2;
  cfg.finalize_at_target = false;
  cfg.initial = cfg.step = cfg.final = {200, 0.0, false};
  try {
    parc_run(obj, sgd(0.1), cfg, vec({0.0}));
    FAIL("expected MaxStepsExceeded");
  } catch (const MaxStepsExceeded& e) {
    CHECK(e.partial.size() == 4);
  }
  cfg.finalize_at_target = true;
  const ContinuationTrace t = parc_run(obj, sgd(0.1), cfg, vec({0.0}));
  CHECK(t.size() == 5);
  CHECK(t.back().point.lambda == 1.0);
}

TEST_CASE("parc config validation") {
  ParcConfig cfg;
  cfg.ds = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.ds = 0.1;
  cfg.gamma = -1.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.gamma = 1.0;
  CHECK_NOTHROW(cfg.validate());
  CHECK(penalty_form_from_string("linear") == PenaltyForm::Linear);
  CHECK_THROWS_AS(penalty_form_from_string("cubic"), ConfigError);
}

TEST_CASE("critical residual of a zero model on zero data") {
  const MlpModel model = MlpModel::autoencoder(HomotopySpec::h_relu());
  Dataset zero = synthetic_dataset(4, 0);
  zero.inputs.setZero();
  NetworkObjective obj(model, zero, 0, 0);
  CHECK(critical_residual(obj, {ParamVector::Zero(model.param_count()), 0.5}) == 0.0);
}

TEST_CASE("trace csv round trip") {
  ShiftedQuadratic obj(vec({1.0, 1.0}));
  NpcConfig cfg;
  cfg.n_steps = 4;
  cfg.initial = cfg.step = {20, 0.0, false};
  const ContinuationTrace trace = npc_run(obj, sgd(0.2), cfg, vec({0.5, 0.0}));
  std::stringstream buf;
  write_trace_csv(buf, trace);
  CHECK(buf.str().rfind(kTraceCsvHeader, 0) == 0);
  const ContinuationTrace back = read_trace_csv(buf);
  REQUIRE(back.size() == trace.size());
  for (std::size_t i = 0; i < trace.size(); ++i) {
    CHECK(back.points[i].s == trace.points[i].s);
    CHECK(back.points[i].point.lambda == trace.points[i].point.lambda);
    CHECK(back.points[i].loss == trace.points[i].loss);
    CHECK(back.points[i].corrector_steps == trace.points[i].corrector_steps);
  }
  std::stringstream bad("a,b\n1,2\n");
  CHECK_THROWS_AS(read_trace_csv(bad), FormatError);
}
