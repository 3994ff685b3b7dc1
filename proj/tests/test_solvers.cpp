#include <doctest.h>

#include <cmath>
#include <limits>

#include "parc/solvers.hpp"

using namespace parc;

TEST_CASE("adam: zero gradient leaves theta unchanged") {
  AdamState state = AdamState::zeros(3);
  const ParamVector theta = ParamVector::LinSpaced(3, -1.0, 1.0);
  auto [next, out] = adam_step(state, theta, ParamVector::Zero(3));
  CHECK(out == theta);
  CHECK(next.t == 1);
}

TEST_CASE("adam: first bias-corrected step is alpha * g / (|g| + eps)") {
  AdamConfig cfg;
  cfg.alpha = 0.01;
  const ParamVector g = (ParamVector(3) << 0.5, -2.0, 1e-3).finished();
  const ParamVector theta = ParamVector::Zero(3);
  const auto [state, out] = adam_step(AdamState::zeros(3, cfg), theta, g);
  // m_hat = g and v_hat = g^2 after one step.
  for (Eigen::Index i = 0; i < 3; ++i) {
    const double expected = -cfg.alpha * g[i] / (std::abs(g[i]) + 1e-8);
    CHECK(out[i] == doctest::Approx(expected).epsilon(1e-12));
    CHECK(std::abs(out[i]) == doctest::Approx(cfg.alpha).epsilon(1e-4));
  }
  CHECK(state.t == 1);
}

TEST_CASE("adam minimizes theta^2 from 1 within 200 steps at alpha 0.1") {
  // Independent scalar simulation of the same update.
  double m = 0.0, v = 0.0, x = 1.0;
  for (int t = 1; t <= 200; ++t) {
    const double g = 2.0 * x;
    m = 0.9 * m + 0.1 * g;
    v = 0.999 * v + 0.001 * g * g;
    x -= 0.1 * (m / (1 - std::pow(0.9, t))) / (std::sqrt(v / (1 - std::pow(0.999, t))) + 1e-8);
  }
  REQUIRE(std::abs(x) < 0.05);

  AdamConfig cfg;
  cfg.alpha = 0.1;
  AdamState state = AdamState::zeros(1, cfg);
  ParamVector theta = ParamVector::Constant(1, 1.0);
  for (int t = 0; t < 200; ++t) {
    const ParamVector grad = 2.0 * theta;
    adam_update(state, theta, grad);
    CHECK((state.v.array() >= 0.0).all());
    CHECK(state.t == t + 1);
  }
  CHECK(std::abs(theta[0]) < 0.05);
  CHECK(theta[0] == doctest::Approx(x).epsilon(1e-12));
}

TEST_CASE("adam rejects bad gradients") {
  AdamState state = AdamState::zeros(2);
  ParamVector theta = ParamVector::Zero(2);
  ParamVector bad = ParamVector::Zero(2);
  bad[1] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(adam_update(state, theta, bad), NumericalDivergence);
  CHECK_THROWS_AS(adam_update(state, theta, ParamVector::Zero(3)), DimensionMismatch);
}

TEST_CASE("sgd_step") {
  const ParamVector theta = (ParamVector(2) << 1, 2).finished();
  CHECK(sgd_step(theta, ParamVector::Ones(2), 0.5) == (ParamVector(2) << 0.5, 1.5).finished());
  CHECK(sgd_step(theta, ParamVector::Ones(2), 0.0) == theta);
  CHECK(sgd_step(theta, ParamVector::Zero(2), 0.3) == theta);
}

TEST_CASE("Solver resets its state and counts steps") {
  SolverConfig cfg;
  cfg.kind = SolverKind::Sgd;
  cfg.adam.alpha = 0.5;
  Solver solver(cfg);
  solver.reset(2);
  ParamVector x = ParamVector::Ones(2);
  solver.step(x, ParamVector::Ones(2));
  CHECK(x == ParamVector::Constant(2, 0.5));
  CHECK(solver.steps_taken() == 1);
  solver.reset(2);
  CHECK(solver.steps_taken() == 0);
}
