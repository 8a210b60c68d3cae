#include <gtest/gtest.h>

#include <cmath>

#include "a2grad/baselines.hpp"
#include "a2grad/problems.hpp"

using namespace a2grad;

namespace {

// Returns a fixed gradient every call.
struct ConstantGradient final : StochasticOracle {
  ParamVector g;
  explicit ConstantGradient(ParamVector grad) : g(std::move(grad)) {}
  std::size_t dimension() const override { return g.size(); }
  GradientSample stochastic_gradient(const ParamVector&, SeededRng&) const override {
    return {g, 0};
  }
};

}  // namespace

TEST(Sgd, FirstStepOnHalfSquare) {
  const QuadraticProblem f({1.0}, {0.0});
  BaselineConfig c;
  c.method = BaselineMethod::sgd;
  c.learning_rate = 0.25;
  BaselineState s = BaselineState::init(c, {1.0});
  SeededRng rng(0);
  baseline_step(s, c, f, rng);
  EXPECT_DOUBLE_EQ(s.x[0], 1.0 - 0.25);
}

TEST(Adagrad, FirstStepSelfNormalizes) {
  const ConstantGradient oracle({3.0});
  BaselineConfig c;
  c.method = BaselineMethod::adagrad;
  c.learning_rate = 1.0;
  BaselineState s = BaselineState::init(c, {0.0});
  SeededRng rng(0);
  baseline_step(s, c, oracle, rng);
  // x_1 = x_0 - 3 / (sqrt(9) + eps)
  EXPECT_NEAR(s.x[0], -1.0, 1e-8);
  EXPECT_DOUBLE_EQ(s.x[0], -3.0 / (3.0 + c.epsilon));
}

TEST(Amsgrad, SecondMomentMaxIsNondecreasing) {
  const auto f = make_quadratic(4, 10.0, 1, NoiseModel::gaussian(3.0));
  BaselineConfig c;
  c.method = BaselineMethod::amsgrad;
  BaselineState s = BaselineState::init(c, ParamVector(4, 1.0));
  SeededRng rng(5);
  ParamVector prev(4);
  for (int k = 0; k < 2000; ++k) {
    baseline_step(s, c, f, rng, false);
    for (std::size_t i = 0; i < 4; ++i) ASSERT_GE(s.v_hat[i], prev[i]);
    prev = s.v_hat;
  }
}

TEST(Adam, CumulativeWithoutMomentumMatchesAdagrad) {
  // Conditions: beta1 = 0, v accumulated as a plain sum, no bias correction,
  // equal epsilon. Then both take x -= eta G / (sqrt(sum G^2) + eps).
  const auto f = make_quadratic(3, 10.0, 2, NoiseModel::gaussian(1.0));
  BaselineConfig adam;
  adam.method = BaselineMethod::adam;
  adam.beta1 = 0.0;
  adam.cumulative_second_moment = true;
  adam.bias_correction = false;
  adam.learning_rate = 0.1;
  BaselineConfig ada = adam;
  ada.method = BaselineMethod::adagrad;
  BaselineState sa = BaselineState::init(adam, ParamVector(3, 1.0));
  BaselineState sb = BaselineState::init(ada, ParamVector(3, 1.0));
  SeededRng ra(3), rb(3);
  for (int k = 0; k < 10; ++k) {
    baseline_step(sa, adam, f, ra, false);
    baseline_step(sb, ada, f, rb, false);
    for (std::size_t i = 0; i < 3; ++i) ASSERT_NEAR(sa.x[i], sb.x[i], 1e-8);
  }
}

TEST(Baselines, DeterministicUnderFixedSeed) {
  const auto f = make_quadratic(5, 10.0, 1, NoiseModel::gaussian(1.0));
  for (BaselineMethod m : {BaselineMethod::sgd, BaselineMethod::adagrad, BaselineMethod::adam,
                           BaselineMethod::amsgrad}) {
    BaselineConfig c;
    c.method = m;
    const RunRecord a = run(c, f, ParamVector(5), 300, 9);
    const RunRecord b = run(c, f, ParamVector(5), 300, 9);
    EXPECT_EQ(a.rows, b.rows) << to_string(m);
    EXPECT_EQ(a.rows.size(), 301u);
    EXPECT_EQ(a.method, std::string(to_string(m)));
  }
}

TEST(Baselines, ValidationErrors) {
  BaselineConfig c;
  c.learning_rate = 0.0;
  EXPECT_THROW(c.validate(1), ConfigError);
  c = BaselineConfig{};
  c.method = BaselineMethod::adam;
  c.beta1 = 1.0;
  EXPECT_THROW(c.validate(1), ConfigError);
  c.beta1 = 0.9;
  c.beta2 = 1.0;
  EXPECT_THROW(c.validate(1), ConfigError);
  const QuadraticProblem f({1.0}, {0.0});
  EXPECT_THROW(run(BaselineConfig{}, f, {1.0}, 0, 0), ConfigError);
  EXPECT_THROW(parse_baseline_method("rmsprop"), ConfigError);
  EXPECT_EQ(parse_rate_policy("inverse_sqrt"), RatePolicy::inverse_sqrt);
}

TEST(Baselines, RatePolicy) {
  BaselineConfig c;
  c.learning_rate = 0.4;
  EXPECT_EQ(c.rate_at(3), 0.4);
  c.rate_policy = RatePolicy::inverse_sqrt;
  EXPECT_DOUBLE_EQ(c.rate_at(3), 0.2);
}

TEST(Counterexample, GradientCycleAndOptimum) {
  const PeriodicCounterexample p(3.0);
  SeededRng rng(123);
  const ParamVector x{0.0};
  EXPECT_EQ(p.stochastic_gradient(x, rng).gradient, ParamVector{3.0});
  EXPECT_EQ(p.stochastic_gradient(x, rng).gradient, ParamVector{-1.0});
  EXPECT_EQ(p.stochastic_gradient(x, rng).gradient, ParamVector{-1.0});
  EXPECT_EQ(p.stochastic_gradient(x, rng).gradient, ParamVector{3.0});
}

TEST(Counterexample, OptimumIsLowerCornerByAverageGradientSign) {
  const PeriodicCounterexample p(3.0);
  SeededRng rng(1);
  Real sum = 0.0;
  const int n = 3000;
  for (int i = 0; i < n; ++i) sum += p.stochastic_gradient({0.0}, rng).gradient[0];
  const Real avg = sum / n;
  EXPECT_GT(avg, 0.0);  // positive slope: minimum at the lower box corner
  EXPECT_DOUBLE_EQ(avg, p.exact_gradient({0.0})[0]);
  EXPECT_EQ(*p.optimum_point(), ParamVector{-1.0});
  // brute force over a grid of the box
  Real best = INFINITY, arg = 0.0;
  for (int i = 0; i <= 200; ++i) {
    const Real xx = -1.0 + i * 0.01;
    const Real fx = p.objective({xx});
    if (fx < best) best = fx, arg = xx;
  }
  EXPECT_DOUBLE_EQ(arg, -1.0);
  EXPECT_DOUBLE_EQ(best, p.optimum_value());
  EXPECT_THROW(PeriodicCounterexample(2.0), ConfigError);
}

TEST(Counterexample, AdamDriftsToWrongCorner) {
  const auto oracle = reddi_counterexample_oracle();
  const RunRecord rec = run(reddi_adam_config(), *oracle, {0.0}, 3000, 0);
  EXPECT_GT(rec.final_point[0], 0.9);
}
