#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "a2grad/optimizer.hpp"
#include "a2grad/problems.hpp"

using namespace a2grad;

namespace {

A2GradConfig exact_config(Real L) {
  A2GradConfig c;
  c.lipschitz = L;
  c.delta_mode = DeltaEstimator::Mode::exact;
  return c;
}

// f(x) = 1/2 x^2 in one dimension.
QuadraticProblem half_square() { return QuadraticProblem({1.0}, {0.0}); }

// Returns NaN gradients from call number `bad` onward.
struct PoisonedOracle final : StochasticOracle {
  std::size_t bad = 5;
  std::size_t dimension() const override { return 2; }
  GradientSample stochastic_gradient(const ParamVector& x, SeededRng& rng) const override {
    const auto pos = rng.position();
    rng.next_u64();
    if (pos >= bad) return {ParamVector(2, std::numeric_limits<Real>::quiet_NaN()), pos};
    return {x, pos};
  }
  bool has_objective() const override { return true; }
  Real objective(const ParamVector& x) const override { return 0.5 * dot(x, x); }
};

}  // namespace

TEST(ThreeSequence, HandSimulatedOneDimensionalQuadratic) {
  const auto f = half_square();
  const auto config = exact_config(1.0);
  A2GradState s = A2GradState::init(config, {1.0});
  SeededRng rng(0);

  const RunRecordRow r0 = step_three_sequence(s, config, f, rng);
  EXPECT_EQ(s.last_eval_point, ParamVector{1.0});  // alpha_0 = 1: x_under_0 = x_0
  EXPECT_EQ(s.x, ParamVector{0.5});
  EXPECT_EQ(s.x_bar, ParamVector{0.5});
  EXPECT_EQ(r0.k, 0u);
  EXPECT_DOUBLE_EQ(r0.f_reported, 0.125);
  EXPECT_DOUBLE_EQ(*r0.suboptimality, 0.125);
  EXPECT_EQ(r0.alpha, 1.0);
  EXPECT_EQ(r0.gamma, 2.0);
  EXPECT_EQ(r0.h_inf, 0.0);
  EXPECT_EQ(r0.step_min, 0.5);
  EXPECT_EQ(r0.step_max, 0.5);

  const RunRecordRow r1 = step_three_sequence(s, config, f, rng);
  EXPECT_DOUBLE_EQ(s.last_eval_point[0], 0.5);
  EXPECT_DOUBLE_EQ(s.x[0], 0.0);
  EXPECT_DOUBLE_EQ(s.x_bar[0], 1.0 / 6.0);
  EXPECT_DOUBLE_EQ(r1.f_reported, 0.5 / 36.0);
  // next evaluation point: alpha_2 = 1/2, (1/2)(1/6) + (1/2)(0) = 1/12
  EXPECT_DOUBLE_EQ(r1.f_practice, 0.5 / 144.0);
}

TEST(TwoSequence, HandSimulatedOneDimensionalQuadratic) {
  const auto f = half_square();
  auto config = exact_config(1.0);
  config.form = IterationForm::two_sequence;
  A2GradState s = A2GradState::init(config, {1.0});
  SeededRng rng(0);
  step_two_sequence(s, config, f, rng);
  EXPECT_DOUBLE_EQ(s.y[0], 0.5);
  EXPECT_DOUBLE_EQ(s.x[0], 0.5);
  const RunRecordRow r1 = step_two_sequence(s, config, f, rng);
  EXPECT_DOUBLE_EQ(s.y[0], 1.0 / 12.0);
  EXPECT_DOUBLE_EQ(r1.f_reported, 0.5 / 144.0);
}

TEST(ThreeSequence, BoxProjectionClampsToBoundary) {
  const QuadraticProblem f({1.0}, {-100.0});
  auto config = exact_config(1.0);
  config.projection = ProjectionSpec::box({0.0}, {std::numeric_limits<Real>::infinity()});
  A2GradState s = A2GradState::init(config, {0.1});
  SeededRng rng(0);
  step_three_sequence(s, config, f, rng);
  EXPECT_EQ(s.x[0], 0.0);
}

TEST(ThreeSequence, InitialAverageDoesNotMatter) {
  const auto f = make_quadratic(4, 10.0, 2, NoiseModel::gaussian(0.3));
  A2GradConfig config;
  config.lipschitz = f.lipschitz();
  A2GradState a = A2GradState::init(config, ParamVector(4, 0.2));
  A2GradState b = a;
  b.x_bar = ParamVector{9.0, -9.0, 3.0, 1e6};
  SeededRng ra(4), rb(4);
  step_three_sequence(a, config, f, ra);
  step_three_sequence(b, config, f, rb);
  EXPECT_EQ(a.x_bar, a.x);
  EXPECT_EQ(a.x_bar, b.x_bar);
}

TEST(FormEquivalence, StochasticQuadraticHundredSteps) {
  const auto f = make_quadratic(6, 30.0, 8, NoiseModel::gaussian(1.0));
  for (ScalerScheme scheme : {ScalerScheme::uniform, ScalerScheme::incremental,
                              ScalerScheme::exponential}) {
    A2GradConfig three;
    three.lipschitz = f.lipschitz();
    three.beta = 2.0;
    three.scaler.scheme = scheme;
    A2GradConfig two = three;
    two.form = IterationForm::two_sequence;
    A2GradState s3 = A2GradState::init(three, ParamVector(6, 0.5));
    A2GradState s2 = A2GradState::init(two, ParamVector(6, 0.5));
    SeededRng r3(77), r2(77);
    Real worst = 0.0;
    for (int k = 0; k < 100; ++k) {
      step_three_sequence(s3, three, f, r3);
      step_two_sequence(s2, two, f, r2);
      for (std::size_t i = 0; i < 6; ++i) {
        const Real a = s3.last_eval_point[i];
        const Real b = s2.last_eval_point[i];
        worst = std::max(worst, std::abs(a - b) / std::max(std::abs(a), 1e-300));
      }
    }
    EXPECT_LE(worst, 1e-9) << to_string(scheme);
  }
}

TEST(TwoSequence, RejectsBoxProjection) {
  A2GradConfig config;
  config.form = IterationForm::two_sequence;
  config.projection = ProjectionSpec::box({-1.0}, {1.0});
  EXPECT_THROW(config.validate(1), ConfigError);
  const auto f = half_square();
  EXPECT_THROW(run(config, f, {0.5}, 10, 0), ConfigError);
}

TEST(Run, HorizonOneHasTwoRows) {
  const auto f = half_square();
  const RunRecord rec = run(A2GradConfig{}, f, {1.0}, 1, 0);
  ASSERT_EQ(rec.rows.size(), 2u);
  EXPECT_EQ(rec.rows[0].k, 0u);
  EXPECT_EQ(rec.rows[1].k, 1u);
  EXPECT_THROW(run(A2GradConfig{}, f, {1.0}, 0, 0), ConfigError);
}

TEST(Run, DeterministicBoundAtK100) {
  const auto f = make_quadratic(10, 100.0, 3);
  const ParamVector x0(10, 0.0);
  const RunRecord rec = run(exact_config(f.lipschitz()), f, x0, 100, 0);
  const Real r = norm2(x0 - f.x_star());
  EXPECT_LE(*rec.rows.back().suboptimality, 2.0 * f.lipschitz() * r * r / (101.0 * 102.0));
}

TEST(Run, SameSeedSameRecord) {
  const auto f = make_quadratic(5, 10.0, 1, NoiseModel::gaussian(1.0));
  A2GradConfig config;
  config.scaler.scheme = ScalerScheme::exponential;
  const RunRecord a = run(config, f, ParamVector(5), 200, 12);
  const RunRecord b = run(config, f, ParamVector(5), 200, 12);
  const RunRecord c = run(config, f, ParamVector(5), 200, 13);
  EXPECT_EQ(a.rows, b.rows);
  EXPECT_EQ(a.final_point, b.final_point);
  EXPECT_NE(a.rows, c.rows);
}

TEST(Run, RowsAreIndexedAndStrided) {
  const auto f = make_quadratic(3, 5.0, 1);
  RunOptions options;
  options.eval_stride = 10;
  const RunRecord rec = run(A2GradConfig{}, f, ParamVector(3), 25, 0, options);
  ASSERT_EQ(rec.rows.size(), 26u);
  for (std::size_t k = 0; k <= 25; ++k) {
    EXPECT_EQ(rec.rows[k].k, k);
    const bool evaluated = k % 10 == 0 || k == 25;
    EXPECT_EQ(std::isnan(rec.rows[k].f_reported), !evaluated) << k;
  }
  EXPECT_EQ(rec.rows[3].wall_nanos, 0);
}

TEST(Run, NonFiniteGradientAbortsWithPrefix) {
  PoisonedOracle oracle;
  const RunRecord rec = run(A2GradConfig{}, oracle, {1.0, 1.0}, 20, 0);
  ASSERT_TRUE(rec.error.has_value());
  EXPECT_EQ(rec.error_iteration, 5u);
  EXPECT_EQ(rec.rows.size(), 5u);
}

TEST(Run, BetaIrrelevantWithoutNoise) {
  const auto f = make_quadratic(4, 20.0, 6);
  auto a = exact_config(f.lipschitz());
  auto b = a;
  a.beta = 0.0;
  b.beta = 123.0;
  EXPECT_EQ(run(a, f, ParamVector(4), 100, 0).rows, run(b, f, ParamVector(4), 100, 0).rows);
}

TEST(Run, RejectsDimensionMismatchAndBadStride) {
  const auto f = half_square();
  EXPECT_THROW(run(A2GradConfig{}, f, {1.0, 2.0}, 5, 0), ConfigError);
  RunOptions bad;
  bad.eval_stride = 0;
  EXPECT_THROW(run(A2GradConfig{}, f, {1.0}, 5, 0, bad), ConfigError);
}

TEST(Invariant, AverageStaysInConvexHullAndBox) {
  SeededRng gen(404);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t d = 1 + gen.below(5);
    const auto f = make_quadratic(d, 1.0 + gen.uniform() * 99.0, gen.next_u64(),
                                  NoiseModel::gaussian(gen.uniform() * 2.0));
    A2GradConfig config;
    config.lipschitz = f.lipschitz();
    config.beta = gen.uniform() * 10.0;
    const bool boxed = trial % 2 == 0;
    if (boxed) config.projection = ProjectionSpec::box(ParamVector(d, -0.5), ParamVector(d, 0.3));
    ParamVector x0(d);
    for (Real& v : x0) v = gen.uniform(-2.0, 2.0);
    A2GradState s = A2GradState::init(config, x0);
    std::vector<Real> lo(s.x_bar.begin(), s.x_bar.end()), hi = lo;
    SeededRng rng(trial);
    for (int k = 0; k < 300; ++k) {
      step_three_sequence(s, config, f, rng, false);
      for (std::size_t i = 0; i < d; ++i) {
        lo[i] = std::min(lo[i], s.x[i]);
        hi[i] = std::max(hi[i], s.x[i]);
        const Real slack = 1e-12 * std::max(1.0, std::abs(s.x_bar[i]));
        ASSERT_GE(s.x_bar[i], lo[i] - slack);
        ASSERT_LE(s.x_bar[i], hi[i] + slack);
        if (boxed) {
          ASSERT_GE(s.x_bar[i], -0.5 - slack);
          ASSERT_LE(s.x_bar[i], 0.3 + slack);
        }
      }
    }
  }
}

TEST(Invariant, ScalingObjectiveAndLipschitzTogetherKeepsTrace) {
  const auto f = make_quadratic(5, 40.0, 9);
  ParamVector doubled = f.diag();
  for (Real& v : doubled) v *= 2.0;
  const QuadraticProblem g(doubled, f.x_star());
  const auto cf = exact_config(f.lipschitz());
  const auto cg = exact_config(2.0 * f.lipschitz());
  A2GradState sf = A2GradState::init(cf, ParamVector(5, 1.0));
  A2GradState sg = A2GradState::init(cg, ParamVector(5, 1.0));
  SeededRng rf(0), rg(0);
  for (int k = 0; k < 200; ++k) {
    step_three_sequence(sf, cf, f, rf, false);
    step_three_sequence(sg, cg, g, rg, false);
    for (std::size_t i = 0; i < 5; ++i) {
      ASSERT_NEAR(sf.x_bar[i], sg.x_bar[i], 1e-12 * std::max(1.0, std::abs(sf.x_bar[i])));
    }
  }
}

TEST(Config, LabelsAndValidation) {
  A2GradConfig c;
  EXPECT_EQ(c.label(), "a2grad-uni");
  c.scaler.scheme = ScalerScheme::incremental;
  EXPECT_EQ(c.label(), "a2grad-inc");
  c.scaler.scheme = ScalerScheme::exponential;
  EXPECT_EQ(c.label(), "a2grad-exp");
  c.beta = -1.0;
  EXPECT_THROW(c.validate(1), ConfigError);
  EXPECT_EQ(parse_iteration_form("two"), IterationForm::two_sequence);
  EXPECT_EQ(parse_iteration_form(to_string(IterationForm::three_sequence)),
            IterationForm::three_sequence);
}

TEST(Run, TracksMaxDistanceToOptimum) {
  const auto f = half_square();
  const RunRecord rec = run(exact_config(1.0), f, {1.0}, 10, 0);
  ASSERT_TRUE(rec.max_dist_inf_sq.has_value());
  EXPECT_DOUBLE_EQ(*rec.max_dist_inf_sq, 1.0);
}
