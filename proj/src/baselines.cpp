#include "a2grad/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace a2grad {

namespace {

constexpr Real kNaN = std::numeric_limits<Real>::quiet_NaN();

}  // namespace

std::string_view to_string(BaselineMethod method) {
  switch (method) {
    case BaselineMethod::sgd: return "sgd";
    case BaselineMethod::adagrad: return "adagrad";
    case BaselineMethod::adam: return "adam";
    case BaselineMethod::amsgrad: return "amsgrad";
  }
  return "?";
}

BaselineMethod parse_baseline_method(std::string_view name) {
  if (name == "sgd") return BaselineMethod::sgd;
  if (name == "adagrad") return BaselineMethod::adagrad;
  if (name == "adam") return BaselineMethod::adam;
  if (name == "amsgrad") return BaselineMethod::amsgrad;
  throw ConfigError("unknown baseline method '" + std::string(name) + "'");
}

std::string_view to_string(RatePolicy policy) {
  return policy == RatePolicy::inverse_sqrt ? "inverse_sqrt" : "constant";
}

RatePolicy parse_rate_policy(std::string_view name) {
  if (name == "constant") return RatePolicy::constant;
  if (name == "inverse_sqrt") return RatePolicy::inverse_sqrt;
  throw ConfigError("unknown rate policy '" + std::string(name) + "'");
}

void BaselineConfig::validate(std::size_t dim) const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("baseline: learning rate must be positive");
  }
  if (!(epsilon > 0.0)) throw ConfigError("baseline: epsilon must be positive");
  if (method == BaselineMethod::adam || method == BaselineMethod::amsgrad) {
    if (!(beta1 >= 0.0 && beta1 < 1.0)) {
      throw ConfigError("baseline: beta1 must lie in [0, 1)");
    }
    if (!(beta2 > 0.0 && beta2 < 1.0)) {
      throw ConfigError("baseline: beta2 must lie in (0, 1)");
    }
  }
  if (!projection.is_unconstrained() && projection.lower().size() != dim) {
    throw ConfigError("baseline: box dimension does not match the problem");
  }
}

std::string BaselineConfig::label() const { return std::string(to_string(method)); }

Real BaselineConfig::rate_at(std::size_t k) const {
  return rate_policy == RatePolicy::constant
             ? learning_rate
             : learning_rate / std::sqrt(static_cast<Real>(k + 1));
}

BaselineState BaselineState::init(const BaselineConfig& config, ParamVector x0) {
  config.projection.apply(x0);
  require_finite(x0, "starting point", 0);
  const std::size_t d = x0.size();
  return BaselineState{.k = 0,
                       .x = std::move(x0),
                       .m = ParamVector(d),
                       .v = ParamVector(d),
                       .v_hat = ParamVector(d)};
}

RunRecordRow baseline_step(BaselineState& state, const BaselineConfig& config,
                           const StochasticOracle& oracle, SeededRng& rng,
                           bool evaluate) {
  const std::size_t k = state.k;
  const std::size_t d = state.x.size();
  const GradientSample sample = oracle.stochastic_gradient(state.x, rng);
  const ParamVector& g = sample.gradient;
  require_same_dim(g, state.x, "stochastic_gradient");
  require_finite(g, "stochastic gradient", k);

  const Real eta = config.rate_at(k);
  const Real b1 = config.beta1;
  const Real b2 = config.beta2;
  const Real t = static_cast<Real>(k + 1);
  const Real correction1 =
      config.bias_correction ? 1.0 - std::pow(b1, t) : 1.0;
  const Real correction2 =
      config.bias_correction && !config.cumulative_second_moment
          ? 1.0 - std::pow(b2, t)
          : 1.0;

  Real root_max = 0.0;
  Real rate_lo = std::numeric_limits<Real>::infinity();
  Real rate_hi = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    Real direction = g[i];
    Real root = 1.0;
    Real denom = 1.0;
    switch (config.method) {
      case BaselineMethod::sgd:
        break;
      case BaselineMethod::adagrad:
        state.v[i] += g[i] * g[i];
        root = std::sqrt(state.v[i]);
        denom = root + config.epsilon;
        break;
      case BaselineMethod::adam:
      case BaselineMethod::amsgrad: {
        state.m[i] = b1 * state.m[i] + (1.0 - b1) * g[i];
        state.v[i] = config.cumulative_second_moment
                         ? state.v[i] + g[i] * g[i]
                         : b2 * state.v[i] + (1.0 - b2) * g[i] * g[i];
        Real second = state.v[i];
        if (config.method == BaselineMethod::amsgrad) {
          state.v_hat[i] = std::max(state.v_hat[i], state.v[i]);
          second = state.v_hat[i];
        }
        direction = state.m[i] / correction1;
        root = std::sqrt(second / correction2);
        denom = root + config.epsilon;
        break;
      }
    }
    state.x[i] -= eta * direction / denom;
    root_max = std::max(root_max, root);
    rate_lo = std::min(rate_lo, eta / denom);
    rate_hi = std::max(rate_hi, eta / denom);
  }
  config.projection.apply(state.x);
  require_finite(state.x, "iterate", k);
  state.k = k + 1;

  RunRecordRow row;
  row.k = k;
  row.alpha = 1.0;
  row.gamma = 1.0 / eta;
  row.h_inf = root_max;
  row.step_min = rate_lo;
  row.step_max = rate_hi;
  row.f_reported = kNaN;
  row.f_practice = kNaN;
  if (evaluate && oracle.has_objective()) {
    row.f_reported = oracle.objective(state.x);
    row.f_practice = row.f_reported;
    if (oracle.has_optimum()) {
      row.suboptimality = row.f_reported - oracle.optimum_value();
    }
  }
  return row;
}

RunRecord run(const BaselineConfig& config, const StochasticOracle& oracle,
              const ParamVector& x0, std::size_t K, std::uint64_t seed,
              const RunOptions& options) {
  if (K < 1) throw ConfigError("horizon K must be >= 1");
  if (options.eval_stride < 1) throw ConfigError("eval_stride must be >= 1");
  if (x0.size() != oracle.dimension()) {
    throw ConfigError("starting point dimension does not match the problem");
  }
  config.validate(oracle.dimension());

  RunRecord record;
  record.method = config.label();
  record.seed = seed;
  BaselineState state = BaselineState::init(config, x0);
  SeededRng rng(seed);
  const auto optimum = oracle.optimum_point();
  auto track_distance = [&] {
    if (!optimum) return;
    const Real dist = norm_inf(state.x - *optimum);
    record.max_dist_inf_sq =
        std::max(record.max_dist_inf_sq.value_or(0.0), dist * dist);
  };
  track_distance();

  drive_steps(record, K, options, [&](std::size_t k) {
    const bool evaluate = k % options.eval_stride == 0 || k == K;
    RunRecordRow row = baseline_step(state, config, oracle, rng, evaluate);
    track_distance();
    return row;
  });
  record.final_point = state.x;
  return record;
}

PeriodicCounterexample::PeriodicCounterexample(Real large_gradient)
    : large_(large_gradient) {
  if (!(large_gradient > 2.0)) {
    throw ConfigError("counterexample needs a large gradient C > 2");
  }
}

GradientSample PeriodicCounterexample::stochastic_gradient(const ParamVector& x,
                                                           SeededRng& rng) const {
  require_same_dim(x, ParamVector(1), "PeriodicCounterexample");
  const std::uint64_t phase = rng.position() % 3;
  rng.next_u64();
  return {ParamVector{phase == 0 ? large_ : -1.0}, phase};
}

ParamVector PeriodicCounterexample::exact_gradient(const ParamVector& x) const {
  require_same_dim(x, ParamVector(1), "PeriodicCounterexample");
  return ParamVector{(large_ - 2.0) / 3.0};
}

Real PeriodicCounterexample::objective(const ParamVector& x) const {
  require_same_dim(x, ParamVector(1), "PeriodicCounterexample");
  return (large_ - 2.0) / 3.0 * x[0];
}

Real PeriodicCounterexample::optimum_value() const {
  return -(large_ - 2.0) / 3.0;
}

std::optional<ParamVector> PeriodicCounterexample::optimum_point() const {
  return ParamVector{-1.0};
}

std::optional<std::pair<ParamVector, ParamVector>>
PeriodicCounterexample::domain() const {
  return std::pair{ParamVector{-1.0}, ParamVector{1.0}};
}

std::unique_ptr<StochasticOracle> reddi_counterexample_oracle(
    Real large_gradient) {
  return std::make_unique<PeriodicCounterexample>(large_gradient);
}

BaselineConfig reddi_adam_config(Real large_gradient) {
  BaselineConfig config;
  config.method = BaselineMethod::adam;
  config.learning_rate = 0.1;
  config.rate_policy = RatePolicy::inverse_sqrt;
  config.beta1 = 0.0;
  config.beta2 = 1.0 / (1.0 + large_gradient * large_gradient);
  config.projection = ProjectionSpec::box(ParamVector{-1.0}, ParamVector{1.0});
  return config;
}

}  // namespace a2grad
