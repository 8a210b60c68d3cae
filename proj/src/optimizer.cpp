#include "a2grad/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace a2grad {

namespace {

constexpr Real kNaN = std::numeric_limits<Real>::quiet_NaN();

// Fills objective columns of `row` at the reported and practice points.
void evaluate_row(RunRecordRow& row, const StochasticOracle& oracle,
                  const ParamVector& reported, const ParamVector& practice,
                  bool evaluate) {
  row.f_reported = kNaN;
  row.f_practice = kNaN;
  if (!evaluate || !oracle.has_objective()) return;
  row.f_reported = oracle.objective(reported);
  row.f_practice = &reported == &practice ? row.f_reported
                                          : oracle.objective(practice);
  if (oracle.has_optimum()) {
    row.suboptimality = row.f_reported - oracle.optimum_value();
  }
}

void fill_step_metrics(RunRecordRow& row, const ScheduleStep& s, Real beta,
                       const ParamVector& h) {
  row.k = s.k;
  row.alpha = s.alpha;
  row.gamma = s.gamma;
  row.h_inf = norm_inf(h);
  Real lo = std::numeric_limits<Real>::infinity();
  Real hi = 0.0;
  for (Real hv : h) {
    const Real step = 1.0 / (s.gamma + beta * hv);
    lo = std::min(lo, step);
    hi = std::max(hi, step);
  }
  row.step_min = lo;
  row.step_max = hi;
}

GradientSample draw(const StochasticOracle& oracle, const ParamVector& at,
                    SeededRng& rng, std::size_t k) {
  GradientSample sample = oracle.stochastic_gradient(at, rng);
  require_same_dim(sample.gradient, at, "stochastic_gradient");
  require_finite(sample.gradient, "stochastic gradient", k);
  return sample;
}

}  // namespace

std::string_view to_string(IterationForm form) {
  return form == IterationForm::two_sequence ? "two_sequence"
                                             : "three_sequence";
}

IterationForm parse_iteration_form(std::string_view name) {
  if (name == "three_sequence" || name == "three") {
    return IterationForm::three_sequence;
  }
  if (name == "two_sequence" || name == "two") return IterationForm::two_sequence;
  throw ConfigError("unknown iteration form '" + std::string(name) + "'");
}

ScalerState ScalerSpec::make(std::size_t dim) const {
  switch (scheme) {
    case ScalerScheme::none: return ScalerState::none(dim);
    case ScalerScheme::uniform: return ScalerState::uniform(dim);
    case ScalerScheme::incremental: return ScalerState::incremental(dim);
    case ScalerScheme::qweighted: return ScalerState::qweighted(dim, q);
    case ScalerScheme::exponential: return ScalerState::exponential(dim, rho);
  }
  throw ContractError("unhandled scaler scheme");
}

void A2GradConfig::validate(std::size_t dim) const {
  if (!(lipschitz > 0.0) || !std::isfinite(lipschitz)) {
    throw ConfigError("a2grad: Lipschitz constant must be positive");
  }
  if (!(beta >= 0.0) || !std::isfinite(beta)) {
    throw ConfigError("a2grad: beta must be non-negative");
  }
  (void)scaler.make(1);  // validates q / rho
  if (!projection.is_unconstrained()) {
    if (form == IterationForm::two_sequence) {
      throw ConfigError(
          "a2grad: the two-sequence form supports unconstrained problems only");
    }
    if (projection.lower().size() != dim) {
      throw ConfigError("a2grad: box dimension does not match the problem");
    }
  }
}

std::string A2GradConfig::label() const {
  switch (scaler.scheme) {
    case ScalerScheme::none: return "a2grad-none";
    case ScalerScheme::uniform: return "a2grad-uni";
    case ScalerScheme::incremental: return "a2grad-inc";
    case ScalerScheme::qweighted: return "a2grad-q" + format_real_shortest(scaler.q);
    case ScalerScheme::exponential: return "a2grad-exp";
  }
  return "a2grad";
}

A2GradState A2GradState::init(const A2GradConfig& config, ParamVector x0) {
  config.projection.apply(x0);
  require_finite(x0, "starting point", 0);
  A2GradState state{
      .form = config.form,
      .k = 0,
      .x = x0,
      .x_bar = {},
      .y = {},
      .last_eval_point = x0,
      .scaler = config.scaler.make(x0.size()),
      .delta_est = DeltaEstimator(config.delta_mode),
  };
  if (config.form == IterationForm::three_sequence) {
    state.x_bar = x0;
  } else {
    state.y = x0;
  }
  return state;
}

RunRecordRow step_three_sequence(A2GradState& state, const A2GradConfig& config,
                                 const StochasticOracle& oracle,
                                 SeededRng& rng, bool evaluate) {
  if (state.form != IterationForm::three_sequence) {
    throw ContractError("step_three_sequence on a two-sequence state");
  }
  const auto schedule = MomentumSchedule::accelerated(config.lipschitz);
  const std::size_t k = state.k;
  const ScheduleStep s = schedule.step_at(k);
  const std::size_t d = state.x.size();

  ParamVector x_under(d);
  for (std::size_t i = 0; i < d; ++i) {
    x_under[i] = (1.0 - s.alpha) * state.x_bar[i] + s.alpha * state.x[i];
  }

  const GradientSample sample = draw(oracle, x_under, rng, k);
  const ParamVector delta =
      estimate_delta(state.delta_est, sample, x_under, oracle);
  const ParamVector h = state.scaler.update(delta);
  const ParamVector step =
      elementwise_div_shift(sample.gradient, s.gamma, config.beta, h);

  ParamVector x_next(d);
  for (std::size_t i = 0; i < d; ++i) x_next[i] = state.x[i] - step[i];
  config.projection.apply(x_next);
  require_finite(x_next, "iterate", k);

  ParamVector x_bar_next(d);
  for (std::size_t i = 0; i < d; ++i) {
    x_bar_next[i] = (1.0 - s.alpha) * state.x_bar[i] + s.alpha * x_next[i];
  }

  state.x = std::move(x_next);
  state.x_bar = std::move(x_bar_next);
  state.last_eval_point = std::move(x_under);
  state.k = k + 1;

  RunRecordRow row;
  fill_step_metrics(row, s, config.beta, h);
  if (evaluate && oracle.has_objective()) {
    const Real a_next = schedule.step_at(k + 1).alpha;
    ParamVector next_eval(d);
    for (std::size_t i = 0; i < d; ++i) {
      next_eval[i] = (1.0 - a_next) * state.x_bar[i] + a_next * state.x[i];
    }
    evaluate_row(row, oracle, state.x_bar, next_eval, true);
  } else {
    evaluate_row(row, oracle, state.x_bar, state.x_bar, false);
  }
  return row;
}

RunRecordRow step_two_sequence(A2GradState& state, const A2GradConfig& config,
                               const StochasticOracle& oracle, SeededRng& rng,
                               bool evaluate) {
  if (state.form != IterationForm::two_sequence) {
    throw ContractError("step_two_sequence on a three-sequence state");
  }
  if (!config.projection.is_unconstrained()) {
    throw ConfigError("two-sequence form cannot apply a projection");
  }
  const auto schedule = MomentumSchedule::accelerated(config.lipschitz);
  const std::size_t k = state.k;
  const ScheduleStep s = schedule.step_at(k);
  const Real a_next = schedule.step_at(k + 1).alpha;
  const std::size_t d = state.x.size();

  const GradientSample sample = draw(oracle, state.y, rng, k);
  const ParamVector delta =
      estimate_delta(state.delta_est, sample, state.y, oracle);
  const ParamVector h = state.scaler.update(delta);
  const ParamVector step =
      elementwise_div_shift(sample.gradient, s.gamma, config.beta, h);

  ParamVector x_next(d);
  ParamVector y_next(d);
  for (std::size_t i = 0; i < d; ++i) {
    x_next[i] = state.x[i] - step[i];
    y_next[i] = (1.0 - a_next) * state.y[i] + a_next * x_next[i] -
                (1.0 - a_next) * s.alpha * step[i];
  }
  require_finite(x_next, "iterate", k);
  require_finite(y_next, "evaluation point", k);

  state.last_eval_point = std::move(state.y);
  state.x = std::move(x_next);
  state.y = std::move(y_next);
  state.k = k + 1;

  RunRecordRow row;
  fill_step_metrics(row, s, config.beta, h);
  evaluate_row(row, oracle, state.y, state.y, evaluate);
  return row;
}

RunRecord run(const A2GradConfig& config, const StochasticOracle& oracle,
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

  A2GradState state = A2GradState::init(config, x0);
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
    RunRecordRow row =
        config.form == IterationForm::three_sequence
            ? step_three_sequence(state, config, oracle, rng, evaluate)
            : step_two_sequence(state, config, oracle, rng, evaluate);
    track_distance();
    return row;
  });

  record.final_point = config.form == IterationForm::three_sequence
                           ? state.x_bar
                           : state.y;
  return record;
}

}  // namespace a2grad
