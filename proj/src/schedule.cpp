#include "a2grad/schedule.hpp"

#include <cmath>
#include <string>

namespace a2grad {

namespace {

constexpr Real kConditionSlack = 1e-12;

void require_lipschitz(Real lipschitz) {
  if (!(lipschitz > 0.0) || !std::isfinite(lipschitz)) {
    throw ConfigError("Lipschitz constant must be positive and finite");
  }
}

}  // namespace

MomentumSchedule::MomentumSchedule(Mode mode, Real lipschitz, Sequence alpha,
                                   Sequence gamma)
    : mode_(mode),
      lipschitz_(lipschitz),
      alpha_(std::move(alpha)),
      gamma_(std::move(gamma)) {}

MomentumSchedule MomentumSchedule::accelerated(Real lipschitz) {
  require_lipschitz(lipschitz);
  return MomentumSchedule(Mode::accelerated_default, lipschitz, nullptr,
                          nullptr);
}

MomentumSchedule MomentumSchedule::custom(Real lipschitz, Sequence alpha,
                                          Sequence gamma) {
  require_lipschitz(lipschitz);
  if (!alpha || !gamma) throw ConfigError("custom schedule needs both sequences");
  return MomentumSchedule(Mode::custom, lipschitz, std::move(alpha),
                          std::move(gamma));
}

Real MomentumSchedule::alpha_at(std::size_t k) const {
  if (mode_ == Mode::accelerated_default) {
    return 2.0 / static_cast<Real>(k + 2);
  }
  const Real a = alpha_(k);
  // alpha_0 = 1 is allowed (it never enters the lambda product); later
  // values must stay strictly inside (0, 1).
  const bool valid = k == 0 ? (a > 0.0 && a <= 1.0) : (a > 0.0 && a < 1.0);
  if (!valid) {
    throw ConfigError("custom alpha_" + std::to_string(k) +
                      " outside (0, 1): lambda product undefined");
  }
  return a;
}

Real MomentumSchedule::gamma_at(std::size_t k) const {
  if (mode_ == Mode::accelerated_default) {
    return 2.0 * lipschitz_ / static_cast<Real>(k + 1);
  }
  const Real g = gamma_(k);
  if (!(g > 0.0) || !std::isfinite(g)) {
    throw ConfigError("custom gamma_" + std::to_string(k) + " must be positive");
  }
  return g;
}

ScheduleStep MomentumSchedule::step_at(std::size_t k) const {
  ScheduleStep s;
  s.k = k;
  s.alpha = alpha_at(k);
  s.gamma = gamma_at(k);
  if (mode_ == Mode::accelerated_default) {
    const Real kk = static_cast<Real>(k);
    s.lambda = (kk + 1.0) * (kk + 2.0) / 2.0;
    s.lambda_alpha = kk + 1.0;
    return s;
  }
  if (k > kCustomHorizonCap) {
    throw ConfigError("custom schedule index exceeds horizon cap");
  }
  CompensatedSum log_sum;
  for (std::size_t i = 1; i <= k; ++i) log_sum.add(-std::log1p(-alpha_at(i)));
  s.lambda = std::exp(log_sum.value());
  s.lambda_alpha = s.lambda * s.alpha;
  return s;
}

std::vector<ScheduleStep> MomentumSchedule::table(std::size_t K) const {
  if (mode_ == Mode::custom && K > kCustomHorizonCap) {
    throw ConfigError("custom schedule horizon exceeds cap of 1e6");
  }
  std::vector<ScheduleStep> out;
  out.reserve(K + 1);
  if (mode_ == Mode::accelerated_default) {
    for (std::size_t k = 0; k <= K; ++k) out.push_back(step_at(k));
    return out;
  }
  CompensatedSum log_sum;
  for (std::size_t k = 0; k <= K; ++k) {
    ScheduleStep s;
    s.k = k;
    s.alpha = alpha_at(k);
    s.gamma = gamma_at(k);
    if (k > 0) log_sum.add(-std::log1p(-s.alpha));
    s.lambda = std::exp(log_sum.value());
    s.lambda_alpha = s.lambda * s.alpha;
    out.push_back(s);
  }
  return out;
}

std::vector<std::size_t> ValidationReport::indices(int condition) const {
  std::vector<std::size_t> out;
  for (const auto& v : violations) {
    if (v.condition == condition) out.push_back(v.k);
  }
  return out;
}

ValidationReport validate_conditions(const MomentumSchedule& schedule,
                                     std::size_t K) {
  if (K < 1) throw ConfigError("validation horizon must be >= 1");
  const auto steps = schedule.table(K);
  const Real L = schedule.lipschitz();

  ValidationReport report;
  report.horizon = K;
  for (std::size_t k = 0; k <= K; ++k) {
    const Real lhs = L * steps[k].alpha;
    const Real rhs = steps[k].gamma;
    if (lhs > rhs * (1.0 + kConditionSlack)) {
      report.violations.push_back({1, k, lhs, rhs});
    }
  }
  for (std::size_t k = 0; k < K; ++k) {
    const Real lhs = steps[k + 1].lambda_alpha * steps[k + 1].gamma;
    const Real rhs = steps[k].lambda_alpha * steps[k].gamma;
    if (lhs > rhs * (1.0 + kConditionSlack)) {
      report.violations.push_back({2, k, lhs, rhs});
    }
  }
  return report;
}

}  // namespace a2grad
