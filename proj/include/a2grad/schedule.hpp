#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "a2grad/core.hpp"

namespace a2grad {

struct ScheduleStep {
  std::size_t k = 0;
  Real alpha = 0.0;
  Real gamma = 0.0;
  /// Aggregation weight 1 / prod_{i=1..k} (1 - alpha_i), with lambda_0 = 1.
  Real lambda = 1.0;
  Real lambda_alpha = 0.0;
};

/// Momentum and step-size sequence (alpha_k, gamma_k) plus the derived
/// aggregation weights lambda_k.
///
/// The default mode uses alpha_k = 2/(k+2), gamma_k = 2L/(k+1), for which
/// lambda_k = (k+1)(k+2)/2 and lambda_k alpha_k = k+1 in closed form. Custom
/// mode takes arbitrary sequences and accumulates lambda as a compensated
/// sum of log(1 - alpha_i).
class MomentumSchedule {
 public:
  enum class Mode { accelerated_default, custom };
  using Sequence = std::function<Real(std::size_t)>;

  /// Horizon cap for custom schedules, whose lambda costs O(k) per query.
  static constexpr std::size_t kCustomHorizonCap = 1'000'000;

  static MomentumSchedule accelerated(Real lipschitz);
  static MomentumSchedule custom(Real lipschitz, Sequence alpha,
                                 Sequence gamma);

  Mode mode() const noexcept { return mode_; }
  Real lipschitz() const noexcept { return lipschitz_; }

  ScheduleStep step_at(std::size_t k) const;
  /// Steps 0..K inclusive, computed with a single running product.
  std::vector<ScheduleStep> table(std::size_t K) const;

 private:
  MomentumSchedule(Mode mode, Real lipschitz, Sequence alpha, Sequence gamma);

  Real alpha_at(std::size_t k) const;
  Real gamma_at(std::size_t k) const;

  Mode mode_;
  Real lipschitz_;
  Sequence alpha_;
  Sequence gamma_;
};

struct ConditionViolation {
  /// 1: L alpha_k <= gamma_k.  2: lambda alpha gamma non-increasing in k.
  int condition = 0;
  std::size_t k = 0;
  Real lhs = 0.0;
  Real rhs = 0.0;
};

struct ValidationReport {
  std::size_t horizon = 0;
  std::vector<ConditionViolation> violations;

  bool ok() const noexcept { return violations.empty(); }
  std::vector<std::size_t> indices(int condition) const;
};

/// Checks L alpha_k <= gamma_k for k in [0, K] and
/// lambda_{k+1} alpha_{k+1} gamma_{k+1} <= lambda_k alpha_k gamma_k for k in
/// [0, K-1]. Comparisons allow 1e-12 relative slack so that the default
/// schedule, which meets the second condition with equality, is not flagged
/// for rounding.
ValidationReport validate_conditions(const MomentumSchedule& schedule,
                                     std::size_t K);

}  // namespace a2grad
