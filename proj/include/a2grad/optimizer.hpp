#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

#include "a2grad/core.hpp"
#include "a2grad/projection.hpp"
#include "a2grad/record.hpp"
#include "a2grad/scaling.hpp"
#include "a2grad/schedule.hpp"

namespace a2grad {

/// three_sequence keeps (x_k, x_bar_k) and forms the evaluation point
/// x_under_k = (1 - alpha_k) x_bar_k + alpha_k x_k each step. two_sequence
/// keeps (x_k, y_k) with y_k = x_under_k updated directly; it only supports
/// unconstrained problems.
enum class IterationForm { three_sequence, two_sequence };

std::string_view to_string(IterationForm form);
IterationForm parse_iteration_form(std::string_view name);

struct ScalerSpec {
  ScalerScheme scheme = ScalerScheme::uniform;
  Real q = 0.0;
  Real rho = 0.9;

  ScalerState make(std::size_t dim) const;
};

struct A2GradConfig {
  Real lipschitz = 1.0;
  /// Constant weight on the adaptive term. 0 gives plain accelerated SGD.
  Real beta = 1.0;
  ScalerSpec scaler;
  DeltaEstimator::Mode delta_mode = DeltaEstimator::Mode::running_mean;
  ProjectionSpec projection;
  IterationForm form = IterationForm::three_sequence;

  /// Throws ConfigError on invalid hyperparameters or an unsupported
  /// combination (two-sequence form with a projection).
  void validate(std::size_t dim) const;
  /// Short human-readable name, e.g. "a2grad-uni".
  std::string label() const;
};

struct A2GradState {
  IterationForm form = IterationForm::three_sequence;
  std::size_t k = 0;
  /// Mirror-descent point x_k (both forms).
  ParamVector x;
  /// Averaged point x_bar_k (three-sequence form only).
  ParamVector x_bar;
  /// Evaluation point y_k (two-sequence form only).
  ParamVector y;
  /// Point the most recent gradient was taken at.
  ParamVector last_eval_point;
  ScalerState scaler;
  DeltaEstimator delta_est;

  /// x_bar_0 = x_0 (three-sequence) or y_0 = x_0 (two-sequence). x0 is
  /// projected first when the config has a box.
  static A2GradState init(const A2GradConfig& config, ParamVector x0);
};

/// One iteration of the averaged three-sequence scheme:
///   x_under = (1 - a_k) x_bar + a_k x
///   G = stochastic gradient at x_under;  delta, h from the estimator/scaler
///   x <- Proj(x - G / (gamma_k + beta h));  x_bar <- (1 - a_k) x_bar + a_k x
/// Objectives are only evaluated when `evaluate` is set.
RunRecordRow step_three_sequence(A2GradState& state, const A2GradConfig& config,
                                 const StochasticOracle& oracle,
                                 SeededRng& rng, bool evaluate = true);

/// One iteration of the memory-reduced form:
///   x <- x - G / (gamma_k + beta h)
///   y <- (1 - a_{k+1}) y + a_{k+1} x - (1 - a_{k+1}) a_k G / (gamma_k + beta h)
/// with G taken at y. Produces the same y trace as the three-sequence
/// x_under trace up to rounding.
RunRecordRow step_two_sequence(A2GradState& state, const A2GradConfig& config,
                               const StochasticOracle& oracle, SeededRng& rng,
                               bool evaluate = true);

/// Runs iterations k = 0..K (K + 1 rows) from x0 with a fresh RNG seeded by
/// `seed`. Throws ConfigError for K < 1 or invalid configs; non-finite
/// iterates end the run early with RunRecord::error set.
RunRecord run(const A2GradConfig& config, const StochasticOracle& oracle,
              const ParamVector& x0, std::size_t K, std::uint64_t seed,
              const RunOptions& options = {});

}  // namespace a2grad
