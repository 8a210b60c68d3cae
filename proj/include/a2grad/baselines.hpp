#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>

#include "a2grad/core.hpp"
#include "a2grad/projection.hpp"
#include "a2grad/record.hpp"

namespace a2grad {

// Reference methods of the form x_{k+1} = x_k - eta_k * m_k / (sqrt(v_k) + eps).
// Adam and AMSGrad follow Kingma & Ba (2015) and Reddi, Kale & Kumar (2018);
// bias correction is applied AMSGrad-style to the clamped second moment.

enum class BaselineMethod { sgd, adagrad, adam, amsgrad };
enum class RatePolicy { constant, inverse_sqrt };

std::string_view to_string(BaselineMethod method);
BaselineMethod parse_baseline_method(std::string_view name);
std::string_view to_string(RatePolicy policy);
RatePolicy parse_rate_policy(std::string_view name);

struct BaselineConfig {
  BaselineMethod method = BaselineMethod::sgd;
  Real learning_rate = 0.01;
  RatePolicy rate_policy = RatePolicy::constant;
  Real beta1 = 0.9;
  Real beta2 = 0.99;
  Real epsilon = 1e-8;
  bool bias_correction = true;
  /// Adam/AMSGrad only: accumulate v += G^2 instead of the exponential
  /// average. With beta1 = 0 and no bias correction this is AdaGrad.
  bool cumulative_second_moment = false;
  ProjectionSpec projection;

  void validate(std::size_t dim) const;
  std::string label() const;
  /// eta_k for iteration k.
  Real rate_at(std::size_t k) const;
};

struct BaselineState {
  std::size_t k = 0;
  ParamVector x;
  ParamVector m;
  ParamVector v;
  ParamVector v_hat;

  static BaselineState init(const BaselineConfig& config, ParamVector x0);
};

/// One update of the configured method with the gradient taken at x_k.
/// RunRecordRow::h_inf reports ||sqrt(v)||_inf (1 for SGD) and the step
/// columns report the per-coordinate effective rate eta_k / (sqrt(v) + eps).
RunRecordRow baseline_step(BaselineState& state, const BaselineConfig& config,
                           const StochasticOracle& oracle, SeededRng& rng,
                           bool evaluate = true);

RunRecord run(const BaselineConfig& config, const StochasticOracle& oracle,
              const ParamVector& x0, std::size_t K, std::uint64_t seed,
              const RunOptions& options = {});

/// One-dimensional online problem on [-1, 1] whose gradient cycles through
/// (C, -1, -1). Over a period the average loss is (C - 2)/3 * x, minimized
/// at x* = -1. Adam with beta1 = 0, beta2 = 1/(1 + C^2) and eta_k = eta /
/// sqrt(k+1) drifts to +1 on this stream (Reddi, Kale & Kumar 2018).
///
/// The phase is read from the RNG position and each call consumes exactly
/// one draw, so the cycle is exact when the oracle is the RNG's only
/// consumer, and calls stay pure given the RNG state.
class PeriodicCounterexample final : public StochasticOracle {
 public:
  explicit PeriodicCounterexample(Real large_gradient = 3.0);

  Real large_gradient() const noexcept { return large_; }

  std::size_t dimension() const override { return 1; }
  GradientSample stochastic_gradient(const ParamVector& x,
                                     SeededRng& rng) const override;
  bool has_exact_gradient() const override { return true; }
  ParamVector exact_gradient(const ParamVector& x) const override;
  bool has_objective() const override { return true; }
  Real objective(const ParamVector& x) const override;
  bool has_optimum() const override { return true; }
  Real optimum_value() const override;
  std::optional<ParamVector> optimum_point() const override;
  std::optional<std::pair<ParamVector, ParamVector>> domain() const override;

 private:
  Real large_;
};

std::unique_ptr<StochasticOracle> reddi_counterexample_oracle(
    Real large_gradient = 3.0);

/// Adam settings under which the counterexample fails: beta1 = 0,
/// beta2 = 1/(1+C^2), eta_k = 0.1/sqrt(k+1), projected onto [-1, 1].
BaselineConfig reddi_adam_config(Real large_gradient = 3.0);

}  // namespace a2grad
