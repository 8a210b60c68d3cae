#pragma once

#include <cstddef>
#include <string_view>

#include "a2grad/core.hpp"

namespace a2grad {

/// Diagonal scaling rules. Each consumes one gradient-error vector delta_k
/// per iteration and emits h_k >= 0.
///
///   uniform      v_k = v_{k-1} + delta_k^2,                     h_k = sqrt(v_k)
///   incremental  v_k = k^2/(k+1)^2 v_{k-1} + delta_k^2,         h_k = sqrt(v_k)
///   qweighted    v_k = (k/(k+1))^q v_{k-1} + delta_k^2,         h_k = sqrt(v_k)
///   exponential  vt_k = rho vt_{k-1} + (1-rho) delta_k^2  (vt_0 = delta_0^2),
///                v_k = max(vt_k, v_{k-1}),                      h_k = sqrt((k+1) v_k)
///   none         h_k = 0
///
/// uniform and incremental are qweighted with q = 0 and q = 2 and share its
/// shrink-factor code path, so the traces agree bit for bit.
enum class ScalerScheme { none, uniform, incremental, qweighted, exponential };

std::string_view to_string(ScalerScheme scheme);
ScalerScheme parse_scaler_scheme(std::string_view name);

class ScalerState {
 public:
  static ScalerState none(std::size_t dim);
  static ScalerState uniform(std::size_t dim);
  static ScalerState incremental(std::size_t dim);
  static ScalerState qweighted(std::size_t dim, Real q);
  static ScalerState exponential(std::size_t dim, Real rho);

  ScalerScheme scheme() const noexcept { return scheme_; }
  std::size_t dimension() const noexcept { return v_.size(); }
  /// Number of updates applied so far (the index of the next delta).
  std::size_t k() const noexcept { return k_; }
  Real q() const noexcept { return q_; }
  Real rho() const noexcept { return rho_; }
  const ParamVector& v() const noexcept { return v_; }
  const ParamVector& v_tilde() const noexcept { return v_tilde_; }

  /// Dispatches to the update matching scheme().
  ParamVector update(const ParamVector& delta);

  friend ParamVector update_uniform(ScalerState&, const ParamVector&);
  friend ParamVector update_incremental(ScalerState&, const ParamVector&);
  friend ParamVector update_qweighted(ScalerState&, const ParamVector&, Real);
  friend ParamVector update_exponential(ScalerState&, const ParamVector&);

 private:
  ScalerState(ScalerScheme scheme, std::size_t dim, Real q, Real rho);

  ScalerScheme scheme_;
  ParamVector v_;
  ParamVector v_tilde_;
  Real q_ = 0.0;
  Real rho_ = 0.0;
  std::size_t k_ = 0;
};

ParamVector update_uniform(ScalerState& state, const ParamVector& delta);
ParamVector update_incremental(ScalerState& state, const ParamVector& delta);
/// Throws ConfigError when q is outside [0, 2]. Valid on uniform,
/// incremental and qweighted states.
ParamVector update_qweighted(ScalerState& state, const ParamVector& delta,
                             Real q);
ParamVector update_exponential(ScalerState& state, const ParamVector& delta);

/// (k / (k+1))^q, with q = 0 and q = 2 evaluated without pow().
Real qweighted_shrink(std::size_t k, Real q);

/// Source of the gradient-error vector delta_k fed to the scaler.
///
/// running_mean: delta_k = G_k - mean(G_0..G_k); the mean is updated with
/// the current sample first, so delta_0 = 0.
/// exact: delta_k = G_k - grad f(x) via the oracle's exact gradient.
class DeltaEstimator {
 public:
  enum class Mode { running_mean, exact };

  explicit DeltaEstimator(Mode mode = Mode::running_mean) : mode_(mode) {}

  Mode mode() const noexcept { return mode_; }
  const ParamVector& mean() const noexcept { return mean_; }
  std::size_t count() const noexcept { return count_; }

  friend ParamVector estimate_delta(DeltaEstimator&, const GradientSample&,
                                    const ParamVector&,
                                    const StochasticOracle&);

 private:
  Mode mode_;
  ParamVector mean_;
  std::size_t count_ = 0;
};

std::string_view to_string(DeltaEstimator::Mode mode);
DeltaEstimator::Mode parse_delta_mode(std::string_view name);

/// Throws CapabilityError in exact mode when the oracle lacks gradients.
ParamVector estimate_delta(DeltaEstimator& est, const GradientSample& sample,
                           const ParamVector& x,
                           const StochasticOracle& oracle);

}  // namespace a2grad
