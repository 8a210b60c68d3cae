#include "a2grad/scaling.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace a2grad {

std::string_view to_string(ScalerScheme scheme) {
  switch (scheme) {
    case ScalerScheme::none: return "none";
    case ScalerScheme::uniform: return "uniform";
    case ScalerScheme::incremental: return "incremental";
    case ScalerScheme::qweighted: return "qweighted";
    case ScalerScheme::exponential: return "exponential";
  }
  return "?";
}

ScalerScheme parse_scaler_scheme(std::string_view name) {
  if (name == "none") return ScalerScheme::none;
  if (name == "uniform" || name == "uni") return ScalerScheme::uniform;
  if (name == "incremental" || name == "inc") return ScalerScheme::incremental;
  if (name == "qweighted") return ScalerScheme::qweighted;
  if (name == "exponential" || name == "exp") return ScalerScheme::exponential;
  throw ConfigError("unknown scaler scheme '" + std::string(name) + "'");
}

ScalerState::ScalerState(ScalerScheme scheme, std::size_t dim, Real q, Real rho)
    : scheme_(scheme), v_(dim), v_tilde_(dim), q_(q), rho_(rho) {}

ScalerState ScalerState::none(std::size_t dim) {
  return {ScalerScheme::none, dim, 0.0, 0.0};
}

ScalerState ScalerState::uniform(std::size_t dim) {
  return {ScalerScheme::uniform, dim, 0.0, 0.0};
}

ScalerState ScalerState::incremental(std::size_t dim) {
  return {ScalerScheme::incremental, dim, 2.0, 0.0};
}

ScalerState ScalerState::qweighted(std::size_t dim, Real q) {
  if (!(q >= 0.0 && q <= 2.0)) throw ConfigError("q must lie in [0, 2]");
  return {ScalerScheme::qweighted, dim, q, 0.0};
}

ScalerState ScalerState::exponential(std::size_t dim, Real rho) {
  if (!(rho > 0.0 && rho < 1.0)) throw ConfigError("rho must lie in (0, 1)");
  return {ScalerScheme::exponential, dim, 0.0, rho};
}

ParamVector ScalerState::update(const ParamVector& delta) {
  switch (scheme_) {
    case ScalerScheme::none:
      require_same_dim(v_, delta, "ScalerState::update");
      ++k_;
      return ParamVector(v_.size());
    case ScalerScheme::uniform: return update_uniform(*this, delta);
    case ScalerScheme::incremental: return update_incremental(*this, delta);
    case ScalerScheme::qweighted: return update_qweighted(*this, delta, q_);
    case ScalerScheme::exponential: return update_exponential(*this, delta);
  }
  throw ContractError("unhandled scaler scheme");
}

Real qweighted_shrink(std::size_t k, Real q) {
  if (k == 0) return q == 0.0 ? 1.0 : 0.0;
  if (q == 0.0) return 1.0;
  const Real ratio = static_cast<Real>(k) / static_cast<Real>(k + 1);
  if (q == 2.0) return ratio * ratio;
  if (q == 1.0) return ratio;
  return std::pow(ratio, q);
}

namespace {

ParamVector shrink_and_accumulate(ParamVector& v, const ParamVector& delta,
                                  Real shrink) {
  require_same_dim(v, delta, "scaler update");
  ParamVector h(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = shrink * v[i] + delta[i] * delta[i];
    h[i] = std::sqrt(v[i]);
  }
  return h;
}

}  // namespace

ParamVector update_uniform(ScalerState& state, const ParamVector& delta) {
  if (state.scheme_ != ScalerScheme::uniform) {
    throw ContractError("update_uniform on a non-uniform scaler");
  }
  auto h = shrink_and_accumulate(state.v_, delta,
                                 qweighted_shrink(state.k_, 0.0));
  ++state.k_;
  return h;
}

ParamVector update_incremental(ScalerState& state, const ParamVector& delta) {
  if (state.scheme_ != ScalerScheme::incremental) {
    throw ContractError("update_incremental on a non-incremental scaler");
  }
  auto h = shrink_and_accumulate(state.v_, delta,
                                 qweighted_shrink(state.k_, 2.0));
  ++state.k_;
  return h;
}

ParamVector update_qweighted(ScalerState& state, const ParamVector& delta,
                             Real q) {
  if (!(q >= 0.0 && q <= 2.0)) throw ConfigError("q must lie in [0, 2]");
  if (state.scheme_ == ScalerScheme::exponential ||
      state.scheme_ == ScalerScheme::none) {
    throw ContractError("update_qweighted on an incompatible scaler");
  }
  auto h = shrink_and_accumulate(state.v_, delta,
                                 qweighted_shrink(state.k_, q));
  ++state.k_;
  return h;
}

ParamVector update_exponential(ScalerState& state, const ParamVector& delta) {
  if (state.scheme_ != ScalerScheme::exponential) {
    throw ContractError("update_exponential on a non-exponential scaler");
  }
  require_same_dim(state.v_, delta, "update_exponential");
  const Real rho = state.rho_;
  const Real weight = static_cast<Real>(state.k_ + 1);
  ParamVector h(delta.size());
  for (std::size_t i = 0; i < delta.size(); ++i) {
    const Real sq = delta[i] * delta[i];
    state.v_tilde_[i] =
        state.k_ == 0 ? sq : rho * state.v_tilde_[i] + (1.0 - rho) * sq;
    state.v_[i] = std::max(state.v_tilde_[i], state.v_[i]);
    h[i] = std::sqrt(weight * state.v_[i]);
  }
  ++state.k_;
  return h;
}

std::string_view to_string(DeltaEstimator::Mode mode) {
  return mode == DeltaEstimator::Mode::exact ? "exact" : "running_mean";
}

DeltaEstimator::Mode parse_delta_mode(std::string_view name) {
  if (name == "exact") return DeltaEstimator::Mode::exact;
  if (name == "running_mean" || name == "heuristic") {
    return DeltaEstimator::Mode::running_mean;
  }
  throw ConfigError("unknown delta mode '" + std::string(name) + "'");
}

ParamVector estimate_delta(DeltaEstimator& est, const GradientSample& sample,
                           const ParamVector& x,
                           const StochasticOracle& oracle) {
  const ParamVector& g = sample.gradient;
  if (est.mode_ == DeltaEstimator::Mode::exact) {
    if (!oracle.has_exact_gradient()) {
      throw CapabilityError("exact delta mode needs an oracle with exact gradients");
    }
    return g - oracle.exact_gradient(x);
  }
  est.mean_ = running_mean_update(est.mean_, g, est.count_);
  ++est.count_;
  return g - est.mean_;
}

}  // namespace a2grad
