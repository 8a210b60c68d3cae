#include "a2grad/core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace a2grad {

NonFiniteError::NonFiniteError(const std::string& what, std::size_t iteration)
    : std::runtime_error(what + " at iteration " + std::to_string(iteration)),
      iteration_(iteration) {}

bool ParamVector::all_finite() const noexcept {
  return std::all_of(coords_.begin(), coords_.end(),
                     [](Real v) { return std::isfinite(v); });
}

void require_same_dim(const ParamVector& a, const ParamVector& b,
                      const char* where) {
  if (a.size() != b.size()) {
    throw ContractError(std::string(where) + ": dimension mismatch (" +
                        std::to_string(a.size()) + " vs " +
                        std::to_string(b.size()) + ")");
  }
}

void require_finite(const ParamVector& v, const char* what,
                    std::size_t iteration) {
  if (!v.all_finite()) {
    throw NonFiniteError(std::string("non-finite ") + what, iteration);
  }
}

Real dot(const ParamVector& a, const ParamVector& b) {
  require_same_dim(a, b, "dot");
  Real s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

Real norm2(const ParamVector& v) { return std::sqrt(dot(v, v)); }

Real norm_inf(const ParamVector& v) {
  Real m = 0.0;
  for (Real c : v) m = std::max(m, std::abs(c));
  return m;
}

ParamVector operator-(const ParamVector& a, const ParamVector& b) {
  require_same_dim(a, b, "operator-");
  ParamVector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

void CompensatedSum::add(Real v) noexcept {
  const Real t = sum_ + v;
  if (std::abs(sum_) >= std::abs(v)) {
    comp_ += (sum_ - t) + v;
  } else {
    comp_ += (v - t) + sum_;
  }
  sum_ = t;
}

std::uint64_t SeededRng::next_u64() noexcept {
  ++position_;
  std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Real SeededRng::uniform() noexcept {
  return static_cast<Real>(next_u64() >> 11) * 0x1.0p-53;
}

__extension__ typedef unsigned __int128 Uint128;

std::uint64_t SeededRng::below(std::uint64_t n) noexcept {
  const Uint128 product = static_cast<Uint128>(next_u64()) * n;
  return static_cast<std::uint64_t>(product >> 64);
}

Real SeededRng::normal() noexcept {
  if (spare_normal_) {
    const Real v = *spare_normal_;
    spare_normal_.reset();
    return v;
  }
  Real u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const Real scale = std::sqrt(-2.0 * std::log(s) / s);
  spare_normal_ = v * scale;
  return u * scale;
}

ParamVector StochasticOracle::exact_gradient(const ParamVector&) const {
  throw CapabilityError("oracle does not provide exact gradients");
}

Real StochasticOracle::objective(const ParamVector&) const {
  throw CapabilityError("oracle does not provide objective values");
}

Real StochasticOracle::optimum_value() const {
  throw CapabilityError("oracle does not declare its optimum");
}

ParamVector elementwise_div_shift(const ParamVector& g, Real gamma, Real beta,
                                  const ParamVector& h) {
  require_same_dim(g, h, "elementwise_div_shift");
  if (!(gamma > 0.0)) throw ConfigError("gamma must be positive");
  if (!(beta >= 0.0)) throw ConfigError("beta must be non-negative");
  ParamVector out(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!(h[i] >= 0.0)) {
      throw ContractError("elementwise_div_shift: negative scaling entry");
    }
    out[i] = g[i] / (gamma + beta * h[i]);
  }
  return out;
}

ParamVector running_mean_update(const ParamVector& mean,
                                const ParamVector& sample, std::size_t k) {
  if (k == 0) return sample;
  require_same_dim(mean, sample, "running_mean_update");
  const Real count = static_cast<Real>(k + 1);
  ParamVector out(mean.size());
  for (std::size_t i = 0; i < mean.size(); ++i) {
    out[i] = mean[i] + (sample[i] - mean[i]) / count;
  }
  return out;
}

}  // namespace a2grad
