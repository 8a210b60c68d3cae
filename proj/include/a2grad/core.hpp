#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace a2grad {

using Real = double;

// Error taxonomy. The CLI maps these onto exit codes 2 (config), 3 (runtime
// abort) and 4 (I/O); ContractError signals a programming mistake.

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class CapabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when an optimizer-bound vector picks up a NaN or infinity.
class NonFiniteError : public std::runtime_error {
 public:
  NonFiniteError(const std::string& what, std::size_t iteration);
  std::size_t iteration() const noexcept { return iteration_; }

 private:
  std::size_t iteration_;
};

/// Dense coordinate vector of fixed dimension. Iterates, gradients, scaling
/// vectors and gradient-error estimates all live in one of these.
class ParamVector {
 public:
  ParamVector() = default;
  explicit ParamVector(std::size_t dim, Real fill = 0.0) : coords_(dim, fill) {}
  ParamVector(std::initializer_list<Real> values) : coords_(values) {}
  explicit ParamVector(std::vector<Real> values) : coords_(std::move(values)) {}

  std::size_t size() const noexcept { return coords_.size(); }
  bool empty() const noexcept { return coords_.empty(); }

  Real& operator[](std::size_t i) { return coords_[i]; }
  Real operator[](std::size_t i) const { return coords_[i]; }

  Real* data() noexcept { return coords_.data(); }
  const Real* data() const noexcept { return coords_.data(); }
  std::span<Real> span() noexcept { return coords_; }
  std::span<const Real> span() const noexcept { return coords_; }

  auto begin() noexcept { return coords_.begin(); }
  auto end() noexcept { return coords_.end(); }
  auto begin() const noexcept { return coords_.begin(); }
  auto end() const noexcept { return coords_.end(); }

  const std::vector<Real>& values() const noexcept { return coords_; }

  bool all_finite() const noexcept;

  friend bool operator==(const ParamVector&, const ParamVector&) = default;

 private:
  std::vector<Real> coords_;
};

void require_same_dim(const ParamVector& a, const ParamVector& b,
                      const char* where);
void require_finite(const ParamVector& v, const char* what,
                    std::size_t iteration);

Real dot(const ParamVector& a, const ParamVector& b);
Real norm2(const ParamVector& v);
Real norm_inf(const ParamVector& v);
ParamVector operator-(const ParamVector& a, const ParamVector& b);

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(Real v) noexcept;
  Real value() const noexcept { return sum_ + comp_; }

 private:
  Real sum_ = 0.0;
  Real comp_ = 0.0;
};

/// SplitMix64 stream. Counter based: the n-th draw is a fixed bijective mix
/// of seed + n * 0x9E3779B97F4A7C15, so streams are identical on every
/// platform and position() reports how many 64-bit words have been consumed.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : seed_(seed), state_(seed) {}

  std::uint64_t next_u64() noexcept;
  /// Uniform on [0, 1) with 53 random bits.
  Real uniform() noexcept;
  Real uniform(Real lo, Real hi) noexcept { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n) by 128-bit multiply-shift. n must be > 0.
  std::uint64_t below(std::uint64_t n) noexcept;
  /// Standard normal via the Marsaglia polar method (variable draw count).
  Real normal() noexcept;

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t position() const noexcept { return position_; }

 private:
  std::uint64_t seed_;
  std::uint64_t state_;
  std::uint64_t position_ = 0;
  std::optional<Real> spare_normal_;
};

struct GradientSample {
  ParamVector gradient;
  std::uint64_t sample_id = 0;
};

/// Problem contract. stochastic_gradient must be deterministic in the RNG
/// state; the remaining capabilities are optional and advertised through the
/// has_* queries.
class StochasticOracle {
 public:
  virtual ~StochasticOracle() = default;

  virtual std::size_t dimension() const = 0;
  virtual GradientSample stochastic_gradient(const ParamVector& x,
                                             SeededRng& rng) const = 0;

  virtual bool has_exact_gradient() const { return false; }
  virtual ParamVector exact_gradient(const ParamVector& x) const;

  virtual bool has_objective() const { return false; }
  virtual Real objective(const ParamVector& x) const;

  virtual bool has_optimum() const { return false; }
  virtual Real optimum_value() const;
  /// Minimizer, when the problem knows it. Used for post-hoc diagnostics.
  virtual std::optional<ParamVector> optimum_point() const {
    return std::nullopt;
  }

  /// Declared per-coordinate noise standard deviation, if calibrated.
  virtual std::optional<Real> noise_sigma() const { return std::nullopt; }
  /// Box the problem is posed on, if any: (lower, upper).
  virtual std::optional<std::pair<ParamVector, ParamVector>> domain() const {
    return std::nullopt;
  }
};

/// Per-coordinate step g_i / (gamma + beta * h_i).
ParamVector elementwise_div_shift(const ParamVector& g, Real gamma, Real beta,
                                  const ParamVector& h);

/// Incremental arithmetic mean: mean + (sample - mean) / (k + 1). At k == 0
/// the prior mean is ignored and the sample is returned.
ParamVector running_mean_update(const ParamVector& mean,
                                const ParamVector& sample, std::size_t k);

}  // namespace a2grad
