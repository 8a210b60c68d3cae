#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "a2grad/core.hpp"

namespace a2grad {

/// Additive gradient noise. `scale` is sigma (gaussian), C (bounded_uniform:
/// each coordinate uniform on [-C, C]) or sigma_bar (sub_gaussian_mix: an
/// even mixture of N(0, sigma_bar^2) and sigma_bar * Rademacher, both
/// sub-Gaussian with variance factor sigma_bar).
struct NoiseModel {
  enum class Kind { none, gaussian, bounded_uniform, sub_gaussian_mix };

  Kind kind = Kind::none;
  Real scale = 0.0;

  static NoiseModel none() { return {}; }
  static NoiseModel gaussian(Real sigma);
  static NoiseModel bounded_uniform(Real bound);
  static NoiseModel sub_gaussian_mix(Real sigma_bar);

  Real sample(SeededRng& rng) const;
  /// Per-coordinate standard deviation.
  Real stddev() const;

  friend bool operator==(const NoiseModel&, const NoiseModel&) = default;
};

std::string_view to_string(NoiseModel::Kind kind);
NoiseModel::Kind parse_noise_kind(std::string_view name);

/// f(x) = 1/2 sum_i diag_i (x_i - x*_i)^2 with optional additive noise on
/// the gradient. L = max diag, f* = 0.
class QuadraticProblem final : public StochasticOracle {
 public:
  QuadraticProblem(ParamVector diag, ParamVector x_star,
                   NoiseModel noise = NoiseModel::none());

  const ParamVector& diag() const noexcept { return diag_; }
  const ParamVector& x_star() const noexcept { return x_star_; }
  const NoiseModel& noise() const noexcept { return noise_; }
  Real lipschitz() const noexcept { return lipschitz_; }

  std::size_t dimension() const override { return diag_.size(); }
  GradientSample stochastic_gradient(const ParamVector& x,
                                     SeededRng& rng) const override;
  bool has_exact_gradient() const override { return true; }
  ParamVector exact_gradient(const ParamVector& x) const override;
  bool has_objective() const override { return true; }
  Real objective(const ParamVector& x) const override;
  bool has_optimum() const override { return true; }
  Real optimum_value() const override { return 0.0; }
  std::optional<ParamVector> optimum_point() const override { return x_star_; }
  std::optional<Real> noise_sigma() const override;

 private:
  ParamVector diag_;
  ParamVector x_star_;
  NoiseModel noise_;
  Real lipschitz_;
};

/// Curvatures log-spaced over [1, kappa] (diag = [kappa] when dim == 1, so
/// that L = kappa always); x* uniform on [-1, 1]^dim from `seed`.
QuadraticProblem make_quadratic(std::size_t dim, Real kappa, std::uint64_t seed,
                                NoiseModel noise = NoiseModel::none());

/// Multi-class softmax regression with mean cross-entropy loss plus
/// 1/2 * l2 * ||x||^2. Parameters are a classes x features weight matrix
/// stored row-major (class-major). Stochastic gradients average `mini_batch`
/// samples drawn uniformly with replacement; mini_batch >= n gives the full
/// (exact) gradient.
class LogisticProblem final : public StochasticOracle {
 public:
  LogisticProblem(std::vector<Real> features, std::vector<std::size_t> labels,
                  std::size_t num_features, std::size_t num_classes,
                  std::size_t mini_batch, Real l2 = 0.0);

  std::size_t num_samples() const noexcept { return labels_.size(); }
  std::size_t num_features() const noexcept { return num_features_; }
  std::size_t num_classes() const noexcept { return num_classes_; }
  std::size_t mini_batch() const noexcept { return mini_batch_; }
  Real l2() const noexcept { return l2_; }
  std::span<const Real> features() const noexcept { return features_; }
  std::span<const std::size_t> labels() const noexcept { return labels_; }

  LogisticProblem with_mini_batch(std::size_t mini_batch) const;

  std::size_t dimension() const override;
  GradientSample stochastic_gradient(const ParamVector& x,
                                     SeededRng& rng) const override;
  bool has_exact_gradient() const override { return true; }
  ParamVector exact_gradient(const ParamVector& x) const override;
  bool has_objective() const override { return true; }
  Real objective(const ParamVector& x) const override;

  Real accuracy(const ParamVector& x) const;

 private:
  template <typename IndexFn>
  ParamVector batch_gradient(const ParamVector& x, std::size_t count,
                             IndexFn&& index) const;

  std::vector<Real> features_;
  std::vector<std::size_t> labels_;
  std::size_t num_features_;
  std::size_t num_classes_;
  std::size_t mini_batch_;
  Real l2_;
};

/// Gaussian-mixture classification data: class means on a sphere of radius
/// `separation`, unit-variance isotropic noise around them, labels assigned
/// round-robin (sample i belongs to class i mod C).
LogisticProblem make_logistic_synthetic(std::size_t n, std::size_t d,
                                        std::size_t classes, Real separation,
                                        std::uint64_t seed,
                                        std::size_t mini_batch = 128,
                                        Real l2 = 0.0);

/// Loads a CSV with a header row, one sample per line, feature columns
/// followed by an integer label in the last column. The class count is
/// max label + 1. Throws IoError / ConfigError.
LogisticProblem load_csv_dataset(const std::filesystem::path& path,
                                 std::size_t mini_batch = 128, Real l2 = 0.0);

/// Max over coordinates of the error between the analytic gradient and a
/// central difference with step h_fd. The error is relative
/// (|fd - g| / max(|fd|, |g|)) unless both magnitudes are below 1e-8, in
/// which case it is absolute.
Real finite_difference_check(const StochasticOracle& problem,
                             const ParamVector& x, Real h_fd = 1e-6);

}  // namespace a2grad
