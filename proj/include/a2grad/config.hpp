#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "a2grad/baselines.hpp"
#include "a2grad/core.hpp"
#include "a2grad/optimizer.hpp"
#include "a2grad/problems.hpp"

namespace a2grad {

enum class ProblemKind { quadratic, logistic, counterexample, csv };

std::string_view to_string(ProblemKind kind);
ProblemKind parse_problem_kind(std::string_view name);

/// Everything needed to rebuild a problem instance. `seed` fixes the
/// instance (x*, synthetic data); it is independent of the run seeds.
struct ProblemSpec {
  ProblemKind kind = ProblemKind::quadratic;
  std::uint64_t seed = 0;
  // quadratic
  std::size_t dim = 10;
  Real kappa = 10.0;
  NoiseModel noise;
  // logistic (synthetic) and csv
  std::size_t samples = 2000;
  std::size_t features = 50;
  std::size_t classes = 10;
  Real separation = 2.0;
  std::size_t batch = 128;
  Real l2 = 0.0;
  std::string path;
  // counterexample
  Real large_gradient = 3.0;

  friend bool operator==(const ProblemSpec&, const ProblemSpec&) = default;
};

enum class OptimizerMethod { a2grad, sgd, adagrad, adam, amsgrad };

std::string_view to_string(OptimizerMethod method);
OptimizerMethod parse_optimizer_method(std::string_view name);

/// auto: use the problem's declared domain if it has one.
enum class ProjectionMode { automatic, none, box };

std::string_view to_string(ProjectionMode mode);
ProjectionMode parse_projection_mode(std::string_view name);

struct OptimizerSpec {
  OptimizerMethod method = OptimizerMethod::a2grad;
  // a2grad
  IterationForm form = IterationForm::three_sequence;
  ScalerScheme scaler = ScalerScheme::uniform;
  Real q = 0.0;
  Real rho = 0.9;
  DeltaEstimator::Mode delta = DeltaEstimator::Mode::running_mean;
  Real lipschitz = 1.0;
  Real beta = 1.0;
  // baselines
  Real learning_rate = 0.01;
  RatePolicy rate_policy = RatePolicy::constant;
  Real beta1 = 0.9;
  Real beta2 = 0.99;
  Real epsilon = 1e-8;
  bool bias_correction = true;
  bool cumulative_second_moment = false;
  // shared
  ProjectionMode projection = ProjectionMode::automatic;
  Real box_lower = -1.0;
  Real box_upper = 1.0;
  /// Every coordinate of x_0.
  Real x0 = 0.0;

  friend bool operator==(const OptimizerSpec&, const OptimizerSpec&) = default;

  ProjectionSpec projection_for(const StochasticOracle& oracle) const;
  A2GradConfig a2grad_config(const StochasticOracle& oracle) const;
  BaselineConfig baseline_config(const StochasticOracle& oracle) const;
  /// "a2grad-uni", "sgd", ...
  std::string label() const;
};

/// Grid axes for `sweep`. Empty axes keep the base value.
struct SweepSpec {
  std::vector<Real> beta;
  std::vector<Real> lipschitz;
  std::vector<Real> learning_rate;

  bool empty() const noexcept {
    return beta.empty() && lipschitz.empty() && learning_rate.empty();
  }
  friend bool operator==(const SweepSpec&, const SweepSpec&) = default;
};

struct ExperimentConfig {
  std::string name = "experiment";
  ProblemSpec problem;
  OptimizerSpec optimizer;
  std::size_t iters = 1000;
  std::size_t repeats = 5;
  std::uint64_t seed = 0;
  /// Output directory. Empty keeps results in memory only.
  std::string out = "out";
  std::size_t parallel = 1;
  std::size_t eval_stride = 1;
  bool record_timing = false;
  SweepSpec sweep;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;

  /// Checks ranges that do not need the problem instance.
  void validate() const;
};

/// JSON text with sorted keys and shortest round-trip numbers; parsing the
/// output yields an equal config and re-serializing it is byte-identical.
std::string serialize_config(const ExperimentConfig& config);
/// Missing keys take their defaults; unknown keys and wrong types are
/// ConfigErrors.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);
void save_config(const ExperimentConfig& config,
                 const std::filesystem::path& path);

}  // namespace a2grad
