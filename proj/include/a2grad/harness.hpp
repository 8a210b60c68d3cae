#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "a2grad/config.hpp"
#include "a2grad/core.hpp"
#include "a2grad/record.hpp"

namespace a2grad {

std::unique_ptr<StochasticOracle> make_problem(const ProblemSpec& spec);

/// One run of the configured optimizer on `oracle` from x_0 = config x0 fill.
RunRecord run_single(const ExperimentConfig& config,
                     const StochasticOracle& oracle, std::uint64_t seed);

/// Per-k statistics across repeats of the tracked metric (suboptimality
/// when the problem knows f*, else f_reported). Runs whose row k is missing
/// (aborted) or NaN (skipped by eval_stride) do not contribute; rows with no
/// contributions are omitted. std is the sample standard deviation (n - 1
/// denominator, 0 when n == 1).
struct SummaryRow {
  std::size_t k = 0;
  std::size_t count = 0;
  Real mean = 0.0;
  Real std = 0.0;
  Real min = 0.0;
  Real max = 0.0;
  friend bool operator==(const SummaryRow&, const SummaryRow&) = default;
};

struct Summary {
  /// "suboptimality" or "f_reported".
  std::string metric;
  std::vector<SummaryRow> rows;
};

Summary summarize(std::span<const RunRecord> runs);
void write_summary_csv(std::ostream& out, const Summary& summary);
Summary read_summary_csv(std::istream& in);

struct ExperimentResult {
  std::string name;
  std::vector<RunRecord> runs;
  Summary summary;
  /// Empty when the config has no output directory.
  std::vector<std::filesystem::path> run_paths;
  std::optional<std::filesystem::path> summary_path;

  bool any_aborted() const;
};

std::filesystem::path run_csv_path(const std::filesystem::path& dir,
                                   const std::string& name, std::uint64_t seed);
std::filesystem::path summary_csv_path(const std::filesystem::path& dir,
                                       const std::string& name);

/// R = config.repeats runs with seeds seed, seed + 1, ...; up to
/// config.parallel run concurrently. With an output directory each run is
/// written to run_<name>_<seed>.csv (plus run_<name>_<seed>.err when it
/// aborted) and the summary to summary_<name>.csv. Throws ConfigError for
/// invalid configs and IoError, naming the path, when output fails.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// The cartesian grid over the non-empty sweep axes. Each cell is a copy of
/// the base config with its name suffixed by the grid values, e.g.
/// "base_beta10_lip0.1", and an empty sweep.
std::vector<ExperimentConfig> sweep_cells(const ExperimentConfig& config);
std::vector<ExperimentResult> sweep(const ExperimentConfig& config);

/// Least-squares fit of log(value) against log(k).
struct RateFit {
  Real slope = 0.0;
  Real intercept = 0.0;
  Real r_squared = 0.0;
  std::size_t k_lo = 0;
  std::size_t k_hi = 0;
  std::size_t points = 0;
  std::optional<std::string> warning;
};

/// `values[i]` belongs to iteration `ks[i]`; ks must be increasing. Each
/// value in [k_lo, k_hi] is replaced by the mean of itself and the
/// preceding tail_width - 1 entries before the fit (tail_width 1 fits the
/// raw data). NaN entries are skipped. If a nonpositive value occurs in the
/// window, k_hi is pulled in below the first one and `warning` says so.
/// Throws ConfigError if fewer than two usable points remain.
RateFit fit_rate(std::span<const Real> ks, std::span<const Real> values,
                 std::size_t k_lo, std::size_t k_hi, std::size_t tail_width = 1);
/// Fits the suboptimality column. ConfigError if the record has none.
RateFit fit_rate(const RunRecord& record, std::size_t k_lo, std::size_t k_hi,
                 std::size_t tail_width = 1);
/// Fits the mean column of a summary.
RateFit fit_rate(const Summary& summary, std::size_t k_lo, std::size_t k_hi,
                 std::size_t tail_width = 1);

struct ComparisonRow {
  std::string label;
  std::size_t repeats = 0;
  Real final_mean = 0.0;
  Real final_std = 0.0;
  Real best_mean = 0.0;
  Real best_std = 0.0;
};

struct ComparisonTable {
  std::string metric;
  std::vector<ComparisonRow> rows;
};

/// Runs each config and tabulates the final and best-seen metric. All
/// configs must share the problem spec and horizon (ConfigError otherwise).
/// Labels are the config names.
ComparisonTable compare_methods(std::span<const ExperimentConfig> configs);
void write_comparison_csv(std::ostream& out, const ComparisonTable& table);

}  // namespace a2grad
