#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "a2grad/core.hpp"

namespace a2grad {

/// One iteration's metrics.
///
/// f_reported is the objective at the point the theory bounds (the averaged
/// iterate x_bar_{k+1} in the three-sequence form, y_{k+1} in the
/// two-sequence form, x_{k+1} for baselines). f_practice is the objective at
/// the next gradient-evaluation point, which is what a practitioner watching
/// training loss would see. Objective columns are NaN on rows skipped by
/// RunOptions::eval_stride or when the oracle has no objective.
struct RunRecordRow {
  std::size_t k = 0;
  Real f_reported = 0.0;
  std::optional<Real> suboptimality;
  Real f_practice = 0.0;
  Real h_inf = 0.0;
  Real alpha = 0.0;
  Real gamma = 0.0;
  Real step_min = 0.0;
  Real step_max = 0.0;
  std::int64_t wall_nanos = 0;

  friend bool operator==(const RunRecordRow&, const RunRecordRow&) = default;
};

struct RunRecord {
  std::string method;
  std::uint64_t seed = 0;
  std::vector<RunRecordRow> rows;
  /// max_k ||x_k - x*||_inf^2 over the mirror-descent iterates, when the
  /// optimum point is known.
  std::optional<Real> max_dist_inf_sq;
  ParamVector final_point;
  /// Set when the run aborted; rows then hold the completed prefix.
  std::optional<std::string> error;
  std::optional<std::size_t> error_iteration;
};

struct RunOptions {
  /// Objectives are evaluated on rows with k % eval_stride == 0 and on the
  /// last row. 1 evaluates every row.
  std::size_t eval_stride = 1;
  /// When false wall_nanos is written as 0 so that outputs are byte-stable.
  bool record_timing = false;
  /// Called with each completed row (progress reporting, tracing).
  std::function<void(const RunRecordRow&)> on_row;
};

constexpr const char* kCsvSchemaTag = "# a2grad-kit v1";

/// Header line of the per-run CSV (without the schema tag).
const std::string& run_csv_header();

/// 17 significant digits; lossless for doubles. Used for CSV output.
std::string format_real(Real v);
/// Shortest string that parses back to the same double. Used for configs.
std::string format_real_shortest(Real v);
/// Accepts the output of format_real / format_real_shortest plus "nan",
/// "inf" and "-inf". Throws ConfigError on malformed input.
Real parse_real(const std::string& text);

void write_run_csv(std::ostream& out, const RunRecord& record);
/// Parses a per-run CSV. method/seed are not stored in the file and are left
/// default.
RunRecord read_run_csv(std::istream& in);

/// Drives `step` for k = 0..K inclusive, timing each call and attaching the
/// abort diagnostic if the step throws NonFiniteError.
template <typename StepFn>
void drive_steps(RunRecord& record, std::size_t K, const RunOptions& options,
                 StepFn&& step) {
  record.rows.reserve(K + 1);
  for (std::size_t k = 0; k <= K; ++k) {
    const auto start = std::chrono::steady_clock::now();
    RunRecordRow row;
    try {
      row = step(k);
    } catch (const NonFiniteError& e) {
      record.error = e.what();
      record.error_iteration = e.iteration();
      return;
    }
    const auto stop = std::chrono::steady_clock::now();
    row.wall_nanos =
        options.record_timing
            ? std::chrono::duration_cast<std::chrono::nanoseconds>(stop - start)
                  .count()
            : 0;
    if (options.on_row) options.on_row(row);
    record.rows.push_back(row);
  }
}

}  // namespace a2grad
