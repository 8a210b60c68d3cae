#include "a2grad/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include "a2grad/baselines.hpp"
#include "a2grad/optimizer.hpp"
#include "a2grad/problems.hpp"

namespace a2grad {

namespace {

constexpr Real kNaN = std::numeric_limits<Real>::quiet_NaN();

NoiseModel validated_noise(const NoiseModel& n) {
  switch (n.kind) {
    case NoiseModel::Kind::none: return NoiseModel::none();
    case NoiseModel::Kind::gaussian: return NoiseModel::gaussian(n.scale);
    case NoiseModel::Kind::bounded_uniform: return NoiseModel::bounded_uniform(n.scale);
    case NoiseModel::Kind::sub_gaussian_mix: return NoiseModel::sub_gaussian_mix(n.scale);
  }
  return NoiseModel::none();
}

// Mean and sample standard deviation by the two-pass formula.
std::pair<Real, Real> mean_std(const std::vector<Real>& xs) {
  if (xs.empty()) return {kNaN, kNaN};
  Real sum = 0.0;
  for (Real x : xs) sum += x;
  const Real mean = sum / static_cast<Real>(xs.size());
  if (xs.size() < 2) return {mean, 0.0};
  Real ss = 0.0;
  for (Real x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<Real>(xs.size() - 1))};
}

bool has_suboptimality(const RunRecord& r) {
  return std::any_of(r.rows.begin(), r.rows.end(),
                     [](const RunRecordRow& row) { return row.suboptimality.has_value(); });
}

Real metric_of(const RunRecordRow& row, bool use_subopt) {
  if (use_subopt) return row.suboptimality.value_or(kNaN);
  return row.f_reported;
}

void ensure_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw IoError("cannot create output directory " + dir.string() +
                  (ec ? ": " + ec.message() : ""));
  }
}

template <typename WriteFn>
void write_file(const std::filesystem::path& path, WriteFn&& fn) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  fn(out);
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

}  // namespace

std::unique_ptr<StochasticOracle> make_problem(const ProblemSpec& spec) {
  switch (spec.kind) {
    case ProblemKind::quadratic:
      return std::make_unique<QuadraticProblem>(
          make_quadratic(spec.dim, spec.kappa, spec.seed, validated_noise(spec.noise)));
    case ProblemKind::logistic:
      return std::make_unique<LogisticProblem>(make_logistic_synthetic(
          spec.samples, spec.features, spec.classes, spec.separation, spec.seed,
          spec.batch, spec.l2));
    case ProblemKind::counterexample:
      return std::make_unique<PeriodicCounterexample>(spec.large_gradient);
    case ProblemKind::csv:
      if (spec.path.empty()) throw ConfigError("csv problem needs a path");
      return std::make_unique<LogisticProblem>(
          load_csv_dataset(spec.path, spec.batch, spec.l2));
  }
  throw ConfigError("unknown problem kind");
}

RunRecord run_single(const ExperimentConfig& config,
                     const StochasticOracle& oracle, std::uint64_t seed) {
  const ParamVector x0(oracle.dimension(), config.optimizer.x0);
  RunOptions options;
  options.eval_stride = config.eval_stride;
  options.record_timing = config.record_timing;
  RunRecord record =
      config.optimizer.method == OptimizerMethod::a2grad
          ? run(config.optimizer.a2grad_config(oracle), oracle, x0, config.iters,
                seed, options)
          : run(config.optimizer.baseline_config(oracle), oracle, x0,
                config.iters, seed, options);
  record.method = config.optimizer.label();
  return record;
}

// Summary -------------------------------------------------------------------

Summary summarize(std::span<const RunRecord> runs) {
  Summary summary;
  const bool use_subopt = !runs.empty() && has_suboptimality(runs.front());
  summary.metric = use_subopt ? "suboptimality" : "f_reported";
  std::size_t longest = 0;
  for (const auto& r : runs) longest = std::max(longest, r.rows.size());
  for (std::size_t k = 0; k < longest; ++k) {
    std::vector<Real> xs;
    for (const auto& r : runs) {
      if (k >= r.rows.size()) continue;
      const Real v = metric_of(r.rows[k], use_subopt);
      if (!std::isnan(v)) xs.push_back(v);
    }
    if (xs.empty()) continue;
    SummaryRow row;
    row.k = k;
    row.count = xs.size();
    std::tie(row.mean, row.std) = mean_std(xs);
    row.min = *std::min_element(xs.begin(), xs.end());
    row.max = *std::max_element(xs.begin(), xs.end());
    summary.rows.push_back(row);
  }
  return summary;
}

void write_summary_csv(std::ostream& out, const Summary& summary) {
  out << kCsvSchemaTag << '\n';
  out << "# metric=" << summary.metric << '\n';
  out << "k,count,mean,std,min,max\n";
  for (const auto& r : summary.rows) {
    out << r.k << ',' << r.count << ',' << format_real(r.mean) << ','
        << format_real(r.std) << ',' << format_real(r.min) << ','
        << format_real(r.max) << '\n';
  }
}

Summary read_summary_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kCsvSchemaTag) {
    throw ConfigError("summary CSV: missing schema tag '" + std::string(kCsvSchemaTag) + "'");
  }
  Summary summary;
  if (!std::getline(in, line) || line.rfind("# metric=", 0) != 0) {
    throw ConfigError("summary CSV: missing metric line");
  }
  summary.metric = line.substr(9);
  if (!std::getline(in, line) || line != "k,count,mean,std,min,max") {
    throw ConfigError("summary CSV: unexpected header");
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != 6) throw ConfigError("summary CSV: bad row '" + line + "'");
    SummaryRow r;
    try {
      r.k = std::stoull(cells[0]);
      r.count = std::stoull(cells[1]);
    } catch (const std::exception&) {
      throw ConfigError("summary CSV: bad integer in '" + line + "'");
    }
    r.mean = parse_real(cells[2]);
    r.std = parse_real(cells[3]);
    r.min = parse_real(cells[4]);
    r.max = parse_real(cells[5]);
    summary.rows.push_back(r);
  }
  return summary;
}

// Experiments ---------------------------------------------------------------

bool ExperimentResult::any_aborted() const {
  return std::any_of(runs.begin(), runs.end(),
                     [](const RunRecord& r) { return r.error.has_value(); });
}

std::filesystem::path run_csv_path(const std::filesystem::path& dir,
                                   const std::string& name, std::uint64_t seed) {
  return dir / ("run_" + name + "_" + std::to_string(seed) + ".csv");
}

std::filesystem::path summary_csv_path(const std::filesystem::path& dir,
                                       const std::string& name) {
  return dir / ("summary_" + name + ".csv");
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  const auto oracle = make_problem(config.problem);
  const bool write = !config.out.empty();
  const std::filesystem::path dir = config.out;
  if (write) ensure_directory(dir);

  ExperimentResult result;
  result.name = config.name;
  result.runs.resize(config.repeats);
  if (write) result.run_paths.resize(config.repeats);
  std::vector<std::exception_ptr> failures(config.repeats);

  auto job = [&](std::size_t i) {
    const std::uint64_t seed = config.seed + i;
    RunRecord record = run_single(config, *oracle, seed);
    if (write) {
      const auto path = run_csv_path(dir, config.name, seed);
      write_file(path, [&](std::ostream& out) { write_run_csv(out, record); });
      if (record.error) {
        auto err = path;
        err.replace_extension(".err");
        write_file(err, [&](std::ostream& out) {
          out << "iteration " << record.error_iteration.value_or(0) << '\n'
              << *record.error << '\n';
        });
      }
      result.run_paths[i] = path;
    }
    result.runs[i] = std::move(record);
  };

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < config.repeats; i = next++) {
      try {
        job(i);
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::min(config.parallel, config.repeats);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }

  result.summary = summarize(result.runs);
  if (write) {
    const auto path = summary_csv_path(dir, config.name);
    write_file(path, [&](std::ostream& out) { write_summary_csv(out, result.summary); });
    result.summary_path = path;
  }
  return result;
}

std::vector<ExperimentConfig> sweep_cells(const ExperimentConfig& config) {
  ExperimentConfig base = config;
  base.sweep = {};
  std::vector<ExperimentConfig> cells{base};
  auto expand = [&](const std::vector<Real>& axis, const char* tag, auto setter) {
    if (axis.empty()) return;
    std::vector<ExperimentConfig> next;
    for (const auto& cell : cells) {
      for (Real v : axis) {
        ExperimentConfig c = cell;
        setter(c, v);
        c.name += std::string("_") + tag + format_real_shortest(v);
        next.push_back(std::move(c));
      }
    }
    cells = std::move(next);
  };
  expand(config.sweep.beta, "beta",
         [](ExperimentConfig& c, Real v) { c.optimizer.beta = v; });
  expand(config.sweep.lipschitz, "lip",
         [](ExperimentConfig& c, Real v) { c.optimizer.lipschitz = v; });
  expand(config.sweep.learning_rate, "lr",
         [](ExperimentConfig& c, Real v) { c.optimizer.learning_rate = v; });
  return cells;
}

std::vector<ExperimentResult> sweep(const ExperimentConfig& config) {
  if (config.sweep.empty()) throw ConfigError("sweep: no grid axes configured");
  std::vector<ExperimentResult> results;
  for (const auto& cell : sweep_cells(config)) results.push_back(run_experiment(cell));
  return results;
}

// Rate fitting --------------------------------------------------------------

RateFit fit_rate(std::span<const Real> ks, std::span<const Real> values,
                 std::size_t k_lo, std::size_t k_hi, std::size_t tail_width) {
  if (ks.size() != values.size()) throw ConfigError("fit_rate: ks and values differ in length");
  if (k_lo < 1) throw ConfigError("fit_rate: k_lo must be >= 1");
  if (k_hi <= k_lo) throw ConfigError("fit_rate: need k_lo < k_hi");
  if (tail_width < 1) throw ConfigError("fit_rate: tail_width must be >= 1");
  if (ks.empty() || ks.back() < static_cast<Real>(k_hi)) {
    throw ConfigError("fit_rate: window extends past the data");
  }

  std::vector<Real> vk;
  std::vector<Real> vv;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    if (i > 0 && !(ks[i] > ks[i - 1])) throw ConfigError("fit_rate: ks must increase");
    if (!std::isnan(values[i])) {
      vk.push_back(ks[i]);
      vv.push_back(values[i]);
    }
  }

  RateFit fit;
  fit.k_lo = k_lo;
  fit.k_hi = k_hi;
  std::vector<Real> xs;
  std::vector<Real> ys;
  for (std::size_t j = 0; j < vk.size(); ++j) {
    const Real k = vk[j];
    if (k < static_cast<Real>(k_lo)) continue;
    if (k > static_cast<Real>(fit.k_hi)) break;
    const std::size_t first = j + 1 >= tail_width ? j + 1 - tail_width : 0;
    Real s = 0.0;
    for (std::size_t t = first; t <= j; ++t) s += vv[t];
    const Real avg = s / static_cast<Real>(j - first + 1);
    if (!(vv[j] > 0.0) || !(avg > 0.0)) {
      fit.k_hi = static_cast<std::size_t>(k) - 1;
      fit.warning = "nonpositive value at k=" + std::to_string(static_cast<std::size_t>(k)) +
                    "; window shrunk to [" + std::to_string(k_lo) + ", " +
                    std::to_string(fit.k_hi) + "]";
      break;
    }
    xs.push_back(std::log(k));
    ys.push_back(std::log(avg));
  }
  if (xs.size() < 2) {
    throw ConfigError("fit_rate: fewer than two usable points in window" +
                      (fit.warning ? " (" + *fit.warning + ")" : std::string()));
  }

  const Real n = static_cast<Real>(xs.size());
  Real mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  Real sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  Real ss_res = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const Real r = ys[i] - (fit.intercept + fit.slope * xs[i]);
    ss_res += r * r;
  }
  fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  fit.points = xs.size();
  return fit;
}

RateFit fit_rate(const RunRecord& record, std::size_t k_lo, std::size_t k_hi,
                 std::size_t tail_width) {
  if (!has_suboptimality(record)) {
    throw ConfigError("fit_rate: record has no suboptimality (unknown optimum)");
  }
  std::vector<Real> ks, vs;
  for (const auto& row : record.rows) {
    ks.push_back(static_cast<Real>(row.k));
    vs.push_back(row.suboptimality.value_or(kNaN));
  }
  return fit_rate(ks, vs, k_lo, k_hi, tail_width);
}

RateFit fit_rate(const Summary& summary, std::size_t k_lo, std::size_t k_hi,
                 std::size_t tail_width) {
  std::vector<Real> ks, vs;
  for (const auto& row : summary.rows) {
    ks.push_back(static_cast<Real>(row.k));
    vs.push_back(row.mean);
  }
  return fit_rate(ks, vs, k_lo, k_hi, tail_width);
}

// Comparison ----------------------------------------------------------------

ComparisonTable compare_methods(std::span<const ExperimentConfig> configs) {
  if (configs.empty()) throw ConfigError("compare: no configs given");
  for (const auto& c : configs) {
    if (!(c.problem == configs.front().problem)) {
      throw ConfigError("compare: config '" + c.name + "' uses a different problem spec");
    }
    if (c.iters != configs.front().iters) {
      throw ConfigError("compare: config '" + c.name + "' uses a different horizon");
    }
  }
  ComparisonTable table;
  for (const auto& c : configs) {
    const ExperimentResult res = run_experiment(c);
    const bool use_subopt = !res.runs.empty() && has_suboptimality(res.runs.front());
    if (table.metric.empty()) table.metric = use_subopt ? "suboptimality" : "f_reported";
    std::vector<Real> finals, bests;
    for (const auto& r : res.runs) {
      Real best = kNaN;
      for (const auto& row : r.rows) {
        const Real v = metric_of(row, use_subopt);
        if (!std::isnan(v) && !(best <= v)) best = v;
      }
      const bool complete = !r.error && !r.rows.empty();
      finals.push_back(complete ? metric_of(r.rows.back(), use_subopt) : kNaN);
      bests.push_back(best);
    }
    ComparisonRow row;
    row.label = c.name;
    row.repeats = res.runs.size();
    std::tie(row.final_mean, row.final_std) = mean_std(finals);
    std::tie(row.best_mean, row.best_std) = mean_std(bests);
    table.rows.push_back(row);
  }
  return table;
}

void write_comparison_csv(std::ostream& out, const ComparisonTable& table) {
  out << kCsvSchemaTag << '\n';
  out << "# metric=" << table.metric << '\n';
  out << "method,repeats,final_mean,final_std,best_mean,best_std\n";
  for (const auto& r : table.rows) {
    out << r.label << ',' << r.repeats << ',' << format_real(r.final_mean) << ','
        << format_real(r.final_std) << ',' << format_real(r.best_mean) << ','
        << format_real(r.best_std) << '\n';
  }
}

}  // namespace a2grad
