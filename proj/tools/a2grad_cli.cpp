// a2grad command-line front end: run, sweep, fit, compare, selftest.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "a2grad/config.hpp"
#include "a2grad/harness.hpp"
#include "a2grad/record.hpp"
#include "a2grad/selftest.hpp"

namespace {

using namespace a2grad;

constexpr int kExitConfig = 2;
constexpr int kExitAbort = 3;
constexpr int kExitIo = 4;

struct Overrides {
  std::vector<std::string> configs;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> iters;
  std::optional<std::size_t> repeats;
  std::optional<std::size_t> parallel;
  std::vector<std::string> optimizers;
  std::optional<std::string> problem;
  std::vector<double> beta;
  std::vector<double> lip;
  std::optional<double> rho;
  std::optional<double> q;
  std::optional<std::string> name;
};

void add_common(CLI::App* cmd, Overrides& o, bool multi_config, bool list_axes) {
  if (multi_config) {
    cmd->add_option("--config", o.configs, "Experiment config file(s) (JSON)");
  } else {
    cmd->add_option("--config", o.configs, "Experiment config file (JSON)")->expected(0, 1);
  }
  cmd->add_option("--out", o.out, "Output directory");
  cmd->add_option("--seed", o.seed, "Base seed; repeat i uses seed + i");
  cmd->add_option("--iters", o.iters, "Horizon K (rows k = 0..K)");
  cmd->add_option("--repeats", o.repeats, "Number of repeats R");
  cmd->add_option("--parallel", o.parallel, "Concurrent runs");
  cmd->add_option("--optimizer", o.optimizers,
                  "a2grad-uni|a2grad-inc|a2grad-exp|a2grad-none|a2grad-q<q>|"
                  "sgd|adagrad|adam|amsgrad")
      ->delimiter(',');
  cmd->add_option("--problem", o.problem, "quadratic|logistic|counterexample|csv");
  cmd->add_option("--beta", o.beta, list_axes ? "Beta value(s)" : "Beta")->delimiter(',');
  cmd->add_option("--lip", o.lip, list_axes ? "Lipschitz value(s)" : "Lipschitz estimate L")
      ->delimiter(',');
  cmd->add_option("--rho", o.rho, "Exponential scaler rho");
  cmd->add_option("--q", o.q, "q-weighted scaler exponent");
  cmd->add_option("--name", o.name, "Experiment name");
}

void apply_optimizer(OptimizerSpec& spec, const std::string& text) {
  const std::string prefix = "a2grad-";
  if (text.rfind(prefix, 0) == 0) {
    spec.method = OptimizerMethod::a2grad;
    const std::string variant = text.substr(prefix.size());
    if (variant.size() > 1 && variant[0] == 'q') {
      spec.scaler = ScalerScheme::qweighted;
      spec.q = parse_real(variant.substr(1));
    } else {
      spec.scaler = parse_scaler_scheme(variant);
    }
    return;
  }
  spec.method = parse_optimizer_method(text);
}

Real single(const std::vector<double>& values, const char* flag) {
  if (values.size() != 1) {
    throw ConfigError(std::string(flag) + " takes one value here; use `sweep` for grids");
  }
  return values.front();
}

ExperimentConfig base_config(const std::string& path, const Overrides& o) {
  ExperimentConfig c = path.empty() ? ExperimentConfig{} : load_config(path);
  if (o.out) c.out = *o.out;
  if (o.seed) c.seed = *o.seed;
  if (o.iters) c.iters = *o.iters;
  if (o.repeats) c.repeats = *o.repeats;
  if (o.parallel) c.parallel = *o.parallel;
  if (o.problem) c.problem.kind = parse_problem_kind(*o.problem);
  if (o.rho) c.optimizer.rho = *o.rho;
  if (o.q) c.optimizer.q = *o.q;
  if (o.name) c.name = *o.name;
  return c;
}

void print_summary(const ExperimentResult& r) {
  std::cout << r.name << ": " << r.runs.size() << " run(s)";
  if (!r.summary.rows.empty()) {
    const auto& last = r.summary.rows.back();
    std::cout << ", final " << r.summary.metric << " mean " << format_real_shortest(last.mean)
              << " std " << format_real_shortest(last.std) << " at k=" << last.k;
  }
  if (r.summary_path) std::cout << " -> " << r.summary_path->string();
  std::cout << '\n';
  for (const auto& run : r.runs) {
    if (run.error) {
      std::cerr << "run seed " << run.seed << " aborted at iteration "
                << run.error_iteration.value_or(0) << ": " << *run.error << '\n';
    }
  }
}

int cmd_run(const Overrides& o) {
  ExperimentConfig c = base_config(o.configs.empty() ? "" : o.configs.front(), o);
  if (o.optimizers.size() > 1) throw ConfigError("run takes a single --optimizer");
  if (!o.optimizers.empty()) apply_optimizer(c.optimizer, o.optimizers.front());
  if (!o.beta.empty()) c.optimizer.beta = single(o.beta, "--beta");
  if (!o.lip.empty()) c.optimizer.lipschitz = single(o.lip, "--lip");
  const ExperimentResult r = run_experiment(c);
  print_summary(r);
  return r.any_aborted() ? kExitAbort : 0;
}

int cmd_sweep(const Overrides& o) {
  ExperimentConfig c = base_config(o.configs.empty() ? "" : o.configs.front(), o);
  if (o.optimizers.size() > 1) throw ConfigError("sweep takes a single --optimizer");
  if (!o.optimizers.empty()) apply_optimizer(c.optimizer, o.optimizers.front());
  if (!o.beta.empty()) c.sweep.beta = o.beta;
  if (!o.lip.empty()) c.sweep.lipschitz = o.lip;
  if (c.sweep.empty()) {
    c.sweep.beta = {10, 50, 100, 1000};
    c.sweep.lipschitz = {0.1, 1, 10};
  }
  bool aborted = false;
  for (const auto& r : sweep(c)) {
    print_summary(r);
    aborted = aborted || r.any_aborted();
  }
  return aborted ? kExitAbort : 0;
}

int cmd_compare(const Overrides& o) {
  std::vector<ExperimentConfig> configs;
  if (o.configs.size() > 1) {
    for (const auto& path : o.configs) configs.push_back(base_config(path, o));
  } else {
    const ExperimentConfig base =
        base_config(o.configs.empty() ? "" : o.configs.front(), o);
    if (o.optimizers.empty()) {
      throw ConfigError("compare needs several --config files or an --optimizer list");
    }
    for (const auto& opt : o.optimizers) {
      ExperimentConfig c = base;
      apply_optimizer(c.optimizer, opt);
      c.name = base.name + "_" + opt;
      configs.push_back(std::move(c));
    }
  }
  for (auto& c : configs) {
    if (!o.beta.empty()) c.optimizer.beta = single(o.beta, "--beta");
    if (!o.lip.empty()) c.optimizer.lipschitz = single(o.lip, "--lip");
  }
  const ComparisonTable table = compare_methods(configs);
  write_comparison_csv(std::cout, table);
  const std::string out = configs.front().out;
  if (!out.empty()) {
    const auto path = std::filesystem::path(out) / ("compare_" + configs.front().name + ".csv");
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path.string() + " for writing");
    write_comparison_csv(f, table);
    if (!f) throw IoError("write failed for " + path.string());
  }
  return 0;
}

struct FitArgs {
  std::string csv;
  std::size_t k_lo = 1;
  std::size_t k_hi = 0;
  std::size_t tail = 1;
};

int cmd_fit(const FitArgs& a) {
  std::ifstream in(a.csv, std::ios::binary);
  if (!in) throw IoError("cannot open " + a.csv);
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  const bool is_summary = text.find("\n# metric=") != std::string::npos;
  std::istringstream stream(text);
  RateFit fit;
  if (is_summary) {
    const Summary s = read_summary_csv(stream);
    const std::size_t hi = a.k_hi ? a.k_hi : (s.rows.empty() ? 0 : s.rows.back().k);
    fit = fit_rate(s, a.k_lo, hi, a.tail);
  } else {
    const RunRecord r = read_run_csv(stream);
    const std::size_t hi = a.k_hi ? a.k_hi : (r.rows.empty() ? 0 : r.rows.back().k);
    fit = fit_rate(r, a.k_lo, hi, a.tail);
  }
  if (fit.warning) std::cerr << "warning: " << *fit.warning << '\n';
  std::cout << "slope=" << format_real_shortest(fit.slope)
            << " intercept=" << format_real_shortest(fit.intercept)
            << " r_squared=" << format_real_shortest(fit.r_squared) << " window=["
            << fit.k_lo << ", " << fit.k_hi << "] points=" << fit.points << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"A2Grad experiment runner"};
  app.require_subcommand(1);

  Overrides run_o, sweep_o, compare_o;
  add_common(app.add_subcommand("run", "Run one experiment (R repeats)"), run_o, false, false);
  add_common(app.add_subcommand("sweep", "Run a grid over beta / L"), sweep_o, false, true);
  add_common(app.add_subcommand("compare", "Tabulate several methods on one problem"),
             compare_o, true, false);

  FitArgs fit_args;
  auto* fit = app.add_subcommand("fit", "Fit a log-log rate to a run or summary CSV");
  fit->add_option("--csv", fit_args.csv, "Per-run or summary CSV")->required();
  fit->add_option("--k-lo", fit_args.k_lo, "Window start (>= 1)");
  fit->add_option("--k-hi", fit_args.k_hi, "Window end (default: last row)");
  fit->add_option("--tail", fit_args.tail, "Tail-averaging width");

  app.add_subcommand("selftest", "Run the fast invariant checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (app.got_subcommand("run")) return cmd_run(run_o);
    if (app.got_subcommand("sweep")) return cmd_sweep(sweep_o);
    if (app.got_subcommand("compare")) return cmd_compare(compare_o);
    if (app.got_subcommand("fit")) return cmd_fit(fit_args);
    if (app.got_subcommand("selftest")) {
      return report_selftest(run_selftest(), std::cout) ? 0 : 1;
    }
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const CapabilityError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NonFiniteError& e) {
    std::cerr << "runtime abort at iteration " << e.iteration() << ": " << e.what() << '\n';
    return kExitAbort;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
