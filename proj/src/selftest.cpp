#include "a2grad/selftest.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <ostream>
#include <sstream>

#include "a2grad/config.hpp"
#include "a2grad/core.hpp"
#include "a2grad/harness.hpp"
#include "a2grad/optimizer.hpp"
#include "a2grad/problems.hpp"
#include "a2grad/record.hpp"
#include "a2grad/scaling.hpp"
#include "a2grad/schedule.hpp"

namespace a2grad {

namespace {

// Each check returns an empty string on success, else a failure detail.
using Check = std::function<std::string()>;

std::string fmt(Real v) { return format_real_shortest(v); }

std::string check_div_shift() {
  const ParamVector out =
      elementwise_div_shift({1.0, 1.0, 1.0}, 0.5, 4.0, {0.0, 0.25, 1.0});
  const ParamVector want{2.0, 2.0 / 3.0, 2.0 / 9.0};
  for (std::size_t i = 0; i < 3; ++i) {
    if (std::abs(out[i] - want[i]) > 1e-15) return "coordinate " + std::to_string(i);
  }
  return {};
}

std::string check_schedule() {
  const Real L = 3.0;
  const auto sched = MomentumSchedule::accelerated(L);
  Real product = 1.0;
  for (std::size_t k = 0; k <= 1000; ++k) {
    const ScheduleStep s = sched.step_at(k);
    if (k > 0) product /= 1.0 - s.alpha;
    if (std::abs(s.lambda - product) > 1e-9 * product) {
      return "lambda closed form at k=" + std::to_string(k);
    }
    if (std::abs(s.lambda_alpha * s.gamma - 2.0 * L) > 1e-12 * 2.0 * L) {
      return "lambda*alpha*gamma != 2L at k=" + std::to_string(k);
    }
  }
  if (!validate_conditions(sched, 1000).ok()) return "default schedule violates conditions";
  return {};
}

std::string check_monotone() {
  SeededRng rng(7);
  const std::size_t d = 4;
  for (ScalerScheme scheme :
       {ScalerScheme::uniform, ScalerScheme::incremental, ScalerScheme::exponential}) {
    for (int stream = 0; stream < 10; ++stream) {
      ScalerState s = scheme == ScalerScheme::uniform       ? ScalerState::uniform(d)
                      : scheme == ScalerScheme::incremental ? ScalerState::incremental(d)
                                                            : ScalerState::exponential(d, 0.9);
      ParamVector prev(d, 0.0);
      for (std::size_t k = 0; k < 200; ++k) {
        ParamVector delta(d);
        for (Real& x : delta) x = rng.normal() * std::exp(rng.uniform(-3.0, 3.0));
        const ParamVector h = s.update(delta);
        for (std::size_t i = 0; i < d; ++i) {
          const Real cur = static_cast<Real>(k + 1) * h[i];
          if (cur < prev[i] - 1e-12 * std::max(1.0, prev[i])) {
            return std::string(to_string(scheme)) + " at k=" + std::to_string(k);
          }
          prev[i] = cur;
        }
      }
    }
  }
  return {};
}

std::string check_closed_form() {
  SeededRng rng(11);
  const std::size_t n = 1000;
  std::vector<Real> deltas(n);
  for (Real& x : deltas) x = rng.normal();
  ScalerState uni = ScalerState::uniform(1);
  ScalerState inc = ScalerState::incremental(1);
  ScalerState q0 = ScalerState::qweighted(1, 0.0);
  ScalerState q2 = ScalerState::qweighted(1, 2.0);
  for (std::size_t k = 0; k < n; ++k) {
    const ParamVector d{deltas[k]};
    const Real hu = uni.update(d)[0];
    const Real hi = inc.update(d)[0];
    if (q0.update(d)[0] != hu) return "q=0 differs from uniform at k=" + std::to_string(k);
    if (q2.update(d)[0] != hi) return "q=2 differs from incremental at k=" + std::to_string(k);
    Real su = 0.0, si = 0.0;
    for (std::size_t t = 0; t <= k; ++t) {
      su += deltas[t] * deltas[t];
      si += static_cast<Real>((t + 1) * (t + 1)) * deltas[t] * deltas[t];
    }
    const Real cu = std::sqrt(su);
    const Real ci = std::sqrt(si) / static_cast<Real>(k + 1);
    if (std::abs(hu - cu) > 1e-10 * cu) return "uniform closed form at k=" + std::to_string(k);
    if (std::abs(hi - ci) > 1e-10 * ci) return "incremental closed form at k=" + std::to_string(k);
  }
  return {};
}

std::string check_form_equivalence() {
  const auto problem = make_quadratic(5, 10.0, 3, NoiseModel::gaussian(0.5));
  A2GradConfig three;
  three.lipschitz = problem.lipschitz();
  A2GradConfig two = three;
  two.form = IterationForm::two_sequence;
  A2GradState s3 = A2GradState::init(three, ParamVector(5));
  A2GradState s2 = A2GradState::init(two, ParamVector(5));
  SeededRng r3(99), r2(99);
  for (std::size_t k = 0; k < 100; ++k) {
    step_three_sequence(s3, three, problem, r3, false);
    step_two_sequence(s2, two, problem, r2, false);
    for (std::size_t i = 0; i < 5; ++i) {
      const Real a = s3.last_eval_point[i];
      const Real b = s2.last_eval_point[i];
      if (std::abs(a - b) > 1e-9 * std::max(1.0, std::abs(a))) {
        return "evaluation points diverge at k=" + std::to_string(k);
      }
    }
  }
  return {};
}

std::string check_deterministic_bound() {
  const auto problem = make_quadratic(10, 50.0, 5);
  A2GradConfig config;
  config.lipschitz = problem.lipschitz();
  config.delta_mode = DeltaEstimator::Mode::exact;
  const ParamVector x0(10);
  const RunRecord rec = run(config, problem, x0, 300, 1);
  const Real r0 = norm2(x0 - problem.x_star());
  const Real L = problem.lipschitz();
  for (const auto& row : rec.rows) {
    const Real k = static_cast<Real>(row.k);
    const Real bound = 2.0 * L * r0 * r0 / ((k + 1.0) * (k + 2.0));
    if (*row.suboptimality > bound * (1.0 + 1e-12)) {
      return "bound exceeded at k=" + std::to_string(row.k) + ": " +
             fmt(*row.suboptimality) + " > " + fmt(bound);
    }
  }
  return {};
}

std::string check_finite_differences() {
  SeededRng rng(21);
  const auto quad = make_quadratic(8, 10.0, 2);
  auto logi = make_logistic_synthetic(60, 4, 3, 1.0, 4, 60);
  for (int p = 0; p < 5; ++p) {
    ParamVector xq(8), xl(12);
    for (Real& v : xq) v = rng.uniform(-2.0, 2.0);
    for (Real& v : xl) v = rng.uniform(-1.0, 1.0);
    const Real eq = finite_difference_check(quad, xq);
    const Real el = finite_difference_check(logi, xl);
    if (eq > 1e-7) return "quadratic error " + fmt(eq);
    if (el > 1e-5) return "logistic error " + fmt(el);
  }
  return {};
}

std::string check_determinism_and_csv() {
  ExperimentConfig config;
  config.problem.dim = 4;
  config.problem.noise = NoiseModel::gaussian(1.0);
  config.iters = 50;
  config.repeats = 1;
  const auto oracle = make_problem(config.problem);
  const RunRecord a = run_single(config, *oracle, 5);
  const RunRecord b = run_single(config, *oracle, 5);
  std::ostringstream ca, cb;
  write_run_csv(ca, a);
  write_run_csv(cb, b);
  if (ca.str() != cb.str()) return "repeated run produced a different CSV";
  std::istringstream in(ca.str());
  const RunRecord back = read_run_csv(in);
  if (back.rows != a.rows) return "CSV round trip changed the rows";
  return {};
}

std::string check_config_round_trip() {
  ExperimentConfig config;
  config.name = "selftest";
  config.optimizer.rho = 0.1 + 0.2;
  config.sweep.beta = {10, 50, 100, 1000};
  const std::string once = serialize_config(config);
  const ExperimentConfig parsed = parse_config(once);
  if (!(parsed == config)) return "parsed config differs";
  if (serialize_config(parsed) != once) return "re-serialization differs";
  return {};
}

}  // namespace

std::vector<SelftestResult> run_selftest() {
  const std::vector<std::pair<std::string, Check>> checks{
      {"elementwise_div_shift", check_div_shift},
      {"schedule closed form and conditions", check_schedule},
      {"scaler monotone property", check_monotone},
      {"scaler closed forms and q endpoints", check_closed_form},
      {"three/two-sequence equivalence", check_form_equivalence},
      {"deterministic bound", check_deterministic_bound},
      {"finite-difference gradients", check_finite_differences},
      {"run determinism and CSV round trip", check_determinism_and_csv},
      {"config round trip", check_config_round_trip},
  };
  std::vector<SelftestResult> results;
  for (const auto& [name, check] : checks) {
    SelftestResult r{name, false, {}};
    try {
      r.detail = check();
      r.passed = r.detail.empty();
    } catch (const std::exception& e) {
      r.detail = std::string("exception: ") + e.what();
    }
    results.push_back(std::move(r));
  }
  return results;
}

bool report_selftest(const std::vector<SelftestResult>& results, std::ostream& out) {
  bool all = true;
  for (const auto& r : results) {
    out << (r.passed ? "PASS " : "FAIL ") << r.name;
    if (!r.passed) out << ": " << r.detail;
    out << '\n';
    all = all && r.passed;
  }
  return all;
}

}  // namespace a2grad
