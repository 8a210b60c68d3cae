#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "a2grad/harness.hpp"
#include "a2grad/record.hpp"

using namespace a2grad;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("a2grad_harness_test_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

bool same_bits(Real a, Real b) { return std::memcmp(&a, &b, sizeof(Real)) == 0; }

ExperimentConfig small_config(const std::string& name, const fs::path& out) {
  ExperimentConfig c;
  c.name = name;
  c.problem.dim = 5;
  c.problem.kappa = 20.0;
  c.problem.noise = NoiseModel::gaussian(0.5);
  c.optimizer.lipschitz = 20.0;
  c.iters = 300;
  c.repeats = 2;
  c.seed = 10;
  c.out = out.string();
  return c;
}

}  // namespace

TEST(RunExperiment, RepeatsDifferAndRerunsAreByteIdentical) {
  const auto dir = fresh_dir("determinism");
  const auto config = small_config("det", dir);
  const ExperimentResult first = run_experiment(config);
  ASSERT_EQ(first.runs.size(), 2u);
  EXPECT_EQ(first.runs[0].seed, 10u);
  EXPECT_EQ(first.runs[1].seed, 11u);
  EXPECT_NE(first.runs[0].rows, first.runs[1].rows);
  ASSERT_EQ(first.run_paths.size(), 2u);
  EXPECT_EQ(first.run_paths[0].filename(), "run_det_10.csv");
  std::vector<std::string> bytes;
  for (const auto& p : first.run_paths) bytes.push_back(slurp(p));
  bytes.push_back(slurp(*first.summary_path));

  const ExperimentResult second = run_experiment(config);
  EXPECT_EQ(slurp(second.run_paths[0]), bytes[0]);
  EXPECT_EQ(slurp(second.run_paths[1]), bytes[1]);
  EXPECT_EQ(slurp(*second.summary_path), bytes[2]);
}

TEST(RunExperiment, ParallelMatchesSerial) {
  auto serial = small_config("par", "");
  serial.repeats = 5;
  auto parallel = serial;
  parallel.parallel = 3;
  const auto a = run_experiment(serial);
  const auto b = run_experiment(parallel);
  ASSERT_EQ(a.runs.size(), b.runs.size());
  for (std::size_t i = 0; i < a.runs.size(); ++i) EXPECT_EQ(a.runs[i].rows, b.runs[i].rows);
  EXPECT_EQ(a.summary.rows, b.summary.rows);
}

TEST(RunExperiment, ZeroHorizonIsConfigError) {
  auto c = small_config("zero", "");
  c.iters = 0;
  EXPECT_THROW(run_experiment(c), ConfigError);
}

TEST(RunExperiment, UnwritableOutputIsIoErrorWithPath) {
  const auto dir = fresh_dir("blocked");
  fs::create_directories(dir);
  const auto file = dir / "not_a_dir";
  std::ofstream(file) << "x";
  auto c = small_config("io", file);
  try {
    run_experiment(c);
    FAIL() << "expected IoError";
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find(file.string()), std::string::npos);
  }
}

TEST(RunExperiment, AbortWritesTruncatedCsvAndSidecar) {
  const auto dir = fresh_dir("abort");
  ExperimentConfig c;
  c.name = "boom";
  c.problem.dim = 3;
  c.problem.kappa = 1e6;
  c.optimizer.lipschitz = 1e-10;  // step 1/gamma far beyond 2/L: diverges
  c.optimizer.beta = 0.0;
  c.optimizer.x0 = 1.0;
  c.iters = 500;
  c.repeats = 1;
  c.out = dir.string();
  const ExperimentResult r = run_experiment(c);
  ASSERT_TRUE(r.any_aborted());
  const RunRecord& run = r.runs.front();
  ASSERT_TRUE(run.error_iteration.has_value());
  EXPECT_EQ(run.rows.size(), *run.error_iteration);
  EXPECT_LT(run.rows.size(), 501u);
  const auto err = dir / "run_boom_0.err";
  ASSERT_TRUE(fs::exists(err));
  EXPECT_NE(slurp(err).find("iteration " + std::to_string(*run.error_iteration)),
            std::string::npos);
  std::istringstream in(slurp(r.run_paths.front()));
  EXPECT_EQ(read_run_csv(in).rows.size(), run.rows.size());
}

TEST(Summary, MatchesNaiveRecomputationFromCsvFiles) {
  const auto dir = fresh_dir("summary");
  auto c = small_config("sum", dir);
  c.repeats = 4;
  c.eval_stride = 7;
  const ExperimentResult r = run_experiment(c);
  std::vector<RunRecord> reread;
  for (const auto& p : r.run_paths) {
    std::ifstream in(p);
    reread.push_back(read_run_csv(in));
  }
  std::ifstream sin(*r.summary_path);
  const Summary s = read_summary_csv(sin);
  EXPECT_EQ(s.metric, "suboptimality");
  ASSERT_FALSE(s.rows.empty());
  for (const auto& row : s.rows) {
    std::vector<Real> xs;
    for (const auto& rec : reread) xs.push_back(*rec.rows[row.k].suboptimality);
    Real sum = 0.0;
    for (Real x : xs) sum += x;
    const Real mean = sum / xs.size();
    Real ss = 0.0;
    for (Real x : xs) ss += (x - mean) * (x - mean);
    const Real sd = std::sqrt(ss / (xs.size() - 1));
    EXPECT_EQ(row.count, xs.size());
    EXPECT_NEAR(row.mean, mean, 1e-12 * std::abs(mean));
    EXPECT_NEAR(row.std, sd, 1e-12 * std::max(sd, std::abs(mean)));
    EXPECT_EQ(row.min, *std::min_element(xs.begin(), xs.end()));
    EXPECT_EQ(row.max, *std::max_element(xs.begin(), xs.end()));
    EXPECT_TRUE(row.k % 7 == 0 || row.k == 300);
  }
}

TEST(Summary, LogisticUsesReportedObjective) {
  ExperimentConfig c;
  c.problem.kind = ProblemKind::logistic;
  c.problem.samples = 40;
  c.problem.features = 3;
  c.problem.classes = 2;
  c.problem.batch = 8;
  c.iters = 20;
  c.repeats = 1;
  c.out = "";
  EXPECT_EQ(run_experiment(c).summary.metric, "f_reported");
}

TEST(CsvRoundTrip, RecordWithAwkwardValues) {
  SeededRng rng(12);
  RunRecord rec;
  for (std::size_t k = 0; k < 200; ++k) {
    RunRecordRow row;
    row.k = k;
    row.f_reported = k % 17 == 3 ? std::numeric_limits<Real>::quiet_NaN()
                                 : rng.normal() * std::exp(rng.uniform(-300.0, 300.0));
    if (k % 5 != 0) row.suboptimality = rng.uniform() * 1e-310;  // subnormal
    row.f_practice = k == 7 ? std::numeric_limits<Real>::infinity() : 0.1 * k;
    row.h_inf = rng.uniform();
    row.alpha = 2.0 / (k + 2.0);
    row.gamma = 1.0 / 3.0;
    row.step_min = -0.0;
    row.step_max = 5e-324;
    row.wall_nanos = static_cast<std::int64_t>(rng.below(1'000'000'000));
    rec.rows.push_back(row);
  }
  std::ostringstream out;
  write_run_csv(out, rec);
  std::istringstream in(out.str());
  const RunRecord back = read_run_csv(in);
  ASSERT_EQ(back.rows.size(), rec.rows.size());
  for (std::size_t k = 0; k < rec.rows.size(); ++k) {
    const auto& a = rec.rows[k];
    const auto& b = back.rows[k];
    EXPECT_EQ(a.k, b.k);
    EXPECT_TRUE(same_bits(a.f_reported, b.f_reported) ||
                (std::isnan(a.f_reported) && std::isnan(b.f_reported)));
    EXPECT_EQ(a.suboptimality.has_value(), b.suboptimality.has_value());
    if (a.suboptimality) EXPECT_TRUE(same_bits(*a.suboptimality, *b.suboptimality));
    EXPECT_TRUE(same_bits(a.f_practice, b.f_practice));
    EXPECT_TRUE(same_bits(a.h_inf, b.h_inf));
    EXPECT_TRUE(same_bits(a.alpha, b.alpha));
    EXPECT_TRUE(same_bits(a.gamma, b.gamma));
    EXPECT_TRUE(same_bits(a.step_min, b.step_min));
    EXPECT_TRUE(same_bits(a.step_max, b.step_max));
    EXPECT_EQ(a.wall_nanos, b.wall_nanos);
  }
  std::ostringstream again;
  write_run_csv(again, back);
  EXPECT_EQ(again.str(), out.str());
}

TEST(CsvRoundTrip, RejectsMissingSchemaTag) {
  std::istringstream in("k,f_reported\n0,1\n");
  EXPECT_THROW(read_run_csv(in), ConfigError);
}

TEST(Sweep, BetaGridWritesFourSummariesWithValuesInNames) {
  const auto dir = fresh_dir("sweep");
  auto c = small_config("grid", dir);
  c.iters = 50;
  c.repeats = 1;
  c.sweep.beta = {10, 50, 100, 1000};
  const auto results = sweep(c);
  ASSERT_EQ(results.size(), 4u);
  std::vector<std::string> summaries;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto name = entry.path().filename().string();
    if (name.rfind("summary_", 0) == 0) summaries.push_back(name);
  }
  std::sort(summaries.begin(), summaries.end());
  EXPECT_EQ(summaries, (std::vector<std::string>{
                           "summary_grid_beta10.csv", "summary_grid_beta100.csv",
                           "summary_grid_beta1000.csv", "summary_grid_beta50.csv"}));
}

TEST(Sweep, CartesianCells) {
  ExperimentConfig c;
  c.name = "x";
  c.sweep.beta = {1, 2};
  c.sweep.lipschitz = {0.1, 10};
  const auto cells = sweep_cells(c);
  ASSERT_EQ(cells.size(), 4u);
  EXPECT_EQ(cells[1].name, "x_beta1_lip10");
  EXPECT_EQ(cells[1].optimizer.lipschitz, 10.0);
  EXPECT_TRUE(cells[1].sweep.empty());
  c.sweep = {};
  EXPECT_THROW(sweep(c), ConfigError);
}

TEST(FitRate, ExactPowerLaws) {
  std::vector<Real> ks, inv_sq, inv_sqrt;
  for (int k = 1; k <= 5000; ++k) {
    ks.push_back(k);
    inv_sq.push_back(3.0 / (static_cast<Real>(k) * k));
    inv_sqrt.push_back(0.7 / std::sqrt(static_cast<Real>(k)));
  }
  const RateFit a = fit_rate(ks, inv_sq, 10, 5000);
  EXPECT_NEAR(a.slope, -2.0, 1e-6);
  EXPECT_NEAR(std::exp(a.intercept), 3.0, 1e-6);
  EXPECT_NEAR(a.r_squared, 1.0, 1e-12);
  EXPECT_FALSE(a.warning.has_value());
  const RateFit b = fit_rate(ks, inv_sqrt, 1, 5000);
  EXPECT_NEAR(b.slope, -0.5, 1e-6);
  EXPECT_EQ(b.points, 5000u);
}

TEST(FitRate, NonpositiveValueShrinksWindowWithWarning) {
  std::vector<Real> ks, vs;
  for (int k = 1; k <= 100; ++k) {
    ks.push_back(k);
    vs.push_back(k < 60 ? 1.0 / k : 0.0);
  }
  const RateFit f = fit_rate(ks, vs, 5, 100);
  ASSERT_TRUE(f.warning.has_value());
  EXPECT_EQ(f.k_hi, 59u);
  EXPECT_NEAR(f.slope, -1.0, 1e-9);
}

TEST(FitRate, TailAveragingAndErrors) {
  std::vector<Real> ks, vs;
  SeededRng rng(3);
  for (int k = 1; k <= 4000; ++k) {
    ks.push_back(k);
    vs.push_back(std::pow(k, -0.5) * (1.0 + 0.5 * rng.uniform(-1.0, 1.0)));
  }
  const RateFit smooth = fit_rate(ks, vs, 1000, 4000, 200);
  EXPECT_NEAR(smooth.slope, -0.5, 0.05);
  EXPECT_THROW(fit_rate(ks, vs, 0, 10), ConfigError);
  EXPECT_THROW(fit_rate(ks, vs, 10, 10), ConfigError);
  EXPECT_THROW(fit_rate(ks, vs, 10, 5000), ConfigError);
  RunRecord no_subopt;
  no_subopt.rows.resize(20);
  EXPECT_THROW(fit_rate(no_subopt, 1, 10), ConfigError);
}

TEST(FitRate, DeterministicQuadraticRunIsSecondOrder) {
  ExperimentConfig c;
  c.problem.dim = 50;
  c.problem.kappa = 100.0;
  c.optimizer.lipschitz = 100.0;
  c.optimizer.delta = DeltaEstimator::Mode::exact;
  c.optimizer.x0 = 0.0;
  c.iters = 2000;
  const auto oracle = make_problem(c.problem);
  const RunRecord rec = run_single(c, *oracle, 0);
  EXPECT_LE(fit_rate(rec, 100, 2000).slope, -1.9);
}

TEST(Compare, MismatchedProblemOrHorizonIsConfigError) {
  auto a = small_config("a", "");
  auto b = a;
  b.problem.kappa = 21.0;
  EXPECT_THROW(compare_methods(std::vector{a, b}), ConfigError);
  b = a;
  b.iters = 301;
  EXPECT_THROW(compare_methods(std::vector{a, b}), ConfigError);
}

TEST(Compare, IdenticalMethodGivesIdenticalColumns) {
  auto a = small_config("a", "");
  auto b = a;
  b.name = "b";
  const auto t = compare_methods(std::vector{a, b});
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.rows[0].final_mean, t.rows[1].final_mean);
  EXPECT_EQ(t.rows[0].final_std, t.rows[1].final_std);
  EXPECT_EQ(t.rows[0].best_mean, t.rows[1].best_mean);
}

TEST(Compare, BetaIrrelevantWithoutNoise) {
  auto a = small_config("beta0", "");
  a.problem.noise = NoiseModel::none();
  a.optimizer.delta = DeltaEstimator::Mode::exact;
  a.optimizer.beta = 0.0;
  auto b = a;
  b.name = "beta50";
  b.optimizer.beta = 50.0;
  const auto t = compare_methods(std::vector{a, b});
  EXPECT_EQ(t.rows[0].final_mean, t.rows[1].final_mean);
  EXPECT_EQ(t.rows[0].best_mean, t.rows[1].best_mean);
}

TEST(Compare, A2GradBeatsSgdOnIllConditionedQuadratic) {
  ExperimentConfig a;
  a.name = "a2grad";
  a.problem.dim = 20;
  a.problem.kappa = 1000.0;
  a.problem.noise = NoiseModel::gaussian(0.01);
  a.optimizer.lipschitz = 1000.0;
  a.optimizer.beta = 1.0;
  a.iters = 2000;
  a.repeats = 3;
  a.out = "";
  ExperimentConfig s = a;
  s.name = "sgd";
  s.optimizer.method = OptimizerMethod::sgd;
  s.optimizer.learning_rate = 1.0 / 1000.0;
  const auto t = compare_methods(std::vector{a, s});
  EXPECT_LT(t.rows[0].final_mean, t.rows[1].final_mean);
  std::ostringstream out;
  write_comparison_csv(out, t);
  EXPECT_NE(out.str().find("a2grad,3,"), std::string::npos);
}

TEST(MakeProblem, Kinds) {
  ProblemSpec p;
  p.kind = ProblemKind::counterexample;
  EXPECT_EQ(make_problem(p)->dimension(), 1u);
  p.kind = ProblemKind::logistic;
  p.samples = 30;
  p.features = 4;
  p.classes = 3;
  EXPECT_EQ(make_problem(p)->dimension(), 12u);
  p.kind = ProblemKind::csv;
  EXPECT_THROW(make_problem(p), ConfigError);
  p.path = "/nonexistent/data.csv";
  EXPECT_THROW(make_problem(p), IoError);
  p.kind = ProblemKind::quadratic;
  p.noise.kind = NoiseModel::Kind::gaussian;
  p.noise.scale = -1.0;
  EXPECT_THROW(make_problem(p), ConfigError);
}

TEST(RunSingle, BaselineAndCounterexampleProjection) {
  ExperimentConfig c;
  c.problem.kind = ProblemKind::counterexample;
  c.optimizer.method = OptimizerMethod::adam;
  c.optimizer.learning_rate = 0.1;
  c.optimizer.rate_policy = RatePolicy::inverse_sqrt;
  c.optimizer.beta1 = 0.0;
  c.optimizer.beta2 = 0.1;
  c.iters = 2000;
  const auto oracle = make_problem(c.problem);
  const RunRecord r = run_single(c, *oracle, 0);
  EXPECT_EQ(r.method, "adam");
  EXPECT_LE(r.final_point[0], 1.0);
  EXPECT_GT(r.final_point[0], 0.9);
}
