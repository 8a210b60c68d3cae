#include "a2grad/problems.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "a2grad/record.hpp"

namespace a2grad {

NoiseModel NoiseModel::gaussian(Real sigma) {
  if (!(sigma >= 0.0)) throw ConfigError("gaussian noise sigma must be >= 0");
  return {Kind::gaussian, sigma};
}

NoiseModel NoiseModel::bounded_uniform(Real bound) {
  if (!(bound >= 0.0)) throw ConfigError("bounded noise C must be >= 0");
  return {Kind::bounded_uniform, bound};
}

NoiseModel NoiseModel::sub_gaussian_mix(Real sigma_bar) {
  if (!(sigma_bar >= 0.0)) throw ConfigError("sub-Gaussian factor must be >= 0");
  return {Kind::sub_gaussian_mix, sigma_bar};
}

Real NoiseModel::sample(SeededRng& rng) const {
  switch (kind) {
    case Kind::none: return 0.0;
    case Kind::gaussian: return scale * rng.normal();
    case Kind::bounded_uniform: return rng.uniform(-scale, scale);
    case Kind::sub_gaussian_mix:
      if (rng.below(2) == 0) return scale * rng.normal();
      return rng.below(2) == 0 ? -scale : scale;
  }
  return 0.0;
}

Real NoiseModel::stddev() const {
  switch (kind) {
    case Kind::none: return 0.0;
    case Kind::gaussian: return scale;
    case Kind::bounded_uniform: return scale / std::sqrt(3.0);
    case Kind::sub_gaussian_mix: return scale;
  }
  return 0.0;
}

std::string_view to_string(NoiseModel::Kind kind) {
  switch (kind) {
    case NoiseModel::Kind::none: return "none";
    case NoiseModel::Kind::gaussian: return "gaussian";
    case NoiseModel::Kind::bounded_uniform: return "bounded_uniform";
    case NoiseModel::Kind::sub_gaussian_mix: return "sub_gaussian_mix";
  }
  return "?";
}

NoiseModel::Kind parse_noise_kind(std::string_view name) {
  if (name == "none") return NoiseModel::Kind::none;
  if (name == "gaussian") return NoiseModel::Kind::gaussian;
  if (name == "bounded_uniform") return NoiseModel::Kind::bounded_uniform;
  if (name == "sub_gaussian_mix") return NoiseModel::Kind::sub_gaussian_mix;
  throw ConfigError("unknown noise kind '" + std::string(name) + "'");
}

// Quadratic ------------------------------------------------------------------

QuadraticProblem::QuadraticProblem(ParamVector diag, ParamVector x_star,
                                   NoiseModel noise)
    : diag_(std::move(diag)), x_star_(std::move(x_star)), noise_(noise) {
  if (diag_.empty()) throw ConfigError("quadratic: dimension must be >= 1");
  if (diag_.size() != x_star_.size()) {
    throw ConfigError("quadratic: curvature and optimum dimensions differ");
  }
  for (Real c : diag_) {
    if (!(c > 0.0) || !std::isfinite(c)) {
      throw ConfigError("quadratic: curvatures must be positive");
    }
  }
  lipschitz_ = *std::max_element(diag_.begin(), diag_.end());
}

GradientSample QuadraticProblem::stochastic_gradient(const ParamVector& x,
                                                     SeededRng& rng) const {
  const std::uint64_t id = rng.position();
  ParamVector g = exact_gradient(x);
  if (noise_.kind != NoiseModel::Kind::none) {
    for (Real& gi : g) gi += noise_.sample(rng);
  }
  return {std::move(g), id};
}

ParamVector QuadraticProblem::exact_gradient(const ParamVector& x) const {
  require_same_dim(x, diag_, "QuadraticProblem::exact_gradient");
  ParamVector g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) g[i] = diag_[i] * (x[i] - x_star_[i]);
  return g;
}

Real QuadraticProblem::objective(const ParamVector& x) const {
  require_same_dim(x, diag_, "QuadraticProblem::objective");
  CompensatedSum f;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const Real r = x[i] - x_star_[i];
    f.add(0.5 * diag_[i] * r * r);
  }
  return f.value();
}

std::optional<Real> QuadraticProblem::noise_sigma() const {
  return noise_.stddev();
}

QuadraticProblem make_quadratic(std::size_t dim, Real kappa, std::uint64_t seed,
                                NoiseModel noise) {
  if (dim < 1) throw ConfigError("quadratic: dimension must be >= 1");
  if (!(kappa >= 1.0) || !std::isfinite(kappa)) {
    throw ConfigError("quadratic: condition number must be >= 1");
  }
  ParamVector diag(dim);
  if (dim == 1) {
    diag[0] = kappa;
  } else {
    const Real log_kappa = std::log(kappa);
    for (std::size_t i = 0; i < dim; ++i) {
      diag[i] = std::exp(log_kappa * static_cast<Real>(i) /
                         static_cast<Real>(dim - 1));
    }
    // Pin the endpoints so L == kappa exactly.
    diag[0] = 1.0;
    diag[dim - 1] = kappa;
  }
  SeededRng rng(seed);
  ParamVector x_star(dim);
  for (Real& v : x_star) v = rng.uniform(-1.0, 1.0);
  return QuadraticProblem(std::move(diag), std::move(x_star), noise);
}

// Logistic -------------------------------------------------------------------

namespace {

// Softmax probabilities of row `a` under class-major weights `w`, written to
// `probs`; returns log-sum-exp of the logits.
Real softmax_row(const ParamVector& w, const Real* a, std::size_t d,
                 std::size_t classes, std::vector<Real>& probs) {
  Real zmax = -std::numeric_limits<Real>::infinity();
  for (std::size_t c = 0; c < classes; ++c) {
    const Real* wc = w.data() + c * d;
    Real z = 0.0;
    for (std::size_t j = 0; j < d; ++j) z += wc[j] * a[j];
    probs[c] = z;
    zmax = std::max(zmax, z);
  }
  Real sum = 0.0;
  for (std::size_t c = 0; c < classes; ++c) {
    probs[c] = std::exp(probs[c] - zmax);
    sum += probs[c];
  }
  for (std::size_t c = 0; c < classes; ++c) probs[c] /= sum;
  return zmax + std::log(sum);
}

}  // namespace

LogisticProblem::LogisticProblem(std::vector<Real> features,
                                 std::vector<std::size_t> labels,
                                 std::size_t num_features,
                                 std::size_t num_classes,
                                 std::size_t mini_batch, Real l2)
    : features_(std::move(features)),
      labels_(std::move(labels)),
      num_features_(num_features),
      num_classes_(num_classes),
      mini_batch_(mini_batch),
      l2_(l2) {
  if (num_features_ < 1) throw ConfigError("logistic: need >= 1 feature");
  if (num_classes_ < 2) throw ConfigError("logistic: need >= 2 classes");
  if (labels_.empty()) throw ConfigError("logistic: no samples");
  if (features_.size() != labels_.size() * num_features_) {
    throw ConfigError("logistic: feature matrix size does not match labels");
  }
  if (mini_batch_ < 1) throw ConfigError("logistic: mini-batch must be >= 1");
  if (!(l2_ >= 0.0)) throw ConfigError("logistic: l2 must be >= 0");
  for (std::size_t y : labels_) {
    if (y >= num_classes_) throw ConfigError("logistic: label out of range");
  }
}

LogisticProblem LogisticProblem::with_mini_batch(std::size_t mini_batch) const {
  return LogisticProblem(features_, labels_, num_features_, num_classes_,
                         mini_batch, l2_);
}

std::size_t LogisticProblem::dimension() const {
  return num_features_ * num_classes_;
}

template <typename IndexFn>
ParamVector LogisticProblem::batch_gradient(const ParamVector& x,
                                            std::size_t count,
                                            IndexFn&& index) const {
  require_same_dim(x, ParamVector(dimension()), "LogisticProblem gradient");
  const std::size_t d = num_features_;
  const std::size_t classes = num_classes_;
  ParamVector g(dimension());
  std::vector<Real> probs(classes);
  for (std::size_t s = 0; s < count; ++s) {
    const std::size_t row = index(s);
    const Real* a = features_.data() + row * d;
    softmax_row(x, a, d, classes, probs);
    probs[labels_[row]] -= 1.0;
    for (std::size_t c = 0; c < classes; ++c) {
      Real* gc = g.data() + c * d;
      const Real p = probs[c];
      for (std::size_t j = 0; j < d; ++j) gc[j] += p * a[j];
    }
  }
  const Real inv = 1.0 / static_cast<Real>(count);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = g[i] * inv + l2_ * x[i];
  return g;
}

GradientSample LogisticProblem::stochastic_gradient(const ParamVector& x,
                                                    SeededRng& rng) const {
  const std::uint64_t id = rng.position();
  const std::size_t n = num_samples();
  if (mini_batch_ >= n) return {exact_gradient(x), id};
  std::vector<std::size_t> batch(mini_batch_);
  for (auto& b : batch) b = static_cast<std::size_t>(rng.below(n));
  return {batch_gradient(x, batch.size(),
                         [&](std::size_t s) { return batch[s]; }),
          id};
}

ParamVector LogisticProblem::exact_gradient(const ParamVector& x) const {
  return batch_gradient(x, num_samples(), [](std::size_t s) { return s; });
}

Real LogisticProblem::objective(const ParamVector& x) const {
  require_same_dim(x, ParamVector(dimension()), "LogisticProblem::objective");
  const std::size_t d = num_features_;
  std::vector<Real> probs(num_classes_);
  CompensatedSum loss;
  for (std::size_t row = 0; row < num_samples(); ++row) {
    const Real* a = features_.data() + row * d;
    const Real lse = softmax_row(x, a, d, num_classes_, probs);
    const Real* wy = x.data() + labels_[row] * d;
    Real zy = 0.0;
    for (std::size_t j = 0; j < d; ++j) zy += wy[j] * a[j];
    loss.add(lse - zy);
  }
  Real reg = 0.0;
  for (Real v : x) reg += v * v;
  return loss.value() / static_cast<Real>(num_samples()) + 0.5 * l2_ * reg;
}

Real LogisticProblem::accuracy(const ParamVector& x) const {
  require_same_dim(x, ParamVector(dimension()), "LogisticProblem::accuracy");
  const std::size_t d = num_features_;
  std::vector<Real> probs(num_classes_);
  std::size_t correct = 0;
  for (std::size_t row = 0; row < num_samples(); ++row) {
    softmax_row(x, features_.data() + row * d, d, num_classes_, probs);
    const auto best = std::max_element(probs.begin(), probs.end()) - probs.begin();
    if (static_cast<std::size_t>(best) == labels_[row]) ++correct;
  }
  return static_cast<Real>(correct) / static_cast<Real>(num_samples());
}

LogisticProblem make_logistic_synthetic(std::size_t n, std::size_t d,
                                        std::size_t classes, Real separation,
                                        std::uint64_t seed,
                                        std::size_t mini_batch, Real l2) {
  if (classes < 2) throw ConfigError("logistic: need >= 2 classes");
  if (n < classes) throw ConfigError("logistic: need n >= number of classes");
  if (d < 1) throw ConfigError("logistic: need >= 1 feature");
  if (!(separation >= 0.0)) throw ConfigError("logistic: separation must be >= 0");

  SeededRng rng(seed);
  std::vector<Real> means(classes * d);
  for (std::size_t c = 0; c < classes; ++c) {
    Real* mu = means.data() + c * d;
    Real norm = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      mu[j] = rng.normal();
      norm += mu[j] * mu[j];
    }
    norm = std::sqrt(norm);
    for (std::size_t j = 0; j < d; ++j) {
      mu[j] = norm > 0.0 ? separation * mu[j] / norm : 0.0;
    }
  }
  std::vector<Real> features(n * d);
  std::vector<std::size_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t c = i % classes;
    labels[i] = c;
    for (std::size_t j = 0; j < d; ++j) {
      features[i * d + j] = means[c * d + j] + rng.normal();
    }
  }
  return LogisticProblem(std::move(features), std::move(labels), d, classes,
                         mini_batch, l2);
}

LogisticProblem load_csv_dataset(const std::filesystem::path& path,
                                 std::size_t mini_batch, Real l2) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) {
    throw ConfigError("dataset '" + path.string() + "' is empty");
  }
  std::vector<Real> features;
  std::vector<std::size_t> labels;
  std::size_t columns = 0;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() < 2) {
      throw ConfigError("dataset line " + std::to_string(line_no) +
                        ": need at least one feature and a label");
    }
    if (columns == 0) columns = fields.size();
    if (fields.size() != columns) {
      throw ConfigError("dataset line " + std::to_string(line_no) +
                        ": inconsistent column count");
    }
    for (std::size_t j = 0; j + 1 < fields.size(); ++j) {
      features.push_back(parse_real(fields[j]));
    }
    const Real label = parse_real(fields.back());
    if (!(label >= 0.0) || label != std::floor(label)) {
      throw ConfigError("dataset line " + std::to_string(line_no) +
                        ": label must be a non-negative integer");
    }
    labels.push_back(static_cast<std::size_t>(label));
  }
  if (labels.empty()) throw ConfigError("dataset has no samples");
  const std::size_t classes =
      std::max<std::size_t>(2, *std::max_element(labels.begin(), labels.end()) + 1);
  return LogisticProblem(std::move(features), std::move(labels), columns - 1,
                         classes, mini_batch, l2);
}

Real finite_difference_check(const StochasticOracle& problem,
                             const ParamVector& x, Real h_fd) {
  if (!problem.has_exact_gradient() || !problem.has_objective()) {
    throw CapabilityError("finite-difference check needs gradient and objective");
  }
  const ParamVector g = problem.exact_gradient(x);
  ParamVector probe = x;
  Real worst = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    // Divide by the step actually represented, not 2 h_fd.
    const Real up = x[i] + h_fd;
    const Real down = x[i] - h_fd;
    probe[i] = up;
    const Real f_plus = problem.objective(probe);
    probe[i] = down;
    const Real f_minus = problem.objective(probe);
    probe[i] = x[i];
    const Real fd = (f_plus - f_minus) / (up - down);
    const Real scale = std::max(std::abs(fd), std::abs(g[i]));
    const Real err = scale < 1e-8 ? std::abs(fd - g[i])
                                  : std::abs(fd - g[i]) / scale;
    worst = std::max(worst, err);
  }
  return worst;
}

}  // namespace a2grad
