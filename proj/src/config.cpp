#include "a2grad/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace a2grad {

using nlohmann::json;

std::string_view to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::quadratic: return "quadratic";
    case ProblemKind::logistic: return "logistic";
    case ProblemKind::counterexample: return "counterexample";
    case ProblemKind::csv: return "csv";
  }
  return "?";
}

ProblemKind parse_problem_kind(std::string_view name) {
  if (name == "quadratic") return ProblemKind::quadratic;
  if (name == "logistic") return ProblemKind::logistic;
  if (name == "counterexample") return ProblemKind::counterexample;
  if (name == "csv") return ProblemKind::csv;
  throw ConfigError("unknown problem kind '" + std::string(name) + "'");
}

std::string_view to_string(OptimizerMethod method) {
  switch (method) {
    case OptimizerMethod::a2grad: return "a2grad";
    case OptimizerMethod::sgd: return "sgd";
    case OptimizerMethod::adagrad: return "adagrad";
    case OptimizerMethod::adam: return "adam";
    case OptimizerMethod::amsgrad: return "amsgrad";
  }
  return "?";
}

OptimizerMethod parse_optimizer_method(std::string_view name) {
  if (name == "a2grad") return OptimizerMethod::a2grad;
  if (name == "sgd") return OptimizerMethod::sgd;
  if (name == "adagrad") return OptimizerMethod::adagrad;
  if (name == "adam") return OptimizerMethod::adam;
  if (name == "amsgrad") return OptimizerMethod::amsgrad;
  throw ConfigError("unknown optimizer '" + std::string(name) + "'");
}

std::string_view to_string(ProjectionMode mode) {
  switch (mode) {
    case ProjectionMode::automatic: return "auto";
    case ProjectionMode::none: return "none";
    case ProjectionMode::box: return "box";
  }
  return "?";
}

ProjectionMode parse_projection_mode(std::string_view name) {
  if (name == "auto") return ProjectionMode::automatic;
  if (name == "none") return ProjectionMode::none;
  if (name == "box") return ProjectionMode::box;
  throw ConfigError("unknown projection mode '" + std::string(name) + "'");
}

ProjectionSpec OptimizerSpec::projection_for(const StochasticOracle& oracle) const {
  const std::size_t d = oracle.dimension();
  switch (projection) {
    case ProjectionMode::none:
      return ProjectionSpec::unconstrained();
    case ProjectionMode::box:
      return ProjectionSpec::box(ParamVector(d, box_lower), ParamVector(d, box_upper));
    case ProjectionMode::automatic:
      if (auto dom = oracle.domain()) {
        return ProjectionSpec::box(dom->first, dom->second);
      }
      return ProjectionSpec::unconstrained();
  }
  return ProjectionSpec::unconstrained();
}

A2GradConfig OptimizerSpec::a2grad_config(const StochasticOracle& oracle) const {
  if (method != OptimizerMethod::a2grad) {
    throw ConfigError("optimizer spec is not an a2grad variant");
  }
  A2GradConfig c;
  c.lipschitz = lipschitz;
  c.beta = beta;
  c.scaler = ScalerSpec{scaler, q, rho};
  c.delta_mode = delta;
  c.projection = projection_for(oracle);
  c.form = form;
  return c;
}

BaselineConfig OptimizerSpec::baseline_config(const StochasticOracle& oracle) const {
  BaselineConfig c;
  switch (method) {
    case OptimizerMethod::a2grad:
      throw ConfigError("optimizer spec is not a baseline");
    case OptimizerMethod::sgd: c.method = BaselineMethod::sgd; break;
    case OptimizerMethod::adagrad: c.method = BaselineMethod::adagrad; break;
    case OptimizerMethod::adam: c.method = BaselineMethod::adam; break;
    case OptimizerMethod::amsgrad: c.method = BaselineMethod::amsgrad; break;
  }
  c.learning_rate = learning_rate;
  c.rate_policy = rate_policy;
  c.beta1 = beta1;
  c.beta2 = beta2;
  c.epsilon = epsilon;
  c.bias_correction = bias_correction;
  c.cumulative_second_moment = cumulative_second_moment;
  c.projection = projection_for(oracle);
  return c;
}

std::string OptimizerSpec::label() const {
  if (method != OptimizerMethod::a2grad) return std::string(to_string(method));
  A2GradConfig c;
  c.scaler = ScalerSpec{scaler, q, rho};
  return c.label();
}

void ExperimentConfig::validate() const {
  if (name.empty()) throw ConfigError("experiment name must not be empty");
  for (char ch : name) {
    if (ch == '/' || ch == '\\') {
      throw ConfigError("experiment name must not contain path separators");
    }
  }
  if (iters < 1) throw ConfigError("iters (horizon K) must be >= 1");
  if (repeats < 1) throw ConfigError("repeats must be >= 1");
  if (parallel < 1) throw ConfigError("parallel must be >= 1");
  if (eval_stride < 1) throw ConfigError("eval_stride must be >= 1");
  if (optimizer.projection == ProjectionMode::box &&
      !(optimizer.box_lower <= optimizer.box_upper)) {
    throw ConfigError("box_lower must not exceed box_upper");
  }
  if (!std::isfinite(optimizer.x0)) throw ConfigError("x0 must be finite");
}

// Serialization -------------------------------------------------------------

namespace {

json problem_to_json(const ProblemSpec& p) {
  return json{
      {"kind", to_string(p.kind)},
      {"seed", p.seed},
      {"dim", p.dim},
      {"kappa", p.kappa},
      {"noise", to_string(p.noise.kind)},
      {"noise_scale", p.noise.scale},
      {"samples", p.samples},
      {"features", p.features},
      {"classes", p.classes},
      {"separation", p.separation},
      {"batch", p.batch},
      {"l2", p.l2},
      {"path", p.path},
      {"large_gradient", p.large_gradient},
  };
}

json optimizer_to_json(const OptimizerSpec& o) {
  return json{
      {"method", to_string(o.method)},
      {"form", to_string(o.form)},
      {"scaler", to_string(o.scaler)},
      {"q", o.q},
      {"rho", o.rho},
      {"delta", to_string(o.delta)},
      {"lipschitz", o.lipschitz},
      {"beta", o.beta},
      {"learning_rate", o.learning_rate},
      {"rate_policy", to_string(o.rate_policy)},
      {"beta1", o.beta1},
      {"beta2", o.beta2},
      {"epsilon", o.epsilon},
      {"bias_correction", o.bias_correction},
      {"cumulative_second_moment", o.cumulative_second_moment},
      {"projection", to_string(o.projection)},
      {"box_lower", o.box_lower},
      {"box_upper", o.box_upper},
      {"x0", o.x0},
  };
}

// Reads keys from one JSON object and rejects any it did not consume.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string where)
      : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError(where_ + ": expected an object");
  }

  template <typename T>
  void read(const char* key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!it->is_boolean()) throw ConfigError("");
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!it->is_number()) throw ConfigError("");
      } else if constexpr (std::is_integral_v<T>) {
        if (!it->is_number_unsigned()) throw ConfigError("");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!it->is_string()) throw ConfigError("");
      }
      out = it->get<T>();
    } catch (const std::exception&) {
      throw ConfigError(where_ + "." + key + ": wrong type");
    }
  }

  template <typename Parse, typename T>
  void read_enum(const char* key, T& out, Parse parse) {
    std::string text;
    bool present = j_.contains(key);
    read(key, text);
    if (present) out = parse(text);
  }

  void read_list(const char* key, std::vector<Real>& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    if (!it->is_array()) throw ConfigError(where_ + "." + key + ": expected a list");
    out.clear();
    for (const auto& v : *it) {
      if (!v.is_number()) throw ConfigError(where_ + "." + key + ": expected numbers");
      out.push_back(v.get<Real>());
    }
  }

  const json* child(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) throw ConfigError(where_ + ": unknown key '" + key + "'");
    }
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

ProblemSpec problem_from_json(const json& j) {
  ProblemSpec p;
  ObjectReader r(j, "problem");
  r.read_enum("kind", p.kind, parse_problem_kind);
  r.read("seed", p.seed);
  r.read("dim", p.dim);
  r.read("kappa", p.kappa);
  r.read_enum("noise", p.noise.kind, parse_noise_kind);
  r.read("noise_scale", p.noise.scale);
  r.read("samples", p.samples);
  r.read("features", p.features);
  r.read("classes", p.classes);
  r.read("separation", p.separation);
  r.read("batch", p.batch);
  r.read("l2", p.l2);
  r.read("path", p.path);
  r.read("large_gradient", p.large_gradient);
  r.finish();
  return p;
}

OptimizerSpec optimizer_from_json(const json& j) {
  OptimizerSpec o;
  ObjectReader r(j, "optimizer");
  r.read_enum("method", o.method, parse_optimizer_method);
  r.read_enum("form", o.form, parse_iteration_form);
  r.read_enum("scaler", o.scaler, parse_scaler_scheme);
  r.read("q", o.q);
  r.read("rho", o.rho);
  r.read_enum("delta", o.delta, parse_delta_mode);
  r.read("lipschitz", o.lipschitz);
  r.read("beta", o.beta);
  r.read("learning_rate", o.learning_rate);
  r.read_enum("rate_policy", o.rate_policy, parse_rate_policy);
  r.read("beta1", o.beta1);
  r.read("beta2", o.beta2);
  r.read("epsilon", o.epsilon);
  r.read("bias_correction", o.bias_correction);
  r.read("cumulative_second_moment", o.cumulative_second_moment);
  r.read_enum("projection", o.projection, parse_projection_mode);
  r.read("box_lower", o.box_lower);
  r.read("box_upper", o.box_upper);
  r.read("x0", o.x0);
  r.finish();
  return o;
}

}  // namespace

std::string serialize_config(const ExperimentConfig& c) {
  json j{
      {"name", c.name},
      {"problem", problem_to_json(c.problem)},
      {"optimizer", optimizer_to_json(c.optimizer)},
      {"iters", c.iters},
      {"repeats", c.repeats},
      {"seed", c.seed},
      {"out", c.out},
      {"parallel", c.parallel},
      {"eval_stride", c.eval_stride},
      {"record_timing", c.record_timing},
      {"sweep",
       json{{"beta", c.sweep.beta},
            {"lipschitz", c.sweep.lipschitz},
            {"learning_rate", c.sweep.learning_rate}}},
  };
  return j.dump(2) + "\n";
}

ExperimentConfig parse_config(std::string_view text) {
  json j;
  try {
    j = json::parse(text.begin(), text.end(), nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  ExperimentConfig c;
  ObjectReader r(j, "config");
  r.read("name", c.name);
  if (const json* p = r.child("problem")) c.problem = problem_from_json(*p);
  if (const json* o = r.child("optimizer")) c.optimizer = optimizer_from_json(*o);
  r.read("iters", c.iters);
  r.read("repeats", c.repeats);
  r.read("seed", c.seed);
  r.read("out", c.out);
  r.read("parallel", c.parallel);
  r.read("eval_stride", c.eval_stride);
  r.read("record_timing", c.record_timing);
  if (const json* s = r.child("sweep")) {
    ObjectReader sr(*s, "sweep");
    sr.read_list("beta", c.sweep.beta);
    sr.read_list("lipschitz", c.sweep.lipschitz);
    sr.read_list("learning_rate", c.sweep.learning_rate);
    sr.finish();
  }
  r.finish();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_config(buf.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void save_config(const ExperimentConfig& config,
                 const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write config file " + path.string());
  out << serialize_config(config);
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace a2grad
