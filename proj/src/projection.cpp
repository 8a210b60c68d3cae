#include "a2grad/projection.hpp"

#include <algorithm>

namespace a2grad {

ProjectionSpec ProjectionSpec::box(ParamVector lower, ParamVector upper) {
  if (lower.size() != upper.size()) {
    throw ConfigError("box bounds have different dimensions");
  }
  for (std::size_t i = 0; i < lower.size(); ++i) {
    if (!(lower[i] <= upper[i])) {
      throw ConfigError("box lower bound exceeds upper bound at coordinate " +
                        std::to_string(i));
    }
  }
  ProjectionSpec spec;
  spec.kind_ = Kind::box;
  spec.lower_ = std::move(lower);
  spec.upper_ = std::move(upper);
  return spec;
}

void ProjectionSpec::apply(ParamVector& x) const {
  if (kind_ == Kind::unconstrained) return;
  require_same_dim(x, lower_, "ProjectionSpec::apply");
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = std::clamp(x[i], lower_[i], upper_[i]);
  }
}

bool ProjectionSpec::contains(const ParamVector& x) const {
  if (kind_ == Kind::unconstrained) return true;
  if (x.size() != lower_.size()) return false;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] < lower_[i] || x[i] > upper_[i]) return false;
  }
  return true;
}

}  // namespace a2grad
