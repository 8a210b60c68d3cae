#pragma once

#include "a2grad/core.hpp"

namespace a2grad {

/// Euclidean projection onto the feasible set: either all of R^d or a box.
class ProjectionSpec {
 public:
  enum class Kind { unconstrained, box };

  ProjectionSpec() = default;

  static ProjectionSpec unconstrained() { return {}; }
  /// Throws ConfigError unless lower <= upper coordinate-wise.
  static ProjectionSpec box(ParamVector lower, ParamVector upper);

  Kind kind() const noexcept { return kind_; }
  bool is_unconstrained() const noexcept { return kind_ == Kind::unconstrained; }
  const ParamVector& lower() const noexcept { return lower_; }
  const ParamVector& upper() const noexcept { return upper_; }

  void apply(ParamVector& x) const;
  bool contains(const ParamVector& x) const;

 private:
  Kind kind_ = Kind::unconstrained;
  ParamVector lower_;
  ParamVector upper_;
};

}  // namespace a2grad
