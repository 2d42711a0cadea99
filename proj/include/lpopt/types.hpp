#pragma once

#include <Eigen/Core>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace lpopt {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Index sets of nonzero and (numerically) zero components of a point.
struct Support {
  std::vector<int> nonzero_indices;
  std::vector<int> zero_indices;
  double threshold = 0.0;  // |x_i| <= threshold classifies as zero

  int size() const { return static_cast<int>(nonzero_indices.size() + zero_indices.size()); }
  bool is_nonzero(int i) const {
    for (int j : nonzero_indices)
      if (j == i) return true;
    return false;
  }
};

inline Support compute_support(const Vector& x, double threshold = 0.0) {
  Support s;
  s.threshold = threshold;
  for (int i = 0; i < x.size(); ++i) {
    if (std::abs(x[i]) > threshold)
      s.nonzero_indices.push_back(i);
    else
      s.zero_indices.push_back(i);
  }
  return s;
}

/// Which regularized problem a (p, weight) pair belongs to.
enum class ProblemKind { Penalized, BallConstrained };

/// The pair (p, lambda) for the penalized problem or (p, theta) for the
/// ball-constrained one. Exactly one of lambda/theta is meaningful.
struct LpRegularizer {
  double p = 0.5;
  double lambda = 0.0;
  double theta = 0.0;
  ProblemKind kind = ProblemKind::Penalized;

  static LpRegularizer penalized(double p, double lambda) {
    if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("lp exponent must lie in (0,1]");
    if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be nonnegative");
    return LpRegularizer{p, lambda, 0.0, ProblemKind::Penalized};
  }
  static LpRegularizer ball(double p, double theta) {
    if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("lp exponent must lie in (0,1]");
    if (!(theta > 0.0)) throw std::invalid_argument("theta must be positive");
    return LpRegularizer{p, 0.0, theta, ProblemKind::BallConstrained};
  }
};

/// Evaluation bundle for a smooth objective: value, gradient, and a
/// Lipschitz constant of the gradient.
struct SmoothOracle {
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;
  double lipschitz = 0.0;

  static SmoothOracle quadratic(const Matrix& R, const Vector& c, double lipschitz) {
    SmoothOracle o;
    o.value = [R, c](const Vector& x) { return 0.5 * x.dot(R * x) - c.dot(x); };
    o.gradient = [R, c](const Vector& x) { return Vector(R * x - c); };
    o.lipschitz = lipschitz;
    return o;
  }
  static SmoothOracle zero() {
    SmoothOracle o;
    o.value = [](const Vector& x) { (void)x; return 0.0; };
    o.gradient = [](const Vector& x) { return Vector(Vector::Zero(x.size())); };
    o.lipschitz = 0.0;
    return o;
  }
};

enum class ConstraintKind { Inequality, Equality };

/// One smooth constraint f_j with its gradient.
struct ConstraintOracle {
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;
  ConstraintKind kind = ConstraintKind::Inequality;
};

/// Tagged description of the closed convex feasible set.
struct FeasibleSet {
  enum class Kind { Unconstrained, Nonnegative, Box, Simplex, GeneralSmooth };

  Kind kind = Kind::Unconstrained;
  Vector lower, upper;       // Box
  double scale = 1.0;        // Simplex: {x >= 0, sum x = scale}
  std::vector<ConstraintOracle> constraints;  // GeneralSmooth

  static FeasibleSet unconstrained() { return FeasibleSet{}; }
  static FeasibleSet nonnegative() {
    FeasibleSet g;
    g.kind = Kind::Nonnegative;
    return g;
  }
  static FeasibleSet box(Vector lower, Vector upper) {
    if (lower.size() != upper.size()) throw std::invalid_argument("box bound size mismatch");
    for (int i = 0; i < lower.size(); ++i)
      if (!(lower[i] < upper[i])) throw std::invalid_argument("box requires lower < upper");
    FeasibleSet g;
    g.kind = Kind::Box;
    g.lower = std::move(lower);
    g.upper = std::move(upper);
    return g;
  }
  static FeasibleSet simplex(double scale) {
    if (!(scale > 0.0)) throw std::invalid_argument("simplex scale must be positive");
    FeasibleSet g;
    g.kind = Kind::Simplex;
    g.scale = scale;
    return g;
  }
  static FeasibleSet general(std::vector<ConstraintOracle> constraints) {
    FeasibleSet g;
    g.kind = Kind::GeneralSmooth;
    g.constraints = std::move(constraints);
    return g;
  }

  bool contains(const Vector& x, double tol = 1e-10) const {
    switch (kind) {
      case Kind::Unconstrained:
        return true;
      case Kind::Nonnegative:
        return (x.array() >= -tol).all();
      case Kind::Box:
        return ((x - lower).array() >= -tol).all() && ((upper - x).array() >= -tol).all();
      case Kind::Simplex:
        return (x.array() >= -tol).all() && std::abs(x.sum() - scale) <= tol * (1.0 + scale);
      case Kind::GeneralSmooth:
        for (const auto& c : constraints) {
          const double v = c.value(x);
          if (c.kind == ConstraintKind::Equality ? std::abs(v) > tol : v > tol) return false;
        }
        return true;
    }
    return false;
  }
};

/// Symbolic description of a cone (subdifferential, horizon subdifferential,
/// or normal cone). Components off the listed support are never materialized
/// as infinities; they are reported through free_indices.
struct ConeDescription {
  enum class Kind { PointZero, FixedOnSupport, RayOnSupport };

  Kind kind = Kind::PointZero;
  Support support;
  Vector fixed_values;            // indexed parallel to support.nonzero_indices
  std::vector<int> free_indices;  // components unrestricted (all of R)
  std::optional<Vector> ray_generator;  // RayOnSupport: v = t * generator on support, t >= 0
  // p = 1 only: free components are the interval [-h, h] instead of all of R.
  std::optional<double> free_interval_halfwidth;
};

inline void require_finite(const Vector& x, const char* what) {
  if (!x.allFinite()) throw std::invalid_argument(std::string(what) + ": non-finite input");
}

}  // namespace lpopt
