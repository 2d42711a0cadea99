#pragma once

// Closed-form subdifferential and normal-cone calculus for phi(x) = ||x||_p^p
// and the lp ball, plus the smoothed objective used by the reweighting solver.

#include <cmath>
#include <stdexcept>

#include "lpopt/types.hpp"

namespace lpopt {

/// phi(x) = sum_i |x_i|^p.
inline double phi(const Vector& x, double p) {
  require_finite(x, "phi");
  if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("phi: p must lie in (0,1]");
  double s = 0.0;
  for (int i = 0; i < x.size(); ++i) s += std::pow(std::abs(x[i]), p);
  return s;
}

inline double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

/// The regular (= general) subdifferential of phi: on the support the unique
/// element sign(x_j) p |x_j|^{p-1}; at zeros every real value (free index).
/// For p = 1 the zero components are the interval [-1, 1] instead.
inline ConeDescription regular_subdifferential(const Vector& x, double p,
                                               double support_threshold = 0.0) {
  require_finite(x, "regular_subdifferential");
  ConeDescription cone;
  cone.kind = ConeDescription::Kind::FixedOnSupport;
  cone.support = compute_support(x, support_threshold);
  cone.fixed_values.resize(static_cast<Eigen::Index>(cone.support.nonzero_indices.size()));
  for (size_t k = 0; k < cone.support.nonzero_indices.size(); ++k) {
    const double xi = x[cone.support.nonzero_indices[k]];
    cone.fixed_values[static_cast<Eigen::Index>(k)] = sign(xi) * p * std::pow(std::abs(xi), p - 1.0);
  }
  cone.free_indices = cone.support.zero_indices;
  if (p == 1.0) cone.free_interval_halfwidth = 1.0;
  return cone;
}

/// The horizon subdifferential of phi: zero on the support, free at zeros.
inline ConeDescription horizon_subdifferential(const Vector& x, double p,
                                               double support_threshold = 0.0) {
  require_finite(x, "horizon_subdifferential");
  (void)p;
  ConeDescription cone;
  cone.kind = ConeDescription::Kind::FixedOnSupport;
  cone.support = compute_support(x, support_threshold);
  cone.fixed_values = Vector::Zero(static_cast<Eigen::Index>(cone.support.nonzero_indices.size()));
  cone.free_indices = cone.support.zero_indices;
  return cone;
}

struct InfeasibleLpBall : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline double lp_ball_boundary_tolerance(double theta) { return 1e-10 * (1.0 + theta); }

/// Normal cone of the lp ball {phi <= theta}: {0} strictly inside, on the
/// boundary the ray generated by the support-restricted subgradient with free
/// components at zeros.
inline ConeDescription normal_cone_lp_ball(const Vector& x, double p, double theta,
                                           double support_threshold = 0.0) {
  require_finite(x, "normal_cone_lp_ball");
  if (!(theta > 0.0)) throw std::invalid_argument("normal_cone_lp_ball: theta must be positive");
  const double value = phi(x, p);
  const double tol = lp_ball_boundary_tolerance(theta);
  if (value > theta + tol)
    throw InfeasibleLpBall("normal_cone_lp_ball: point outside the lp ball");

  if (value < theta - tol) {
    ConeDescription cone;
    cone.kind = ConeDescription::Kind::PointZero;
    cone.support = compute_support(x, support_threshold);
    return cone;
  }
  ConeDescription cone = regular_subdifferential(x, p, support_threshold);
  cone.kind = ConeDescription::Kind::RayOnSupport;
  cone.ray_generator = cone.fixed_values;
  return cone;
}

/// F(x; eps) = f0(x) + lambda * sum_i (|x_i| + eps_i)^p.
inline double smoothed_objective(const SmoothOracle& oracle, const LpRegularizer& reg,
                                 const Vector& x, const Vector& eps) {
  require_finite(x, "smoothed_objective");
  if (eps.size() != x.size()) throw std::invalid_argument("smoothed_objective: eps size mismatch");
  if (!(eps.array() > 0.0).all())
    throw std::invalid_argument("smoothed_objective: eps must be positive componentwise");
  double s = 0.0;
  for (int i = 0; i < x.size(); ++i) s += std::pow(std::abs(x[i]) + eps[i], reg.p);
  return oracle.value(x) + reg.lambda * s;
}

/// Reweighting coefficient w = p (|x_i| + eps_i)^{p-1}.
inline double weight(double xi, double eps_i, double p) {
  if (!(eps_i > 0.0)) throw std::invalid_argument("weight: eps must be positive");
  return p * std::pow(std::abs(xi) + eps_i, p - 1.0);
}

inline Vector weights(const Vector& x, const Vector& eps, double p) {
  Vector w(x.size());
  for (int i = 0; i < x.size(); ++i) w[i] = weight(x[i], eps[i], p);
  return w;
}

}  // namespace lpopt
