#pragma once

// Exact solvers for the reweighted-l1 subproblem
//   min_{x in Gamma}  <grad, x> + (beta/2) ||x - xk||^2 + lambda * sum_i w_i |x_i|
// specialized per feasible-set kind, returning the primal solution together
// with the multipliers needed for optimality certification.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <stdexcept>

#include "lpopt/lp_calculus.hpp"
#include "lpopt/types.hpp"

namespace lpopt {

struct SubproblemSolution {
  Vector x;
  std::optional<double> equality_dual;  // simplex sum constraint
  std::optional<Vector> bound_duals;    // nonnegativity / box, >= 0
  Vector l1_subgradient;                // y_i in subdiff |x_i| implied by stationarity
};

/// Euclidean projection onto {x >= 0, sum x = s}. Returns the projection and
/// the threshold nu with x_i = max(z_i - nu, 0). Sort-based, O(n log n).
inline std::pair<Vector, double> project_simplex(const Vector& z, double s) {
  if (z.size() == 0) throw std::invalid_argument("project_simplex: empty vector");
  if (!(s > 0.0)) throw std::invalid_argument("project_simplex: scale must be positive");
  std::vector<double> u(z.data(), z.data() + z.size());
  std::sort(u.begin(), u.end(), std::greater<double>());
  double cumsum = 0.0;
  double nu = (u[0] - s);  // fallback, overwritten below
  int rho = 0;
  double running = 0.0;
  for (size_t k = 0; k < u.size(); ++k) {
    running += u[k];
    const double candidate = (running - s) / static_cast<double>(k + 1);
    if (u[k] - candidate > 0.0) {
      rho = static_cast<int>(k + 1);
      cumsum = running;
    }
  }
  nu = (cumsum - s) / static_cast<double>(rho);
  Vector x(z.size());
  for (int i = 0; i < z.size(); ++i) x[i] = std::max(z[i] - nu, 0.0);
  return {x, nu};
}

inline double soft_threshold(double z, double t) {
  // ties (|z| == t) resolve to zero
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

namespace detail {

// Minimize g*x + (beta/2)(x - xk)^2 + lw*|x| over [lo, hi] for an interval
// not containing 0: candidates are the clamped smooth minimizers per sign
// region plus the 0 boundary when it touches.
inline double scalar_box_solve(double g, double xk, double beta, double lw, double lo, double hi) {
  auto obj = [&](double x) {
    return g * x + 0.5 * beta * (x - xk) * (x - xk) + lw * std::abs(x);
  };
  const double z = xk - g / beta;
  double best_x = lo, best_v = obj(lo);
  auto consider = [&](double x) {
    x = std::clamp(x, lo, hi);
    const double v = obj(x);
    if (v < best_v) {
      best_v = v;
      best_x = x;
    }
  };
  consider(hi);
  consider(z - lw / beta);  // x > 0 region
  consider(z + lw / beta);  // x < 0 region
  if (lo <= 0.0 && 0.0 <= hi) consider(0.0);
  return best_x;
}

}  // namespace detail

/// Infinity-norm stationarity residual of a candidate subproblem solution:
/// there must exist y_i in [-1,1] (y_i = sign(x_i) on the support) and a
/// normal-cone element z of Gamma at x with
///   grad + beta (x - xk) + lambda diag(w) y + z = 0.
inline double subproblem_stationarity_residual(const SubproblemSolution& sol, const Vector& xk,
                                               const Vector& grad, double beta, double lambda,
                                               const Vector& w, const FeasibleSet& gamma) {
  if (gamma.kind == FeasibleSet::Kind::GeneralSmooth)
    throw std::invalid_argument("stationarity residual: general sets need explicit duals");
  const Vector& x = sol.x;
  double worst = 0.0;
  for (int i = 0; i < x.size(); ++i) {
    double res = grad[i] + beta * (x[i] - xk[i]);
    if (gamma.kind == FeasibleSet::Kind::Simplex && sol.equality_dual)
      res += *sol.equality_dual;
    // y_i = sign(x_i) on the support, best admissible value in [-1,1] at zeros
    if (x[i] != 0.0)
      res += lambda * w[i] * sign(x[i]);
    else if (lambda * w[i] > 0.0)
      res += lambda * w[i] * std::clamp(-res / (lambda * w[i]), -1.0, 1.0);
    // active bounds absorb one-sided slack through the normal cone of Gamma
    bool lower_active = false, upper_active = false;
    const double tol = 1e-14 * (1.0 + std::abs(x[i]));
    switch (gamma.kind) {
      case FeasibleSet::Kind::Nonnegative:
      case FeasibleSet::Kind::Simplex:
        lower_active = (x[i] <= tol);
        break;
      case FeasibleSet::Kind::Box:
        lower_active = (x[i] <= gamma.lower[i] + tol);
        upper_active = (x[i] >= gamma.upper[i] - tol);
        break;
      default:
        break;
    }
    double violation;
    if (lower_active && upper_active)
      violation = 0.0;
    else if (lower_active)
      violation = std::max(-res, 0.0);  // needs z_i = -res with z_i <= 0
    else if (upper_active)
      violation = std::max(res, 0.0);  // needs z_i = -res with z_i >= 0
    else
      violation = std::abs(res);
    worst = std::max(worst, violation);
  }
  return worst;
}

/// Exact minimizer of the reweighted-l1 subproblem over the structured sets.
/// GeneralSmooth sets are rejected; route those through a subproblem hook.
inline SubproblemSolution solve_subproblem(const Vector& xk, const Vector& grad, double beta,
                                           double lambda, const Vector& w,
                                           const FeasibleSet& gamma) {
  if (!(beta > 0.0)) throw std::invalid_argument("solve_subproblem: beta must be positive");
  if (!(w.array() > 0.0).all())
    throw std::invalid_argument("solve_subproblem: weights must be positive");
  if (gamma.kind == FeasibleSet::Kind::GeneralSmooth)
    throw std::invalid_argument(
        "unsupported-exact-subproblem: general smooth sets require a custom subproblem oracle");

  const int n = static_cast<int>(xk.size());
  const Vector z = xk - grad / beta;
  SubproblemSolution sol;
  sol.x.resize(n);

  switch (gamma.kind) {
    case FeasibleSet::Kind::Unconstrained:
      for (int i = 0; i < n; ++i) sol.x[i] = soft_threshold(z[i], lambda * w[i] / beta);
      break;
    case FeasibleSet::Kind::Nonnegative: {
      Vector mu = Vector::Zero(n);
      for (int i = 0; i < n; ++i) {
        sol.x[i] = std::max(z[i] - lambda * w[i] / beta, 0.0);
        if (sol.x[i] == 0.0) mu[i] = std::max(grad[i] + beta * (0.0 - xk[i]) + 0.0, 0.0);
      }
      sol.bound_duals = mu;
      break;
    }
    case FeasibleSet::Kind::Box: {
      Vector mu = Vector::Zero(n);
      for (int i = 0; i < n; ++i) {
        if (gamma.lower[i] <= 0.0 && 0.0 <= gamma.upper[i])
          sol.x[i] =
              std::clamp(soft_threshold(z[i], lambda * w[i] / beta), gamma.lower[i], gamma.upper[i]);
        else
          sol.x[i] = detail::scalar_box_solve(grad[i], xk[i], beta, lambda * w[i], gamma.lower[i],
                                              gamma.upper[i]);
      }
      sol.bound_duals = mu;
      break;
    }
    case FeasibleSet::Kind::Simplex: {
      const Vector shifted = z - (lambda / beta) * w;
      auto [x, nu_hat] = project_simplex(shifted, gamma.scale);
      sol.x = x;
      sol.equality_dual = beta * nu_hat;
      Vector mu(n);
      for (int i = 0; i < n; ++i)
        mu[i] = sol.x[i] > 0.0 ? 0.0 : beta * (nu_hat - shifted[i]);
      sol.bound_duals = mu;
      break;
    }
    default:
      break;
  }

  sol.l1_subgradient.resize(n);
  for (int i = 0; i < n; ++i) {
    if (sol.x[i] != 0.0) {
      sol.l1_subgradient[i] = sign(sol.x[i]);
    } else {
      double rest = grad[i] + beta * (sol.x[i] - xk[i]);
      if (gamma.kind == FeasibleSet::Kind::Simplex && sol.equality_dual)
        rest += *sol.equality_dual;
      if (sol.bound_duals) rest -= (*sol.bound_duals)[i];
      sol.l1_subgradient[i] =
          lambda * w[i] > 0.0 ? std::clamp(-rest / (lambda * w[i]), -1.0, 1.0) : 0.0;
    }
  }
  return sol;
}

/// Contract for externally supplied exact subproblem solvers (general closed
/// convex Gamma). Solutions are verified against the stationarity invariant
/// by the solver loop; violations abort the run.
using SubproblemHook = std::function<SubproblemSolution(
    const Vector& xk, const Vector& grad, double beta, double lambda, const Vector& w,
    const FeasibleSet& gamma)>;

}  // namespace lpopt
