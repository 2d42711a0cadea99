#pragma once

// Iteratively reweighted l1 outer loop: reweighting, exact subproblem solve,
// geometric smoothing decrease, with per-iteration descent verification and
// full history capture.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "lpopt/lp_calculus.hpp"
#include "lpopt/subproblems.hpp"
#include "lpopt/types.hpp"

namespace lpopt {

struct SolverParams {
  double alpha = 0.998;        // smoothing decay, in (0,1)
  double beta_factor = 1.1;    // beta = beta_factor * L_f, must exceed 0.5
  double eps0 = 1e-3;          // initial smoothing, replicated componentwise
  int max_iters = 100000;
  double tol_step = 1e-10;     // stop when ||x^{k+1} - x^k|| <= tol_step
  double tol_residual = 1e-8;  // stop when the support stationarity residual <= tol_residual
  double eps_floor = 1e-14;    // keeps the weights finite

  void validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0,1)");
    if (!(beta_factor > 0.5)) throw std::invalid_argument("beta_factor must exceed 0.5");
    if (!(eps0 > 0.0)) throw std::invalid_argument("eps0 must be positive");
    if (max_iters <= 0) throw std::invalid_argument("max_iters must be positive");
  }
};

enum class Termination { StepNorm, Residual, MaxIters };

struct SolveReport {
  std::vector<Vector> iterates;
  std::vector<Vector> eps_trace;
  std::vector<double> objective_trace;   // F(x^k; eps^k)
  std::vector<double> step_norms;        // ||x^{k+1} - x^k||
  std::vector<double> descent_slack;     // DeltaF - (M - L_f/2) ||Dx||^2
  std::vector<double> residual_trace;    // support stationarity residual per iterate
  std::vector<SubproblemSolution> duals; // subproblem solution (with multipliers) per step
  Termination termination = Termination::MaxIters;
  double beta = 0.0;

  const Vector& solution() const { return iterates.back(); }
};

struct DescentViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Slack of the per-step descent bound: [F(prev) - F(next)] - (M - Lf/2)||dx||^2.
/// Negative slack beyond tolerance indicates a wrong Lipschitz constant or a
/// broken subproblem oracle.
inline double assert_descent(const Vector& x_prev, double f_prev, const Vector& x_next,
                             double f_next, double strong_convexity, double lipschitz) {
  if (!(strong_convexity > lipschitz / 2.0))
    throw std::invalid_argument("assert_descent: requires M > L_f / 2");
  const double step2 = (x_next - x_prev).squaredNorm();
  return (f_prev - f_next) - (strong_convexity - lipschitz / 2.0) * step2;
}

struct LipschitzEstimate {
  double value = 0.0;
  bool converged = false;
  int iterations = 0;
};

/// Largest eigenvalue of a symmetric PSD matrix by power iteration
/// (relative tolerance 1e-8). Non-convergence is reported through the flag
/// with the best Rayleigh-quotient bound in value.
inline LipschitzEstimate estimate_lipschitz(const Matrix& R, double rel_tol = 1e-8,
                                            int max_iters = 10000) {
  const int n = static_cast<int>(R.rows());
  if (R.cols() != n) throw std::invalid_argument("estimate_lipschitz: matrix must be square");
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = 1.0 + 1e-3 * static_cast<double>(i);  // deterministic start
  v.normalize();
  double rayleigh = v.dot(R * v);
  LipschitzEstimate est;
  for (int k = 0; k < max_iters; ++k) {
    Vector u = R * v;
    const double norm = u.norm();
    if (norm == 0.0) return {0.0, true, k};
    v = u / norm;
    const double next = v.dot(R * v);
    est.iterations = k + 1;
    if (std::abs(next - rayleigh) <= rel_tol * (1.0 + std::abs(next))) {
      est.value = next;
      est.converged = true;
      return est;
    }
    rayleigh = next;
  }
  est.value = rayleigh;
  est.converged = false;
  return est;
}

namespace detail {

// Stationarity residual of the original penalized problem restricted to the
// support of x, with the normal-cone element taken from the subproblem duals.
inline double support_kkt_residual(const Vector& x, const Vector& grad, const LpRegularizer& reg,
                                   const FeasibleSet& gamma, const SubproblemSolution& sol,
                                   const Vector& eps) {
  double worst = 0.0;
  for (int i = 0; i < x.size(); ++i) {
    if (x[i] == 0.0) continue;
    double r = grad[i] + reg.lambda * reg.p * sign(x[i]) * std::pow(std::abs(x[i]), reg.p - 1.0);
    if (gamma.kind == FeasibleSet::Kind::Simplex && sol.equality_dual) r += *sol.equality_dual;
    worst = std::max(worst, std::abs(r));
  }
  (void)eps;
  return worst;
}

}  // namespace detail

/// Algorithm: w^k_i = p(|x^k_i| + eps^k_i)^{p-1}; x^{k+1} = exact subproblem
/// minimizer with beta = beta_factor * L_f; eps^{k+1} = alpha * eps^k
/// componentwise (floored). Every step is checked against the descent bound.
/// Level-set boundedness of F is the caller's responsibility.
inline SolveReport solve(const SmoothOracle& oracle, const LpRegularizer& reg,
                         const FeasibleSet& gamma, const Vector& x0, const SolverParams& params,
                         const SubproblemHook& hook = nullptr) {
  params.validate();
  // lambda = 0 is admitted as the smooth baseline (plain proximal gradient)
  if (reg.kind != ProblemKind::Penalized || reg.lambda < 0.0)
    throw std::invalid_argument("solve: requires a penalized regularizer with lambda >= 0");
  if (!gamma.contains(x0, 1e-10)) throw std::invalid_argument("solve: infeasible starting point");
  const double lf = oracle.lipschitz;
  const double beta = lf > 0.0 ? params.beta_factor * lf : params.beta_factor;

  const int n = static_cast<int>(x0.size());
  Vector x = x0;
  Vector eps = Vector::Constant(n, params.eps0);
  double objective = smoothed_objective(oracle, reg, x, eps);
  if (!std::isfinite(objective)) throw std::invalid_argument("solve: non-finite objective at x0");

  SolveReport report;
  report.beta = beta;
  report.iterates.push_back(x);
  report.eps_trace.push_back(eps);
  report.objective_trace.push_back(objective);

  for (int k = 0; k < params.max_iters; ++k) {
    const Vector w = weights(x, eps, reg.p);
    const Vector grad = oracle.gradient(x);
    if (!grad.allFinite()) throw std::runtime_error("solve: non-finite gradient");

    SubproblemSolution sol;
    if (hook && gamma.kind == FeasibleSet::Kind::GeneralSmooth) {
      sol = hook(x, grad, beta, reg.lambda, w, gamma);
    } else if (hook) {
      sol = hook(x, grad, beta, reg.lambda, w, gamma);
      const double res = subproblem_stationarity_residual(sol, x, grad, beta, reg.lambda, w, gamma);
      if (res > 1e-10 * (1.0 + grad.lpNorm<Eigen::Infinity>()))
        throw std::runtime_error("solve: subproblem oracle failed the stationarity invariant, residual " +
                                 std::to_string(res));
    } else {
      sol = solve_subproblem(x, grad, beta, reg.lambda, w, gamma);
    }

    Vector eps_next = (params.alpha * eps).cwiseMax(params.eps_floor);
    const double objective_next = smoothed_objective(oracle, reg, sol.x, eps_next);
    const double slack = assert_descent(x, objective, sol.x, objective_next, beta, lf);
    if (slack < -1e-10 * (1.0 + std::abs(objective_next)))
      throw DescentViolation("solve: descent bound violated (slack " + std::to_string(slack) +
                             "); wrong L_f or broken subproblem oracle");

    const double step = (sol.x - x).norm();
    const Vector grad_next = oracle.gradient(sol.x);
    const double residual =
        gamma.kind == FeasibleSet::Kind::GeneralSmooth
            ? std::numeric_limits<double>::infinity()
            : detail::support_kkt_residual(sol.x, grad_next, reg, gamma, sol, eps_next);

    x = sol.x;
    eps = std::move(eps_next);
    objective = objective_next;

    report.iterates.push_back(x);
    report.eps_trace.push_back(eps);
    report.objective_trace.push_back(objective);
    report.step_norms.push_back(step);
    report.descent_slack.push_back(slack);
    report.residual_trace.push_back(residual);
    report.duals.push_back(std::move(sol));

    if (step <= params.tol_step) {
      report.termination = Termination::StepNorm;
      return report;
    }
    if (residual <= params.tol_residual) {
      report.termination = Termination::Residual;
      return report;
    }
  }
  report.termination = Termination::MaxIters;
  return report;
}

}  // namespace lpopt
