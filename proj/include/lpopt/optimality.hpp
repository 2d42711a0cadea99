#pragma once

// Numerical certification of first-order optimality conditions: KKT residuals
// for the penalized and ball-constrained problems, AKKT sequence residuals,
// the extended MFCQ check, and the horizon-obstruction test. All residuals
// live on the support subspace.

#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lpopt/linprog.hpp"
#include "lpopt/lp_calculus.hpp"
#include "lpopt/types.hpp"

namespace lpopt {

struct MultiplierSet {
  std::map<int, double> equality;           // y_j, j in E
  std::map<int, double> active_inequality;  // y_j >= 0, j in the active set
  std::optional<double> ball_multiplier;    // y_0 >= 0 (ball-constrained problem)
  std::optional<double> set_dual;           // simplex equality multiplier nu
  bool rank_deficient = false;              // reported by fit_multipliers

  void validate() const {
    for (const auto& [j, y] : active_inequality)
      if (y < 0.0) throw std::invalid_argument("negative inequality multiplier");
    if (ball_multiplier && *ball_multiplier < 0.0)
      throw std::invalid_argument("negative ball multiplier");
  }
};

enum class Condition { KktP1, KktP2, Akkt, Emfcq, HorizonObstruction };

inline const char* condition_name(Condition c) {
  switch (c) {
    case Condition::KktP1: return "KKT-P1";
    case Condition::KktP2: return "KKT-P2";
    case Condition::Akkt: return "AKKT";
    case Condition::Emfcq: return "EMFCQ";
    case Condition::HorizonObstruction: return "HORIZON";
  }
  return "?";
}

struct OptimalityCertificate {
  Condition condition = Condition::KktP1;
  double residual = 0.0;  // max of |detail|
  double tolerance = 0.0;
  Support support;
  MultiplierSet multipliers;
  Vector detail;
  bool verdict = false;
  // ball-constrained problem over Gamma = R^n (sharper multiplier statement applies)
  bool unconstrained_ball_case = false;
  // which sufficient condition for the cone-continuity property applies
  std::string eccp_note;
};

namespace detail {

inline double lp_gradient_term(double xi, double p) {
  return p * sign(xi) * std::pow(std::abs(xi), p - 1.0);
}

inline void finalize(OptimalityCertificate& cert, double tolerance) {
  cert.tolerance = tolerance;
  cert.residual = cert.detail.size() > 0 ? cert.detail.cwiseAbs().maxCoeff() : 0.0;
  cert.verdict = cert.residual <= tolerance;
}

// Normal-cone element of a structured set at x restricted to the support:
// simplex contributes nu on every support index, boxes absorb one-sided slack
// at active bounds, nonnegativity contributes nothing on the support.
inline double structured_residual(double r, int i, double xi, const FeasibleSet& gamma,
                                  const MultiplierSet& mult) {
  switch (gamma.kind) {
    case FeasibleSet::Kind::Unconstrained:
    case FeasibleSet::Kind::Nonnegative:
      return r;
    case FeasibleSet::Kind::Simplex:
      return r + (mult.set_dual ? *mult.set_dual : 0.0);
    case FeasibleSet::Kind::Box: {
      const double tol = 1e-12 * (1.0 + std::abs(xi));
      if (xi <= gamma.lower[i] + tol) return std::max(-r, 0.0);
      if (xi >= gamma.upper[i] - tol) return std::max(r, 0.0);
      return r;
    }
    case FeasibleSet::Kind::GeneralSmooth:
      break;
  }
  return r;
}

// Least squares min ||A y - b|| with y_j >= 0 on the constrained index set,
// free elsewhere. Active-set method; sizes here are tiny.
inline Vector nnls(const Matrix& A, const Vector& b, const std::vector<bool>& constrained,
                   bool* rank_deficient = nullptr) {
  const int m = static_cast<int>(A.cols());
  std::vector<bool> passive(m, false);
  for (int j = 0; j < m; ++j) passive[j] = !constrained[j];
  Vector y = Vector::Zero(m);

  auto solve_passive = [&](Vector& out) {
    std::vector<int> idx;
    for (int j = 0; j < m; ++j)
      if (passive[j]) idx.push_back(j);
    out = Vector::Zero(m);
    if (idx.empty()) return;
    Matrix Ap(A.rows(), idx.size());
    for (size_t k = 0; k < idx.size(); ++k) Ap.col(static_cast<Eigen::Index>(k)) = A.col(idx[k]);
    Eigen::ColPivHouseholderQR<Matrix> qr(Ap);
    if (rank_deficient && qr.rank() < static_cast<Eigen::Index>(idx.size()))
      *rank_deficient = true;
    Vector sol = qr.solve(b);
    for (size_t k = 0; k < idx.size(); ++k) out[idx[k]] = sol[static_cast<Eigen::Index>(k)];
  };

  // seed with the unconstrained solve on the free columns
  solve_passive(y);

  for (int outer = 0; outer < 10 * m + 10; ++outer) {
    const Vector grad = A.transpose() * (b - A * y);
    int best = -1;
    double best_g = 1e-12 * (1.0 + grad.cwiseAbs().maxCoeff());
    for (int j = 0; j < m; ++j) {
      if (!passive[j] && grad[j] > best_g) {
        best_g = grad[j];
        best = j;
      }
    }
    if (best < 0) break;
    passive[best] = true;
    for (int inner = 0; inner < 10 * m + 10; ++inner) {
      Vector trial;
      solve_passive(trial);
      bool ok = true;
      double step = 1.0;
      for (int j = 0; j < m; ++j) {
        if (passive[j] && constrained[j] && trial[j] < 0.0) {
          ok = false;
          const double denom = y[j] - trial[j];
          if (denom > 0.0) step = std::min(step, y[j] / denom);
        }
      }
      if (ok) {
        y = trial;
        break;
      }
      y += step * (trial - y);
      for (int j = 0; j < m; ++j)
        if (passive[j] && constrained[j] && y[j] <= 1e-14) {
          y[j] = 0.0;
          passive[j] = false;
        }
    }
  }
  return y;
}

}  // namespace detail

/// Stationarity residual of the penalized problem at x with the supplied
/// multipliers, over the support of x. Complementary-slackness violations of
/// general constraints are appended to the detail vector. For p = 1 the zero
/// components contribute the distance of the residual to lambda [-1, 1].
inline OptimalityCertificate kkt_residual_p1(const Vector& x, const MultiplierSet& mult,
                                             const SmoothOracle& oracle, const LpRegularizer& reg,
                                             const FeasibleSet& constraints,
                                             double tolerance = 1e-6,
                                             double support_threshold = 0.0) {
  mult.validate();
  if (!constraints.contains(x, 1e-8)) throw std::invalid_argument("kkt_residual_p1: infeasible point");
  OptimalityCertificate cert;
  cert.condition = Condition::KktP1;
  cert.support = compute_support(x, support_threshold);
  cert.multipliers = mult;

  const Vector grad = oracle.gradient(x);
  std::vector<double> detail;
  for (int i : cert.support.nonzero_indices) {
    double r = grad[i] + reg.lambda * detail::lp_gradient_term(x[i], reg.p);
    if (constraints.kind == FeasibleSet::Kind::GeneralSmooth) {
      for (const auto& [j, y] : mult.equality) r += y * constraints.constraints[j].gradient(x)[i];
      for (const auto& [j, y] : mult.active_inequality)
        r += y * constraints.constraints[j].gradient(x)[i];
    } else {
      r = detail::structured_residual(r, i, x[i], constraints, mult);
    }
    detail.push_back(r);
  }
  if (reg.p == 1.0) {
    for (int i : cert.support.zero_indices) {
      double r = grad[i];
      if (constraints.kind == FeasibleSet::Kind::GeneralSmooth) {
        for (const auto& [j, y] : mult.equality) r += y * constraints.constraints[j].gradient(x)[i];
        for (const auto& [j, y] : mult.active_inequality)
          r += y * constraints.constraints[j].gradient(x)[i];
      } else {
        r = detail::structured_residual(r, i, x[i], constraints, mult);
      }
      detail.push_back(std::max(std::abs(r) - reg.lambda, 0.0));
    }
  }
  if (constraints.kind == FeasibleSet::Kind::GeneralSmooth) {
    for (const auto& [j, y] : mult.active_inequality)
      detail.push_back(y * constraints.constraints[j].value(x));
  }
  cert.detail = Eigen::Map<const Vector>(detail.data(), static_cast<Eigen::Index>(detail.size()));
  detail::finalize(cert, tolerance);
  return cert;
}

/// Stationarity residual for the ball-constrained problem at a boundary
/// point of the lp ball. Interior points are rejected; plain smooth KKT
/// applies there instead.
inline OptimalityCertificate kkt_residual_p2(const Vector& x, const MultiplierSet& mult,
                                             const SmoothOracle& oracle, const LpRegularizer& reg,
                                             const FeasibleSet& constraints,
                                             double tolerance = 1e-6,
                                             double support_threshold = 0.0) {
  mult.validate();
  const double value = phi(x, reg.p);
  const double btol = lp_ball_boundary_tolerance(reg.theta);
  if (value > reg.theta + btol) throw InfeasibleLpBall("kkt_residual_p2: point outside the ball");
  if (value < reg.theta - btol)
    throw std::invalid_argument(
        "kkt_residual_p2: interior point; use a plain smooth KKT check instead");
  if (!constraints.contains(x, 1e-8)) throw std::invalid_argument("kkt_residual_p2: infeasible point");

  OptimalityCertificate cert;
  cert.condition = Condition::KktP2;
  cert.support = compute_support(x, support_threshold);
  cert.multipliers = mult;
  cert.unconstrained_ball_case = (constraints.kind == FeasibleSet::Kind::Unconstrained);

  const Vector grad = oracle.gradient(x);
  const double y0 = mult.ball_multiplier ? *mult.ball_multiplier : 0.0;
  std::vector<double> detail;
  for (int i : cert.support.nonzero_indices) {
    double r = grad[i] + y0 * detail::lp_gradient_term(x[i], reg.p);
    if (constraints.kind == FeasibleSet::Kind::GeneralSmooth) {
      for (const auto& [j, y] : mult.equality) r += y * constraints.constraints[j].gradient(x)[i];
      for (const auto& [j, y] : mult.active_inequality)
        r += y * constraints.constraints[j].gradient(x)[i];
    } else {
      r = detail::structured_residual(r, i, x[i], constraints, mult);
    }
    detail.push_back(r);
  }
  if (constraints.kind == FeasibleSet::Kind::GeneralSmooth) {
    for (const auto& [j, y] : mult.active_inequality)
      detail.push_back(y * constraints.constraints[j].value(x));
  }
  cert.detail = Eigen::Map<const Vector>(detail.data(), static_cast<Eigen::Index>(detail.size()));
  detail::finalize(cert, tolerance);
  return cert;
}

/// Least-squares recovery of admissible multipliers minimizing the
/// stationarity residual on the support, for points whose producer did not
/// expose duals.
inline MultiplierSet fit_multipliers(const Vector& x, const SmoothOracle& oracle,
                                     const LpRegularizer& reg, const FeasibleSet& constraints,
                                     ProblemKind problem_kind, double activity_tol = 1e-8,
                                     double support_threshold = 0.0) {
  const Support supp = compute_support(x, support_threshold);
  if (supp.nonzero_indices.empty())
    throw std::invalid_argument("fit_multipliers: empty support");
  const Vector grad = oracle.gradient(x);
  const int ns = static_cast<int>(supp.nonzero_indices.size());

  Vector b(ns);
  for (int k = 0; k < ns; ++k) {
    const int i = supp.nonzero_indices[k];
    b[k] = -grad[i];
    if (problem_kind == ProblemKind::Penalized)
      b[k] -= reg.lambda * detail::lp_gradient_term(x[i], reg.p);
  }

  const bool fit_ball = (problem_kind == ProblemKind::BallConstrained);
  Vector ball_col(ns);
  if (fit_ball)
    for (int k = 0; k < ns; ++k)
      ball_col[k] = detail::lp_gradient_term(x[supp.nonzero_indices[k]], reg.p);

  MultiplierSet mult;
  switch (constraints.kind) {
    case FeasibleSet::Kind::Unconstrained:
    case FeasibleSet::Kind::Nonnegative:
    case FeasibleSet::Kind::Box:
      if (fit_ball) {
        const double denom = ball_col.squaredNorm();
        mult.ball_multiplier = denom > 0.0 ? std::max(ball_col.dot(b) / denom, 0.0) : 0.0;
      }
      break;  // nothing else to fit on the support
    case FeasibleSet::Kind::Simplex:
      if (fit_ball) {
        Matrix A(ns, 2);
        A.col(0) = ball_col;
        A.col(1) = Vector::Ones(ns);
        const Vector y = detail::nnls(A, b, {true, false}, &mult.rank_deficient);
        mult.ball_multiplier = y[0];
        mult.set_dual = y[1];
      } else {
        mult.set_dual = b.mean();  // least squares over nu: residual_k = -b_k + nu
      }
      break;
    case FeasibleSet::Kind::GeneralSmooth: {
      std::vector<int> cols;
      std::vector<bool> constrained;
      for (size_t j = 0; j < constraints.constraints.size(); ++j) {
        const auto& c = constraints.constraints[j];
        const bool active =
            c.kind == ConstraintKind::Equality || std::abs(c.value(x)) <= activity_tol;
        if (active) {
          cols.push_back(static_cast<int>(j));
          constrained.push_back(c.kind == ConstraintKind::Inequality);
        }
      }
      const bool fit_ball = (problem_kind == ProblemKind::BallConstrained);
      const int ncol = static_cast<int>(cols.size()) + (fit_ball ? 1 : 0);
      if (ncol == 0) break;
      Matrix A(ns, ncol);
      for (size_t c = 0; c < cols.size(); ++c) {
        const Vector g = constraints.constraints[cols[c]].gradient(x);
        for (int k = 0; k < ns; ++k) A(k, static_cast<Eigen::Index>(c)) = g[supp.nonzero_indices[k]];
      }
      if (fit_ball) {
        for (int k = 0; k < ns; ++k)
          A(k, ncol - 1) = detail::lp_gradient_term(x[supp.nonzero_indices[k]], reg.p);
        constrained.push_back(true);
      }
      const Vector y = detail::nnls(A, b, constrained, &mult.rank_deficient);
      for (size_t c = 0; c < cols.size(); ++c) {
        const auto& oc = constraints.constraints[cols[c]];
        if (oc.kind == ConstraintKind::Equality)
          mult.equality[cols[c]] = y[static_cast<Eigen::Index>(c)];
        else
          mult.active_inequality[cols[c]] = y[static_cast<Eigen::Index>(c)];
      }
      if (fit_ball) mult.ball_multiplier = y[ncol - 1];
      break;
    }
  }
  return mult;
}

struct AkktTrajectory {
  std::vector<double> residuals;
  bool pass = false;
  bool vacuous = false;  // empty limit support
  double tolerance = 0.0;
};

/// Residuals of the KKT system restricted to the limit's support, evaluated
/// along the iterate/multiplier sequence. Verdict: max over the last 10
/// residuals below the tolerance.
inline AkktTrajectory akkt_certify(const std::vector<Vector>& iterates,
                                   const std::vector<MultiplierSet>& multipliers,
                                   const Vector& limit, const SmoothOracle& oracle,
                                   const LpRegularizer& reg, const FeasibleSet& constraints,
                                   ProblemKind problem_kind, double tolerance = 1e-6,
                                   double support_threshold = 0.0) {
  if (iterates.size() != multipliers.size())
    throw std::invalid_argument("akkt_certify: iterate/multiplier length mismatch");
  if (iterates.empty()) throw std::invalid_argument("akkt_certify: empty sequence");
  if ((iterates.back() - limit).norm() >= 1e-6)
    throw std::invalid_argument("akkt_certify: sequence has not converged to the limit");

  AkktTrajectory traj;
  traj.tolerance = tolerance;
  const Support limit_support = compute_support(limit, support_threshold);
  if (limit_support.nonzero_indices.empty()) {
    traj.pass = true;
    traj.vacuous = true;
    return traj;
  }

  for (size_t k = 0; k < iterates.size(); ++k) {
    const Vector& xk = iterates[k];
    const MultiplierSet& mult = multipliers[k];
    const Vector grad = oracle.gradient(xk);
    const double y0 = mult.ball_multiplier ? *mult.ball_multiplier : 0.0;
    double worst = 0.0;
    for (int i : limit_support.nonzero_indices) {
      if (xk[i] == 0.0) {
        worst = std::numeric_limits<double>::infinity();
        break;
      }
      double r = grad[i];
      if (problem_kind == ProblemKind::Penalized)
        r += reg.lambda * detail::lp_gradient_term(xk[i], reg.p);
      else
        r += y0 * detail::lp_gradient_term(xk[i], reg.p);
      if (constraints.kind == FeasibleSet::Kind::GeneralSmooth) {
        for (const auto& [j, y] : mult.equality) r += y * constraints.constraints[j].gradient(xk)[i];
        for (const auto& [j, y] : mult.active_inequality)
          r += y * constraints.constraints[j].gradient(xk)[i];
      } else {
        r = detail::structured_residual(r, i, xk[i], constraints, mult);
      }
      worst = std::max(worst, std::abs(r));
    }
    traj.residuals.push_back(worst);
  }

  const size_t tail = std::min<size_t>(10, traj.residuals.size());
  double tail_max = 0.0;
  for (size_t k = traj.residuals.size() - tail; k < traj.residuals.size(); ++k)
    tail_max = std::max(tail_max, traj.residuals[k]);
  traj.pass = tail_max < tolerance;
  return traj;
}

struct EmfcqResult {
  bool pass = false;
  bool linearly_independent = false;
  double sigma = 0.0;          // optimal slack of the phase-I program
  std::optional<Vector> witness;  // direction d on the support subspace
  std::string diagnostic;
};

/// Extended MFCQ: linear independence of the support-restricted active
/// gradients plus existence of a direction with zero equality products and
/// strictly negative products on the active inequalities (and on the ball
/// row for the ball-constrained problem).
inline EmfcqResult emfcq_check(const Vector& x, const std::vector<ConstraintOracle>& constraints,
                               const LpRegularizer& reg, ProblemKind problem_kind,
                               double activity_tol = 1e-8, double support_threshold = 0.0) {
  EmfcqResult result;
  const Support supp = compute_support(x, support_threshold);
  const int ns = static_cast<int>(supp.nonzero_indices.size());
  if (ns == 0) {
    result.diagnostic = "empty support: EMFCQ is defined on the support subspace";
    return result;
  }

  std::vector<Vector> eq_rows, ineq_rows;
  for (const auto& c : constraints) {
    const double v = c.value(x);
    const bool active = c.kind == ConstraintKind::Equality || std::abs(v) <= activity_tol;
    if (!active) continue;
    const Vector g = c.gradient(x);
    Vector row(ns);
    for (int k = 0; k < ns; ++k) row[k] = g[supp.nonzero_indices[k]];
    (c.kind == ConstraintKind::Equality ? eq_rows : ineq_rows).push_back(row);
  }
  if (problem_kind == ProblemKind::BallConstrained) {
    Vector row(ns);
    for (int k = 0; k < ns; ++k)
      row[k] = detail::lp_gradient_term(x[supp.nonzero_indices[k]], reg.p);
    ineq_rows.push_back(row);
  }

  const int rows = static_cast<int>(eq_rows.size() + ineq_rows.size());
  if (rows == 0) {
    result.linearly_independent = true;
    result.pass = true;
    result.witness = Vector::Zero(ns);
    return result;
  }
  Matrix G(rows, ns);
  for (size_t r = 0; r < eq_rows.size(); ++r) G.row(static_cast<Eigen::Index>(r)) = eq_rows[r];
  for (size_t r = 0; r < ineq_rows.size(); ++r)
    G.row(static_cast<Eigen::Index>(eq_rows.size() + r)) = ineq_rows[r];

  Eigen::JacobiSVD<Matrix> svd(G);
  const double smax = svd.singularValues()(0);
  const double smin = svd.singularValues()(svd.singularValues().size() - 1);
  result.linearly_independent = rows <= ns && smin > 1e-10 * std::max(smax, 1.0);
  if (!result.linearly_independent) {
    result.diagnostic = "support-restricted active gradients are linearly dependent";
    return result;
  }
  if (ineq_rows.empty()) {
    // only equalities: d = 0 satisfies the direction condition
    result.pass = true;
    result.sigma = std::numeric_limits<double>::infinity();
    result.witness = Vector::Zero(ns);
    return result;
  }

  // phase-I program: max sigma s.t. <a_j, d> = 0 (equalities),
  // <a_j, d> <= -sigma (inequalities), |d_i| <= 1, sigma >= 0.
  // variables: d+ (ns), d- (ns), sigma, slacks u,v (2 ns), t (#ineq)
  const int ni = static_cast<int>(ineq_rows.size());
  const int ne = static_cast<int>(eq_rows.size());
  const int nvar = 2 * ns + 1 + 2 * ns + ni;
  const int nrow = 2 * ns + ne + ni;
  Matrix A = Matrix::Zero(nrow, nvar);
  Vector bb = Vector::Zero(nrow);
  Vector c = Vector::Zero(nvar);
  c[2 * ns] = -1.0;  // maximize sigma
  int r = 0;
  for (int i = 0; i < ns; ++i, ++r) {  // d+_i + u_i = 1
    A(r, i) = 1.0;
    A(r, 2 * ns + 1 + i) = 1.0;
    bb[r] = 1.0;
  }
  for (int i = 0; i < ns; ++i, ++r) {  // d-_i + v_i = 1
    A(r, ns + i) = 1.0;
    A(r, 2 * ns + 1 + ns + i) = 1.0;
    bb[r] = 1.0;
  }
  for (int j = 0; j < ne; ++j, ++r) {
    for (int i = 0; i < ns; ++i) {
      A(r, i) = eq_rows[j][i];
      A(r, ns + i) = -eq_rows[j][i];
    }
  }
  for (int j = 0; j < ni; ++j, ++r) {
    for (int i = 0; i < ns; ++i) {
      A(r, i) = ineq_rows[j][i];
      A(r, ns + i) = -ineq_rows[j][i];
    }
    A(r, 2 * ns) = 1.0;
    A(r, 2 * ns + 1 + 2 * ns + j) = 1.0;
  }
  const LpResult lp = linprog(c, A, bb);
  if (lp.status != LpStatus::Optimal) {
    result.diagnostic = "phase-I program did not solve";
    return result;
  }
  result.sigma = lp.x[2 * ns];
  result.pass = result.sigma > 1e-10;
  if (result.pass) {
    Vector d(ns);
    for (int i = 0; i < ns; ++i) d[i] = lp.x[i] - lp.x[ns + i];
    result.witness = d;
  }
  return result;
}

/// Searches for a nonzero horizon subgradient v (supported on the zero set)
/// with -v in the normal cone of Gamma at x. A witness invalidates the plain
/// stationarity-based necessary condition at x.
inline std::optional<Vector> horizon_obstruction(const Vector& x, const LpRegularizer& reg,
                                                 const FeasibleSet& constraints,
                                                 double activity_tol = 1e-8,
                                                 double support_threshold = 0.0) {
  (void)reg;
  if (!constraints.contains(x, 1e-8))
    throw std::invalid_argument("horizon_obstruction: infeasible point");
  const Support supp = compute_support(x, support_threshold);
  if (supp.zero_indices.empty()) return std::nullopt;
  const int n = static_cast<int>(x.size());

  switch (constraints.kind) {
    case FeasibleSet::Kind::Unconstrained:
      return std::nullopt;  // N_Gamma = {0}
    case FeasibleSet::Kind::Nonnegative:
    case FeasibleSet::Kind::Simplex: {
      // every zero sits on an active lower bound: v = e_Z works
      Vector v = Vector::Zero(n);
      for (int i : supp.zero_indices) v[i] = 1.0;
      return v;
    }
    case FeasibleSet::Kind::Box: {
      Vector v = Vector::Zero(n);
      bool any = false;
      for (int i : supp.zero_indices) {
        if (constraints.lower[i] == 0.0) {
          v[i] = 1.0;
          any = true;
        } else if (constraints.upper[i] == 0.0) {
          v[i] = -1.0;
          any = true;
        }
      }
      return any ? std::optional<Vector>(v) : std::nullopt;
    }
    case FeasibleSet::Kind::GeneralSmooth:
      break;
  }

  // general case: find y (y_j >= 0 on active inequalities) with
  // sum_j y_j grad_N f_j = 0 and sum_j y_j grad_Z f_j != 0; then
  // v = -sum_j y_j grad f_j restricted to the zero set.
  std::vector<int> active;
  std::vector<bool> is_ineq;
  for (size_t j = 0; j < constraints.constraints.size(); ++j) {
    const auto& cst = constraints.constraints[j];
    const bool a = cst.kind == ConstraintKind::Equality || std::abs(cst.value(x)) <= activity_tol;
    if (a) {
      active.push_back(static_cast<int>(j));
      is_ineq.push_back(cst.kind == ConstraintKind::Inequality);
    }
  }
  if (active.empty()) return std::nullopt;
  const int m = static_cast<int>(active.size());
  std::vector<Vector> grads;
  for (int j : active) grads.push_back(constraints.constraints[j].gradient(x));

  const int ns = static_cast<int>(supp.nonzero_indices.size());
  // column layout: y+_j for every active constraint, y-_j only for equalities
  // (inequality multipliers are sign-constrained by omitting their y- column)
  std::vector<std::pair<int, double>> columns;  // (constraint index, sign)
  for (int j = 0; j < m; ++j) columns.emplace_back(j, 1.0);
  for (int j = 0; j < m; ++j)
    if (!is_ineq[j]) columns.emplace_back(j, -1.0);
  const int ncol = static_cast<int>(columns.size());

  for (int zi : supp.zero_indices) {
    for (double sgn : {1.0, -1.0}) {
      // max sgn * sum_j y_j grad_zi f_j  s.t. support rows = 0, sum |y| <= 1
      const int nvar = ncol + 1;  // + slack for the normalization row
      const int nrow = ns + 1;
      Matrix A = Matrix::Zero(nrow, nvar);
      Vector bb = Vector::Zero(nrow);
      Vector c = Vector::Zero(nvar);
      for (int cidx = 0; cidx < ncol; ++cidx) {
        const auto [j, s] = columns[cidx];
        for (int k = 0; k < ns; ++k) A(k, cidx) = s * grads[j][supp.nonzero_indices[k]];
        c[cidx] = -sgn * s * grads[j][zi];
        A(ns, cidx) = 1.0;
      }
      A(ns, ncol) = 1.0;
      bb[ns] = 1.0;
      LpResult lp;
      try {
        lp = linprog(c, A, bb);
      } catch (const std::exception&) {
        continue;
      }
      if (lp.status != LpStatus::Optimal || -lp.objective <= 1e-9) continue;
      Vector y = Vector::Zero(m);
      for (int cidx = 0; cidx < ncol; ++cidx) y[columns[cidx].first] += columns[cidx].second * lp.x[cidx];
      Vector v = Vector::Zero(n);
      for (int i : supp.zero_indices) {
        double s = 0.0;
        for (int j = 0; j < m; ++j) s += y[j] * grads[j][i];
        v[i] = -s;
      }
      if (v.lpNorm<Eigen::Infinity>() > 1e-9) return v;
    }
  }
  return std::nullopt;
}

/// Portfolio optimality metric: sum over the support of
/// |(R x)_i - c_i + lambda p x_i^{p-1} + nu|.
inline double alpha_residual(const Vector& x, double nu, const Matrix& R, const Vector& c,
                             const LpRegularizer& reg) {
  if ((x.array() < 0.0).any())
    throw std::invalid_argument("alpha_residual: negative components");
  const Vector Rx = R * x;
  double s = 0.0;
  for (int i = 0; i < x.size(); ++i) {
    if (x[i] == 0.0) continue;
    s += std::abs(Rx[i] - c[i] + reg.lambda * reg.p * std::pow(x[i], reg.p - 1.0) + nu);
  }
  return s;
}

/// Line-oriented certificate record with 17-significant-digit decimals, for
/// golden-file testing.
inline std::string serialize_certificate(const OptimalityCertificate& cert) {
  char buf[64];
  auto num = [&buf](double v) {
    std::snprintf(buf, sizeof(buf), "%.16e", v);
    return std::string(buf);
  };
  std::ostringstream out;
  out << condition_name(cert.condition) << " residual=" << num(cert.residual)
      << " tolerance=" << num(cert.tolerance) << " verdict=" << (cert.verdict ? "pass" : "fail");
  if (cert.multipliers.set_dual) out << " nu=" << num(*cert.multipliers.set_dual);
  if (cert.multipliers.ball_multiplier) out << " y0=" << num(*cert.multipliers.ball_multiplier);
  for (const auto& [j, y] : cert.multipliers.equality) out << " ye[" << j << "]=" << num(y);
  for (const auto& [j, y] : cert.multipliers.active_inequality)
    out << " yi[" << j << "]=" << num(y);
  out << "\n";
  return out.str();
}

}  // namespace lpopt
