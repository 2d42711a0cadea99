#pragma once

// Self-contained dense two-phase simplex method for the small feasibility
// programs behind the constraint-qualification checks. Standard form:
//   min c^T x  s.t.  A x = b,  x >= 0
// Bland's rule throughout, so no cycling on the tiny degenerate instances.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "lpopt/types.hpp"

namespace lpopt {

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  Vector x;
  double objective = 0.0;
};

namespace detail {

inline int simplex_iterate(Matrix& T, std::vector<int>& basis, int m, int n) {
  // T is (m+1) x (n+1); last row is reduced costs, last column the rhs.
  const double tol = 1e-11;
  for (int iter = 0; iter < 20000; ++iter) {
    int enter = -1;
    for (int j = 0; j < n; ++j) {
      if (T(m, j) < -tol) {
        enter = j;  // Bland: smallest index
        break;
      }
    }
    if (enter < 0) return 0;  // optimal
    int leave = -1;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (int i = 0; i < m; ++i) {
      if (T(i, enter) > tol) {
        const double ratio = T(i, n) / T(i, enter);
        if (ratio < best_ratio - tol ||
            (ratio < best_ratio + tol && (leave < 0 || basis[i] < basis[leave]))) {
          best_ratio = ratio;
          leave = i;
        }
      }
    }
    if (leave < 0) return 1;  // unbounded
    // pivot on (leave, enter)
    T.row(leave) /= T(leave, enter);
    for (int i = 0; i <= m; ++i) {
      if (i == leave) continue;
      const double f = T(i, enter);
      if (f != 0.0) T.row(i) -= f * T.row(leave);
    }
    basis[leave] = enter;
  }
  throw std::runtime_error("simplex: iteration limit exceeded");
}

}  // namespace detail

inline LpResult linprog(const Vector& c, const Matrix& A, const Vector& b) {
  const int m = static_cast<int>(A.rows());
  const int n = static_cast<int>(A.cols());
  if (c.size() != n || b.size() != m) throw std::invalid_argument("linprog: dimension mismatch");

  // phase 1: minimize sum of artificials
  Matrix A1 = A;
  Vector b1 = b;
  for (int i = 0; i < m; ++i) {
    if (b1[i] < 0.0) {
      A1.row(i) *= -1.0;
      b1[i] *= -1.0;
    }
  }
  Matrix T(m + 1, n + m + 1);
  T.setZero();
  T.block(0, 0, m, n) = A1;
  T.block(0, n, m, m) = Matrix::Identity(m, m);
  T.col(n + m).head(m) = b1;
  std::vector<int> basis(m);
  for (int i = 0; i < m; ++i) basis[i] = n + i;
  // reduced costs for phase-1 objective
  for (int j = 0; j < n; ++j) T(m, j) = -A1.col(j).sum();
  T(m, n + m) = -b1.sum();

  if (detail::simplex_iterate(T, basis, m, n + m) != 0)
    throw std::runtime_error("linprog: phase-1 unbounded (should be impossible)");
  if (T(m, n + m) < -1e-8) return {LpStatus::Infeasible, Vector(), 0.0};

  // drive artificials out of the basis where possible
  for (int i = 0; i < m; ++i) {
    if (basis[i] >= n) {
      int enter = -1;
      for (int j = 0; j < n; ++j) {
        if (std::abs(T(i, j)) > 1e-9) {
          enter = j;
          break;
        }
      }
      if (enter >= 0) {
        T.row(i) /= T(i, enter);
        for (int k = 0; k <= m; ++k) {
          if (k == i) continue;
          const double f = T(k, enter);
          if (f != 0.0) T.row(k) -= f * T.row(i);
        }
        basis[i] = enter;
      }
      // else: redundant row, its artificial stays at zero
    }
  }

  // phase 2: restrict to original columns and install the real objective
  Matrix T2(m + 1, n + 1);
  T2.block(0, 0, m, n) = T.block(0, 0, m, n);
  T2.col(n).head(m) = T.col(n + m).head(m);
  T2.row(m).setZero();
  for (int j = 0; j < n; ++j) T2(m, j) = c[j];
  T2(m, n) = 0.0;
  for (int i = 0; i < m; ++i) {
    if (basis[i] < n && T2(m, basis[i]) != 0.0) {
      const double f = T2(m, basis[i]);
      T2.row(m) -= f * T2.row(i);
    }
  }
  const int code = detail::simplex_iterate(T2, basis, m, n);
  if (code == 1) return {LpStatus::Unbounded, Vector(), 0.0};

  LpResult res;
  res.status = LpStatus::Optimal;
  res.x = Vector::Zero(n);
  for (int i = 0; i < m; ++i)
    if (basis[i] < n) res.x[basis[i]] = T2(i, n);
  res.objective = c.dot(res.x);
  return res;
}

}  // namespace lpopt
