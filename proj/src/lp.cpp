#include "fmplan/lp.hpp"

#include <Eigen/Dense>
#include <vector>

#include "fmplan/errors.hpp"

namespace fmplan {

namespace {

// Tableau simplex, maximization, Bland's rule. Basis holds column indices.
// Returns false when unbounded.
bool run_simplex(Eigen::MatrixXd& T, std::vector<int>& basis, int ncols, double tol) {
  const int m = static_cast<int>(T.rows()) - 1;
  const int obj = m;  // objective row index
  for (int iter = 0; iter < 20000; ++iter) {
    int enter = -1;
    for (int j = 0; j < ncols; ++j) {
      if (T(obj, j) > tol) { enter = j; break; }  // Bland: smallest index
    }
    if (enter < 0) return true;  // optimal
    int leave = -1;
    double best_ratio = 0;
    for (int i = 0; i < m; ++i) {
      if (T(i, enter) > tol) {
        double ratio = T(i, ncols) / T(i, enter);
        if (leave < 0 || ratio < best_ratio - tol ||
            (ratio < best_ratio + tol && basis[static_cast<size_t>(i)] < basis[static_cast<size_t>(leave)])) {
          leave = i;
          best_ratio = ratio;
        }
      }
    }
    if (leave < 0) return false;  // unbounded
    double piv = T(leave, enter);
    T.row(leave) /= piv;
    for (int i = 0; i <= m; ++i) {
      if (i == leave) continue;
      double f = T(i, enter);
      if (f != 0.0) T.row(i) -= f * T.row(leave);
    }
    basis[static_cast<size_t>(leave)] = enter;
  }
  throw SolverError("lp_solve: simplex iteration limit exceeded");
}

}  // namespace

LpResult lp_solve(const LpProblem& p, double tol) {
  const int n = static_cast<int>(p.c.size());
  const int me = static_cast<int>(p.b_eq.size());
  const int mu = static_cast<int>(p.b_ub.size());
  const int m = me + mu;
  const int nslack = mu;
  const int nart = m;
  const int ncols = n + nslack + nart;

  // Constraint block in standard form [A_eq 0; A_ub I][x; s] = [b_eq; b_ub],
  // rows flipped so the right-hand side is nonnegative.
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m, n + nslack);
  Eigen::VectorXd b(m);
  Eigen::VectorXd flip = Eigen::VectorXd::Ones(m);
  if (me) {
    A.block(0, 0, me, n) = p.A_eq;
    b.head(me) = p.b_eq;
  }
  if (mu) {
    A.block(me, 0, mu, n) = p.A_ub;
    A.block(me, n, mu, mu).setIdentity();
    b.tail(mu) = p.b_ub;
  }
  for (int i = 0; i < m; ++i) {
    if (b(i) < 0) {
      A.row(i) *= -1;
      b(i) *= -1;
      flip(i) = -1;
    }
  }

  // Phase 1: maximize -sum(artificials); artificial basis.
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m + 1, ncols + 1);
  T.block(0, 0, m, n + nslack) = A;
  T.block(0, n + nslack, m, nart).setIdentity();
  T.col(ncols).head(m) = b;
  std::vector<int> basis(static_cast<size_t>(m));
  for (int i = 0; i < m; ++i) basis[static_cast<size_t>(i)] = n + nslack + i;
  // objective row: -sum of artificial columns, expressed over the current basis
  for (int j = 0; j < ncols + 1; ++j) {
    double s = 0;
    for (int i = 0; i < m; ++i) s += T(i, j);
    double cj = (j >= n + nslack && j < ncols) ? -1.0 : 0.0;
    T(m, j) = cj + s;  // reduced cost with c_B = -1 on artificials
  }
  for (int j = n + nslack; j < ncols; ++j) T(m, j) = 0.0;

  if (!run_simplex(T, basis, ncols, tol)) throw SolverError("lp_solve: phase 1 unbounded");
  double phase1 = T(m, ncols);

  LpResult res;
  if (phase1 > 1e4 * tol) {
    // Infeasible: Farkas certificate y = B^{-T} c_B from the phase-1 basis,
    // mapped back through the row flips.
    res.status = LpStatus::Infeasible;
    Eigen::MatrixXd B(m, m);
    Eigen::VectorXd cB(m);
    for (int i = 0; i < m; ++i) {
      int col = basis[static_cast<size_t>(i)];
      if (col < n + nslack) {
        B.col(i) = A.col(col);
        cB(i) = 0.0;
      } else {
        B.col(i) = Eigen::VectorXd::Unit(m, col - (n + nslack));
        cB(i) = -1.0;
      }
    }
    Eigen::VectorXd y = B.transpose().fullPivLu().solve(cB);
    // y solves max b^T(-y) ... normalize sign so the certificate reads
    // y^T A <= 0, y^T b > 0 on the unflipped system.
    Eigen::VectorXd cert = -y;
    for (int i = 0; i < m; ++i) cert(i) *= flip(i);
    res.farkas_eq = cert.head(me);
    res.farkas_ub = cert.tail(mu);
    return res;
  }

  // Drive any degenerate artificial out of the basis (or detect redundant rows).
  for (int i = 0; i < m; ++i) {
    if (basis[static_cast<size_t>(i)] >= n + nslack) {
      int enter = -1;
      for (int j = 0; j < n + nslack; ++j) {
        if (std::abs(T(i, j)) > tol) { enter = j; break; }
      }
      if (enter >= 0) {
        double piv = T(i, enter);
        T.row(i) /= piv;
        for (int r = 0; r <= m; ++r) {
          if (r == i) continue;
          double f = T(r, enter);
          if (f != 0.0) T.row(r) -= f * T.row(i);
        }
        basis[static_cast<size_t>(i)] = enter;
      }
      // else: redundant zero row; harmless to leave the artificial basic at 0.
    }
  }

  // Phase 2 objective over structural+slack columns only.
  for (int j = 0; j <= ncols; ++j) T(m, j) = 0.0;
  for (int j = 0; j < n; ++j) T(m, j) = p.c(j);
  for (int i = 0; i < m; ++i) {
    int col = basis[static_cast<size_t>(i)];
    double ci = (col < n) ? p.c(col) : 0.0;
    if (ci != 0.0) T.row(m) -= ci * T.row(i);
  }
  // Forbid artificials from re-entering.
  for (int j = n + nslack; j < ncols; ++j) T(m, j) = -1.0;

  if (!run_simplex(T, basis, n + nslack, tol)) {
    res.status = LpStatus::Unbounded;
    return res;
  }

  res.status = LpStatus::Optimal;
  res.x = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < m; ++i) {
    int col = basis[static_cast<size_t>(i)];
    if (col < n) res.x(col) = T(i, ncols);
  }
  res.objective = p.c.dot(res.x);
  return res;
}

}  // namespace fmplan
