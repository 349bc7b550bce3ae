#pragma once

#include <Eigen/Core>

namespace fmplan {

// Small dense linear program in the form
//   maximize c^T x  subject to  A_eq x = b_eq,  A_ub x <= b_ub,  x >= 0.
// Sized for contact-stability instances (tens of variables); dense tableau
// simplex with Bland's rule.
struct LpProblem {
  Eigen::VectorXd c;
  Eigen::MatrixXd A_eq;
  Eigen::VectorXd b_eq;
  Eigen::MatrixXd A_ub;
  Eigen::VectorXd b_ub;
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  Eigen::VectorXd x;
  double objective = 0.0;
  // Farkas certificate when infeasible: y_eq (free sign) and y_ub (<= 0) with
  //   y_eq^T A_eq + y_ub^T A_ub <= 0 (componentwise) and
  //   y_eq^T b_eq + y_ub^T b_ub > 0.
  Eigen::VectorXd farkas_eq;
  Eigen::VectorXd farkas_ub;
};

LpResult lp_solve(const LpProblem& p, double tol = 1e-9);

}  // namespace fmplan
