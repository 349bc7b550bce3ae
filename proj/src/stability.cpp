#include "fmplan/stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fmplan/lp.hpp"

namespace fmplan {

namespace {
constexpr double kStrictTol = 1e-9;

void check_frame(const std::string& expected, const Wrench& w, const char* who) {
  if (!expected.empty() && !w.frame.empty() && expected != w.frame) {
    throw FrameError(std::string(who) + ": wrench in frame '" + w.frame + "', joint expects '" + expected + "'");
  }
}
}  // namespace

StabilityResult check_circular_patch(const CircularPatchJoint& j, const Wrench& w) {
  if (j.mu <= 0 || j.normal_force <= 0 || j.radius <= 0) {
    throw ModelError("check_circular_patch: mu, normal force and radius must be strictly positive");
  }
  check_frame(j.frame, w, "check_circular_patch");
  double fn = j.normal_force * j.mu;
  double tn = j.normal_force * j.torsion_radius() * j.mu;
  double lhs = (w.force.x() * w.force.x() + w.force.y() * w.force.y()) / (fn * fn) +
               (w.torque.z() * w.torque.z()) / (tn * tn);
  StabilityResult r;
  r.margin = 1.0 - lhs;
  r.stable = r.margin > kStrictTol;
  return r;
}

namespace {

// Generator matrix restricted to the frictionally resisted subspace
// (f_x, f_y, tau_z). Columns are grouped 4 per corner.
Eigen::MatrixXd polygon_generators(const PolygonPatchJoint& j) {
  const int nc = static_cast<int>(j.corners.size());
  Eigen::MatrixXd V(3, 4 * nc);
  const double d[4][2] = {{j.mu, 0}, {-j.mu, 0}, {0, j.mu}, {0, -j.mu}};
  for (int i = 0; i < nc; ++i) {
    const Vec3& c = j.corners[static_cast<size_t>(i)];
    for (int k = 0; k < 4; ++k) {
      Vec3 f(d[k][0], d[k][1], 1.0);
      Vec3 tau = c.cross(f);
      V(0, 4 * i + k) = f.x();
      V(1, 4 * i + k) = f.y();
      V(2, 4 * i + k) = tau.z();
    }
  }
  return V;
}

void validate_polygon(const PolygonPatchJoint& j) {
  if (j.corners.size() < 3) throw ModelError("check_polygon_patch: need at least 3 corners");
  if (j.corner_normals.size() != j.corners.size()) {
    throw ModelError("check_polygon_patch: one normal force per corner required");
  }
  if (j.mu <= 0) throw ModelError("check_polygon_patch: mu must be positive");
  double total = 0;
  for (double n : j.corner_normals) {
    if (n < -kStrictTol) throw ModelError("check_polygon_patch: negative corner normal force");
    total += n;
  }
  if (total <= 0) throw ModelError("check_polygon_patch: total normal force must be positive");
  for (const Vec3& c : j.corners) {
    if (std::abs(c.z()) > 1e-6) throw ModelError("check_polygon_patch: corners must be coplanar in the contact plane");
  }
  // Collinear corners span no area; the torsional column degenerates.
  double area2 = 0;
  for (size_t i = 1; i + 1 < j.corners.size(); ++i) {
    Vec3 u = j.corners[i] - j.corners[0];
    Vec3 v = j.corners[i + 1] - j.corners[0];
    area2 += std::abs(u.x() * v.y() - u.y() * v.x());
  }
  if (area2 < 1e-12) throw ModelError("check_polygon_patch: degenerate (collinear) patch");
}

}  // namespace

PolygonCheckDetail check_polygon_patch_detail(const PolygonPatchJoint& j, const Wrench& w) {
  validate_polygon(j);
  check_frame(j.frame, w, "check_polygon_patch");
  const int nc = static_cast<int>(j.corners.size());
  PolygonCheckDetail out;
  out.generators = polygon_generators(j);
  // The contact must supply the balancing wrench in the friction subspace.
  out.resist = Eigen::Vector3d(-w.force.x(), -w.force.y(), -w.torque.z());

  const double wn = out.resist.norm();
  if (wn < 1e-12) {
    out.result.stable = true;
    out.result.margin = std::numeric_limits<double>::infinity();
    out.combo = Eigen::VectorXd::Zero(4 * nc);
    return out;
  }

  // max alpha s.t. V lambda - alpha*resist = 0, per-corner sum(lambda) <= N_i,
  // lambda >= 0, alpha >= 0. Fully feasible (lambda = 0, alpha = 0), so an
  // Infeasible status is a numerical failure, not instability.
  const int nv = 4 * nc + 1;  // lambdas then alpha
  LpProblem p;
  p.c = Eigen::VectorXd::Zero(nv);
  p.c(nv - 1) = 1.0;
  p.A_eq = Eigen::MatrixXd::Zero(3, nv);
  p.A_eq.block(0, 0, 3, 4 * nc) = out.generators;
  p.A_eq.col(nv - 1) = -out.resist;
  p.b_eq = Eigen::VectorXd::Zero(3);
  p.A_ub = Eigen::MatrixXd::Zero(nc, nv);
  p.b_ub = Eigen::VectorXd(nc);
  for (int i = 0; i < nc; ++i) {
    for (int k = 0; k < 4; ++k) p.A_ub(i, 4 * i + k) = 1.0;
    p.b_ub(i) = j.corner_normals[static_cast<size_t>(i)];
  }
  LpResult scale = lp_solve(p);
  if (scale.status == LpStatus::Infeasible) throw SolverError("check_polygon_patch: scale LP infeasible");

  double alpha = (scale.status == LpStatus::Unbounded) ? std::numeric_limits<double>::infinity()
                                                       : scale.objective;
  out.result.margin = std::max(alpha - 1.0, -1.0);
  out.result.stable = alpha >= 1.0 - 1e-8;  // hull membership: boundary counts
  if (out.result.stable && scale.status == LpStatus::Optimal) {
    out.combo = scale.x.head(4 * nc) / std::max(alpha, 1e-300);
  }
  if (!out.result.stable) {
    // Farkas separator for the unscaled membership system
    // {V lambda = resist, caps, lambda >= 0}.
    LpProblem fp;
    fp.c = Eigen::VectorXd::Zero(4 * nc);
    fp.A_eq = out.generators;
    fp.b_eq = out.resist;
    fp.A_ub = p.A_ub.leftCols(4 * nc);
    fp.b_ub = p.b_ub;
    LpResult feas = lp_solve(fp);
    if (feas.status == LpStatus::Infeasible) {
      out.farkas_eq = feas.farkas_eq;
      out.farkas_ub = feas.farkas_ub;
    }
  }
  return out;
}

StabilityResult check_polygon_patch(const PolygonPatchJoint& j, const Wrench& w) {
  return check_polygon_patch_detail(j, w).result;
}

StabilityResult check_robot_joints(const RoboticJoint& j, const Wrench& w) {
  if (!j.arm) throw ModelError("check_robot_joints: no arm");
  if (j.configs.empty()) throw ModelError("check_robot_joints: no configurations to check");
  StabilityResult r;
  r.stable = true;
  r.margin = 1.0;
  for (const auto& q : j.configs) {
    if (q.size() != j.arm->dof()) throw ModelError("check_robot_joints: configuration/arm mismatch");
    Eigen::VectorXd tau = joint_torques(*j.arm, q, w);
    for (int i = 0; i < tau.size(); ++i) {
      double lim = j.arm->joints[static_cast<size_t>(i)].torque_limit;
      double m = (lim - std::abs(tau(i))) / lim;
      r.margin = std::min(r.margin, m);
      if (lim - std::abs(tau(i)) <= kStrictTol) r.stable = false;
    }
  }
  return r;
}

std::vector<double> beam_corner_loads(const BeamLoad& load, const std::vector<double>& corner_span_coords) {
  if (load.mass < 0) throw ModelError("beam_corner_loads: negative mass");
  if (!(0 <= load.a && load.a < load.b && load.b <= load.span)) {
    throw ModelError("beam_corner_loads: load footprint outside span");
  }
  if (corner_span_coords.empty()) throw ModelError("beam_corner_loads: no corners");
  double W = load.mass * load.g;
  double centroid = 0.5 * (load.a + load.b);
  double r_right = W * centroid / load.span;
  double r_left = W - r_right;

  std::vector<double> out(corner_span_coords.size(), 0.0);
  int n_left = 0, n_right = 0;
  for (double x : corner_span_coords) (x <= load.span * 0.5 ? n_left : n_right)++;
  if (n_left == 0 || n_right == 0) throw ModelError("beam_corner_loads: corners must flank both supports");
  for (size_t i = 0; i < corner_span_coords.size(); ++i) {
    out[i] = (corner_span_coords[i] <= load.span * 0.5) ? r_left / n_left : r_right / n_right;
  }
  return out;
}

}  // namespace fmplan
