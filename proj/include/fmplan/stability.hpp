#pragma once

#include <vector>

#include "fmplan/kinematics.hpp"
#include "fmplan/spatial.hpp"

namespace fmplan {

// Canonical contact frame for all planar joints: patch plane = local x-y,
// normal = local z. Checks consume in-plane forces (f_x, f_y) and the normal
// moment tau_z; the normal force and tipping moments are resisted
// kinematically by the support/non-penetration reactions.

struct CircularPatchJoint {
  double mu = 0.5;            // > 0
  double normal_force = 1.0;  // N, > 0
  double radius = 0.01;       // m, > 0
  Pose contact_pose;          // contact frame in world
  std::string frame;          // frame id the check expects wrenches in
  bool grasp = false;         // grasp-formed joints get the tighter frame perturbation
  double footprint_radius = 0.0;  // supporting footprint for patch-size recompute; 0 = radius

  double torsion_radius() const { return 0.6 * radius; }  // k
};

struct PolygonPatchJoint {
  std::vector<Vec3> corners;       // >= 3, coplanar (z ~ 0) in the contact frame
  double mu = 0.5;                 // > 0
  std::vector<double> corner_normals;  // N_i >= 0, sum > 0
  Pose contact_pose;
  std::string frame;
  bool grasp = false;
};

struct RoboticJoint {
  const ArmModel* arm = nullptr;
  std::vector<Configuration> configs;  // nonempty; all waypoints are checked
};

// Simply supported beam with supports at the span ends and a uniform load of
// total weight mass*g over [a, b].
struct BeamLoad {
  double span = 1.0;  // m
  double mass = 0.0;  // kg
  double a = 0.0;     // m, load interval start
  double b = 1.0;     // m, load interval end
  double g = 9.81;
};

struct StabilityResult {
  bool stable = false;
  double margin = 0.0;
};

// Ellipsoidal limit surface for small circular patches:
//   (f_x^2 + f_y^2)/(N mu)^2 + tau_z^2/(N k mu)^2 < 1, k = 0.6 r.
// Strict inequality at tolerance 1e-9; margin = 1 - LHS.
StabilityResult check_circular_patch(const CircularPatchJoint& j, const Wrench& w);

// Generalized friction cone: per-corner polyhedral cones
// {(mu,0,1),(-mu,0,1),(0,mu,1),(0,-mu,1)} with per-corner normal-force caps,
// mapped to patch-frame wrenches. Stable iff the wrench the contact must
// supply is a capped conic combination (LP feasibility in f_x, f_y, tau_z);
// margin = alpha* - 1 where alpha* is the largest feasible uniform scale,
// clipped to [-1, inf).
StabilityResult check_polygon_patch(const PolygonPatchJoint& j, const Wrench& w);

// Optional LP certificates for audits: on stable instances `combo` reproduces
// the resisted wrench; on unstable ones (y_eq, y_ub) is a Farkas separator.
struct PolygonCheckDetail {
  StabilityResult result;
  Eigen::VectorXd combo;
  Eigen::VectorXd farkas_eq;
  Eigen::VectorXd farkas_ub;
  Eigen::MatrixXd generators;  // 3 x (4*corners): rows f_x, f_y, tau_z
  Eigen::VectorXd resist;      // the 3-vector the contact must supply
};
PolygonCheckDetail check_polygon_patch_detail(const PolygonPatchJoint& j, const Wrench& w);

// Robot torque limits: |J(q)^T w| < tau_lim componentwise at every checked
// configuration; margin = min (tau_lim - |tau|)/tau_lim.
StabilityResult check_robot_joints(const RoboticJoint& j, const Wrench& w);

// Support reactions of the beam load distributed to the patch corners:
// the corners nearer each support split that support's reaction equally.
// `corner_span_coords` are the corner positions projected to [0, span].
std::vector<double> beam_corner_loads(const BeamLoad& load, const std::vector<double>& corner_span_coords);

}  // namespace fmplan
