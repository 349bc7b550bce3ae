#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fmplan/spatial.hpp"

namespace fmplan {

struct JointSpec {
  Vec3 axis = Vec3::UnitZ();  // rotation axis, unit norm, in the joint frame
  Pose link;                  // fixed transform from previous joint frame to this joint frame
  double lo = -3.14159265358979323846;
  double hi = 3.14159265358979323846;
  double torque_limit = 10.0;  // N·m, symmetric, > 0
};

// Serial-chain revolute arm. Joint i rotates about `axis` after applying its
// fixed link transform; the end-effector transform follows the last joint.
struct ArmModel {
  std::string name;
  Pose base;
  std::vector<JointSpec> joints;
  Pose ee;

  int dof() const { return static_cast<int>(joints.size()); }
  void validate() const;  // throws ModelError on bad axes/limits/emptiness

  static ArmModel from_json_text(const std::string& text, const std::string& name_hint = "");
  static ArmModel load(const std::string& path);

  // Convenience planar nR arm in the x-y plane (axes z, links along x).
  static ArmModel planar(const std::vector<double>& link_lengths,
                         double torque_limit = 50.0, const std::string& name = "planar");
};

struct Configuration {
  Eigen::VectorXd q;
  Configuration() = default;
  explicit Configuration(Eigen::VectorXd v) : q(std::move(v)) {}
  static Configuration zeros(int n) { return Configuration(Eigen::VectorXd::Zero(n)); }
  int size() const { return static_cast<int>(q.size()); }
};

struct ImpedanceParams {
  Vec6 kp;  // N/m for the translational block, N·m/rad for the rotational block
  ImpedanceParams() { kp.setConstant(1000.0); }
  explicit ImpedanceParams(const Vec6& kp_) : kp(kp_) {}
  Vec6 kd() const { return 2.0 * kp.cwiseSqrt(); }  // approximately critically damped
};

struct TrajectorySegment {
  enum class Kind { Free, Forceful };
  Kind kind = Kind::Free;
  int begin = 0;  // waypoint index range [begin, end], inclusive
  int end = 0;
  Wrench planned_wrench;  // world frame at the end effector (Forceful only)
  ImpedanceParams stiffness;
};

struct Trajectory {
  std::vector<Configuration> waypoints;
  std::vector<TrajectorySegment> segments;
};

Pose forward_kinematics(const ArmModel& arm, const Configuration& q);

// Geometric Jacobian in the world frame at the end-effector origin.
// Rows 0-2 map joint rates to linear velocity, rows 3-5 to angular velocity.
Eigen::Matrix<double, 6, Eigen::Dynamic> jacobian(const ArmModel& arm, const Configuration& q);

// tau = J(q)^T w, with w expressed in the world frame at the end-effector origin.
Eigen::VectorXd joint_torques(const ArmModel& arm, const Configuration& q, const Wrench& w);

struct IkOptions {
  double tol = 1e-4;       // position (m) and orientation (rad) tolerance
  int max_iters = 200;     // damped-least-squares iterations per attempt
  int restarts = 8;        // random restarts after the seed attempt
  double damping = 1e-3;
  uint64_t seed = 0;       // restart randomization is deterministic in this
};

// Damped least squares with joint-limit clamping and random restarts.
// Returns nullopt when no attempt converges (not an error).
std::optional<Configuration> solve_ik(const ArmModel& arm, const Pose& target,
                                      const Configuration& seed, const IkOptions& opts = {});

// Linear spring model: componentwise displacement w / kp.
Vec6 impedance_offset(const Wrench& w, const ImpedanceParams& k);

}  // namespace fmplan
