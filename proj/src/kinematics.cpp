#include "fmplan/kinematics.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "fmplan/rng.hpp"
#include "json.hpp"

namespace fmplan {

void ArmModel::validate() const {
  if (joints.empty()) throw ModelError("ArmModel: at least one joint required");
  for (const auto& j : joints) {
    if (std::abs(j.axis.norm() - 1.0) > 1e-9) throw ModelError("ArmModel: joint axis must be unit norm");
    if (j.torque_limit <= 0) throw ModelError("ArmModel: torque limits must be strictly positive");
    if (j.lo > j.hi) throw ModelError("ArmModel: joint limits out of order");
  }
}

ArmModel ArmModel::planar(const std::vector<double>& link_lengths, double torque_limit,
                          const std::string& name) {
  ArmModel arm;
  arm.name = name;
  for (size_t i = 0; i < link_lengths.size(); ++i) {
    JointSpec j;
    j.axis = Vec3::UnitZ();
    // Joint i sits at the end of link i-1; the first joint is at the base.
    j.link = (i == 0) ? Pose::identity() : Pose::make(Mat3::Identity(), Vec3(link_lengths[i - 1], 0, 0));
    j.torque_limit = torque_limit;
    arm.joints.push_back(j);
  }
  arm.ee = Pose::make(Mat3::Identity(), Vec3(link_lengths.back(), 0, 0));
  arm.validate();
  return arm;
}

ArmModel ArmModel::from_json_text(const std::string& text, const std::string& name_hint) {
  nlohmann::json j = nlohmann::json::parse(text);
  ArmModel arm;
  arm.name = j.value("name", name_hint);
  auto read_vec3 = [](const nlohmann::json& v) { return Vec3(v.at(0), v.at(1), v.at(2)); };
  auto read_pose = [&](const nlohmann::json& v) {
    Vec3 xyz = v.contains("xyz") ? read_vec3(v["xyz"]) : Vec3::Zero();
    Vec3 rpy = v.contains("rpy") ? read_vec3(v["rpy"]) : Vec3::Zero();
    return Pose::from_rpy(rpy.x(), rpy.y(), rpy.z(), xyz);
  };
  arm.base = j.contains("base") ? read_pose(j["base"]) : Pose::identity();
  for (const auto& jj : j.at("joints")) {
    JointSpec spec;
    spec.axis = read_vec3(jj.at("axis")).normalized();
    Vec3 xyz = jj.contains("link_xyz") ? read_vec3(jj["link_xyz"]) : Vec3::Zero();
    Vec3 rpy = jj.contains("link_rpy") ? read_vec3(jj["link_rpy"]) : Vec3::Zero();
    spec.link = Pose::from_rpy(rpy.x(), rpy.y(), rpy.z(), xyz);
    if (jj.contains("limits")) {
      spec.lo = jj["limits"].at(0);
      spec.hi = jj["limits"].at(1);
    }
    spec.torque_limit = jj.at("torque_limit");
    arm.joints.push_back(spec);
  }
  arm.ee = j.contains("ee_transform") ? read_pose(j["ee_transform"]) : Pose::identity();
  arm.validate();
  return arm;
}

ArmModel ArmModel::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open arm file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str(), path);
}

namespace {

// World poses of every joint frame plus the end effector.
void chain_poses(const ArmModel& arm, const Configuration& q, std::vector<Pose>& joint_frames, Pose& ee) {
  if (q.size() != arm.dof()) throw ModelError("configuration length does not match arm dof");
  joint_frames.clear();
  Pose cur = arm.base;
  for (int i = 0; i < arm.dof(); ++i) {
    cur = cur * arm.joints[static_cast<size_t>(i)].link;
    joint_frames.push_back(cur);
    cur = cur * Pose::from_axis_angle(arm.joints[static_cast<size_t>(i)].axis, q.q[i]);
  }
  ee = cur * arm.ee;
}

}  // namespace

Pose forward_kinematics(const ArmModel& arm, const Configuration& q) {
  std::vector<Pose> frames;
  Pose ee;
  chain_poses(arm, q, frames, ee);
  return ee;
}

Eigen::Matrix<double, 6, Eigen::Dynamic> jacobian(const ArmModel& arm, const Configuration& q) {
  std::vector<Pose> frames;
  Pose ee;
  chain_poses(arm, q, frames, ee);
  Eigen::Matrix<double, 6, Eigen::Dynamic> J(6, arm.dof());
  for (int i = 0; i < arm.dof(); ++i) {
    const Pose& jf = frames[static_cast<size_t>(i)];
    Vec3 axis_w = jf.R * arm.joints[static_cast<size_t>(i)].axis;
    Vec3 arm_vec = ee.t - jf.t;
    J.block<3, 1>(0, i) = axis_w.cross(arm_vec);
    J.block<3, 1>(3, i) = axis_w;
  }
  return J;
}

Eigen::VectorXd joint_torques(const ArmModel& arm, const Configuration& q, const Wrench& w) {
  if (!w.frame.empty() && w.frame != "world") {
    throw FrameError("joint_torques: wrench must be expressed in the world frame at the end effector");
  }
  return jacobian(arm, q).transpose() * w.stacked();
}

Vec6 impedance_offset(const Wrench& w, const ImpedanceParams& k) {
  if ((k.kp.array() <= 0).any()) throw ModelError("impedance_offset: stiffness must be positive");
  return w.stacked().cwiseQuotient(k.kp);
}

namespace {

Vec3 orientation_error(const Mat3& R_cur, const Mat3& R_target) {
  Eigen::AngleAxisd aa(R_target * R_cur.transpose());
  return aa.angle() * aa.axis();
}

std::optional<Configuration> ik_attempt(const ArmModel& arm, const Pose& target, Configuration q,
                                        const IkOptions& opts) {
  for (int it = 0; it < opts.max_iters; ++it) {
    Pose cur = forward_kinematics(arm, q);
    Vec3 pe = target.t - cur.t;
    Vec3 oe = orientation_error(cur.R, target.R);
    if (pe.norm() < opts.tol && oe.norm() < opts.tol) {
      for (int i = 0; i < arm.dof(); ++i) {
        const auto& js = arm.joints[static_cast<size_t>(i)];
        if (q.q[i] < js.lo - 1e-9 || q.q[i] > js.hi + 1e-9) return std::nullopt;
      }
      return q;
    }
    Vec6 err;
    err << pe, oe;
    auto J = jacobian(arm, q);
    Eigen::MatrixXd JJt = J * J.transpose() + opts.damping * Eigen::MatrixXd::Identity(6, 6);
    Eigen::VectorXd dq = J.transpose() * JJt.ldlt().solve(err);
    double step = dq.cwiseAbs().maxCoeff();
    if (step > 0.5) dq *= 0.5 / step;
    q.q += dq;
    for (int i = 0; i < arm.dof(); ++i) {
      const auto& js = arm.joints[static_cast<size_t>(i)];
      q.q[i] = std::min(std::max(q.q[i], js.lo), js.hi);
    }
  }
  return std::nullopt;
}

}  // namespace

std::optional<Configuration> solve_ik(const ArmModel& arm, const Pose& target,
                                      const Configuration& seed, const IkOptions& opts) {
  if (opts.tol <= 0) throw ModelError("solve_ik: tolerance must be positive");
  if (seed.size() != arm.dof()) throw ModelError("solve_ik: seed length does not match arm dof");
  if (auto r = ik_attempt(arm, target, seed, opts)) return r;
  Rng rng(opts.seed ^ 0x51ca5e1eu);
  for (int k = 0; k < opts.restarts; ++k) {
    Configuration q0 = seed;
    for (int i = 0; i < arm.dof(); ++i) {
      const auto& js = arm.joints[static_cast<size_t>(i)];
      q0.q[i] = rng.uniform(js.lo, js.hi);
    }
    if (auto r = ik_attempt(arm, target, q0, opts)) return r;
  }
  return std::nullopt;
}

}  // namespace fmplan
