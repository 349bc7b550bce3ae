#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <string>

#include "fmplan/errors.hpp"

namespace fmplan {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;

inline Mat3 skew(const Vec3& p) {
  Mat3 s;
  s << 0, -p.z(), p.y(),
       p.z(), 0, -p.x(),
      -p.y(), p.x(), 0;
  return s;
}

// Rigid pose: rotation + translation, with optional frame labels (parent <- child).
// Orthonormality is checked on construction through the named constructors.
struct Pose {
  Mat3 R = Mat3::Identity();
  Vec3 t = Vec3::Zero();
  std::string parent;  // frame this pose is expressed in
  std::string child;   // frame this pose locates

  static Pose identity() { return {}; }

  static Pose make(const Mat3& R, const Vec3& t, std::string parent = "", std::string child = "");
  static Pose from_axis_angle(const Vec3& axis, double angle, const Vec3& t = Vec3::Zero());
  static Pose from_rpy(double roll, double pitch, double yaw, const Vec3& t = Vec3::Zero());
  static Pose from_quaternion(double w, double x, double y, double z, const Vec3& t = Vec3::Zero());

  bool rotation_valid(double tol = 1e-9) const;

  // Composition: this is X_ab, other is X_bc, result is X_ac.
  Pose operator*(const Pose& other) const {
    Pose out;
    out.R = R * other.R;
    out.t = t + R * other.t;
    out.parent = parent;
    out.child = other.child;
    return out;
  }

  Pose inverse() const {
    Pose out;
    out.R = R.transpose();
    out.t = -(R.transpose() * t);
    out.parent = child;
    out.child = parent;
    return out;
  }

  Vec3 apply(const Vec3& p) const { return R * p + t; }

  bool approx_equal(const Pose& other, double tol = 1e-9) const {
    return (R - other.R).cwiseAbs().maxCoeff() < tol && (t - other.t).cwiseAbs().maxCoeff() < tol;
  }
};

// 6D force/torque wrench with an explicit reference frame. The torque is taken
// about the origin of that frame.
struct Wrench {
  Vec3 force = Vec3::Zero();   // N
  Vec3 torque = Vec3::Zero();  // N·m
  std::string frame;

  Wrench() = default;
  Wrench(const Vec3& f, const Vec3& tau, std::string frame_ = "")
      : force(f), torque(tau), frame(std::move(frame_)) {}

  Wrench scaled(double a) const { return Wrench(a * force, a * torque, frame); }
  Wrench operator+(const Wrench& other) const { return Wrench(force + other.force, torque + other.torque, frame); }
  bool finite() const { return force.allFinite() && torque.allFinite(); }

  Vec6 stacked() const {
    Vec6 v;
    v << force, torque;
    return v;
  }
};

// Re-express a wrench given in frame B into frame A, where x is the pose of B
// in A: f_A = R f_B, tau_A = R tau_B + t x (R f_B).
// Throws FrameError when the wrench frame does not match x.child (labels are
// only checked when both sides carry one).
Wrench transform_wrench(const Pose& x, const Wrench& w);

// Wrench at frame F's origin due to a point mass at `com` (coordinates of F,
// assumed aligned with gravity: force is (0,0,-m*g)). mass >= 0.
Wrench gravity_wrench(double mass, const Vec3& com, double g, const std::string& frame);

}  // namespace fmplan
