#include "fmplan/spatial.hpp"

namespace fmplan {

bool Pose::rotation_valid(double tol) const {
  Mat3 err = R.transpose() * R - Mat3::Identity();
  if (err.cwiseAbs().maxCoeff() >= tol) return false;
  return std::abs(R.determinant() - 1.0) < tol;
}

Pose Pose::make(const Mat3& R, const Vec3& t, std::string parent, std::string child) {
  Pose p;
  p.R = R;
  p.t = t;
  p.parent = std::move(parent);
  p.child = std::move(child);
  if (!p.rotation_valid(1e-7)) throw ModelError("Pose::make: rotation is not orthonormal with det +1");
  return p;
}

Pose Pose::from_axis_angle(const Vec3& axis, double angle, const Vec3& t) {
  double n = axis.norm();
  if (n < 1e-12) throw ModelError("Pose::from_axis_angle: zero axis");
  Pose p;
  p.R = Eigen::AngleAxisd(angle, axis / n).toRotationMatrix();
  p.t = t;
  return p;
}

Pose Pose::from_rpy(double roll, double pitch, double yaw, const Vec3& t) {
  Pose p;
  p.R = (Eigen::AngleAxisd(yaw, Vec3::UnitZ()) *
         Eigen::AngleAxisd(pitch, Vec3::UnitY()) *
         Eigen::AngleAxisd(roll, Vec3::UnitX()))
            .toRotationMatrix();
  p.t = t;
  return p;
}

Pose Pose::from_quaternion(double w, double x, double y, double z, const Vec3& t) {
  Eigen::Quaterniond q(w, x, y, z);
  if (q.norm() < 1e-12) throw ModelError("Pose::from_quaternion: zero quaternion");
  q.normalize();
  Pose p;
  p.R = q.toRotationMatrix();
  p.t = t;
  return p;
}

Wrench transform_wrench(const Pose& x, const Wrench& w) {
  if (!w.frame.empty() && !x.child.empty() && w.frame != x.child) {
    throw FrameError("transform_wrench: wrench in frame '" + w.frame + "' but pose locates frame '" + x.child + "'");
  }
  Wrench out;
  out.force = x.R * w.force;
  out.torque = x.R * w.torque + x.t.cross(out.force);
  out.frame = x.parent;
  return out;
}

Wrench gravity_wrench(double mass, const Vec3& com, double g, const std::string& frame) {
  if (mass < 0) throw ModelError("gravity_wrench: negative mass");
  Vec3 f(0, 0, -mass * g);
  return Wrench(f, com.cross(f), frame);
}

}  // namespace fmplan
