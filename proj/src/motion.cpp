#include "fmplan/motion.hpp"

#include <cmath>
#include <vector>

namespace fmplan {

namespace {

// Points along the kinematic chain used as collision probes.
std::vector<Vec3> arm_probe_points(const ArmModel& arm, const Configuration& q) {
  std::vector<Vec3> pts;
  Pose cur = arm.base;
  Vec3 prev = cur.t;
  for (int i = 0; i < arm.dof(); ++i) {
    cur = cur * arm.joints[static_cast<size_t>(i)].link;
    for (int k = 1; k <= 2; ++k) {
      pts.push_back(prev + (cur.t - prev) * (k / 2.0));
    }
    prev = cur.t;
    cur = cur * Pose::from_axis_angle(arm.joints[static_cast<size_t>(i)].axis, q.q[i]);
  }
  Pose ee = cur * arm.ee;
  pts.push_back(prev + (ee.t - prev) * 0.5);
  pts.push_back(ee.t);
  return pts;
}

bool point_hits_object(const Vec3& p, const ObjectModel& o, const Pose& pose, double pad) {
  double z0 = pose.t.z() - pad, z1 = pose.t.z() + o.shape.height() + pad;
  if (p.z() < z0 || p.z() > z1) return false;
  Vec3 local = pose.inverse().apply(p);
  if (o.shape.kind == Shape::Kind::Cylinder) {
    return std::hypot(local.x(), local.y()) <= o.shape.r + pad;
  }
  return std::abs(local.x()) <= o.shape.w / 2 + pad && std::abs(local.y()) <= o.shape.d / 2 + pad;
}

}  // namespace

bool config_in_collision(const MotionRequest& req, const Configuration& q) {
  const double link_pad = 0.03;
  auto pts = arm_probe_points(req.arm->model, q);
  Pose ee = forward_kinematics(req.arm->model, q);

  for (const auto& [name, pose] : req.obstacles) {
    if (req.exempt.count(name)) continue;
    if (req.held && req.held->name == name) continue;
    const ObjectModel& obs = req.scene->object(name);
    for (const auto& p : pts) {
      if (point_hits_object(p, obs, pose, link_pad)) return true;
    }
    if (req.held) {
      Pose obj_pose = ee * req.held->grasp_ee_in_object.inverse();
      if (collide(*req.scene, req.held->name, obj_pose, name, pose)) return true;
    }
  }
  return false;
}

namespace {

Trajectory waypoints_to_traj(const std::vector<Configuration>& wps) {
  Trajectory t;
  t.waypoints = wps;
  TrajectorySegment seg;
  seg.kind = TrajectorySegment::Kind::Free;
  seg.begin = 0;
  seg.end = static_cast<int>(wps.size()) - 1;
  t.segments.push_back(seg);
  return t;
}

bool segment_free(const MotionRequest& req, const Configuration& a, const Configuration& b) {
  double dist = (b.q - a.q).cwiseAbs().maxCoeff();
  int n = std::max(1, static_cast<int>(std::ceil(dist / req.step)));
  for (int i = 0; i <= n; ++i) {
    Configuration q(a.q + (b.q - a.q) * (static_cast<double>(i) / n));
    if (config_in_collision(req, q)) return false;
  }
  return true;
}

std::vector<Configuration> interpolate(const Configuration& a, const Configuration& b, double step) {
  double dist = (b.q - a.q).cwiseAbs().maxCoeff();
  int n = std::max(1, static_cast<int>(std::ceil(dist / step)));
  std::vector<Configuration> out;
  for (int i = 0; i <= n; ++i) out.emplace_back(a.q + (b.q - a.q) * (static_cast<double>(i) / n));
  return out;
}

}  // namespace

std::optional<Trajectory> plan_straight(const MotionRequest& req) {
  if (!segment_free(req, req.start, req.goal)) return std::nullopt;
  return waypoints_to_traj(interpolate(req.start, req.goal, req.step));
}

std::optional<Trajectory> plan_birrt(const MotionRequest& req, Rng& rng, int max_iters) {
  if (config_in_collision(req, req.start) || config_in_collision(req, req.goal)) return std::nullopt;

  struct Node {
    Configuration q;
    int parent;
  };
  std::vector<Node> trees[2];
  trees[0].push_back({req.start, -1});
  trees[1].push_back({req.goal, -1});
  const double step = 0.35;

  auto nearest = [&](int ti, const Configuration& q) {
    int best = 0;
    double bd = 1e300;
    for (size_t i = 0; i < trees[ti].size(); ++i) {
      double d = (trees[ti][i].q.q - q.q).norm();
      if (d < bd) {
        bd = d;
        best = static_cast<int>(i);
      }
    }
    return best;
  };
  auto steer = [&](const Configuration& from, const Configuration& to) {
    Eigen::VectorXd d = to.q - from.q;
    double n = d.norm();
    if (n <= step) return to;
    return Configuration(from.q + d * (step / n));
  };

  const auto& joints = req.arm->model.joints;
  int active = 0;
  for (int it = 0; it < max_iters; ++it) {
    Configuration sample = Configuration::zeros(req.arm->model.dof());
    for (int i = 0; i < sample.size(); ++i) {
      sample.q[i] = rng.uniform(joints[static_cast<size_t>(i)].lo, joints[static_cast<size_t>(i)].hi);
    }
    int ni = nearest(active, sample);
    Configuration qn = steer(trees[active][static_cast<size_t>(ni)].q, sample);
    if (!segment_free(req, trees[active][static_cast<size_t>(ni)].q, qn)) {
      active = 1 - active;
      continue;
    }
    trees[active].push_back({qn, ni});

    // Try to connect the other tree to the new node.
    int other = 1 - active;
    int oi = nearest(other, qn);
    if (segment_free(req, trees[other][static_cast<size_t>(oi)].q, qn)) {
      std::vector<Configuration> left, right;
      for (int c = static_cast<int>(trees[active].size()) - 1; c >= 0;) {
        left.push_back(trees[active][static_cast<size_t>(c)].q);
        c = trees[active][static_cast<size_t>(c)].parent;
      }
      std::reverse(left.begin(), left.end());
      for (int c = oi; c >= 0;) {
        right.push_back(trees[other][static_cast<size_t>(c)].q);
        c = trees[other][static_cast<size_t>(c)].parent;
      }
      if (active == 1) {
        std::reverse(left.begin(), left.end());
        std::reverse(right.begin(), right.end());
        std::swap(left, right);
      }
      std::vector<Configuration> path = left;
      path.insert(path.end(), right.begin(), right.end());
      // Shortcut pass, then densify to the step bound.
      std::vector<Configuration> smooth;
      size_t i = 0;
      smooth.push_back(path[0]);
      while (i + 1 < path.size()) {
        size_t j = path.size() - 1;
        for (; j > i + 1; --j) {
          if (segment_free(req, path[i], path[j])) break;
        }
        smooth.push_back(path[j]);
        i = j;
      }
      std::vector<Configuration> dense;
      for (size_t k = 0; k + 1 < smooth.size(); ++k) {
        auto seg = interpolate(smooth[k], smooth[k + 1], req.step);
        if (k) seg.erase(seg.begin());
        dense.insert(dense.end(), seg.begin(), seg.end());
      }
      if (dense.empty()) dense.push_back(req.start);
      return waypoints_to_traj(dense);
    }
    active = other;
  }
  return std::nullopt;
}

std::optional<Trajectory> plan_motion(const MotionRequest& req, Rng& rng) {
  if (auto t = plan_straight(req)) return t;
  return plan_birrt(req, rng);
}

}  // namespace fmplan
