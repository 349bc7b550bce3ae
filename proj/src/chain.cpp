#include "fmplan/chain.hpp"

#include <cmath>

#include "fmplan/rng.hpp"

namespace fmplan {

Pose joint_world_pose(const ChainJoint& j) {
  if (const auto* c = std::get_if<CircularPatchJoint>(&j.model)) return c->contact_pose;
  if (const auto* p = std::get_if<PolygonPatchJoint>(&j.model)) return p->contact_pose;
  const auto& r = std::get<RoboticJoint>(j.model);
  if (!r.arm || r.configs.empty()) throw ModelError("chain: robotic joint without arm/configurations");
  return forward_kinematics(*r.arm, r.configs.front());
}

namespace {

// Wrench at a joint: the task wrench plus gravity of every mass distal to it,
// all expressed in the joint frame (torques about the joint origin).
Wrench wrench_at_joint(const ForcefulKinematicChain& c, size_t joint_idx, const Wrench& task,
                       const Pose& task_frame, const Pose& joint_pose) {
  Pose world_from_task = task_frame;
  Pose joint_from_world = joint_pose.inverse();

  Wrench task_local = task;
  task_local.frame.clear();
  Pose rel = joint_from_world * world_from_task;
  rel.parent.clear();
  rel.child.clear();
  Wrench w = transform_wrench(rel, task_local);

  for (size_t k = joint_idx; k < c.joints.size(); ++k) {
    for (const auto& m : c.joints[k].distal_masses) {
      if (m.mass < 0) throw ModelError("chain: negative attached mass");
      if (m.mass == 0) continue;
      Vec3 f_world(0, 0, -m.mass * c.gravity);
      Vec3 tau_world = (m.com_world - joint_pose.t).cross(f_world);
      w.force += joint_pose.R.transpose() * f_world;
      w.torque += joint_pose.R.transpose() * tau_world;
    }
  }
  return w;
}

StabilityResult check_joint(const JointModel& model, const Wrench& w) {
  if (const auto* c = std::get_if<CircularPatchJoint>(&model)) {
    Wrench wl = w;
    wl.frame = c->frame;
    return check_circular_patch(*c, wl);
  }
  if (const auto* p = std::get_if<PolygonPatchJoint>(&model)) {
    Wrench wl = w;
    wl.frame = p->frame;
    return check_polygon_patch(*p, wl);
  }
  return StabilityResult{};  // robotic handled separately (world-frame wrench)
}

}  // namespace

StabilityReport check_chain(const ForcefulKinematicChain& c, const Wrench& task, const Pose& task_frame) {
  if (c.joints.empty()) throw ModelError("check_chain: empty chain");
  if (!task.finite()) throw ModelError("check_chain: non-finite task wrench");
  StabilityReport rep;
  rep.stable = true;
  for (size_t i = 0; i < c.joints.size(); ++i) {
    const ChainJoint& j = c.joints[i];
    JointReport jr;
    jr.name = j.name;
    if (const auto* rj = std::get_if<RoboticJoint>(&j.model)) {
      // Torque check consumes the wrench in the world frame at the end
      // effector; gravity of distal masses is folded in per configuration.
      StabilityResult worst;
      worst.stable = true;
      worst.margin = 1.0;
      for (const auto& q : rj->configs) {
        Pose ee = forward_kinematics(*rj->arm, q);
        Wrench w_local = wrench_at_joint(c, i, task, task_frame, ee);
        Wrench w_world;
        w_world.force = ee.R * w_local.force;
        w_world.torque = ee.R * w_local.torque;
        w_world.frame = "world";
        RoboticJoint single{rj->arm, {q}};
        StabilityResult sr = check_robot_joints(single, w_world);
        worst.stable = worst.stable && sr.stable;
        worst.margin = std::min(worst.margin, sr.margin);
      }
      jr.stable = worst.stable;
      jr.margin = worst.margin;
    } else {
      Pose jp = joint_world_pose(j);
      Wrench w = wrench_at_joint(c, i, task, task_frame, jp);
      StabilityResult sr = check_joint(j.model, w);
      jr.stable = sr.stable;
      jr.margin = sr.margin;
    }
    rep.stable = rep.stable && jr.stable;
    rep.joints.push_back(jr);
  }
  return rep;
}

namespace {

// In-plane contact frame shift with optional effective-radius recompute: the
// shifted disc is intersected with the supporting footprint and replaced by
// the inscribed disc of the overlap.
void perturb_circular(CircularPatchJoint& j, double shift_range, bool recompute, Rng& rng) {
  double dx = rng.uniform(-shift_range, shift_range);
  double dy = rng.uniform(-shift_range, shift_range);
  Vec3 shift = j.contact_pose.R * Vec3(dx, dy, 0);
  j.contact_pose.t += shift;
  if (recompute) {
    double d = std::hypot(dx, dy);
    double R = j.footprint_radius > 0 ? j.footprint_radius : j.radius;
    double r_eff = std::min(j.radius, 0.5 * (j.radius + R - d));
    j.radius = std::max(r_eff, 1e-6);
  }
}

void perturb_polygon(PolygonPatchJoint& j, double shift_range, Rng& rng) {
  double dx = rng.uniform(-shift_range, shift_range);
  double dy = rng.uniform(-shift_range, shift_range);
  j.contact_pose.t += j.contact_pose.R * Vec3(dx, dy, 0);
}

}  // namespace

double estimate_success(const ForcefulKinematicChain& c, const Wrench& task, const Pose& task_frame,
                        const PerturbationSpec& spec) {
  if (spec.samples < 1) throw ModelError("estimate_success: need at least one sample");
  Rng base(spec.seed);
  int stable_count = 0;
  for (int s = 0; s < spec.samples; ++s) {
    Rng rng = base.split(static_cast<uint64_t>(s) + 1);
    ForcefulKinematicChain pc = c;
    for (auto& j : pc.joints) {
      if (auto* cp = std::get_if<CircularPatchJoint>(&j.model)) {
        cp->mu = std::max(cp->mu + rng.uniform(-spec.friction_range, spec.friction_range), 1e-6);
        double range = cp->grasp ? spec.frame_shift_grasp : spec.frame_shift_other;
        perturb_circular(*cp, range, spec.recompute_patch, rng);
      } else if (auto* pp = std::get_if<PolygonPatchJoint>(&j.model)) {
        pp->mu = std::max(pp->mu + rng.uniform(-spec.friction_range, spec.friction_range), 1e-6);
        double range = pp->grasp ? spec.frame_shift_grasp : spec.frame_shift_other;
        perturb_polygon(*pp, range, rng);
      }
    }
    Wrench w = task.scaled(rng.uniform(spec.wrench_lo, spec.wrench_hi));
    bool ok = false;
    try {
      ok = check_chain(pc, w, task_frame).stable;
    } catch (const std::exception&) {
      ok = false;  // a model error in a sample counts as unstable
    }
    if (ok) ++stable_count;
  }
  return static_cast<double>(stable_count) / static_cast<double>(spec.samples);
}

OperatorCost operator_cost(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw ModelError("operator_cost: probability outside [0,1]");
  OperatorCost c;
  if (p == 0.0) {
    c.infeasible = true;
    c.value = std::numeric_limits<double>::infinity();
  } else {
    c.value = -std::log(p);
    if (c.value < 0) c.value = 0;  // guard against -0
  }
  return c;
}

}  // namespace fmplan
