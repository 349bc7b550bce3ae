#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "fmplan/stability.hpp"

namespace fmplan {

using JointModel = std::variant<CircularPatchJoint, PolygonPatchJoint, RoboticJoint>;

struct AttachedMass {
  double mass = 0.0;   // kg, >= 0
  Vec3 com_world = Vec3::Zero();
};

// One joint of a forceful kinematic chain plus the masses hanging distally of
// it (their gravity loads every joint from here up toward the support).
struct ChainJoint {
  std::string name;
  JointModel model;
  std::vector<AttachedMass> distal_masses;
};

struct ForcefulKinematicChain {
  std::string label;
  std::vector<ChainJoint> joints;  // >= 1
  double gravity = 9.81;
};

struct JointReport {
  std::string name;
  bool stable = false;
  double margin = 0.0;
};

struct StabilityReport {
  std::vector<JointReport> joints;
  bool stable = false;  // conjunction of the per-joint flags
};

// World pose of a joint's frame (robotic joints: end effector at the first
// checked configuration).
Pose joint_world_pose(const ChainJoint& j);

// Propagate task + distal-mass gravity wrenches into every joint frame and
// evaluate each joint model. `task_frame` is the world pose of the frame the
// task wrench is expressed in.
StabilityReport check_chain(const ForcefulKinematicChain& c, const Wrench& task, const Pose& task_frame);

struct PerturbationSpec {
  double friction_range = 0.1;       // additive, +- on mu
  double wrench_lo = 0.5;            // multiplicative range on the task wrench
  double wrench_hi = 1.5;
  double frame_shift_grasp = 0.005;  // m, in-plane contact frame shift for grasp joints
  double frame_shift_other = 0.010;  // m, for all other frictional joints
  bool recompute_patch = true;       // shrink circular patches that overhang after a shift
  int samples = 1000;                // n >= 1
  uint64_t seed = 0;
};

// Fraction of `samples` i.i.d. perturbed instantiations for which check_chain
// is stable. Deterministic given the seed; sample i uses an RNG split on i, so
// the result is independent of evaluation order. A model error inside a
// sample counts that sample as unstable.
double estimate_success(const ForcefulKinematicChain& c, const Wrench& task, const Pose& task_frame,
                        const PerturbationSpec& spec);

// -ln p; p = 0 yields the infeasible marker (operator pruned).
struct OperatorCost {
  bool infeasible = false;
  double value = 0.0;
};
OperatorCost operator_cost(double p);

}  // namespace fmplan
