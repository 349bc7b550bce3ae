#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>

#include "fmplan/scene.hpp"

namespace fmplan {

// Object carried by the end effector during a motion.
struct HeldObject {
  std::string name;
  Pose grasp_ee_in_object;  // end effector relative to the object
};

struct MotionRequest {
  const Scene* scene = nullptr;
  const ArmInstance* arm = nullptr;
  Configuration start;
  Configuration goal;
  std::optional<HeldObject> held;
  // Poses of movable obstacles to check against (world); objects absent from
  // the map are ignored. `exempt` names are skipped entirely.
  std::map<std::string, Pose> obstacles;
  std::set<std::string> exempt;
  double step = 0.1;  // rad, interpolation resolution
};

// Collision test for one configuration: sampled points along the arm links,
// the end effector, and the held object footprint against the obstacles.
bool config_in_collision(const MotionRequest& req, const Configuration& q);

std::optional<Trajectory> plan_straight(const MotionRequest& req);

// Bidirectional RRT in joint space; deterministic for a given rng.
std::optional<Trajectory> plan_birrt(const MotionRequest& req, Rng& rng, int max_iters = 2000);

// Straight line first, BiRRT fallback.
std::optional<Trajectory> plan_motion(const MotionRequest& req, Rng& rng);

}  // namespace fmplan
