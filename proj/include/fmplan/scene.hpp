#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fmplan/kinematics.hpp"
#include "fmplan/rng.hpp"
#include "fmplan/spatial.hpp"

namespace fmplan {

// Primitive shapes, desk scale. Object poses sit at the bottom-face center;
// footprints assume upright objects (yaw-only rotations).
struct Shape {
  enum class Kind { Box, Cylinder };
  Kind kind = Kind::Box;
  double w = 0.1, d = 0.1, h = 0.1;  // box extents (m)
  double r = 0.05;                   // cylinder radius (m)

  double footprint_radius() const;  // circumscribed circle of the footprint
  double height() const { return h; }
};

struct ObjectModel {
  std::string name;
  Shape shape;
  double mass = 0.1;          // kg
  Vec3 com = Vec3::Zero();    // offset from the pose origin
  std::vector<std::string> tags;  // cap, bottle, nut, spanner, pusher, knife, weight, cuttable, block, ...
  bool movable = true;
  bool graspable = true;

  bool has_tag(const std::string& t) const;
};

// Rectangular support region on a horizontal plane.
struct SurfaceDef {
  std::string name;
  Pose pose;            // region center; plane = local x-y at pose height
  double w = 0.3, d = 0.3;
  std::map<std::string, double> friction;  // per object name or tag
  double default_friction = 0.5;

  double friction_for(const ObjectModel& o) const;
};

struct GraspRegionDef {
  std::string object;          // object name or tag
  std::string family;          // top | side | wrap
  double lo = 0.0, hi = 0.0;   // offset interval along the object's main axis (m)
  double mu = 0.5;
  double normal_force = 40.0;  // clamp/grip force (N)
  double patch_radius = 0.012; // m
};

struct RContactDef {
  std::string name;   // palm / fingertip identifier, unique per scene
  std::string arm;    // owning arm
  double radius = 0.02;
  double mu = 0.5;
};

struct ArmInstance {
  std::string name;
  ArmModel model;
  Configuration q0;
  double payload_fmax = 30.0;  // largest sampleable downward push (N)
};

struct ViseDef {
  std::string name;
  std::string region;     // surface region objects are placed into
  double mu = 0.8;
  double clamp_force = 60.0;
  double patch_radius = 0.02;
};

struct Scene {
  std::map<std::string, ObjectModel> objects;
  std::map<std::string, Pose> initial_poses;
  std::vector<SurfaceDef> surfaces;
  std::vector<ArmInstance> arms;
  std::vector<RContactDef> rcontacts;
  std::vector<GraspRegionDef> grasp_regions;
  std::optional<ViseDef> vise;
  std::map<std::string, std::map<std::string, double>> friction_pairs;  // symmetric

  static Scene load(const std::string& path);
  static Scene from_json_text(const std::string& text, const std::string& arm_dir);

  const ObjectModel& object(const std::string& name) const;
  const SurfaceDef* find_surface(const std::string& name) const;
  const ArmInstance* find_arm(const std::string& name) const;
  const RContactDef* find_rcontact(const std::string& name) const;
  double friction(const std::string& a, const std::string& b) const;  // symmetric lookup
  // Surface whose region contains the object's footprint center at `pose`.
  const SurfaceDef* surface_under(const Pose& pose) const;
};

// 2.5-D overlap: footprints on the support plane plus height intervals.
bool collide(const Scene& scene, const std::string& a, const Pose& pa,
             const std::string& b, const Pose& pb);

// Continuous grasp value minted by the grasp sampler.
struct GraspValue {
  std::string object;
  std::string family;
  double offset = 0.0;             // along the object's main axis from its reference end
  Pose ee_in_object;               // end-effector pose relative to the object
  Pose patch_in_object;            // contact patch frame relative to the object
  double mu = 0.5;
  double normal_force = 40.0;
  double patch_radius = 0.012;
};

// Uniform draw over the region's offset interval; deterministic per rng state.
std::optional<GraspValue> sample_grasp(const Scene& scene, const GraspRegionDef& region, Rng& rng);

// Uniform pose in the region with footprint containment and rest height.
// Fails (nullopt) when the footprint cannot fit.
std::optional<Pose> sample_placement(const Scene& scene, const ObjectModel& obj,
                                     const SurfaceDef& region, Rng& rng);

bool footprint_in_region(const ObjectModel& obj, const Pose& pose, const SurfaceDef& region);

}  // namespace fmplan
