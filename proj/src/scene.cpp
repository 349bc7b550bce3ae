#include "fmplan/scene.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace fmplan {

double Shape::footprint_radius() const {
  if (kind == Kind::Cylinder) return r;
  return 0.5 * std::hypot(w, d);
}

bool ObjectModel::has_tag(const std::string& t) const {
  return std::find(tags.begin(), tags.end(), t) != tags.end();
}

double SurfaceDef::friction_for(const ObjectModel& o) const {
  auto it = friction.find(o.name);
  if (it != friction.end()) return it->second;
  for (const auto& t : o.tags) {
    it = friction.find(t);
    if (it != friction.end()) return it->second;
  }
  return default_friction;
}

const ObjectModel& Scene::object(const std::string& name) const {
  auto it = objects.find(name);
  if (it == objects.end()) throw InputError("unknown object '" + name + "'");
  return it->second;
}

const SurfaceDef* Scene::find_surface(const std::string& name) const {
  for (const auto& s : surfaces)
    if (s.name == name) return &s;
  return nullptr;
}

const ArmInstance* Scene::find_arm(const std::string& name) const {
  for (const auto& a : arms)
    if (a.name == name) return &a;
  return nullptr;
}

const RContactDef* Scene::find_rcontact(const std::string& name) const {
  for (const auto& c : rcontacts)
    if (c.name == name) return &c;
  return nullptr;
}

double Scene::friction(const std::string& a, const std::string& b) const {
  auto look = [&](const std::string& x, const std::string& y) -> std::optional<double> {
    auto it = friction_pairs.find(x);
    if (it == friction_pairs.end()) return std::nullopt;
    auto jt = it->second.find(y);
    if (jt == it->second.end()) return std::nullopt;
    return jt->second;
  };
  if (auto v = look(a, b)) return *v;
  if (auto v = look(b, a)) return *v;
  return 0.5;
}

const SurfaceDef* Scene::surface_under(const Pose& pose) const {
  for (const auto& s : surfaces) {
    Vec3 local = s.pose.inverse().apply(pose.t);
    if (std::abs(local.x()) <= s.w / 2 + 1e-9 && std::abs(local.y()) <= s.d / 2 + 1e-9 &&
        std::abs(local.z()) < 0.05) {
      return &s;
    }
  }
  return nullptr;
}

// ---------------------------------------------------------------------------
// Collision (2.5-D)
// ---------------------------------------------------------------------------

namespace {

struct Footprint {
  bool circle = false;
  double r = 0;
  double hw = 0, hd = 0;  // half extents
  double cx = 0, cy = 0;  // world center
  double yaw = 0;
};

Footprint footprint_of(const Shape& s, const Pose& p) {
  Footprint f;
  f.cx = p.t.x();
  f.cy = p.t.y();
  if (s.kind == Shape::Kind::Cylinder) {
    f.circle = true;
    f.r = s.r;
  } else {
    f.hw = s.w / 2;
    f.hd = s.d / 2;
    f.yaw = std::atan2(p.R(1, 0), p.R(0, 0));
  }
  return f;
}

bool rect_rect_overlap(const Footprint& a, const Footprint& b) {
  // Separating axis test on both rectangles' axes.
  auto axes = [](const Footprint& f, Eigen::Vector2d out[2]) {
    out[0] = Eigen::Vector2d(std::cos(f.yaw), std::sin(f.yaw));
    out[1] = Eigen::Vector2d(-std::sin(f.yaw), std::cos(f.yaw));
  };
  Eigen::Vector2d ax[4];
  axes(a, ax);
  axes(b, ax + 2);
  Eigen::Vector2d ca(a.cx, a.cy), cb(b.cx, b.cy);
  for (int i = 0; i < 4; ++i) {
    const Eigen::Vector2d& n = ax[i];
    double pa = a.hw * std::abs(n.dot(ax[0])) + a.hd * std::abs(n.dot(ax[1]));
    double pb = b.hw * std::abs(n.dot(ax[2])) + b.hd * std::abs(n.dot(ax[3]));
    if (std::abs(n.dot(cb - ca)) > pa + pb) return false;
  }
  return true;
}

bool circle_rect_overlap(const Footprint& c, const Footprint& r) {
  double dx = c.cx - r.cx, dy = c.cy - r.cy;
  double cs = std::cos(-r.yaw), sn = std::sin(-r.yaw);
  double lx = dx * cs - dy * sn;
  double ly = dx * sn + dy * cs;
  double qx = std::clamp(lx, -r.hw, r.hw);
  double qy = std::clamp(ly, -r.hd, r.hd);
  return std::hypot(lx - qx, ly - qy) <= c.r;
}

bool footprints_overlap(const Footprint& a, const Footprint& b) {
  if (a.circle && b.circle) return std::hypot(a.cx - b.cx, a.cy - b.cy) < a.r + b.r;
  if (a.circle) return circle_rect_overlap(a, b);
  if (b.circle) return circle_rect_overlap(b, a);
  return rect_rect_overlap(a, b);
}

}  // namespace

bool collide(const Scene& scene, const std::string& a, const Pose& pa,
             const std::string& b, const Pose& pb) {
  const ObjectModel& oa = scene.object(a);
  const ObjectModel& ob = scene.object(b);
  double za0 = pa.t.z(), za1 = pa.t.z() + oa.shape.height();
  double zb0 = pb.t.z(), zb1 = pb.t.z() + ob.shape.height();
  if (za1 <= zb0 + 1e-9 || zb1 <= za0 + 1e-9) return false;
  return footprints_overlap(footprint_of(oa.shape, pa), footprint_of(ob.shape, pb));
}

// ---------------------------------------------------------------------------
// Samplers
// ---------------------------------------------------------------------------

std::optional<GraspValue> sample_grasp(const Scene& scene, const GraspRegionDef& region, Rng& rng) {
  if (region.hi < region.lo) return std::nullopt;
  const ObjectModel& obj = scene.object(region.object);
  GraspValue g;
  g.object = region.object;
  g.family = region.family;
  g.offset = (region.hi > region.lo) ? rng.uniform(region.lo, region.hi) : region.lo;
  g.mu = region.mu;
  g.normal_force = region.normal_force;
  g.patch_radius = region.patch_radius;

  double h = obj.shape.height();
  if (region.family == "top") {
    // Approach from above; pads squeeze the sides, patch normal along +y.
    g.patch_in_object = Pose::from_rpy(-M_PI / 2, 0, 0, Vec3(g.offset, 0, h));
    g.ee_in_object = Pose::from_rpy(M_PI, 0, 0, Vec3(g.offset, 0, h + 0.08));
  } else if (region.family == "side") {
    // Approach horizontally; pads on top and bottom, patch normal along +z.
    g.patch_in_object = Pose::make(Mat3::Identity(), Vec3(g.offset, 0, h / 2));
    g.ee_in_object = Pose::from_rpy(0, M_PI / 2, 0, Vec3(g.offset, -0.08, h / 2));
  } else if (region.family == "wrap") {
    // Fingers wrap the symmetry axis; equivalent annular patch normal to it.
    g.patch_in_object = Pose::make(Mat3::Identity(), Vec3(0, 0, h));
    g.ee_in_object = Pose::from_rpy(M_PI, 0, 0, Vec3(0, 0, h + 0.08));
  } else {
    throw InputError("unknown grasp family '" + region.family + "'");
  }
  return g;
}

bool footprint_in_region(const ObjectModel& obj, const Pose& pose, const SurfaceDef& region) {
  Vec3 local = region.pose.inverse().apply(pose.t);
  double fr = obj.shape.footprint_radius();
  return std::abs(local.x()) + fr <= region.w / 2 + 1e-9 &&
         std::abs(local.y()) + fr <= region.d / 2 + 1e-9;
}

std::optional<Pose> sample_placement(const Scene& scene, const ObjectModel& obj,
                                     const SurfaceDef& region, Rng& rng) {
  (void)scene;
  double fr = obj.shape.footprint_radius();
  double xr = region.w / 2 - fr;
  double yr = region.d / 2 - fr;
  if (xr < -1e-9 || yr < -1e-9) return std::nullopt;
  xr = std::max(xr, 0.0);
  yr = std::max(yr, 0.0);
  double lx = (xr > 0) ? rng.uniform(-xr, xr) : 0.0;
  double ly = (yr > 0) ? rng.uniform(-yr, yr) : 0.0;
  Pose p = region.pose * Pose::make(Mat3::Identity(), Vec3(lx, ly, 0));
  p.parent = "world";
  return p;
}

// ---------------------------------------------------------------------------
// Loading
// ---------------------------------------------------------------------------

namespace {
using nlohmann::json;

Vec3 read_vec3(const json& v) { return Vec3(v.at(0), v.at(1), v.at(2)); }

Pose read_pose(const json& v) {
  Vec3 xyz = v.contains("xyz") ? read_vec3(v["xyz"]) : Vec3::Zero();
  double yaw = v.value("yaw", 0.0);
  return Pose::from_rpy(0, 0, yaw, xyz);
}
}  // namespace

Scene Scene::from_json_text(const std::string& text, const std::string& arm_dir) {
  json j = json::parse(text);
  Scene s;
  for (const auto& jo : j.value("objects", json::array())) {
    ObjectModel o;
    o.name = jo.at("name");
    std::string kind = jo.value("shape", "box");
    if (kind == "cylinder") {
      o.shape.kind = Shape::Kind::Cylinder;
      o.shape.r = jo.at("r");
      o.shape.h = jo.at("h");
    } else {
      o.shape.kind = Shape::Kind::Box;
      o.shape.w = jo.at("w");
      o.shape.d = jo.at("d");
      o.shape.h = jo.at("h");
    }
    o.mass = jo.value("mass", 0.1);
    if (jo.contains("com")) o.com = read_vec3(jo["com"]);
    for (const auto& t : jo.value("tags", json::array())) o.tags.push_back(t);
    o.movable = jo.value("movable", true);
    o.graspable = jo.value("graspable", true);
    if (jo.contains("pose")) s.initial_poses[o.name] = read_pose(jo["pose"]);
    s.objects[o.name] = o;
  }
  for (const auto& js : j.value("surfaces", json::array())) {
    SurfaceDef sd;
    sd.name = js.at("name");
    sd.pose = read_pose(js.at("pose"));
    sd.w = js.at("w");
    sd.d = js.at("d");
    sd.default_friction = js.value("friction", 0.5);
    if (js.contains("friction_overrides")) {
      for (auto it = js["friction_overrides"].begin(); it != js["friction_overrides"].end(); ++it) {
        sd.friction[it.key()] = it.value();
      }
    }
    s.surfaces.push_back(sd);
  }
  for (const auto& ja : j.value("arms", json::array())) {
    ArmInstance a;
    a.name = ja.at("name");
    std::string file = ja.at("model");
    std::filesystem::path p(file);
    if (p.is_relative() && !arm_dir.empty()) p = std::filesystem::path(arm_dir) / p;
    a.model = ArmModel::load(p.string());
    if (ja.contains("base_xyz")) a.model.base = Pose::from_rpy(0, 0, ja.value("base_yaw", 0.0), read_vec3(ja["base_xyz"]));
    a.q0 = Configuration::zeros(a.model.dof());
    if (ja.contains("q0")) {
      for (int i = 0; i < a.q0.size() && i < static_cast<int>(ja["q0"].size()); ++i) a.q0.q[i] = ja["q0"][static_cast<size_t>(i)];
    }
    a.payload_fmax = ja.value("payload_fmax", 30.0);
    s.arms.push_back(std::move(a));
  }
  for (const auto& jc : j.value("rcontacts", json::array())) {
    RContactDef c;
    c.name = jc.at("name");
    c.arm = jc.at("arm");
    c.radius = jc.value("radius", 0.02);
    c.mu = jc.value("mu", 0.5);
    s.rcontacts.push_back(c);
  }
  for (const auto& jg : j.value("grasps", json::array())) {
    GraspRegionDef g;
    g.object = jg.at("object");
    g.family = jg.at("family");
    g.lo = jg.value("lo", 0.0);
    g.hi = jg.value("hi", 0.0);
    g.mu = jg.value("mu", 0.5);
    g.normal_force = jg.value("normal_force", 40.0);
    g.patch_radius = jg.value("patch_radius", 0.012);
    s.grasp_regions.push_back(g);
  }
  if (j.contains("vise")) {
    ViseDef v;
    v.name = j["vise"].value("name", "vise");
    v.region = j["vise"].at("region");
    v.mu = j["vise"].value("mu", 0.8);
    v.clamp_force = j["vise"].value("clamp_force", 60.0);
    v.patch_radius = j["vise"].value("patch_radius", 0.02);
    s.vise = v;
  }
  if (j.contains("friction_pairs")) {
    for (auto it = j["friction_pairs"].begin(); it != j["friction_pairs"].end(); ++it) {
      for (auto jt = it.value().begin(); jt != it.value().end(); ++jt) {
        s.friction_pairs[it.key()][jt.key()] = jt.value();
      }
    }
  }
  return s;
}

Scene Scene::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open scene file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  auto arm_dir = std::filesystem::path(path).parent_path().parent_path() / "arms";
  return from_json_text(ss.str(), arm_dir.string());
}

}  // namespace fmplan
