#pragma once

#include "densegrasp/geom/hull.hpp"
#include "densegrasp/geom/sampling.hpp"
#include "densegrasp/scenes/catalog.hpp"
#include "densegrasp/util/json_io.hpp"
#include "densegrasp/util/rng.hpp"

#include <algorithm>
#include <array>
#include <numbers>
#include <string>
#include <vector>

namespace densegrasp::scenes {

using geom::Mat3d;
using geom::RigidTransform;
using geom::Vec3d;
using util::json;

using Quaternion = std::array<double, 4>;  ///< [w, x, y, z]

/// Rigid pose stored as translation + quaternion; the rotation matrix is
/// always rebuilt from the quaternion so that a written pose reloads exactly.
struct Placement {
  Quaternion quaternion{1.0, 0.0, 0.0, 0.0};
  RigidTransform pose;
};

inline Placement make_placement(const Quaternion& q, const Vec3d& translation) {
  Placement p;
  p.quaternion = q;
  p.pose.rotation = util::quaternion_matrix(q);
  p.pose.translation = translation;
  return p;
}

/// A resting pose on z = 0: a random convex-hull facet under which the
/// centroid projects strictly inside is turned to face down (facets drawn
/// with probability proportional to area), then a random yaw is applied.
/// With `standard`, the largest stable facet is used with zero yaw. If no
/// facet is stable the largest facet is used. The result has x = y = 0.
inline Placement stable_pose(const TriMesh& mesh, std::uint64_t seed, bool standard = false) {
  const auto facets = geom::convex_hull(mesh.vertices());
  const Vec3d com = mesh.centroid();
  const double margin = 1e-9 * (1.0 + mesh.bounds().extent().maxCoeff());
  std::vector<std::size_t> stable;
  for (std::size_t f = 0; f < facets.size(); ++f)
    if (geom::projects_strictly_inside(facets[f], mesh.vertices(), com, margin)) stable.push_back(f);
  auto largest = [&](const std::vector<std::size_t>& set) {
    std::size_t best = set.front();
    for (std::size_t f : set)
      if (facets[f].area > facets[best].area) best = f;
    return best;
  };
  if (stable.empty()) {
    std::vector<std::size_t> all(facets.size());
    for (std::size_t f = 0; f < all.size(); ++f) all[f] = f;
    stable.push_back(largest(all));
  }

  util::Rng rng(seed);
  std::size_t chosen = stable.front();
  double yaw = 0.0;
  if (standard) {
    chosen = largest(stable);
  } else {
    double total = 0.0;
    for (std::size_t f : stable) total += facets[f].area;
    const double r = rng.uniform() * total;
    double acc = 0.0;
    chosen = stable.back();
    for (std::size_t f : stable) {
      acc += facets[f].area;
      if (r < acc) {
        chosen = f;
        break;
      }
    }
    yaw = rng.uniform(0.0, 2.0 * std::numbers::pi);
  }

  const Eigen::Quaterniond down = Eigen::Quaterniond::FromTwoVectors(facets[chosen].normal, -Vec3d::UnitZ());
  const Eigen::Quaterniond turn(Eigen::AngleAxisd(yaw, Vec3d::UnitZ()));
  const Mat3d r = (turn * down).normalized().toRotationMatrix();
  const auto q = util::matrix_quaternion(r);
  Placement p = make_placement(q, Vec3d::Zero());
  double zmin = std::numeric_limits<double>::infinity();
  for (const auto& v : mesh.vertices()) zmin = std::min(zmin, (p.pose.rotation * v).z());
  p.pose.translation.z() = -zmin;
  return p;
}

struct ObjectInstance {
  std::string mesh_id;
  Placement placement;
  Vec3d com = Vec3d::Zero();  ///< world centroid
  TriMesh world_mesh;

  const RigidTransform& pose() const { return placement.pose; }
};

inline ObjectInstance make_instance(const std::string& id, const Placement& placement) {
  ObjectInstance o;
  o.mesh_id = id;
  o.placement = placement;
  o.world_mesh = catalog_mesh(id).transformed(placement.pose);
  o.com = o.world_mesh.centroid();
  return o;
}

inline constexpr double kTableThickness = 0.04;

inline TriMesh make_table(double size_x, double size_y) {
  return geom::make_box({size_x, size_y, kTableThickness}, {0.0, 0.0, -0.5 * kTableThickness});
}

struct Scene {
  std::uint64_t seed = 0;
  double table_x = 0.5, table_y = 0.5;
  TriMesh table;
  std::vector<ObjectInstance> objects;
  std::vector<std::string> skipped;  ///< ids that found no collision-free spot

  /// Object meshes followed by the table.
  std::vector<TriMesh> meshes() const {
    std::vector<TriMesh> out;
    out.reserve(objects.size() + 1);
    for (const auto& o : objects) out.push_back(o.world_mesh);
    out.push_back(table);
    return out;
  }
  std::vector<TriMesh> object_meshes() const {
    std::vector<TriMesh> out;
    for (const auto& o : objects) out.push_back(o.world_mesh);
    return out;
  }
};

struct PlacementParams {
  double min_gap = 0.01;     ///< clearance between objects (m)
  int max_attempts = 100;
  int check_samples = 500;   ///< surface samples per object for the overlap test
  double tolerance = 1e-4;
  bool standard_pose = false;
};

/// True when every sampled surface point of `a` is at least `gap` outside `b`
/// (signed distance < -gap + tolerance semantics folded into `gap`).
inline bool separated(const geom::PointCloud& samples_a, const TriMesh& b, double limit) {
  for (const auto& p : samples_a.points)
    if (!(b.signed_distance(p) < limit)) return false;
  return true;
}

/// Places `count` objects drawn from `ids` (without replacement while the
/// catalog lasts) at uniform table positions in stable poses, rejecting
/// overlaps; an object that fails `max_attempts` times is skipped and
/// recorded.
inline Scene place_objects(const std::vector<std::string>& ids, int count, double table_x, double table_y,
                           std::uint64_t seed, const PlacementParams& pp = {}) {
  if (count < 1) throw ValidationError("place_objects needs count >= 1");
  if (ids.empty()) throw ValidationError("place_objects needs a non-empty catalog");
  Scene scene;
  scene.seed = seed;
  scene.table_x = table_x;
  scene.table_y = table_y;
  scene.table = make_table(table_x, table_y);
  util::Rng rng(seed);

  std::vector<std::string> order = ids;
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[static_cast<std::size_t>(rng.index(i))]);

  std::vector<geom::PointCloud> samples;
  const double gap_limit = -pp.min_gap + pp.tolerance;
  for (int k = 0; k < count; ++k) {
    const std::string& id = order[static_cast<std::size_t>(k) % order.size()];
    const TriMesh mesh = catalog_mesh(id);
    bool placed = false;
    for (int attempt = 0; attempt < pp.max_attempts && !placed; ++attempt) {
      Placement pl = stable_pose(mesh, rng.bits(), pp.standard_pose);
      geom::Aabb foot;
      for (const auto& v : mesh.vertices()) foot.grow(pl.pose.rotation * v);
      auto pick = [&](double half, double lo, double hi) {
        const double a = -half - lo, b = half - hi;
        return a <= b ? rng.uniform(a, b) : 0.5 * (a + b);
      };
      const double x = pick(0.5 * table_x, foot.lo.x(), foot.hi.x());
      const double y = pick(0.5 * table_y, foot.lo.y(), foot.hi.y());
      pl = make_placement(pl.quaternion, {x, y, pl.pose.translation.z()});
      ObjectInstance inst = make_instance(id, pl);
      const auto s = geom::sample_surface(inst.world_mesh, static_cast<std::size_t>(pp.check_samples), rng.bits());
      bool ok = separated(s, scene.table, pp.tolerance);
      for (std::size_t o = 0; ok && o < scene.objects.size(); ++o) {
        if (!inst.world_mesh.bounds().overlaps(scene.objects[o].world_mesh.bounds(), pp.min_gap)) continue;
        ok = separated(s, scene.objects[o].world_mesh, gap_limit) && separated(samples[o], inst.world_mesh, gap_limit);
      }
      if (!ok) continue;
      scene.objects.push_back(std::move(inst));
      samples.push_back(s);
      placed = true;
    }
    if (!placed) scene.skipped.push_back(id);
  }
  return scene;
}

/// Post-hoc invariant: sampled surface points of every object lie less than
/// `tolerance` inside every other mesh (objects and table).
inline bool scene_is_separated(const Scene& scene, std::size_t samples = 500, double tolerance = 1e-4, std::uint64_t seed = 99) {
  const auto meshes = scene.meshes();
  for (std::size_t a = 0; a < scene.objects.size(); ++a) {
    const auto s = geom::sample_surface(scene.objects[a].world_mesh, samples, util::derive_seed(seed, a));
    for (std::size_t b = 0; b < meshes.size(); ++b)
      if (b != a && !separated(s, meshes[b], tolerance)) return false;
  }
  return true;
}

inline json scene_to_json(const Scene& s) {
  json j;
  j["seed"] = s.seed;
  j["table"] = {{"size", {s.table_x, s.table_y, kTableThickness}}};
  json objs = json::array();
  for (const auto& o : s.objects)
    objs.push_back({{"mesh_id", o.mesh_id},
                    {"translation", util::vec3_json(o.pose().translation)},
                    {"quaternion", util::quaternion_json(o.placement.quaternion)},
                    {"com", util::vec3_json(o.com)}});
  j["objects"] = objs;
  j["skipped"] = s.skipped;
  return j;
}

inline Scene scene_from_json(const json& j) {
  Scene s;
  const json& seed = util::field(j, "seed");
  if (!seed.is_number_unsigned() && !seed.is_number_integer()) throw ParseError("expected an integer", 0, "seed");
  s.seed = seed.get<std::uint64_t>();
  const Vec3d size = util::get_vec3(util::field(j, "table"), "size");
  if (!(size.x() > 0.0 && size.y() > 0.0)) throw ParseError("table size must be positive", 0, "table.size");
  s.table_x = size.x();
  s.table_y = size.y();
  s.table = make_table(s.table_x, s.table_y);
  for (const auto& o : util::field(j, "objects")) {
    const std::string id = util::get_string(o, "mesh_id");
    s.objects.push_back(make_instance(id, make_placement(util::get_quaternion(o, "quaternion"), util::get_vec3(o, "translation"))));
  }
  if (j.contains("skipped"))
    for (const auto& id : j.at("skipped")) s.skipped.push_back(id.get<std::string>());
  return s;
}

}  // namespace densegrasp::scenes
