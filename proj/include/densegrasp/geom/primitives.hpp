#pragma once

// Procedural watertight meshes used for hand links and the bundled object set.

#include "densegrasp/geom/mesh.hpp"

#include <map>
#include <numbers>
#include <utility>

namespace densegrasp::geom {

/// Axis-aligned box with the given full extents, centered at `center`.
inline TriMesh make_box(const Vec3d& size, const Vec3d& center = Vec3d::Zero()) {
  const Vec3d h = 0.5 * size;
  std::vector<Vec3d> v;
  for (int i = 0; i < 8; ++i)
    v.push_back(center + Vec3d((i & 1) ? h.x() : -h.x(), (i & 2) ? h.y() : -h.y(), (i & 4) ? h.z() : -h.z()));
  // Corner index bits: x=1, y=2, z=4. Faces wound counter-clockwise from outside.
  std::vector<Face> f = {
      {0, 2, 3}, {0, 3, 1},  // -z
      {4, 5, 7}, {4, 7, 6},  // +z
      {0, 1, 5}, {0, 5, 4},  // -y
      {2, 6, 7}, {2, 7, 3},  // +y
      {0, 4, 6}, {0, 6, 2},  // -x
      {1, 3, 7}, {1, 7, 5},  // +x
  };
  return TriMesh::create(std::move(v), std::move(f));
}

/// Frustum along z from z=0 (radius r0) to z=height (radius r1), closed by
/// fan caps. r1 may be 0 for a cone (apex vertex).
inline TriMesh make_frustum(double r0, double r1, double height, int segments = 24) {
  std::vector<Vec3d> v;
  std::vector<Face> f;
  const int n = segments;
  for (int i = 0; i < n; ++i) {
    const double a = 2.0 * std::numbers::pi * i / n;
    v.emplace_back(r0 * std::cos(a), r0 * std::sin(a), 0.0);
  }
  const bool apex = r1 <= 0.0;
  if (!apex) {
    for (int i = 0; i < n; ++i) {
      const double a = 2.0 * std::numbers::pi * i / n;
      v.emplace_back(r1 * std::cos(a), r1 * std::sin(a), height);
    }
  }
  const int bottom_center = static_cast<int>(v.size());
  v.emplace_back(0.0, 0.0, 0.0);
  const int top_center = static_cast<int>(v.size());
  v.emplace_back(0.0, 0.0, height);
  for (int i = 0; i < n; ++i) {
    const int j = (i + 1) % n;
    f.push_back({bottom_center, j, i});
    if (apex) {
      f.push_back({i, j, top_center});
    } else {
      f.push_back({i, j, n + j});
      f.push_back({i, n + j, n + i});
      f.push_back({top_center, n + i, n + j});
    }
  }
  return TriMesh::create(std::move(v), std::move(f));
}

/// Cylinder along z, centered at the origin.
inline TriMesh make_cylinder(double radius, double height, int segments = 24) {
  const TriMesh m = make_frustum(radius, radius, height, segments);
  RigidTransform t;
  t.translation = Vec3d(0, 0, -0.5 * height);
  return m.transformed(t);
}

/// Subdivided icosahedron projected onto a sphere.
inline TriMesh make_sphere(double radius, int subdivisions = 2) {
  const double g = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3d> v = {{-1, g, 0}, {1, g, 0}, {-1, -g, 0}, {1, -g, 0}, {0, -1, g}, {0, 1, g},
                          {0, -1, -g}, {0, 1, -g}, {g, 0, -1}, {g, 0, 1}, {-g, 0, -1}, {-g, 0, 1}};
  for (auto& p : v) p.normalize();
  std::vector<Face> f = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
                         {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
                         {3, 8, 9},   {4, 9, 5},  {2, 4, 11}, {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<int, int>, int> mid;
    auto midpoint = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      const auto it = mid.find(key);
      if (it != mid.end()) return it->second;
      v.push_back((v[static_cast<std::size_t>(a)] + v[static_cast<std::size_t>(b)]).normalized());
      const int id = static_cast<int>(v.size()) - 1;
      mid.emplace(key, id);
      return id;
    };
    std::vector<Face> next;
    for (const auto& t : f) {
      const int ab = midpoint(t[0], t[1]), bc = midpoint(t[1], t[2]), ca = midpoint(t[2], t[0]);
      next.push_back({t[0], ab, ca});
      next.push_back({t[1], bc, ab});
      next.push_back({t[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    f = std::move(next);
  }
  for (auto& p : v) p *= radius;
  return TriMesh::create(std::move(v), std::move(f));
}

/// L-shaped prism (union of two boxes sharing a corner block), extruded along z
/// and centered on its bounding box. `a` is the long leg length, `b` the short
/// leg length, `w` the leg width.
inline TriMesh make_l_prism(double a, double b, double w, double height) {
  // Counter-clockwise outline; vertex 3 is the reflex corner, from which
  // the outline is star-shaped.
  const std::vector<Vec3d> outline = {{0, 0, 0}, {a, 0, 0}, {a, w, 0}, {w, w, 0}, {w, b, 0}, {0, b, 0}};
  const int n = static_cast<int>(outline.size());
  std::vector<Vec3d> v;
  for (const auto& p : outline) v.push_back(p);
  for (const auto& p : outline) v.emplace_back(p.x(), p.y(), height);
  std::vector<Face> f;
  const int pivot = 3;
  for (int i = 0; i < n; ++i) {
    const int j = (i + 1) % n;
    if (i != pivot && j != pivot) {
      f.push_back({pivot, j, i});              // bottom (facing -z)
      f.push_back({n + pivot, n + i, n + j});  // top
    }
    f.push_back({i, j, n + j});
    f.push_back({i, n + j, n + i});
  }
  RigidTransform t;
  t.translation = Vec3d(-0.5 * a, -0.5 * b, -0.5 * height);
  return TriMesh::create(std::move(v), std::move(f)).transformed(t);
}

}  // namespace densegrasp::geom
