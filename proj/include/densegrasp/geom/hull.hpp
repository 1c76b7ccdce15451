#pragma once

#include "densegrasp/errors.hpp"
#include "densegrasp/geom/types.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <vector>

namespace densegrasp::geom {

/// A planar face of a convex hull: coplanar hull triangles merged together.
struct HullFacet {
  Vec3d normal;   ///< outward unit normal
  double offset;  ///< plane: normal·x = offset
  double area = 0.0;
  std::vector<std::array<int, 3>> triangles;  ///< indices into the input points
};

/// Incremental 3D convex hull, O(n²). Throws NoStableFace when the points
/// are (near-)coplanar and no volume can be enclosed.
inline std::vector<HullFacet> convex_hull(const std::vector<Vec3d>& pts) {
  const auto n = static_cast<int>(pts.size());
  if (n < 4) throw NoStableFace("convex hull needs at least four points");
  Aabb box;
  for (const auto& p : pts) box.grow(p);
  const double scale = std::max(box.extent().maxCoeff(), 1e-300);
  const double eps = 1e-10 * scale;

  // Initial tetrahedron.
  int i0 = 0;
  for (int i = 1; i < n; ++i)
    if (pts[static_cast<std::size_t>(i)].x() < pts[static_cast<std::size_t>(i0)].x()) i0 = i;
  auto P = [&](int i) -> const Vec3d& { return pts[static_cast<std::size_t>(i)]; };
  int i1 = -1;
  double best = eps;
  for (int i = 0; i < n; ++i) {
    const double d = (P(i) - P(i0)).norm();
    if (d > best) { best = d; i1 = i; }
  }
  if (i1 < 0) throw NoStableFace("convex hull: all points coincide");
  int i2 = -1;
  best = eps;
  const Vec3d dir01 = (P(i1) - P(i0)).normalized();
  for (int i = 0; i < n; ++i) {
    const double d = dir01.cross(P(i) - P(i0)).norm();
    if (d > best) { best = d; i2 = i; }
  }
  if (i2 < 0) throw NoStableFace("convex hull: points are collinear");
  const Vec3d n012 = (P(i1) - P(i0)).cross(P(i2) - P(i0)).normalized();
  int i3 = -1;
  best = eps;
  for (int i = 0; i < n; ++i) {
    const double d = std::abs(n012.dot(P(i) - P(i0)));
    if (d > best) { best = d; i3 = i; }
  }
  if (i3 < 0) throw NoStableFace("convex hull: points are coplanar");

  struct Tri {
    std::array<int, 3> v;
    Vec3d n;
    double d;
    bool alive = true;
  };
  std::vector<Tri> tris;
  const Vec3d interior = (P(i0) + P(i1) + P(i2) + P(i3)) / 4.0;
  auto add = [&](int a, int b, int c) {
    Vec3d nn = (P(b) - P(a)).cross(P(c) - P(a));
    const double len = nn.norm();
    nn /= len;
    Tri t{{a, b, c}, nn, nn.dot(P(a))};
    if (t.n.dot(interior) - t.d > 0) {
      std::swap(t.v[1], t.v[2]);
      t.n = -t.n;
      t.d = -t.d;
    }
    tris.push_back(t);
  };
  add(i0, i1, i2);
  add(i0, i1, i3);
  add(i0, i2, i3);
  add(i1, i2, i3);

  for (int p = 0; p < n; ++p) {
    if (p == i0 || p == i1 || p == i2 || p == i3) continue;
    std::vector<std::size_t> visible;
    for (std::size_t t = 0; t < tris.size(); ++t)
      if (tris[t].alive && tris[t].n.dot(P(p)) - tris[t].d > eps) visible.push_back(t);
    if (visible.empty()) continue;
    std::map<std::pair<int, int>, int> edges;  // directed edge -> count among visible faces
    for (std::size_t t : visible) {
      for (int k = 0; k < 3; ++k) edges[{tris[t].v[static_cast<std::size_t>(k)], tris[t].v[static_cast<std::size_t>((k + 1) % 3)]}]++;
      tris[t].alive = false;
    }
    for (const auto& [e, cnt] : edges) {
      if (edges.count({e.second, e.first}) == 0) {
        Vec3d nn = (P(e.second) - P(e.first)).cross(P(p) - P(e.first));
        const double len = nn.norm();
        if (!(len > 0.0)) continue;
        nn /= len;
        tris.push_back(Tri{{e.first, e.second, p}, nn, nn.dot(P(p))});
      }
    }
  }

  std::vector<HullFacet> facets;
  for (const auto& t : tris) {
    if (!t.alive) continue;
    const double area = 0.5 * (P(t.v[1]) - P(t.v[0])).cross(P(t.v[2]) - P(t.v[0])).norm();
    HullFacet* target = nullptr;
    for (auto& f : facets)
      if (f.normal.dot(t.n) > 1.0 - 1e-9 && std::abs(f.offset - t.d) <= 1e-9 * scale) target = &f;
    if (!target) {
      facets.push_back(HullFacet{t.n, t.d, 0.0, {}});
      target = &facets.back();
    }
    target->area += area;
    target->triangles.push_back(t.v);
  }
  return facets;
}

/// True iff the orthogonal projection of `point` onto the facet plane lies
/// strictly inside the facet (farther than `margin` from its boundary).
inline bool projects_strictly_inside(const HullFacet& facet, const std::vector<Vec3d>& pts, const Vec3d& point,
                                     double margin) {
  const Vec3d q = point - (facet.normal.dot(point) - facet.offset) * facet.normal;
  auto P = [&](int i) -> const Vec3d& { return pts[static_cast<std::size_t>(i)]; };
  bool inside = false;
  for (const auto& t : facet.triangles) {
    const Vec3d a = P(t[0]), b = P(t[1]), c = P(t[2]);
    const double w0 = (b - a).cross(q - a).dot(facet.normal);
    const double w1 = (c - b).cross(q - b).dot(facet.normal);
    const double w2 = (a - c).cross(q - c).dot(facet.normal);
    if (w0 >= 0 && w1 >= 0 && w2 >= 0) inside = true;
  }
  if (!inside) return false;
  // Boundary edges: those not shared (in reverse) by another facet triangle.
  std::map<std::pair<int, int>, int> edge_count;
  for (const auto& t : facet.triangles)
    for (int k = 0; k < 3; ++k) edge_count[{t[static_cast<std::size_t>(k)], t[static_cast<std::size_t>((k + 1) % 3)]}]++;
  for (const auto& [e, cnt] : edge_count) {
    if (edge_count.count({e.second, e.first})) continue;
    const Vec3d a = P(e.first), b = P(e.second);
    const Vec3d ab = b - a;
    const double s = std::clamp((q - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
    if ((q - (a + s * ab)).norm() <= margin) return false;
  }
  return true;
}

}  // namespace densegrasp::geom
