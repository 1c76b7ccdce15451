#pragma once

#include "densegrasp/errors.hpp"
#include "densegrasp/geom/mesh.hpp"
#include "densegrasp/util/rng.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace densegrasp::geom {

/// Uniform point on triangle (a, b, c) from two uniforms.
inline Vec3d triangle_point(const Vec3d& a, const Vec3d& b, const Vec3d& c, double u1, double u2) {
  const double s = std::sqrt(u1);
  return (1.0 - s) * a + s * (1.0 - u2) * b + s * u2 * c;
}

/// Area-weighted surface samples with face normals. Deterministic in `seed`.
/// Faces are chosen by systematic sampling (one uniform per stratum of the
/// area CDF), so each face receives its area share of `n` to within one point.
/// `face_filter`, when non-empty, restricts sampling to faces with a true entry.
inline PointCloud sample_surface(const TriMesh& mesh, std::size_t n, std::uint64_t seed,
                                 const std::vector<bool>& face_filter = {}) {
  if (n < 1) throw ValidationError("sample_surface needs n >= 1");
  std::vector<double> cdf(mesh.num_faces());
  double acc = 0.0;
  for (std::size_t f = 0; f < mesh.num_faces(); ++f) {
    if (face_filter.empty() || face_filter[f]) acc += mesh.face_areas()[f];
    cdf[f] = acc;
  }
  if (!(acc > 0.0)) throw ValidationError("sample_surface: no faces to sample");
  util::Rng rng(seed);
  PointCloud out;
  out.points.reserve(n);
  out.normals.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = (static_cast<double>(i) + rng.uniform()) / static_cast<double>(n) * acc;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), r);
    if (it == cdf.end()) --it;
    auto f = static_cast<int>(it - cdf.begin());
    while (!face_filter.empty() && !face_filter[static_cast<std::size_t>(f)]) ++f;
    const double u1 = rng.uniform(), u2 = rng.uniform();
    out.points.push_back(triangle_point(mesh.vertex(f, 0), mesh.vertex(f, 1), mesh.vertex(f, 2), u1, u2));
    out.normals.push_back(mesh.face_normals()[static_cast<std::size_t>(f)]);
  }
  return out;
}

/// Greedy farthest-point sampling: starts at `start`, then repeatedly takes
/// the point maximizing the distance to the chosen set (lowest index on ties).
inline std::vector<std::size_t> farthest_point_sampling(std::span<const Vec3d> points, std::size_t k,
                                                        std::size_t start = 0) {
  if (k < 1 || k > points.size()) throw InvalidK("farthest_point_sampling: k out of range");
  if (start >= points.size()) throw InvalidK("farthest_point_sampling: start index out of range");
  std::vector<std::size_t> chosen;
  chosen.reserve(k);
  std::vector<double> dist(points.size(), std::numeric_limits<double>::infinity());
  std::vector<bool> taken(points.size(), false);
  std::size_t current = start;
  for (std::size_t step = 0; step < k; ++step) {
    chosen.push_back(current);
    taken[current] = true;
    const Vec3d& c = points[current];
    std::size_t next = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      const double d = (points[i] - c).squaredNorm();
      if (d < dist[i]) dist[i] = d;
      if (!taken[i] && dist[i] > best) {
        best = dist[i];
        next = i;
      }
    }
    current = next;
  }
  return chosen;
}

inline std::vector<std::size_t> farthest_point_sampling(const PointCloud& cloud, std::size_t k, std::size_t start = 0) {
  return farthest_point_sampling(std::span<const Vec3d>(cloud.points), k, start);
}

}  // namespace densegrasp::geom
