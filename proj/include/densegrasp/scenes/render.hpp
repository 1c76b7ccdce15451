#pragma once

#include "densegrasp/geom/sampling.hpp"
#include "densegrasp/scenes/scene.hpp"

#include <cmath>
#include <limits>
#include <span>

namespace densegrasp::scenes {

struct CameraSpec {
  Vec3d position = Vec3d(0.0, 0.0, 1.0);
  Vec3d look_at = Vec3d::Zero();
  Vec3d up = Vec3d::UnitZ();
  int width = 160;
  int height = 120;
  double fov_y = std::numbers::pi / 3.0;  ///< vertical field of view (rad)

  void validate() const {
    const Vec3d f = look_at - position;
    if (!(f.norm() > 0.0)) throw ValidationError("camera look direction is zero");
    if (!(f.normalized().cross(up).norm() > 1e-9)) throw ValidationError("camera up vector is parallel to the view");
    if (width < 1 || height < 1) throw ValidationError("camera image must be at least 1x1");
    if (!(fov_y > 0.0 && fov_y < std::numbers::pi)) throw ValidationError("camera fov must lie in (0, pi)");
  }

  /// Unit ray direction through the center of pixel (u, v); v grows downwards.
  Vec3d ray(int u, int v) const {
    const Vec3d f = (look_at - position).normalized();
    const Vec3d r = f.cross(up).normalized();
    const Vec3d t = r.cross(f);
    const double h = std::tan(0.5 * fov_y);
    const double aspect = static_cast<double>(width) / height;
    const double x = (2.0 * (u + 0.5) / width - 1.0) * h * aspect;
    const double y = (1.0 - 2.0 * (v + 0.5) / height) * h;
    return (f + x * r + y * t).normalized();
  }
};

struct RigParams {
  int width = 160;
  int height = 120;
  double fov_y = std::numbers::pi / 3.0;
  double elevation = std::numbers::pi / 4.0;
};

/// Four cameras over the midpoints of the table sides, looking at the table center.
inline std::vector<CameraSpec> default_rig(double table_x, double table_y, const RigParams& rp = {}) {
  std::vector<CameraSpec> cams;
  const double hx = 0.5 * table_x, hy = 0.5 * table_y;
  const Vec3d sides[4] = {{hx, 0, 0}, {0, hy, 0}, {-hx, 0, 0}, {0, -hy, 0}};
  for (const auto& s : sides) {
    CameraSpec c;
    c.position = s + Vec3d(0, 0, s.norm() * std::tan(rp.elevation));
    c.look_at = Vec3d::Zero();
    c.up = Vec3d::UnitZ();
    c.width = rp.width;
    c.height = rp.height;
    c.fov_y = rp.fov_y;
    cams.push_back(c);
  }
  return cams;
}

struct DepthImage {
  int width = 0, height = 0;
  std::vector<double> depth;   ///< distance along the ray; +inf on a miss
  std::vector<Vec3d> normals;  ///< hit face normal
  std::vector<int> hit;        ///< mesh index, -1 on a miss

  std::size_t at(int u, int v) const { return static_cast<std::size_t>(v) * static_cast<std::size_t>(width) + static_cast<std::size_t>(u); }
};

/// Closest hit per pixel over all meshes (ties to the lower mesh index).
inline DepthImage render_depth(std::span<const TriMesh> meshes, const CameraSpec& cam) {
  cam.validate();
  DepthImage img;
  img.width = cam.width;
  img.height = cam.height;
  const auto n = static_cast<std::size_t>(cam.width) * static_cast<std::size_t>(cam.height);
  img.depth.assign(n, std::numeric_limits<double>::infinity());
  img.normals.assign(n, Vec3d::Zero());
  img.hit.assign(n, -1);
  for (int v = 0; v < cam.height; ++v)
    for (int u = 0; u < cam.width; ++u) {
      const Vec3d dir = cam.ray(u, v);
      const std::size_t k = img.at(u, v);
      for (std::size_t m = 0; m < meshes.size(); ++m) {
        const auto h = meshes[m].raycast(cam.position, dir, img.depth[k]);
        if (h && h->t < img.depth[k]) {
          img.depth[k] = h->t;
          img.normals[k] = meshes[m].face_normals()[static_cast<std::size_t>(h->face)];
          img.hit[k] = static_cast<int>(m);
        }
      }
    }
  return img;
}

inline DepthImage render_depth(const Scene& scene, const CameraSpec& cam) {
  const auto meshes = scene.meshes();
  return render_depth(std::span<const TriMesh>(meshes), cam);
}

inline constexpr std::size_t kCloudPoints = 2048;

/// Back-projects object hits from every camera (table hits dropped) and
/// reduces them to exactly `n` points: farthest-point sampling from a seeded
/// start, or padding by seeded resampling when there are too few hits.
inline geom::PointCloud fuse_point_cloud(const Scene& scene, std::span<const CameraSpec> cams, std::uint64_t seed,
                                         std::size_t n = kCloudPoints) {
  const auto meshes = scene.meshes();
  const int table_index = static_cast<int>(scene.objects.size());
  geom::PointCloud raw;
  for (const auto& cam : cams) {
    const DepthImage img = render_depth(std::span<const TriMesh>(meshes), cam);
    for (int v = 0; v < img.height; ++v)
      for (int u = 0; u < img.width; ++u) {
        const std::size_t k = img.at(u, v);
        if (img.hit[k] < 0 || img.hit[k] == table_index) continue;
        raw.points.push_back(cam.position + img.depth[k] * cam.ray(u, v));
        raw.normals.push_back(img.normals[k]);
      }
  }
  if (raw.points.empty()) throw EmptyView("no object pixel visible in any camera");
  util::Rng rng(seed);
  geom::PointCloud out;
  if (raw.size() >= n) {
    const auto idx = geom::farthest_point_sampling(raw, n, static_cast<std::size_t>(rng.index(raw.size())));
    for (std::size_t i : idx) {
      out.points.push_back(raw.points[i]);
      out.normals.push_back(raw.normals[i]);
    }
  } else {
    out = raw;
    while (out.size() < n) {
      const auto i = static_cast<std::size_t>(rng.index(raw.size()));
      out.points.push_back(raw.points[i]);
      out.normals.push_back(raw.normals[i]);
    }
  }
  return out;
}

}  // namespace densegrasp::scenes
