#pragma once

#include "densegrasp/hand/hand_model.hpp"

#include <limits>
#include <span>

namespace densegrasp::hand {

/// Largest signed distance (positive = penetration) of the collision points
/// on `links` into any of `meshes`. Points farther than `margin` outside every
/// mesh bounding box are skipped; returns -inf when nothing is that close.
inline double max_signed_distance(const HandModel& hand, std::span<const RigidTransform> poses,
                                  std::span<const TriMesh> meshes, std::span<const int> links, double margin) {
  double best = -std::numeric_limits<double>::infinity();
  for (int l : links) {
    const auto& idx = hand.points_of_link(l);
    if (idx.empty()) continue;
    const auto& pose = poses[static_cast<std::size_t>(l)];
    const geom::Aabb box = hand.point_bounds(l).transformed(pose);
    for (const auto& mesh : meshes) {
      if (!box.overlaps(mesh.bounds(), margin)) continue;
      for (int i : idx) {
        const Vec3d p = pose.apply(hand.collision_points[static_cast<std::size_t>(i)].position);
        if (!mesh.bounds().contains(p, margin)) continue;
        best = std::max(best, mesh.signed_distance(p));
      }
    }
  }
  return best;
}

inline std::vector<int> all_links(const HandModel& hand) {
  std::vector<int> out(hand.num_links());
  for (std::size_t l = 0; l < out.size(); ++l) out[l] = static_cast<int>(l);
  return out;
}

struct ClosingParams {
  double tolerance = 1e-4;   ///< stop once the subtree is within this distance of a surface
  double clearance = 1e-6;   ///< configurations closer than this count as blocked
  double sweep_step = 0.05;  ///< coarse step (rad) so thin objects are not swept through
};

/// Closes every joint flagged `closes`, parents first: each joint sweeps from
/// its current angle towards limit_max and stops where its subtree first
/// touches a mesh (binary search to `tolerance`). Joints that start blocked
/// are left as they are.
inline JointVector close_until_contact(const HandModel& hand, const RigidTransform& palm_pose, JointVector theta,
                                       std::span<const TriMesh> meshes, const ClosingParams& cp = {}) {
  theta = clamp_joints(hand, theta);
  for (int j : hand.traversal_order()) {
    const auto& js = hand.joints[static_cast<std::size_t>(j)];
    if (!js.closes) continue;
    const auto& links = hand.subtree(j);
    auto gap = [&](double v) {
      theta[j] = v;
      const auto poses = forward_kinematics(hand, palm_pose, theta);
      return max_signed_distance(hand, poses, meshes, links, cp.tolerance);
    };
    auto blocked = [&](double v) { return gap(v) > -cp.clearance; };

    const double start = theta[j];
    if (blocked(start)) {
      theta[j] = start;
      continue;
    }
    double lo = start, hi = js.limit_max;
    bool hit = false;
    for (double v = start + cp.sweep_step;; v += cp.sweep_step) {
      const double c = std::min(v, js.limit_max);
      if (blocked(c)) {
        hi = c;
        hit = true;
        break;
      }
      lo = c;
      if (c >= js.limit_max) break;
    }
    if (!hit) {
      theta[j] = js.limit_max;
      continue;
    }
    for (int it = 0; it < 200 && gap(lo) < -cp.tolerance && hi - lo > 1e-15; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (blocked(mid)) hi = mid;
      else lo = mid;
    }
    theta[j] = lo;
  }
  return theta;
}

}  // namespace densegrasp::hand
