#pragma once

#include "densegrasp/losses/diff.hpp"

#include <cmath>
#include <limits>
#include <span>

namespace densegrasp::losses {

/// Squared 27-space distance to the closest matched label. The grasp vector
/// is compared raw (unclamped joints, unnormalized a/b).
inline DiffValue chamfer_loss(const GraspConfig& g, std::span<const GraspLabel> matched, const HandModel& hand) {
  if (matched.empty()) throw EmptyLabelSet("chamfer loss needs at least one matched label");
  if (static_cast<std::size_t>(g.theta.size()) != hand.dof()) throw DimensionMismatch("grasp joint count does not match hand");
  const Eigen::VectorXd x = grasp::flatten(g);
  double best = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_y;
  std::int64_t arg = -1;
  for (std::size_t l = 0; l < matched.size(); ++l) {
    if (matched[l].theta.size() != g.theta.size()) throw DimensionMismatch("label joint count does not match grasp");
    Eigen::VectorXd y = grasp::label_vector(matched[l], g.anchor);
    const double d2 = (x - y).squaredNorm();
    if (d2 < best) {
      best = d2;
      best_y = std::move(y);
      arg = static_cast<std::int64_t>(l);
    }
  }
  return {best, 2.0 * (x - best_y), {arg}};
}

/// Number of distance fields the collision loss averages over.
inline std::size_t collision_mesh_count(const HandModel& hand, std::size_t scene_meshes, bool self_collision) {
  return scene_meshes + (self_collision ? hand.num_mesh_links() : 0);
}

namespace detail {

inline void add_depth(double d, const Vec3d& u, const Vec3<Jet>& pj, Eigen::Index n, double& sum, Eigen::VectorXd& grad) {
  sum += d * d;
  grad += (2.0 * d) * (u[0] * pj[0].d + u[1] * pj[1].d + u[2] * pj[2].d).head(n);
}

inline void push_query(std::vector<std::int64_t>& sel, std::int64_t mesh, std::int64_t point, const geom::SurfaceQuery& q) {
  sel.insert(sel.end(), {mesh, point, q.face, static_cast<std::int64_t>(q.feature)});
}

}  // namespace detail

/// Mean squared penetration of the 2000 collision points into the scene
/// meshes and, with self_collision, into the hand's own link meshes (a
/// point's own link and its jointed neighbours excluded).
inline DiffValue collision_loss(const PoseEval& pe, const HandModel& hand, std::span<const TriMesh> meshes,
                                bool self_collision = true) {
  const std::size_t L = collision_mesh_count(hand, meshes.size(), self_collision);
  DiffValue out = DiffValue::zero(pe.n);
  out.selection = pe.clamp_signature;
  if (L == 0) return out;
  double sum = 0.0;

  std::vector<geom::Aabb> point_boxes(hand.num_links());
  for (std::size_t l = 0; l < hand.num_links(); ++l)
    if (!hand.points_of_link(static_cast<int>(l)).empty()) point_boxes[l] = hand.point_bounds(static_cast<int>(l)).transformed(pe.values[l]);

  for (std::size_t m = 0; m < meshes.size(); ++m) {
    const auto& mesh = meshes[m];
    for (std::size_t l = 0; l < hand.num_links(); ++l) {
      const auto& idx = hand.points_of_link(static_cast<int>(l));
      if (idx.empty() || !point_boxes[l].overlaps(mesh.bounds())) continue;
      for (int i : idx) {
        const auto& hp = hand.collision_points[static_cast<std::size_t>(i)];
        const Vec3d p = pe.values[l].apply(hp.position);
        if (!mesh.bounds().contains(p)) continue;
        const auto q = mesh.closest(p);
        if (!(q.distance > 0.0)) continue;
        const Vec3d u = (p - q.point) / (p - q.point).norm();
        detail::add_depth(q.distance, u, pe.point_jet(hp), pe.n, sum, out.gradient);
        detail::push_query(out.selection, static_cast<std::int64_t>(m), i, q);
      }
    }
  }

  if (self_collision) {
    for (std::size_t k = 0; k < hand.num_links(); ++k) {
      const auto& link_mesh = hand.links[k].mesh;
      if (!link_mesh) continue;
      const geom::Aabb world_box = link_mesh->bounds().transformed(pe.values[k]);
      for (std::size_t l = 0; l < hand.num_links(); ++l) {
        const auto& idx = hand.points_of_link(static_cast<int>(l));
        if (idx.empty() || hand.self_excluded(static_cast<int>(l), static_cast<int>(k)) || !point_boxes[l].overlaps(world_box)) continue;
        for (int i : idx) {
          const auto& hp = hand.collision_points[static_cast<std::size_t>(i)];
          const Vec3d p = pe.values[k].apply_inverse(pe.values[l].apply(hp.position));
          if (!link_mesh->bounds().contains(p)) continue;
          const auto q = link_mesh->closest(p);
          if (!(q.distance > 0.0)) continue;
          const Vec3d u = (p - q.point) / (p - q.point).norm();
          const Vec3<Jet> pj = pe.links[k].apply_inverse(pe.point_jet(hp));
          detail::add_depth(q.distance, u, pj, pe.n, sum, out.gradient);
          detail::push_query(out.selection, static_cast<std::int64_t>(1000000 + k), i, q);
        }
      }
    }
  }

  const double norm = 1.0 / (static_cast<double>(hand::kCollisionPointCount) * static_cast<double>(L));
  out.value = sum * norm;
  out.gradient *= norm;
  return out;
}

inline DiffValue collision_loss(const GraspConfig& g, const HandModel& hand, std::span<const TriMesh> meshes,
                                bool self_collision = true) {
  return collision_loss(evaluate_pose(g, hand), hand, meshes, self_collision);
}

/// Closest point over a set of meshes treated as one; ties go to the lower
/// mesh index. Returns the mesh index (or -1 when there are no meshes).
inline std::pair<int, geom::SurfaceQuery> closest_over(std::span<const TriMesh> meshes, const Vec3d& p) {
  int best_m = -1;
  geom::SurfaceQuery best;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (std::size_t m = 0; m < meshes.size(); ++m) {
    if (meshes[m].empty() || meshes[m].bounds().squared_distance(p) > best_d2) continue;
    const auto q = meshes[m].closest(p);
    const double d2 = (p - q.point).squaredNorm();
    if (d2 < best_d2) {
      best_d2 = d2;
      best = q;
      best_m = static_cast<int>(m);
    }
  }
  return {best_m, best};
}

/// Sum of squared distances from the 45 inner points to the closest scene
/// surface. The closest point is held fixed when differentiating.
inline DiffValue guidance_loss(const PoseEval& pe, const HandModel& hand, std::span<const TriMesh> meshes) {
  DiffValue out = DiffValue::zero(pe.n);
  out.selection = pe.clamp_signature;
  for (std::size_t i = 0; i < hand.inner_points.size(); ++i) {
    const auto& hp = hand.inner_points[i];
    const Vec3d p = pe.point(hp);
    const auto [m, q] = closest_over(meshes, p);
    if (m < 0) continue;
    const Vec3d r = p - q.point;
    out.value += r.squaredNorm();
    const Vec3<Jet> pj = pe.point_jet(hp);
    out.gradient += 2.0 * (r[0] * pj[0].d + r[1] * pj[1].d + r[2] * pj[2].d).head(pe.n);
    out.selection.insert(out.selection.end(), {m, q.face, static_cast<std::int64_t>(q.feature)});
  }
  return out;
}

inline DiffValue guidance_loss(const GraspConfig& g, const HandModel& hand, std::span<const TriMesh> meshes) {
  return guidance_loss(evaluate_pose(g, hand), hand, meshes);
}

/// (1/B)(1/m) Σ c_i·L_i − w5·log c_i.
inline double confidence_joint_loss(std::span<const double> losses, std::span<const double> confidences, double w5,
                                    std::size_t batch_size) {
  if (losses.size() != confidences.size())
    throw DimensionMismatch("confidence loss: " + std::to_string(losses.size()) + " losses vs " +
                            std::to_string(confidences.size()) + " confidences");
  if (losses.empty()) throw DimensionMismatch("confidence loss: empty input");
  if (batch_size == 0) throw ValidationError("confidence loss: batch size must be positive");
  double sum = 0.0;
  for (std::size_t i = 0; i < losses.size(); ++i) {
    const double c = confidences[i];
    if (!(c > 0.0 && c <= 1.0)) throw NonPositiveConfidence("confidence must lie in (0, 1], got " + std::to_string(c));
    sum += c * losses[i] - w5 * std::log(c);
  }
  return sum / static_cast<double>(batch_size) / static_cast<double>(losses.size());
}

}  // namespace densegrasp::losses
