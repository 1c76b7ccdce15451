#pragma once

#include "densegrasp/losses/losses.hpp"
#include "densegrasp/losses/q1.hpp"

namespace densegrasp::losses {

struct LossWeights {
  double w1 = 1.0;  ///< chamfer
  double w2 = 1.0;  ///< collision
  double w3 = 1.0;  ///< guidance
  double w4 = 0.0;  ///< Q1 upper bound
  double w5 = 1.0;  ///< confidence

  void validate() const {
    for (double w : {w1, w2, w3, w4, w5})
      if (!(w >= 0.0) || !std::isfinite(w)) throw ValidationError("loss weights must be finite and non-negative");
  }
};

struct TaskLoss {
  DiffValue total;
  DiffValue chamfer;
  DiffValue collision;
  DiffValue guidance;
  DiffValue q1;  ///< exp(-Q1_upper)
};

/// Mesh whose surface is closest to `p` (ties to the lower index); -1 if none.
inline int nearest_mesh(std::span<const TriMesh> meshes, const Vec3d& p) {
  return closest_over(meshes, p).first;
}

struct TaskOptions {
  int target = -1;  ///< mesh for contacts; default: object mesh nearest to the anchor
  /// The first `object_meshes` meshes are objects and may host contacts;
  /// the rest (the table) only enter collision and guidance.
  std::size_t object_meshes = std::numeric_limits<std::size_t>::max();
  bool self_collision = true;
};

/// w1·chamfer + w2·collision + w3·guidance + w4·exp(-Q1_upper).
///
/// The chamfer term is omitted when `matched` is empty; components with
/// zero weight are not evaluated.
inline TaskLoss task_loss_terms(const GraspConfig& g, std::span<const GraspLabel> matched, const HandModel& hand,
                                std::span<const TriMesh> meshes, const LossWeights& w, const ContactParams& params,
                                const TaskOptions& opt = {}) {
  const std::size_t n_objects = std::min(opt.object_meshes, meshes.size());
  const auto objects = meshes.first(n_objects);
  int target = opt.target;
  w.validate();
  const PoseEval pe = evaluate_pose(g, hand);
  TaskLoss t;
  t.chamfer = t.collision = t.guidance = t.q1 = DiffValue::zero(pe.n);
  if (w.w1 > 0.0 && !matched.empty()) t.chamfer = chamfer_loss(g, matched, hand);
  if (w.w2 > 0.0) t.collision = collision_loss(pe, hand, meshes, opt.self_collision);
  if (w.w3 > 0.0) t.guidance = guidance_loss(pe, hand, meshes);
  if (w.w4 > 0.0) {
    params.validate();
    if (target < 0) target = nearest_mesh(objects, g.anchor);
    if (target >= 0) {
      const auto& object = meshes[static_cast<std::size_t>(target)];
      const ContactParams p = for_object(params, object);
      t.q1 = q1_loss(q1_upper(pe, hand, object, p, q1_directions(p.directions, p.direction_seed)));
    }
  }
  t.total = DiffValue::zero(pe.n);
  const std::pair<double, const DiffValue*> parts[] = {{w.w1, &t.chamfer}, {w.w2, &t.collision}, {w.w3, &t.guidance}, {w.w4, &t.q1}};
  for (const auto& [wi, d] : parts) {
    t.total.value += wi * d->value;
    t.total.gradient += wi * d->gradient;
    t.total.selection.push_back(-7);
    t.total.selection.insert(t.total.selection.end(), d->selection.begin(), d->selection.end());
  }
  return t;
}

inline DiffValue task_loss(const GraspConfig& g, std::span<const GraspLabel> matched, const HandModel& hand,
                           std::span<const TriMesh> meshes, const LossWeights& w, const ContactParams& params,
                           const TaskOptions& opt = {}) {
  return task_loss_terms(g, matched, hand, meshes, w, params, opt).total;
}

}  // namespace densegrasp::losses
