#pragma once

#include "densegrasp/dual.hpp"
#include "densegrasp/grasp/grasp.hpp"
#include "densegrasp/hand/hand_model.hpp"

#include <cstdint>
#include <vector>

namespace densegrasp::losses {

using geom::RigidTransform;
using geom::Transform;
using geom::TriMesh;
using geom::Vec3;
using geom::Vec3d;
using grasp::GraspConfig;
using grasp::GraspLabel;
using hand::HandModel;

/// A loss value with its gradient w.r.t. [offset, a, b, θ].
///
/// `selection` records every discrete choice made while evaluating (argmin
/// labels, penetrating point sets, closest faces, clamped joints...). Two
/// evaluations with equal selections lie on the same smooth piece.
struct DiffValue {
  double value = 0.0;
  Eigen::VectorXd gradient;
  std::vector<std::int64_t> selection;

  static DiffValue zero(Eigen::Index n) { return {0.0, Eigen::VectorXd::Zero(n), {}}; }
};

inline DiffValue scaled(const DiffValue& x, double w) {
  return {w * x.value, w * x.gradient, x.selection};
}

/// Link poses of a grasp, both as values and as jets seeded on the grasp vector.
struct PoseEval {
  Eigen::Index n = 0;  ///< number of grasp parameters
  std::vector<Transform<Jet>> links;
  std::vector<RigidTransform> values;
  std::vector<std::int64_t> clamp_signature;  ///< -1 / 0 / +1 per joint

  Eigen::VectorXd grad(const Jet& x) const { return x.d.head(n); }

  Vec3<Jet> point_jet(const hand::HandPoint& p) const { return links[static_cast<std::size_t>(p.link)].apply(p.position); }
  Vec3d point(const hand::HandPoint& p) const { return values[static_cast<std::size_t>(p.link)].apply(p.position); }
};

/// Gram-Schmidt + clamp + FK on jets. Throws DegenerateRotation.
inline PoseEval evaluate_pose(const GraspConfig& g, const HandModel& hand) {
  if (static_cast<std::size_t>(g.theta.size()) != hand.dof())
    throw DimensionMismatch("grasp has " + std::to_string(g.theta.size()) + " joints, hand has " + std::to_string(hand.dof()));
  PoseEval pe;
  pe.n = static_cast<Eigen::Index>(g.dimension());
  const Eigen::VectorXd x = grasp::flatten(g);
  std::vector<Jet> xj(static_cast<std::size_t>(pe.n));
  for (Eigen::Index i = 0; i < pe.n; ++i) xj[static_cast<std::size_t>(i)] = Jet(x[i], static_cast<int>(i));

  geom::Rot6D<Jet> rot;
  Transform<Jet> palm;
  for (int k = 0; k < 3; ++k) {
    palm.translation[k] = Jet(g.anchor[k]) + xj[static_cast<std::size_t>(k)];
    rot.a[k] = xj[static_cast<std::size_t>(3 + k)];
    rot.b[k] = xj[static_cast<std::size_t>(6 + k)];
  }
  palm.rotation = geom::gram_schmidt_rot6d(rot);

  const std::span<const Jet> theta(xj.data() + grasp::kPoseParams, hand.dof());
  const auto clamped = hand::clamp_joints<Jet>(hand, theta);
  pe.clamp_signature.resize(hand.dof());
  for (std::size_t j = 0; j < hand.dof(); ++j) {
    const double v = theta[j].v;
    pe.clamp_signature[j] = v > hand.joints[j].limit_max ? 1 : (v < hand.joints[j].limit_min ? -1 : 0);
  }
  pe.links = hand::forward_kinematics<Jet>(hand, palm, std::span<const Jet>(clamped));
  pe.values.reserve(pe.links.size());
  for (const auto& t : pe.links) pe.values.push_back(geom::value_of(t));
  return pe;
}

/// Plain-value link poses (no derivatives).
inline std::vector<RigidTransform> link_poses(const GraspConfig& g, const HandModel& hand) {
  const auto pose = grasp::grasp_to_pose(g, hand);
  return hand::forward_kinematics(hand, pose.palm_pose, pose.theta);
}

}  // namespace densegrasp::losses
