#pragma once

#include "densegrasp/errors.hpp"
#include "densegrasp/geom/types.hpp"
#include "densegrasp/hand/hand_model.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

namespace densegrasp::grasp {

using geom::Mat3d;
using geom::RigidTransform;
using geom::Vec3d;
using hand::HandModel;
using hand::JointVector;

/// Offset (3) + 6D rotation (6) ahead of the joint angles in the flat vector.
inline constexpr int kPoseParams = 9;

/// A grasp anchored at a cloud point: palm at anchor + offset, oriented by
/// the 6D rotation (a, b), fingers at theta. The anchor is held fixed.
struct GraspConfig {
  Vec3d anchor = Vec3d::Zero();
  Vec3d offset = Vec3d::Zero();
  Vec3d a = Vec3d::UnitX();
  Vec3d b = Vec3d::UnitY();
  JointVector theta;

  std::size_t dimension() const { return kPoseParams + static_cast<std::size_t>(theta.size()); }
  bool rotation_degenerate() const { return geom::is_degenerate(a, b); }
};

inline Vec3d palm_translation(const Vec3d& anchor, const Vec3d& offset) { return anchor + offset; }

/// [offset(3), a(3), b(3), theta(dof)]; the anchor is not part of the vector.
inline Eigen::VectorXd flatten(const GraspConfig& g) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(g.dimension()));
  x.segment<3>(0) = g.offset;
  x.segment<3>(3) = g.a;
  x.segment<3>(6) = g.b;
  x.tail(g.theta.size()) = g.theta;
  return x;
}

inline GraspConfig unflatten(const Eigen::VectorXd& x, const Vec3d& anchor) {
  if (x.size() < kPoseParams) throw DimensionMismatch("grasp vector shorter than 9 entries");
  GraspConfig g;
  g.anchor = anchor;
  g.offset = x.segment<3>(0);
  g.a = x.segment<3>(3);
  g.b = x.segment<3>(6);
  g.theta = x.tail(x.size() - kPoseParams);
  return g;
}

struct HandPose {
  RigidTransform palm_pose;
  JointVector theta;  ///< clamped
};

/// Palm pose from anchor + offset and Gram-Schmidt of (a, b); joints clamped.
inline HandPose grasp_to_pose(const GraspConfig& g, const HandModel& hand) {
  HandPose out;
  out.palm_pose.translation = palm_translation(g.anchor, g.offset);
  out.palm_pose.rotation = geom::gram_schmidt_rot6d(g.a, g.b);
  out.theta = hand::clamp_joints(hand, g.theta);
  return out;
}

/// A ground-truth grasp in world coordinates.
struct GraspLabel {
  RigidTransform palm_pose;
  std::array<double, 4> quaternion{1.0, 0.0, 0.0, 0.0};  ///< [w, x, y, z] source of palm_pose.rotation
  JointVector theta;
  Vec3d palm_reference_world = Vec3d::Zero();
};

/// Builds a label whose rotation is canonicalized through its quaternion, so
/// that writing and re-reading the label reproduces it exactly.
inline GraspLabel make_label(const Vec3d& translation, const std::array<double, 4>& quaternion, const JointVector& theta,
                             const HandModel& hand) {
  if (static_cast<std::size_t>(theta.size()) != hand.dof())
    throw DimensionMismatch("label has " + std::to_string(theta.size()) + " joints, hand has " + std::to_string(hand.dof()));
  GraspLabel l;
  l.quaternion = quaternion;
  l.palm_pose.rotation = Eigen::Quaterniond(quaternion[0], quaternion[1], quaternion[2], quaternion[3]).normalized().toRotationMatrix();
  l.palm_pose.translation = translation;
  l.theta = theta;
  l.palm_reference_world = l.palm_pose.apply(hand.palm_reference_point);
  return l;
}

inline GraspLabel make_label(const RigidTransform& pose, const JointVector& theta, const HandModel& hand) {
  const auto q = geom::quaternion_wxyz(pose.rotation);
  return make_label(pose.translation, {q[0], q[1], q[2], q[3]}, theta, hand);
}

/// The label expressed in the flat grasp vector relative to `anchor`:
/// offset = translation - anchor, (a, b) = first two rotation columns.
inline Eigen::VectorXd label_vector(const GraspLabel& l, const Vec3d& anchor) {
  Eigen::VectorXd y(kPoseParams + l.theta.size());
  y.segment<3>(0) = l.palm_pose.translation - anchor;
  y.segment<3>(3) = l.palm_pose.rotation.col(0);
  y.segment<3>(6) = l.palm_pose.rotation.col(1);
  y.tail(l.theta.size()) = l.theta;
  return y;
}

/// Matched label indices per cloud point.
struct LabelSet {
  std::vector<std::vector<int>> matches;

  std::size_t size() const { return matches.size(); }
  bool positive(std::size_t i) const { return !matches[i].empty(); }
  std::size_t positive_count() const {
    return static_cast<std::size_t>(std::count_if(matches.begin(), matches.end(), [](const auto& m) { return !m.empty(); }));
  }
  bool operator==(const LabelSet&) const = default;
};

inline constexpr double kMatchRadius = 0.005;

/// Label p matches point i iff ‖p_ref - p_i‖ ≤ 5 mm and n_i·(p_ref - p_i) > 0.
inline bool label_matches(const Vec3d& point, const Vec3d& normal, const Vec3d& reference) {
  const Vec3d d = reference - point;
  const double dt = d.norm();
  const double dn = normal.dot(d);
  return dt <= kMatchRadius && dn > 0.0;
}

/// Dense label matching. Labels are swept in x order so each point only
/// inspects nearby references; the predicate itself is exact.
inline LabelSet match_labels(const geom::PointCloud& cloud, const std::vector<GraspLabel>& labels) {
  cloud.validate();
  std::vector<int> order(labels.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int x, int y) {
    const double ax = labels[static_cast<std::size_t>(x)].palm_reference_world.x();
    const double bx = labels[static_cast<std::size_t>(y)].palm_reference_world.x();
    return ax < bx || (ax == bx && x < y);
  });
  std::vector<double> xs(order.size());
  for (std::size_t k = 0; k < order.size(); ++k) xs[k] = labels[static_cast<std::size_t>(order[k])].palm_reference_world.x();

  LabelSet out;
  out.matches.resize(cloud.size());
  const double window = kMatchRadius * (1.0 + 1e-9) + 1e-12;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Vec3d& p = cloud.points[i];
    auto lo = std::lower_bound(xs.begin(), xs.end(), p.x() - window);
    auto hi = std::upper_bound(xs.begin(), xs.end(), p.x() + window);
    auto& list = out.matches[i];
    for (auto it = lo; it != hi; ++it) {
      const int l = order[static_cast<std::size_t>(it - xs.begin())];
      if (label_matches(p, cloud.normals[i], labels[static_cast<std::size_t>(l)].palm_reference_world)) list.push_back(l);
    }
    std::sort(list.begin(), list.end());
  }
  return out;
}

inline std::vector<GraspLabel> labels_at(const LabelSet& set, std::size_t point, const std::vector<GraspLabel>& labels) {
  std::vector<GraspLabel> out;
  for (int l : set.matches[point]) out.push_back(labels[static_cast<std::size_t>(l)]);
  return out;
}

}  // namespace densegrasp::grasp
