#pragma once

#include "densegrasp/errors.hpp"
#include "densegrasp/geom/mesh.hpp"
#include "densegrasp/geom/types.hpp"

#include <json.hpp>

#include <algorithm>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace densegrasp::hand {

using geom::RigidTransform;
using geom::Transform;
using geom::TriMesh;
using geom::Vec3;
using geom::Vec3d;

inline constexpr std::size_t kCollisionPointCount = 2000;
inline constexpr std::size_t kInnerPointCount = 45;
inline constexpr std::size_t kMaxDof = kMaxParams - 9;

struct JointSpec {
  std::string name;
  int parent_link = 0;
  int child_link = 0;
  RigidTransform origin;  ///< child joint frame in the parent link frame
  std::array<double, 4> origin_quaternion{1.0, 0.0, 0.0, 0.0};  ///< as read, [w, x, y, z]
  Vec3d axis = Vec3d::UnitZ();
  double limit_min = 0.0;
  double limit_max = 0.0;
  bool closes = true;  ///< swept towards limit_max by the close-until-contact routine
};

struct Link {
  std::string name;
  std::optional<TriMesh> mesh;     ///< link-frame geometry; absent for massless frames
  nlohmann::json geometry;         ///< source description (kept for serialization)
  std::optional<Vec3d> inner_normal;
  int inner_count = 0;
};

/// A point rigidly attached to a link.
struct HandPoint {
  int link = 0;
  Vec3d position = Vec3d::Zero();
};

using JointVector = Eigen::VectorXd;

/// Kinematic tree rooted at link 0 (the palm). Immutable after construction.
class HandModel {
 public:
  std::string name;
  std::vector<Link> links;
  std::vector<JointSpec> joints;  ///< θ index = position in this list
  std::vector<HandPoint> collision_points;
  std::vector<HandPoint> inner_points;
  Vec3d palm_reference_point = Vec3d::Zero();
  std::uint64_t sampling_seed = 0;
  double open_hand_bias = 0.5;  ///< initial θ = (1-bias)·mid-range + bias·open hand

  std::size_t dof() const { return joints.size(); }
  std::size_t num_links() const { return links.size(); }

  /// Checks the tree structure, limits and point counts and computes the
  /// derived tables. Throws ValidationError.
  void finalize() {
    if (links.empty()) throw ValidationError("hand has no links");
    if (joints.size() > kMaxDof) throw ValidationError("hand has more than 23 joints");
    parent_joint_.assign(links.size(), -1);
    for (std::size_t j = 0; j < joints.size(); ++j) {
      const auto& js = joints[j];
      const auto nl = static_cast<int>(links.size());
      if (js.parent_link < 0 || js.parent_link >= nl || js.child_link < 0 || js.child_link >= nl)
        throw ValidationError("joint '" + js.name + "' references an unknown link");
      if (js.child_link == 0) throw ValidationError("joint '" + js.name + "' has the palm as child (cycle)");
      if (parent_joint_[static_cast<std::size_t>(js.child_link)] >= 0)
        throw ValidationError("link '" + links[static_cast<std::size_t>(js.child_link)].name + "' has two parent joints");
      parent_joint_[static_cast<std::size_t>(js.child_link)] = static_cast<int>(j);
      if (!(js.limit_min <= js.limit_max)) throw ValidationError("joint '" + js.name + "' has limit_min > limit_max");
      if (!(std::abs(js.axis.norm() - 1.0) <= 1e-9)) throw ValidationError("joint '" + js.name + "' axis is not unit length");
      geom::validate_rigid(js.origin);
    }
    // Breadth-first order from the palm; every link must be reached.
    order_.clear();
    std::vector<int> frontier{0};
    std::vector<bool> seen(links.size(), false);
    seen[0] = true;
    while (!frontier.empty()) {
      std::vector<int> next;
      for (int l : frontier)
        for (std::size_t j = 0; j < joints.size(); ++j)
          if (joints[j].parent_link == l) {
            const int c = joints[j].child_link;
            if (seen[static_cast<std::size_t>(c)]) throw ValidationError("joint graph is not a tree");
            seen[static_cast<std::size_t>(c)] = true;
            order_.push_back(static_cast<int>(j));
            next.push_back(c);
          }
      frontier = std::move(next);
    }
    for (std::size_t l = 0; l < links.size(); ++l)
      if (!seen[l]) throw ValidationError("link '" + links[l].name + "' is not connected to the palm (joint graph is not a tree)");

    if (collision_points.size() != kCollisionPointCount)
      throw ValidationError("hand must have exactly 2000 collision points, got " + std::to_string(collision_points.size()));
    if (inner_points.size() != kInnerPointCount)
      throw ValidationError("hand must have exactly 45 inner points, got " + std::to_string(inner_points.size()));
    for (const auto& p : collision_points) check_point(p);
    for (const auto& p : inner_points) check_point(p);

    link_points_.assign(links.size(), {});
    for (std::size_t i = 0; i < collision_points.size(); ++i)
      link_points_[static_cast<std::size_t>(collision_points[i].link)].push_back(static_cast<int>(i));
    link_point_bounds_.assign(links.size(), geom::Aabb{});
    for (const auto& p : collision_points) link_point_bounds_[static_cast<std::size_t>(p.link)].grow(p.position);

    compute_self_exclusions();
    compute_subtrees();
  }

  /// Joint indices in parent-before-child order.
  const std::vector<int>& traversal_order() const { return order_; }
  int parent_joint(int link) const { return parent_joint_[static_cast<std::size_t>(link)]; }
  /// Collision point indices grouped by link.
  const std::vector<int>& points_of_link(int link) const { return link_points_[static_cast<std::size_t>(link)]; }
  /// Link-frame bounding box of a link's collision points.
  const geom::Aabb& point_bounds(int link) const { return link_point_bounds_[static_cast<std::size_t>(link)]; }
  /// True when link `a`'s points are not tested against link `b`'s mesh.
  bool self_excluded(int a, int b) const { return excluded_[static_cast<std::size_t>(a) * links.size() + static_cast<std::size_t>(b)]; }
  /// Links moved by joint j (its child and all descendants).
  const std::vector<int>& subtree(int joint) const { return subtrees_[static_cast<std::size_t>(joint)]; }
  std::size_t num_mesh_links() const {
    return static_cast<std::size_t>(std::count_if(links.begin(), links.end(), [](const Link& l) { return l.mesh.has_value(); }));
  }

  JointVector lower_limits() const {
    JointVector v(static_cast<Eigen::Index>(dof()));
    for (std::size_t j = 0; j < dof(); ++j) v[static_cast<Eigen::Index>(j)] = joints[j].limit_min;
    return v;
  }
  JointVector upper_limits() const {
    JointVector v(static_cast<Eigen::Index>(dof()));
    for (std::size_t j = 0; j < dof(); ++j) v[static_cast<Eigen::Index>(j)] = joints[j].limit_max;
    return v;
  }

 private:
  void check_point(const HandPoint& p) const {
    if (p.link < 0 || p.link >= static_cast<int>(links.size())) throw ValidationError("hand point references an unknown link");
    if (!p.position.allFinite()) throw ValidationError("hand point is not finite");
  }

  void compute_self_exclusions() {
    const std::size_t n = links.size();
    excluded_.assign(n * n, false);
    // Neighbours in the tree, regardless of direction.
    std::vector<std::vector<int>> adj(n);
    for (const auto& j : joints) {
      adj[static_cast<std::size_t>(j.parent_link)].push_back(j.child_link);
      adj[static_cast<std::size_t>(j.child_link)].push_back(j.parent_link);
    }
    for (std::size_t a = 0; a < n; ++a) {
      excluded_[a * n + a] = true;
      // Walk outward through mesh-less links; the first meshed link on each
      // path is jointed to `a` and always in near-contact with it.
      std::vector<int> stack(adj[a].begin(), adj[a].end());
      std::vector<bool> seen(n, false);
      seen[a] = true;
      while (!stack.empty()) {
        const int l = stack.back();
        stack.pop_back();
        if (seen[static_cast<std::size_t>(l)]) continue;
        seen[static_cast<std::size_t>(l)] = true;
        excluded_[a * n + static_cast<std::size_t>(l)] = true;
        if (!links[static_cast<std::size_t>(l)].mesh)
          for (int m : adj[static_cast<std::size_t>(l)]) stack.push_back(m);
      }
    }
  }

  void compute_subtrees() {
    subtrees_.assign(joints.size(), {});
    for (std::size_t j = 0; j < joints.size(); ++j) {
      std::vector<int> stack{joints[j].child_link};
      while (!stack.empty()) {
        const int l = stack.back();
        stack.pop_back();
        subtrees_[j].push_back(l);
        for (const auto& js : joints)
          if (js.parent_link == l) stack.push_back(js.child_link);
      }
      std::sort(subtrees_[j].begin(), subtrees_[j].end());
    }
  }

  std::vector<int> parent_joint_;
  std::vector<int> order_;
  std::vector<std::vector<int>> link_points_;
  std::vector<geom::Aabb> link_point_bounds_;
  std::vector<bool> excluded_;
  std::vector<std::vector<int>> subtrees_;
};

/// Componentwise clamp into [limit_min, limit_max].
inline JointVector clamp_joints(const HandModel& hand, const JointVector& theta) {
  if (static_cast<std::size_t>(theta.size()) != hand.dof())
    throw DimensionMismatch("joint vector has " + std::to_string(theta.size()) + " entries, hand has " + std::to_string(hand.dof()));
  JointVector out(theta.size());
  for (std::size_t j = 0; j < hand.dof(); ++j) {
    const auto i = static_cast<Eigen::Index>(j);
    out[i] = std::max(std::min(theta[i], hand.joints[j].limit_max), hand.joints[j].limit_min);
  }
  return out;
}

/// Clamp for differentiable scalars: a clamped entry loses its derivative.
template <class T>
std::vector<T> clamp_joints(const HandModel& hand, std::span<const T> theta) {
  if (theta.size() != hand.dof()) throw DimensionMismatch("joint vector size does not match hand dof");
  std::vector<T> out(theta.begin(), theta.end());
  for (std::size_t j = 0; j < hand.dof(); ++j) {
    const double v = value_of(theta[j]);
    if (v > hand.joints[j].limit_max) out[j] = T(hand.joints[j].limit_max);
    else if (v < hand.joints[j].limit_min) out[j] = T(hand.joints[j].limit_min);
  }
  return out;
}

/// World pose of every link: root = palm_pose; child = parent ∘ origin ∘ Rot(axis, θ).
template <class T>
std::vector<Transform<T>> forward_kinematics(const HandModel& hand, const Transform<T>& palm_pose, std::span<const T> theta) {
  if (theta.size() != hand.dof()) throw DimensionMismatch("joint vector size does not match hand dof");
  std::vector<Transform<T>> poses(hand.num_links());
  poses[0] = palm_pose;
  for (int j : hand.traversal_order()) {
    const auto& js = hand.joints[static_cast<std::size_t>(j)];
    const Transform<T> origin = js.origin.template cast<T>();
    Transform<T> rot;
    rot.rotation = geom::axis_angle<T>(js.axis, theta[static_cast<std::size_t>(j)]);
    poses[static_cast<std::size_t>(js.child_link)] =
        poses[static_cast<std::size_t>(js.parent_link)].compose(origin).compose(rot);
  }
  return poses;
}

inline std::vector<RigidTransform> forward_kinematics(const HandModel& hand, const RigidTransform& palm_pose,
                                                      const JointVector& theta) {
  if (static_cast<std::size_t>(theta.size()) != hand.dof()) throw DimensionMismatch("joint vector size does not match hand dof");
  return forward_kinematics<double>(hand, palm_pose, std::span<const double>(theta.data(), static_cast<std::size_t>(theta.size())));
}

struct PlacedPoints {
  std::vector<Vec3d> collision;
  std::vector<Vec3d> inner;
};

inline PlacedPoints place_hand_points(const HandModel& hand, std::span<const RigidTransform> link_poses) {
  PlacedPoints out;
  out.collision.reserve(hand.collision_points.size());
  for (const auto& p : hand.collision_points) out.collision.push_back(link_poses[static_cast<std::size_t>(p.link)].apply(p.position));
  out.inner.reserve(hand.inner_points.size());
  for (const auto& p : hand.inner_points) out.inner.push_back(link_poses[static_cast<std::size_t>(p.link)].apply(p.position));
  return out;
}

/// Joint angles for an open hand: zero clamped into the limits.
inline JointVector open_hand(const HandModel& hand) { return clamp_joints(hand, JointVector::Zero(static_cast<Eigen::Index>(hand.dof()))); }

/// Initial joint angles: mid-range, blended towards the open hand by open_hand_bias.
inline JointVector initial_joints(const HandModel& hand) {
  const JointVector mid = 0.5 * (hand.lower_limits() + hand.upper_limits());
  return (1.0 - hand.open_hand_bias) * mid + hand.open_hand_bias * open_hand(hand);
}

}  // namespace densegrasp::hand
