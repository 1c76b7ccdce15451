#pragma once

#include "densegrasp/geom/sampling.hpp"
#include "densegrasp/grasp/grasp.hpp"
#include "densegrasp/hand/closing.hpp"
#include "densegrasp/losses/task.hpp"
#include "densegrasp/scenes/labels.hpp"
#include "densegrasp/util/rng.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

namespace densegrasp::planner {

using geom::PointCloud;
using geom::RigidTransform;
using geom::TriMesh;
using geom::Vec3d;
using grasp::GraspConfig;
using grasp::GraspLabel;
using hand::HandModel;

/// Dense antipodal two-contact reference on a unit sphere (μ 0.5, 8 edges,
/// λ 1, 10^5 directions); the default success threshold is half of it.
inline constexpr double kAntipodalSphereQ1 = 0.08586476449074032;

enum class Optimizer { GradientDescent, Momentum };

struct PlannerParams {
  std::size_t m = 512;
  int iterations = 200;
  double step_size = 1e-3;
  Optimizer optimizer = Optimizer::Momentum;
  double momentum = 0.9;
  losses::LossWeights weights;
  losses::ContactParams contact;
  double prune_threshold = 0.15;
  std::size_t K = 4;
  double standoff = 0.02;
  double penetration_tol = 0.002;
  double q1_threshold = 0.5 * kAntipodalSphereQ1;
  int min_contacts = 3;
  bool self_collision = true;
  /// Optional hard-example mode: after a full pass, this many extra rounds
  /// re-optimize only the `hard_examples` worst candidates. 0 disables it.
  int hard_rounds = 0;
  std::size_t hard_examples = 64;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(m >= K && K >= 1)) throw ValidationError("planner needs m >= K >= 1");
    if (iterations < 0) throw ValidationError("iterations must be non-negative");
    if (!(step_size > 0.0) || !std::isfinite(step_size)) throw ValidationError("step_size must be positive");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw ValidationError("momentum must lie in [0, 1)");
    if (!(prune_threshold >= 0.0 && prune_threshold <= 1.0)) throw ValidationError("prune_threshold must lie in [0, 1]");
    if (!(standoff >= 0.0)) throw ValidationError("standoff must be non-negative");
    if (!(penetration_tol >= 0.0)) throw ValidationError("penetration_tol must be non-negative");
    if (hard_rounds < 0) throw ValidationError("hard_rounds must be non-negative");
    weights.validate();
    contact.validate();
  }
};

struct Candidate {
  GraspConfig grasp;
  std::size_t anchor_index = 0;
  double score = 0.0;        ///< exp(-loss) floored into (0, 1]
  std::vector<double> trace;  ///< loss before each step, then the final loss
  int reorthogonalized = 0;   ///< degenerate-rotation recoveries

  double initial_loss() const { return trace.empty() ? 0.0 : trace.front(); }
  double final_loss() const { return trace.empty() ? 0.0 : trace.back(); }
};

inline double score_from_loss(double loss) {
  return std::clamp(std::exp(-loss), std::numeric_limits<double>::min(), 1.0);
}

/// m candidates at farthest-point-sampled cloud points: palm stood off by
/// `standoff` along the normal, facing it, with a seeded roll; joints at the
/// hand's initial configuration.
inline std::vector<Candidate> init_candidates(const PointCloud& cloud, const HandModel& hand, const PlannerParams& p,
                                              std::uint64_t seed) {
  cloud.validate();
  if (cloud.size() < p.m) throw TooFewPoints("cloud has " + std::to_string(cloud.size()) + " points, need m = " + std::to_string(p.m));
  util::Rng start(util::derive_seed(seed, 0));
  const auto anchors = geom::farthest_point_sampling(cloud, p.m, static_cast<std::size_t>(start.index(cloud.size())));
  const hand::JointVector theta0 = hand::initial_joints(hand);
  std::vector<Candidate> out;
  out.reserve(anchors.size());
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    util::Rng rng(util::derive_seed(seed, 1 + i));
    const Vec3d& n = cloud.normals[anchors[i]];
    const geom::Mat3d r = scenes::palm_facing(n, rng.uniform(0.0, 2.0 * std::numbers::pi));
    Candidate c;
    c.anchor_index = anchors[i];
    c.grasp.anchor = cloud.points[anchors[i]];
    c.grasp.offset = p.standoff * n;
    c.grasp.a = r.col(0);
    c.grasp.b = r.col(1);
    c.grasp.theta = theta0;
    out.push_back(std::move(c));
  }
  return out;
}

/// The scene object a candidate grasps: the object mesh nearest its anchor.
inline int target_object(std::span<const TriMesh> object_meshes, const Vec3d& anchor) {
  return losses::nearest_mesh(object_meshes, anchor);
}

struct PlanContext {
  const HandModel* hand = nullptr;
  std::span<const TriMesh> meshes;  ///< objects first, then the table
  std::size_t num_objects = 0;
};

/// Runs `iterations` first-order steps on the task loss; joints are clamped
/// after each step. Records the loss trace and sets the score.
inline Candidate optimize_candidate(Candidate c, std::span<const GraspLabel> labels_at_anchor, const PlanContext& ctx,
                                    const PlannerParams& p, const std::function<void(const std::string&)>& log = {}) {
  const HandModel& hand = *ctx.hand;
  const int target = target_object(ctx.meshes.first(ctx.num_objects), c.grasp.anchor);
  auto loss = [&](const GraspConfig& g) {
    return losses::task_loss(g, labels_at_anchor, hand, ctx.meshes, p.weights, p.contact,
                             {target, ctx.num_objects, p.self_collision});
  };
  Eigen::VectorXd x = grasp::flatten(c.grasp);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(x.size());
  const auto lo = hand.lower_limits(), hi = hand.upper_limits();
  for (int it = 0; it < p.iterations; ++it) {
    const GraspConfig g = grasp::unflatten(x, c.grasp.anchor);
    const auto l = loss(g);
    c.trace.push_back(l.value);
    if (p.optimizer == Optimizer::Momentum) v = p.momentum * v - p.step_size * l.gradient;
    else v = -p.step_size * l.gradient;
    const geom::Mat3d before = geom::gram_schmidt_rot6d(g.a, g.b);
    x += v;
    x.tail(lo.size()) = x.tail(lo.size()).cwiseMax(lo).cwiseMin(hi);
    if (geom::is_degenerate(x.segment<3>(3), x.segment<3>(6))) {
      x.segment<3>(3) = before.col(0);
      x.segment<3>(6) = before.col(1);
      v.segment<6>(3).setZero();
      ++c.reorthogonalized;
      if (log) log("candidate at anchor " + std::to_string(c.anchor_index) + ": degenerate rotation re-orthogonalized");
    }
  }
  c.grasp = grasp::unflatten(x, c.grasp.anchor);
  c.trace.push_back(loss(c.grasp).value);
  c.score = score_from_loss(c.trace.back());
  return c;
}

/// Drops candidates scoring below the prune threshold, orders the rest by
/// descending score and keeps up to K by farthest-point sampling over palm
/// translations, starting from the best.
inline std::vector<Candidate> score_and_select(const std::vector<Candidate>& cands, const PlannerParams& p) {
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < cands.size(); ++i)
    if (!(cands[i].score < p.prune_threshold)) keep.push_back(i);
  std::stable_sort(keep.begin(), keep.end(), [&](std::size_t a, std::size_t b) { return cands[a].score > cands[b].score; });
  if (keep.empty()) return {};
  std::vector<Vec3d> t;
  for (std::size_t i : keep) t.push_back(grasp::palm_translation(cands[i].grasp.anchor, cands[i].grasp.offset));
  const auto pick = geom::farthest_point_sampling(std::span<const Vec3d>(t), std::min(p.K, keep.size()), 0);
  std::vector<Candidate> out;
  for (std::size_t k : pick) out.push_back(cands[keep[k]]);
  return out;
}

/// Largest penetration of the collision points into the scene meshes and,
/// optionally, into the hand's own (non-adjacent) link meshes.
inline double max_penetration(const HandModel& hand, std::span<const RigidTransform> poses, std::span<const TriMesh> meshes,
                              bool self_collision) {
  const auto links = hand::all_links(hand);
  double worst = std::max(0.0, hand::max_signed_distance(hand, poses, meshes, links, 0.0));
  if (!self_collision) return worst;
  for (std::size_t k = 0; k < hand.num_links(); ++k) {
    const auto& mesh = hand.links[k].mesh;
    if (!mesh) continue;
    for (std::size_t l = 0; l < hand.num_links(); ++l) {
      if (hand.self_excluded(static_cast<int>(l), static_cast<int>(k))) continue;
      for (int i : hand.points_of_link(static_cast<int>(l))) {
        const Vec3d p = poses[k].apply_inverse(poses[l].apply(hand.collision_points[static_cast<std::size_t>(i)].position));
        if (mesh->bounds().contains(p)) worst = std::max(worst, mesh->signed_distance(p));
      }
    }
  }
  return worst;
}

/// Palm pulled back from the grasp by `standoff` against its approach axis
/// (palm -z), fingers open.
inline std::pair<RigidTransform, hand::JointVector> pre_grasp(const GraspConfig& g, const HandModel& hand, double standoff) {
  auto pose = grasp::grasp_to_pose(g, hand);
  pose.palm_pose.translation -= standoff * pose.palm_pose.rotation.col(2);
  return {pose.palm_pose, hand::open_hand(hand)};
}

/// Valid iff the grasp and its pre-grasp both penetrate by at most `tol`.
inline bool check_valid(const GraspConfig& g, const HandModel& hand, std::span<const TriMesh> meshes, double tol,
                        double standoff, bool self_collision = true) {
  const auto pose = grasp::grasp_to_pose(g, hand);
  const auto at = hand::forward_kinematics(hand, pose.palm_pose, pose.theta);
  if (!(max_penetration(hand, at, meshes, self_collision) <= tol)) return false;
  const auto [pre, open] = pre_grasp(g, hand, standoff);
  const auto before = hand::forward_kinematics(hand, pre, open);
  return max_penetration(hand, before, meshes, self_collision) <= tol;
}

inline bool check_valid(const GraspConfig& g, const HandModel& hand, std::span<const TriMesh> meshes, const PlannerParams& p) {
  return check_valid(g, hand, meshes, p.penetration_tol, p.standoff, p.self_collision);
}

struct ProxyOutcome {
  bool success = false;
  std::size_t contacts = 0;
  double q1 = 0.0;
  bool valid = false;
  GraspConfig closed;
};

/// Stand-in for a lift test: close the fingers until contact, then require
/// enough contacts, a Q1 upper bound above the threshold and validity.
inline ProxyOutcome proxy_evaluate(const GraspConfig& g, const HandModel& hand, const TriMesh& object,
                                   std::span<const TriMesh> meshes, const PlannerParams& p) {
  ProxyOutcome out;
  const auto pose = grasp::grasp_to_pose(g, hand);
  out.closed = g;
  out.closed.theta = hand::close_until_contact(hand, pose.palm_pose, pose.theta, meshes);
  const auto cp = losses::for_object(p.contact, object);
  const auto pe = losses::evaluate_pose(out.closed, hand);
  out.contacts = losses::find_contacts(pe, hand, object, cp).size();
  out.q1 = losses::q1_upper(pe, hand, object, cp, losses::q1_directions(cp.directions, cp.direction_seed)).value;
  out.valid = check_valid(out.closed, hand, meshes, p);
  out.success = static_cast<int>(out.contacts) >= p.min_contacts && out.q1 > p.q1_threshold && out.valid;
  return out;
}

inline bool proxy_success(const GraspConfig& g, const HandModel& hand, const TriMesh& object, std::span<const TriMesh> meshes,
                          const PlannerParams& p) {
  return proxy_evaluate(g, hand, object, meshes, p).success;
}

}  // namespace densegrasp::planner
