#pragma once

// Synthetic ground-truth grasps: the palm faces a sampled surface point from
// a small standoff along the outward normal and every closing joint is swept
// shut until it touches. Hands that end up in collision are discarded.

#include "densegrasp/grasp/grasp.hpp"
#include "densegrasp/hand/closing.hpp"
#include "densegrasp/losses/losses.hpp"
#include "densegrasp/losses/q1.hpp"
#include "densegrasp/scenes/scene.hpp"

namespace densegrasp::scenes {

struct LabelParams {
  int per_object = 8;
  double standoff = 0.003;      ///< palm reference point distance from the surface (m)
  int candidates_per_label = 6; ///< surface samples drawn per requested label
  int min_contacts = 2;
  double max_normal_down = -0.3;  ///< reject surface normals pointing further down than this z
};

/// Palm rotation with z = -normal and a roll about the normal.
inline Mat3d palm_facing(const Vec3d& normal, double roll) {
  const auto [t1, t2] = geom::tangent_basis(normal);
  const Vec3d z = -normal;
  const Vec3d x = std::cos(roll) * t1 + std::sin(roll) * t2;
  Mat3d r;
  r.col(0) = x;
  r.col(1) = z.cross(x);
  r.col(2) = z;
  return r;
}

inline bool hand_collision_free(const hand::HandModel& hand, const RigidTransform& palm, const hand::JointVector& theta,
                                std::span<const TriMesh> meshes) {
  grasp::GraspConfig g;
  g.anchor = palm.translation;
  g.offset.setZero();
  g.a = palm.rotation.col(0);
  g.b = palm.rotation.col(1);
  g.theta = theta;
  return losses::collision_loss(g, hand, meshes, true).value == 0.0;
}

inline std::vector<grasp::GraspLabel> synth_labels(const Scene& scene, const hand::HandModel& hand, std::uint64_t seed,
                                                   const LabelParams& lp = {}) {
  const auto meshes = scene.meshes();
  std::vector<grasp::GraspLabel> out;
  losses::ContactParams cp;
  for (std::size_t o = 0; o < scene.objects.size(); ++o) {
    const auto& obj = scene.objects[o].world_mesh;
    const std::size_t tries = static_cast<std::size_t>(std::max(1, lp.per_object * lp.candidates_per_label));
    const auto samples = geom::sample_surface(obj, tries, util::derive_seed(seed, 2 * o));
    util::Rng rng(util::derive_seed(seed, 2 * o + 1));
    int made = 0;
    for (std::size_t s = 0; s < tries && made < lp.per_object; ++s) {
      const double roll = rng.uniform(0.0, 2.0 * std::numbers::pi);
      const Vec3d& n = samples.normals[s];
      if (n.z() < lp.max_normal_down) continue;
      RigidTransform palm;
      const auto q = util::matrix_quaternion(palm_facing(n, roll));
      palm.rotation = util::quaternion_matrix(q);
      palm.translation = samples.points[s] + lp.standoff * n - palm.rotation * hand.palm_reference_point;
      const auto theta = hand::close_until_contact(hand, palm, hand::open_hand(hand), meshes);
      if (!hand_collision_free(hand, palm, theta, meshes)) continue;
      grasp::GraspConfig g;
      g.anchor = palm.translation;
      g.a = palm.rotation.col(0);
      g.b = palm.rotation.col(1);
      g.theta = theta;
      if (static_cast<int>(losses::find_contacts(g, hand, obj, cp).size()) < lp.min_contacts) continue;
      out.push_back(grasp::make_label(palm.translation, q, theta, hand));
      ++made;
    }
  }
  return out;
}

}  // namespace densegrasp::scenes
