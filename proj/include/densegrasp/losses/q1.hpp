#pragma once

// Upper bound of the Q1 (largest inscribed ball) grasp metric:
//   Q1_upper = max(0, min_j max_k s_j · w_k)
// over D unit directions s_j in wrench space and the friction-cone edge
// wrenches w_k of every contact.

#include "densegrasp/losses/diff.hpp"

#include <cmath>
#include <numbers>
#include <span>

namespace densegrasp::losses {

struct ContactParams {
  double friction_mu = 0.5;
  int cone_edges = 8;
  double torque_scale = 0.0;  ///< λ; 0 means 1 / bounding-sphere radius of the target object
  double contact_threshold = 0.002;
  int directions = 64;
  std::uint64_t direction_seed = 0;
  Vec3d com = Vec3d::Zero();

  void validate() const {
    if (!(friction_mu > 0.0) || !std::isfinite(friction_mu)) throw ValidationError("friction_mu must be positive");
    if (cone_edges < 3) throw ValidationError("cone_edges must be at least 3");
    if (directions < 1 || directions > (1 << 20)) throw ValidationError("directions must lie in [1, 2^20]");
    if (!(contact_threshold > 0.0)) throw ValidationError("contact_threshold must be positive");
    if (!(torque_scale >= 0.0) || !std::isfinite(torque_scale)) throw ValidationError("torque_scale must be non-negative");
    if (!com.allFinite()) throw ValidationError("com must be finite");
  }
};

/// Object-specific parameters: com = mesh centroid, λ resolved if left at 0.
inline ContactParams for_object(ContactParams p, const TriMesh& object) {
  p.com = object.centroid();
  if (!(p.torque_scale > 0.0)) {
    double r = 0.0;
    for (const auto& v : object.vertices()) r = std::max(r, (v - p.com).norm());
    p.torque_scale = r > 0.0 ? 1.0 / r : 1.0;
  }
  return p;
}

struct Contact {
  Vec3d point = Vec3d::Zero();
  Vec3d normal = Vec3d::UnitZ();   ///< outward object normal at the closest surface point
  Vec3d tangent = Vec3d::Zero();   ///< first cone axis; zero means derive from the normal
  int point_index = -1;            ///< collision point that produced the contact
};

/// Van der Corput radical inverse of i in the given base.
inline double radical_inverse(std::uint64_t i, unsigned base) {
  const double inv = 1.0 / base;
  double f = inv, r = 0.0;
  while (i > 0) {
    r += f * static_cast<double>(i % base);
    i /= base;
    f *= inv;
  }
  return r;
}

/// D unit directions in R^6 (rows). Halton points (bases 2..13) starting at
/// index 1 + seed·2^20, mapped through Box-Muller and normalized, so the
/// first D directions of a larger set are exactly the smaller set.
inline Eigen::MatrixXd q1_directions(int count, std::uint64_t seed) {
  static constexpr unsigned kBases[6] = {2, 3, 5, 7, 11, 13};
  Eigen::MatrixXd out(count, 6);
  const std::uint64_t start = 1 + (seed << 20);
  for (int j = 0; j < count; ++j) {
    double u[6];
    for (int k = 0; k < 6; ++k) u[k] = radical_inverse(start + static_cast<std::uint64_t>(j), kBases[k]);
    Eigen::Matrix<double, 6, 1> s;
    for (int k = 0; k < 3; ++k) {
      const double r = std::sqrt(-2.0 * std::log(u[2 * k]));
      const double phi = 2.0 * std::numbers::pi * u[2 * k + 1];
      s[2 * k] = r * std::cos(phi);
      s[2 * k + 1] = r * std::sin(phi);
    }
    out.row(j) = (s / s.norm()).transpose();
  }
  return out;
}

/// Friction-cone edge forces: -n + μ(cos φ_k t1 + sin φ_k t2), φ_k = 2πk/E.
inline std::vector<Vec3d> cone_edges(const Contact& c, double mu, int edges) {
  Vec3d t1, t2;
  if (c.tangent.squaredNorm() > 0.0) {
    t1 = c.tangent.normalized();
    t2 = c.normal.cross(t1);
  } else {
    std::tie(t1, t2) = geom::tangent_basis(c.normal);
  }
  std::vector<Vec3d> out;
  out.reserve(static_cast<std::size_t>(edges));
  for (int k = 0; k < edges; ++k) {
    const double phi = 2.0 * std::numbers::pi * k / edges;
    out.push_back(-c.normal + mu * (std::cos(phi) * t1 + std::sin(phi) * t2));
  }
  return out;
}

namespace detail {

/// Evaluates Q1_upper for points of scalar type T; the value path is plain
/// double and only the selected (direction, wrench) pair is lifted to T.
template <class T>
T q1_core(std::span<const Contact> contacts, std::span<const Vec3<T>> points, const ContactParams& p,
          const Eigen::MatrixXd& dirs, std::vector<std::int64_t>& sel) {
  if (contacts.empty()) {
    sel.push_back(-1);
    return T(0.0);
  }
  if (!(p.torque_scale > 0.0)) throw ValidationError("torque_scale must be positive for Q1 evaluation");
  const int E = p.cone_edges;
  const auto n_w = static_cast<Eigen::Index>(contacts.size()) * E;
  Eigen::MatrixXd W(6, n_w);
  std::vector<Vec3d> forces;
  forces.reserve(static_cast<std::size_t>(n_w));
  for (std::size_t c = 0; c < contacts.size(); ++c) {
    Vec3d pv;
    for (int k = 0; k < 3; ++k) pv[k] = value_of(points[c][k]);
    const Vec3d r = pv - p.com;
    for (const auto& f : cone_edges(contacts[c], p.friction_mu, E)) {
      const auto col = static_cast<Eigen::Index>(forces.size());
      W.col(col).head<3>() = f;
      W.col(col).tail<3>() = p.torque_scale * r.cross(f);
      forces.push_back(f);
    }
  }
  const Eigen::MatrixXd scores = dirs * W;
  double best = std::numeric_limits<double>::infinity();
  Eigen::Index best_j = -1, best_k = -1;
  for (Eigen::Index j = 0; j < scores.rows(); ++j) {
    Eigen::Index arg = 0;
    double h = scores(j, 0);
    for (Eigen::Index k = 1; k < n_w; ++k)
      if (scores(j, k) > h) {
        h = scores(j, k);
        arg = k;
      }
    if (h < best) {
      best = h;
      best_j = j;
      best_k = arg;
    }
  }
  for (const auto& c : contacts) sel.push_back(c.point_index);
  if (!(best > 0.0)) {
    sel.push_back(-2);
    return T(0.0);
  }
  sel.insert(sel.end(), {best_j, best_k});
  const auto c = static_cast<std::size_t>(best_k / E);
  const Vec3d& f = forces[static_cast<std::size_t>(best_k)];
  const Eigen::Matrix<double, 6, 1> s = dirs.row(best_j).transpose();
  const Vec3<T> r = points[c] - p.com.template cast<T>();
  const Vec3<T> torque = r.cross(f.template cast<T>());
  T out = T(s.head<3>().dot(f));
  for (int k = 0; k < 3; ++k) out += (p.torque_scale * s[3 + k]) * torque[k];
  return out;
}

}  // namespace detail

/// Q1 upper bound for fixed contacts (gradient left empty).
inline DiffValue q1_upper(std::span<const Contact> contacts, const ContactParams& p, const Eigen::MatrixXd& dirs) {
  std::vector<Vec3d> pts;
  for (const auto& c : contacts) pts.push_back(c.point);
  DiffValue out;
  out.value = detail::q1_core<double>(contacts, std::span<const Vec3d>(pts), p, dirs, out.selection);
  return out;
}

inline DiffValue q1_upper(std::span<const Contact> contacts, const ContactParams& p) {
  p.validate();
  return q1_upper(contacts, p, q1_directions(p.directions, p.direction_seed));
}

/// Collision points within contact_threshold of the object surface, kept in
/// index order and thinned so no two are closer than contact_threshold.
inline std::vector<Contact> find_contacts(const PoseEval& pe, const HandModel& hand, const TriMesh& object, const ContactParams& p) {
  std::vector<Contact> out;
  const double thr = p.contact_threshold;
  std::vector<bool> near_link(hand.num_links(), false);
  for (std::size_t l = 0; l < hand.num_links(); ++l)
    near_link[l] = !hand.points_of_link(static_cast<int>(l)).empty() &&
                   hand.point_bounds(static_cast<int>(l)).transformed(pe.values[l]).overlaps(object.bounds(), thr);
  for (std::size_t i = 0; i < hand.collision_points.size(); ++i) {
    const auto& hp = hand.collision_points[i];
    if (!near_link[static_cast<std::size_t>(hp.link)]) continue;
    const Vec3d x = pe.point(hp);
    if (!object.bounds().contains(x, thr)) continue;
    const auto q = object.closest(x);
    if (!(std::abs(q.distance) <= thr)) continue;
    bool separate = true;
    for (const auto& c : out)
      if ((c.point - x).norm() < thr) {
        separate = false;
        break;
      }
    if (!separate) continue;
    Contact c;
    c.point = x;
    c.normal = q.normal;
    c.point_index = static_cast<int>(i);
    out.push_back(c);
  }
  return out;
}

inline std::vector<Contact> find_contacts(const GraspConfig& g, const HandModel& hand, const TriMesh& object, const ContactParams& p) {
  return find_contacts(evaluate_pose(g, hand), hand, object, p);
}

/// Q1 upper bound of the grasp's own contacts, differentiated through the
/// contact positions (normals held fixed).
inline DiffValue q1_upper(const PoseEval& pe, const HandModel& hand, const TriMesh& object, const ContactParams& p,
                          const Eigen::MatrixXd& dirs) {
  const auto contacts = find_contacts(pe, hand, object, p);
  std::vector<Vec3<Jet>> pts;
  pts.reserve(contacts.size());
  for (const auto& c : contacts) pts.push_back(pe.point_jet(hand.collision_points[static_cast<std::size_t>(c.point_index)]));
  DiffValue out;
  out.selection = pe.clamp_signature;
  const Jet q = detail::q1_core<Jet>(contacts, std::span<const Vec3<Jet>>(pts), p, dirs, out.selection);
  out.value = q.v;
  out.gradient = pe.grad(q);
  return out;
}

inline DiffValue q1_upper(const GraspConfig& g, const HandModel& hand, const TriMesh& object, const ContactParams& p) {
  p.validate();
  return q1_upper(evaluate_pose(g, hand), hand, object, p, q1_directions(p.directions, p.direction_seed));
}

/// exp(-q) with the chain rule applied to q's gradient.
inline DiffValue q1_loss(const DiffValue& q) {
  const double e = std::exp(-q.value);
  DiffValue out{e, -e * q.gradient, q.selection};
  return out;
}

}  // namespace densegrasp::losses
