#pragma once

#include "densegrasp/dual.hpp"
#include "densegrasp/errors.hpp"

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cmath>
#include <string>
#include <vector>

namespace densegrasp::geom {

using densegrasp::value_of;

template <class T> using Vec3 = Eigen::Matrix<T, 3, 1>;
template <class T> using Mat3 = Eigen::Matrix<T, 3, 3>;
using Vec3d = Vec3<double>;
using Mat3d = Mat3<double>;

/// Rigid motion x -> rotation * x + translation.
template <class T>
struct Transform {
  Mat3<T> rotation = Mat3<T>::Identity();
  Vec3<T> translation = Vec3<T>::Zero();

  Vec3<T> apply(const Vec3<T>& p) const { return rotation * p + translation; }

  template <class U>
  Vec3<T> apply(const Vec3<U>& p) const { return rotation * p.template cast<T>() + translation; }

  /// Inverse map applied to a point: rotationᵀ (p - translation).
  Vec3<T> apply_inverse(const Vec3<T>& p) const { return rotation.transpose() * (p - translation); }

  /// (this ∘ other)(x) = this(other(x)).
  Transform compose(const Transform& other) const {
    return {rotation * other.rotation, rotation * other.translation + translation};
  }

  Transform inverse() const {
    Mat3<T> rt = rotation.transpose();
    return {rt, -(rt * translation)};
  }

  template <class U>
  Transform<U> cast() const {
    return {rotation.template cast<U>(), translation.template cast<U>()};
  }

  static Transform identity() { return {}; }
};

using RigidTransform = Transform<double>;

inline Transform<double> value_of(const Transform<double>& t) { return t; }
template <int N>
Transform<double> value_of(const Transform<Dual<N>>& t) {
  Transform<double> out;
  for (int r = 0; r < 3; ++r) {
    out.translation[r] = t.translation[r].v;
    for (int c = 0; c < 3; ++c) out.rotation(r, c) = t.rotation(r, c).v;
  }
  return out;
}

/// Throws ValidationError unless rotation is orthonormal with det +1 (tol 1e-9).
inline void validate_rigid(const RigidTransform& t) {
  const double ortho = (t.rotation.transpose() * t.rotation - Mat3d::Identity()).cwiseAbs().maxCoeff();
  const double det = t.rotation.determinant();
  if (!(ortho <= 1e-9) || !(std::abs(det - 1.0) <= 1e-9) || !t.translation.allFinite())
    throw ValidationError("rotation is not a proper orthonormal matrix");
}

inline RigidTransform from_quaternion(const Vec3d& translation, const Eigen::Quaterniond& q) {
  if (!(q.norm() > 0.0)) throw ValidationError("zero quaternion");
  return {q.normalized().toRotationMatrix(), translation};
}

/// Quaternion stored as [w, x, y, z].
inline std::vector<double> quaternion_wxyz(const Mat3d& rotation) {
  Eigen::Quaterniond q(rotation);
  q.normalize();
  if (q.w() < 0) q.coeffs() = -q.coeffs();
  return {q.w(), q.x(), q.y(), q.z()};
}

/// Rotation about a unit axis (Rodrigues).
template <class T>
Mat3<T> axis_angle(const Vec3d& axis, const T& angle) {
  using std::cos;
  using std::sin;
  const T s = sin(angle);
  const T c1 = T(1.0) - cos(angle);
  Mat3d k;
  k << 0, -axis.z(), axis.y(), axis.z(), 0, -axis.x(), -axis.y(), axis.x(), 0;
  const Mat3d k2 = k * k;
  Mat3<T> r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r(i, j) = T(i == j ? 1.0 : 0.0) + s * k(i, j) + c1 * k2(i, j);
  return r;
}

/// Continuous 6D rotation parameterization: two unconstrained 3-vectors.
template <class T>
struct Rot6D {
  Vec3<T> a = Vec3<T>::UnitX();
  Vec3<T> b = Vec3<T>::UnitY();
};

inline constexpr double kRotationEpsilon = 1e-8;

inline bool is_degenerate(const Vec3d& a, const Vec3d& b) {
  const double na = a.norm();
  const double cross = a.cross(b).norm();
  // The second test alone admits b = 0, which has no direction to keep.
  return !(na >= kRotationEpsilon) || !(cross >= kRotationEpsilon * na * b.norm()) || !(cross > 0.0) || !a.allFinite() ||
         !b.allFinite();
}

/// Gram-Schmidt reconstruction: columns a/|a|, the normalized part of b
/// orthogonal to it, and their cross product.
template <class T>
Mat3<T> gram_schmidt_rot6d(const Rot6D<T>& r) {
  Vec3d av, bv;
  for (int i = 0; i < 3; ++i) {
    av[i] = value_of(r.a[i]);
    bv[i] = value_of(r.b[i]);
  }
  if (is_degenerate(av, bv)) throw DegenerateRotation("6D rotation vectors are degenerate");
  using std::sqrt;
  const Vec3<T> c1 = r.a / sqrt(r.a.squaredNorm());
  const Vec3<T> u = r.b - c1 * c1.dot(r.b);
  const Vec3<T> c2 = u / sqrt(u.squaredNorm());
  const Vec3<T> c3 = c1.cross(c2);
  Mat3<T> out;
  out.col(0) = c1;
  out.col(1) = c2;
  out.col(2) = c3;
  return out;
}

inline Mat3d gram_schmidt_rot6d(const Vec3d& a, const Vec3d& b) {
  return gram_schmidt_rot6d(Rot6D<double>{a, b});
}

/// Points with outward unit normals.
struct PointCloud {
  std::vector<Vec3d> points;
  std::vector<Vec3d> normals;

  std::size_t size() const { return points.size(); }
  bool has_normals() const { return !points.empty() && normals.size() == points.size(); }

  /// Throws MissingNormals / ValidationError when the invariants fail.
  void validate() const {
    if (normals.size() != points.size()) throw MissingNormals("point cloud normals missing or size mismatch");
    for (const auto& n : normals)
      if (!(std::abs(n.norm() - 1.0) <= 1e-9)) throw MissingNormals("point cloud normal is not unit length");
  }
};

/// Axis-aligned bounding box.
struct Aabb {
  Vec3d lo = Vec3d::Constant(std::numeric_limits<double>::infinity());
  Vec3d hi = Vec3d::Constant(-std::numeric_limits<double>::infinity());

  void grow(const Vec3d& p) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  void grow(const Aabb& b) {
    lo = lo.cwiseMin(b.lo);
    hi = hi.cwiseMax(b.hi);
  }
  bool empty() const { return !(lo.x() <= hi.x()); }
  Vec3d center() const { return 0.5 * (lo + hi); }
  Vec3d extent() const { return hi - lo; }

  bool contains(const Vec3d& p, double margin = 0.0) const {
    return (p.array() >= lo.array() - margin).all() && (p.array() <= hi.array() + margin).all();
  }
  bool overlaps(const Aabb& o, double margin = 0.0) const {
    return (lo.array() <= o.hi.array() + margin).all() && (o.lo.array() <= hi.array() + margin).all();
  }
  /// Squared distance from p to the box (0 inside).
  double squared_distance(const Vec3d& p) const {
    const Vec3d d = (lo - p).cwiseMax(Vec3d::Zero()).cwiseMax(p - hi);
    return d.squaredNorm();
  }

  Aabb transformed(const RigidTransform& t) const {
    Aabb out;
    if (empty()) return out;
    for (int i = 0; i < 8; ++i) {
      const Vec3d c((i & 1) ? hi.x() : lo.x(), (i & 2) ? hi.y() : lo.y(), (i & 4) ? hi.z() : lo.z());
      out.grow(t.apply(c));
    }
    return out;
  }
};

/// Right-handed unit tangent pair (t1, t2) with t1 × t2 = n.
inline std::pair<Vec3d, Vec3d> tangent_basis(const Vec3d& n) {
  // Helper axis: the coordinate axis least aligned with n (lowest index on ties).
  int axis = 0;
  for (int i = 1; i < 3; ++i)
    if (std::abs(n[i]) < std::abs(n[axis])) axis = i;
  const Vec3d t1 = n.cross(Vec3d::Unit(axis)).normalized();
  const Vec3d t2 = n.cross(t1);
  return {t1, t2};
}

}  // namespace densegrasp::geom
