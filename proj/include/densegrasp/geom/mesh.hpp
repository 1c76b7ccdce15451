#pragma once

#include "densegrasp/errors.hpp"
#include "densegrasp/geom/types.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

namespace densegrasp::geom {

using Face = std::array<int, 3>;

/// Which part of a triangle a closest point falls on. Edge k joins
/// vertex k and vertex (k+1)%3.
enum class Feature : std::uint8_t { Face, Edge0, Edge1, Edge2, Vertex0, Vertex1, Vertex2 };

struct TrianglePoint {
  Vec3d point;
  Feature feature;
};

/// Closest point on triangle (a, b, c) to p, with the Voronoi region it lies in.
inline TrianglePoint closest_point_on_triangle(const Vec3d& p, const Vec3d& a, const Vec3d& b, const Vec3d& c) {
  const Vec3d ab = b - a;
  const Vec3d ac = c - a;
  const Vec3d ap = p - a;
  const double d1 = ab.dot(ap);
  const double d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return {a, Feature::Vertex0};

  const Vec3d bp = p - b;
  const double d3 = ab.dot(bp);
  const double d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return {b, Feature::Vertex1};

  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
    const double v = d1 / (d1 - d3);
    return {a + v * ab, Feature::Edge0};
  }

  const Vec3d cp = p - c;
  const double d5 = ab.dot(cp);
  const double d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return {c, Feature::Vertex2};

  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
    const double w = d2 / (d2 - d6);
    return {a + w * ac, Feature::Edge2};
  }

  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    return {b + w * (c - b), Feature::Edge1};
  }

  const double denom = 1.0 / (va + vb + vc);
  const double v = vb * denom;
  const double w = vc * denom;
  return {a + ab * v + ac * w, Feature::Face};
}

/// Möller-Trumbore; returns the ray parameter of a hit with t > t_min.
inline std::optional<double> ray_triangle(const Vec3d& origin, const Vec3d& dir, const Vec3d& a, const Vec3d& b,
                                          const Vec3d& c, double t_min = 1e-12) {
  const Vec3d e1 = b - a;
  const Vec3d e2 = c - a;
  const Vec3d pvec = dir.cross(e2);
  const double det = e1.dot(pvec);
  if (std::abs(det) < 1e-300) return std::nullopt;
  const double inv = 1.0 / det;
  const Vec3d tvec = origin - a;
  const double u = tvec.dot(pvec) * inv;
  if (u < 0.0 || u > 1.0) return std::nullopt;
  const Vec3d qvec = tvec.cross(e1);
  const double v = dir.dot(qvec) * inv;
  if (v < 0.0 || u + v > 1.0) return std::nullopt;
  const double t = e2.dot(qvec) * inv;
  if (!(t > t_min)) return std::nullopt;
  return t;
}

struct SurfaceQuery {
  double distance = 0.0;  ///< signed: > 0 inside (penetration), < 0 outside
  Vec3d point = Vec3d::Zero();
  Vec3d normal = Vec3d::UnitZ();  ///< outward pseudonormal of the closest feature
  int face = -1;
  Feature feature = Feature::Face;
};

struct RayHit {
  double t = 0.0;
  int face = -1;
};

/// Watertight, consistently oriented triangle mesh with a bounding-volume
/// hierarchy for closest-point and ray queries. Immutable after create().
class TriMesh {
 public:
  TriMesh() = default;

  /// Validates indices, non-degenerate faces, watertightness (every edge
  /// shared by exactly two faces with opposite orientation) and outward
  /// orientation. Throws ValidationError.
  static TriMesh create(std::vector<Vec3d> vertices, std::vector<Face> faces) {
    TriMesh m;
    m.vertices_ = std::move(vertices);
    m.faces_ = std::move(faces);
    m.validate_and_derive();
    m.build_bvh();
    return m;
  }

  const std::vector<Vec3d>& vertices() const { return vertices_; }
  const std::vector<Face>& faces() const { return faces_; }
  const std::vector<Vec3d>& face_normals() const { return face_normals_; }
  const std::vector<Vec3d>& vertex_pseudonormals() const { return vertex_normals_; }
  const std::vector<double>& face_areas() const { return face_areas_; }
  std::size_t num_faces() const { return faces_.size(); }
  bool empty() const { return faces_.empty(); }
  const Aabb& bounds() const { return bounds_; }
  double total_area() const { return total_area_; }
  double volume() const { return volume_; }
  /// Volume centroid (uniform density center of mass).
  const Vec3d& centroid() const { return centroid_; }

  Vec3d vertex(int face, int corner) const { return vertices_[static_cast<std::size_t>(faces_[face][corner])]; }

  /// Closest surface point; ties broken by lowest face index.
  SurfaceQuery closest(const Vec3d& p) const {
    SurfaceQuery best;
    double best_d2 = std::numeric_limits<double>::infinity();
    Feature best_feature = Feature::Face;
    Vec3d best_point = Vec3d::Zero();
    int best_face = -1;
    if (nodes_.empty()) return best;

    int stack[128];
    int top = 0;
    stack[top++] = 0;
    while (top > 0) {
      const Node& node = nodes_[static_cast<std::size_t>(stack[--top])];
      if (node.box.squared_distance(p) > best_d2 * (1.0 + 1e-12)) continue;
      if (node.count > 0) {
        for (int i = node.first; i < node.first + node.count; ++i) {
          const int f = order_[static_cast<std::size_t>(i)];
          const TrianglePoint tp = closest_point_on_triangle(p, vertex(f, 0), vertex(f, 1), vertex(f, 2));
          const double d2 = (p - tp.point).squaredNorm();
          if (d2 < best_d2 || (d2 == best_d2 && f < best_face)) {
            best_d2 = d2;
            best_face = f;
            best_point = tp.point;
            best_feature = tp.feature;
          }
        }
      } else {
        const Node& l = nodes_[static_cast<std::size_t>(node.left)];
        const Node& r = nodes_[static_cast<std::size_t>(node.right)];
        // Push the farther child first so the nearer one is visited next.
        if (l.box.squared_distance(p) <= r.box.squared_distance(p)) {
          stack[top++] = node.right;
          stack[top++] = node.left;
        } else {
          stack[top++] = node.left;
          stack[top++] = node.right;
        }
      }
    }
    return finish_query(p, best_face, best_point, best_feature, best_d2);
  }

  /// Builds the signed result for a known closest (face, point, feature).
  SurfaceQuery finish_query(const Vec3d& p, int face, const Vec3d& point, Feature feature, double d2) const {
    SurfaceQuery q;
    q.face = face;
    q.point = point;
    q.feature = feature;
    q.normal = pseudonormal(face, feature);
    const double dist = std::sqrt(d2);
    q.distance = (p - point).dot(q.normal) < 0.0 ? dist : -dist;
    if (dist == 0.0) q.distance = 0.0;
    return q;
  }

  /// Positive inside (penetration depth), negative outside.
  double signed_distance(const Vec3d& p) const { return closest(p).distance; }

  Vec3d closest_surface_point(const Vec3d& p) const { return closest(p).point; }

  /// Angle-weighted pseudonormal of a closest-point feature.
  Vec3d pseudonormal(int face, Feature feature) const {
    const auto& f = faces_[static_cast<std::size_t>(face)];
    switch (feature) {
      case Feature::Face: return face_normals_[static_cast<std::size_t>(face)];
      case Feature::Edge0: return edge_normals_[static_cast<std::size_t>(face)][0];
      case Feature::Edge1: return edge_normals_[static_cast<std::size_t>(face)][1];
      case Feature::Edge2: return edge_normals_[static_cast<std::size_t>(face)][2];
      case Feature::Vertex0: return vertex_normals_[static_cast<std::size_t>(f[0])];
      case Feature::Vertex1: return vertex_normals_[static_cast<std::size_t>(f[1])];
      case Feature::Vertex2: return vertex_normals_[static_cast<std::size_t>(f[2])];
    }
    return face_normals_[static_cast<std::size_t>(face)];
  }

  /// Nearest hit along origin + t·dir with t in (t_min, t_max); ties broken by lowest face.
  std::optional<RayHit> raycast(const Vec3d& origin, const Vec3d& dir,
                                double t_max = std::numeric_limits<double>::infinity(), double t_min = 1e-12) const {
    if (nodes_.empty()) return std::nullopt;
    RayHit best{t_max, -1};
    const Vec3d inv = dir.cwiseInverse();
    int stack[128];
    int top = 0;
    stack[top++] = 0;
    while (top > 0) {
      const Node& node = nodes_[static_cast<std::size_t>(stack[--top])];
      if (!slab_hit(node.box, origin, inv, best.t)) continue;
      if (node.count > 0) {
        for (int i = node.first; i < node.first + node.count; ++i) {
          const int f = order_[static_cast<std::size_t>(i)];
          const auto t = ray_triangle(origin, dir, vertex(f, 0), vertex(f, 1), vertex(f, 2), t_min);
          if (t && (*t < best.t || (*t == best.t && (best.face < 0 || f < best.face)))) best = {*t, f};
        }
      } else {
        stack[top++] = node.left;
        stack[top++] = node.right;
      }
    }
    if (best.face < 0) return std::nullopt;
    return best;
  }

  TriMesh transformed(const RigidTransform& t) const {
    std::vector<Vec3d> v;
    v.reserve(vertices_.size());
    for (const auto& p : vertices_) v.push_back(t.apply(p));
    return create(std::move(v), faces_);
  }

 private:
  struct Node {
    Aabb box;
    int left = -1, right = -1;
    int first = 0, count = 0;  // leaf range into order_ when count > 0
  };

  static bool slab_hit(const Aabb& box, const Vec3d& o, const Vec3d& inv, double t_best) {
    const double pad = 1e-9 * (1.0 + box.extent().maxCoeff());
    double t0 = 0.0, t1 = t_best;
    for (int i = 0; i < 3; ++i) {
      double ta = (box.lo[i] - pad - o[i]) * inv[i];
      double tb = (box.hi[i] + pad - o[i]) * inv[i];
      if (std::isnan(ta) || std::isnan(tb)) {
        // Ray parallel to the slab and origin on its plane.
        ta = -std::numeric_limits<double>::infinity();
        tb = std::numeric_limits<double>::infinity();
      }
      if (ta > tb) std::swap(ta, tb);
      t0 = std::max(t0, ta);
      t1 = std::min(t1, tb);
      if (t0 > t1 * (1.0 + 1e-12) + 1e-12) return false;
    }
    return true;
  }

  void validate_and_derive() {
    const auto nv = static_cast<int>(vertices_.size());
    if (faces_.empty()) throw ValidationError("mesh has no faces");
    for (const auto& v : vertices_)
      if (!v.allFinite()) throw ValidationError("mesh vertex is not finite");

    std::unordered_map<std::uint64_t, int> directed;  // (i,j) -> face
    directed.reserve(faces_.size() * 3);
    auto key = [](int i, int j) { return (static_cast<std::uint64_t>(i) << 32) | static_cast<std::uint32_t>(j); };

    face_normals_.resize(faces_.size());
    face_areas_.resize(faces_.size());
    total_area_ = 0.0;
    for (std::size_t f = 0; f < faces_.size(); ++f) {
      const auto& idx = faces_[f];
      for (int k = 0; k < 3; ++k)
        if (idx[k] < 0 || idx[k] >= nv) throw ValidationError("face " + std::to_string(f) + " index out of range");
      if (idx[0] == idx[1] || idx[1] == idx[2] || idx[0] == idx[2])
        throw ValidationError("face " + std::to_string(f) + " repeats a vertex");
      const Vec3d n = (vertex(static_cast<int>(f), 1) - vertex(static_cast<int>(f), 0))
                          .cross(vertex(static_cast<int>(f), 2) - vertex(static_cast<int>(f), 0));
      const double len = n.norm();
      if (!(len > 0.0)) throw ValidationError("face " + std::to_string(f) + " is degenerate");
      face_normals_[f] = n / len;
      face_areas_[f] = 0.5 * len;
      total_area_ += face_areas_[f];
      for (int k = 0; k < 3; ++k) {
        const auto [it, inserted] = directed.emplace(key(idx[k], idx[(k + 1) % 3]), static_cast<int>(f));
        if (!inserted) throw ValidationError("mesh is not watertight: edge used twice in the same direction");
      }
    }
    edge_normals_.resize(faces_.size());
    for (std::size_t f = 0; f < faces_.size(); ++f) {
      const auto& idx = faces_[f];
      for (int k = 0; k < 3; ++k) {
        const auto it = directed.find(key(idx[(k + 1) % 3], idx[k]));
        if (it == directed.end()) throw ValidationError("mesh is not watertight: open edge");
        edge_normals_[f][static_cast<std::size_t>(k)] =
            (face_normals_[f] + face_normals_[static_cast<std::size_t>(it->second)]).normalized();
      }
    }

    vertex_normals_.assign(vertices_.size(), Vec3d::Zero());
    for (std::size_t f = 0; f < faces_.size(); ++f) {
      for (int k = 0; k < 3; ++k) {
        const Vec3d p = vertex(static_cast<int>(f), k);
        const Vec3d e1 = (vertex(static_cast<int>(f), (k + 1) % 3) - p).normalized();
        const Vec3d e2 = (vertex(static_cast<int>(f), (k + 2) % 3) - p).normalized();
        const double angle = std::acos(std::clamp(e1.dot(e2), -1.0, 1.0));
        vertex_normals_[static_cast<std::size_t>(faces_[f][k])] += angle * face_normals_[f];
      }
    }
    for (auto& n : vertex_normals_) {
      if (n.squaredNorm() > 0.0) n.normalize();
    }

    // Signed volume and centroid from the origin-apex tetrahedra.
    volume_ = 0.0;
    Vec3d moment = Vec3d::Zero();
    for (std::size_t f = 0; f < faces_.size(); ++f) {
      const Vec3d a = vertex(static_cast<int>(f), 0), b = vertex(static_cast<int>(f), 1), c = vertex(static_cast<int>(f), 2);
      const double v = a.dot(b.cross(c)) / 6.0;
      volume_ += v;
      moment += v * (a + b + c) / 4.0;
    }
    if (!(volume_ > 0.0)) throw ValidationError("mesh is inward-oriented or has zero volume");
    centroid_ = moment / volume_;

    bounds_ = Aabb{};
    for (const auto& v : vertices_) bounds_.grow(v);
  }

  void build_bvh() {
    order_.resize(faces_.size());
    std::iota(order_.begin(), order_.end(), 0);
    centroids_.resize(faces_.size());
    for (std::size_t f = 0; f < faces_.size(); ++f)
      centroids_[f] = (vertex(static_cast<int>(f), 0) + vertex(static_cast<int>(f), 1) + vertex(static_cast<int>(f), 2)) / 3.0;
    nodes_.clear();
    nodes_.reserve(2 * faces_.size());
    build_node(0, static_cast<int>(faces_.size()));
    centroids_.clear();
    centroids_.shrink_to_fit();
  }

  int build_node(int first, int count) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    Aabb box, cbox;
    for (int i = first; i < first + count; ++i) {
      const int f = order_[static_cast<std::size_t>(i)];
      for (int k = 0; k < 3; ++k) box.grow(vertex(f, k));
      cbox.grow(centroids_[static_cast<std::size_t>(f)]);
    }
    nodes_[static_cast<std::size_t>(id)].box = box;
    if (count <= 4) {
      nodes_[static_cast<std::size_t>(id)].first = first;
      nodes_[static_cast<std::size_t>(id)].count = count;
      return id;
    }
    int axis = 0;
    const Vec3d ext = cbox.extent();
    if (ext.y() > ext[axis]) axis = 1;
    if (ext.z() > ext[axis]) axis = 2;
    const int mid = first + count / 2;
    std::nth_element(order_.begin() + first, order_.begin() + mid, order_.begin() + first + count, [&](int x, int y) {
      const double cx = centroids_[static_cast<std::size_t>(x)][axis], cy = centroids_[static_cast<std::size_t>(y)][axis];
      return cx < cy || (cx == cy && x < y);
    });
    const int left = build_node(first, mid - first);
    const int right = build_node(mid, first + count - mid);
    nodes_[static_cast<std::size_t>(id)].left = left;
    nodes_[static_cast<std::size_t>(id)].right = right;
    return id;
  }

  std::vector<Vec3d> vertices_;
  std::vector<Face> faces_;
  std::vector<Vec3d> face_normals_;
  std::vector<std::array<Vec3d, 3>> edge_normals_;
  std::vector<Vec3d> vertex_normals_;
  std::vector<double> face_areas_;
  double total_area_ = 0.0;
  double volume_ = 0.0;
  Vec3d centroid_ = Vec3d::Zero();
  Aabb bounds_;

  std::vector<Node> nodes_;
  std::vector<int> order_;
  std::vector<Vec3d> centroids_;
};

/// Parses the minimal OBJ subset: `v x y z` and `f i j k` (1-based) lines.
/// Blank lines are skipped; anything else is a ParseError naming the line.
inline TriMesh parse_obj(std::istream& in) {
  std::vector<Vec3d> verts;
  std::vector<Face> faces;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::istringstream ss(line);
    std::string tag;
    ss >> tag;
    if (tag == "v") {
      Vec3d p;
      if (!(ss >> p.x() >> p.y() >> p.z())) throw ParseError("expected three coordinates", lineno);
      std::string extra;
      if (ss >> extra) throw ParseError("unexpected token '" + extra + "'", lineno);
      verts.push_back(p);
    } else if (tag == "f") {
      Face f{};
      for (int k = 0; k < 3; ++k) {
        std::string tok;
        if (!(ss >> tok)) throw ParseError("expected three vertex indices", lineno);
        std::size_t used = 0;
        long idx = 0;
        try {
          idx = std::stol(tok, &used);
        } catch (const std::exception&) {
          throw ParseError("bad vertex index '" + tok + "'", lineno);
        }
        if (used != tok.size() || idx < 1) throw ParseError("bad vertex index '" + tok + "'", lineno);
        f[static_cast<std::size_t>(k)] = static_cast<int>(idx - 1);
      }
      std::string extra;
      if (ss >> extra) throw ParseError("only triangular faces are supported", lineno);
      faces.push_back(f);
    } else {
      throw ParseError("unsupported OBJ statement '" + tag + "'", lineno);
    }
  }
  try {
    return TriMesh::create(std::move(verts), std::move(faces));
  } catch (const ValidationError& e) {
    throw ValidationError(std::string("OBJ mesh invalid: ") + e.what());
  }
}

inline TriMesh load_obj(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open OBJ file " + path);
  return parse_obj(in);
}

inline std::string to_obj(const TriMesh& mesh) {
  std::ostringstream out;
  out.precision(17);
  for (const auto& v : mesh.vertices()) out << "v " << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
  for (const auto& f : mesh.faces()) out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
  return out.str();
}

}  // namespace densegrasp::geom
