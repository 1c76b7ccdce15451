#pragma once

#include "densegrasp/geom/mesh.hpp"
#include "densegrasp/grasp/grasp.hpp"
#include "densegrasp/hand/hand_io.hpp"
#include "densegrasp/util/rng.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace densegrasp::testing {

using geom::Mat3d;
using geom::Vec3d;

inline Vec3d random_vec(util::Rng& rng, double scale = 1.0) { return {scale * rng.normal(), scale * rng.normal(), scale * rng.normal()}; }

inline Vec3d random_unit(util::Rng& rng) {
  Vec3d v;
  do v = random_vec(rng);
  while (v.norm() < 1e-3);
  return v.normalized();
}

inline Eigen::Quaterniond random_quaternion(util::Rng& rng) {
  Eigen::Quaterniond q(rng.normal(), rng.normal(), rng.normal(), rng.normal());
  q.normalize();
  return q;
}

inline geom::RigidTransform random_pose(util::Rng& rng, double scale = 0.5) {
  return geom::from_quaternion(random_vec(rng, scale), random_quaternion(rng));
}

/// Homogeneous 4x4 matrix of a rigid transform.
inline Eigen::Matrix4d homogeneous(const geom::RigidTransform& t) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = t.rotation;
  m.topRightCorner<3, 1>() = t.translation;
  return m;
}

inline util::json json_vec(const Vec3d& v) { return util::json::array({v.x(), v.y(), v.z()}); }

/// Serial chain of `joints` revolute joints with random origins and axes;
/// every link is a 1 cm cube so points are generated from the geometry.
inline util::json random_chain_json(util::Rng& rng, int joints) {
  util::json j;
  j["name"] = "chain";
  j["sampling_seed"] = 3;
  util::json links = util::json::array();
  for (int l = 0; l <= joints; ++l) {
    util::json link{{"name", "l" + std::to_string(l)}, {"geometry", {{"type", "box"}, {"size", {0.01, 0.01, 0.01}}}}};
    link["inner"] = {{"normal", {0, 0, 1}}, {"count", l == 0 ? 45 - joints * 10 : 10}};
    links.push_back(link);
  }
  j["links"] = links;
  util::json js = util::json::array();
  for (int k = 0; k < joints; ++k) {
    const auto q = random_quaternion(rng);
    js.push_back({{"name", "j" + std::to_string(k)},
                  {"parent", "l" + std::to_string(k)},
                  {"child", "l" + std::to_string(k + 1)},
                  {"origin", {{"translation", json_vec(random_vec(rng, 0.05))}, {"quaternion", {q.w(), q.x(), q.y(), q.z()}}}},
                  {"axis", json_vec(random_unit(rng))},
                  {"limits", {-2.0, 2.0}}});
  }
  j["joints"] = js;
  return j;
}

inline util::json point_entry(const Vec3d& p) { return util::json::array({0, p.x(), p.y(), p.z()}); }

/// Hand with a single massless palm and explicit points: the leading
/// collision points at `first`, the rest and all inner points at `rest`.
/// Inner point 0 sits at first[0].
inline hand::HandModel point_hand(const std::vector<Vec3d>& first, const Vec3d& rest) {
  util::json j;
  j["name"] = "points";
  j["links"] = util::json::array();
  j["links"].push_back(util::json{{"name", "palm"}});
  j["joints"] = util::json::array();
  util::json cp = util::json::array();
  for (std::size_t i = 0; i < 2000; ++i) cp.push_back(point_entry(i < first.size() ? first[i] : rest));
  util::json ip = util::json::array();
  for (int i = 0; i < 45; ++i) ip.push_back(point_entry(i == 0 && !first.empty() ? first[0] : rest));
  j["collision_points"] = cp;
  j["inner_points"] = ip;
  return hand::parse_hand(j);
}

inline hand::HandModel point_hand(const Vec3d& first, const Vec3d& rest) { return point_hand(std::vector<Vec3d>{first}, rest); }

/// Grasp at the origin with identity rotation and no joints.
inline grasp::GraspConfig identity_grasp(const hand::HandModel& h) {
  grasp::GraspConfig g;
  g.anchor = Vec3d::Zero();
  g.offset = Vec3d::Zero();
  g.a = Vec3d::UnitX();
  g.b = Vec3d::UnitY();
  g.theta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(h.dof()));
  return g;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("densegrasp_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string data_path(const std::string& rel) { return std::string(DENSEGRASP_DATA_DIR) + "/" + rel; }

}  // namespace densegrasp::testing
