#pragma once

// Hand description files (JSON).
//
// {
//   "name": "simple-2f",
//   "sampling_seed": 11,
//   "palm_reference_point": [0, 0, 0],          // optional, default palm origin
//   "open_hand_bias": 0.7,                      // optional, default 0.5
//   "links": [
//     {"name": "palm", "geometry": {"type": "box", "size": [...], "center": [...]},
//      "inner": {"normal": [0, 0, 1], "count": 15}},
//     {"name": "knuckle"}                       // no geometry: a massless frame
//   ],
//   "joints": [
//     {"name": "j1", "parent": "palm", "child": "knuckle",
//      "origin": {"translation": [...], "quaternion": [w, x, y, z]},
//      "axis": [1, 0, 0], "limits": [0, 1.4], "closes": true}
//   ],
//   "collision_points": [[link, x, y, z], ...], // optional, 2000 entries
//   "inner_points": [[link, x, y, z], ...]      // optional, 45 entries
// }
//
// Geometry types: box {size, center}, cylinder {radius, height, center, axis: "x"|"y"|"z"},
// sphere {radius, center}, obj {path} (relative to the hand file).

#include "densegrasp/errors.hpp"
#include "densegrasp/geom/primitives.hpp"
#include "densegrasp/geom/sampling.hpp"
#include "densegrasp/hand/hand_model.hpp"
#include "densegrasp/util/json_io.hpp"
#include "densegrasp/util/rng.hpp"

#include <cstdlib>
#include <filesystem>
#include <map>

#ifndef DENSEGRASP_DATA_DIR
#define DENSEGRASP_DATA_DIR "data"
#endif

namespace densegrasp::hand {

using util::json;

inline TriMesh build_geometry(const json& g, const std::filesystem::path& base_dir) {
  const std::string type = util::get_string(g, "type");
  geom::RigidTransform place;
  if (g.contains("center")) place.translation = util::get_vec3(g, "center");
  if (type == "box") return geom::make_box(util::get_vec3(g, "size")).transformed(place);
  if (type == "sphere") return geom::make_sphere(util::get_number(g, "radius"), 1).transformed(place);
  if (type == "cylinder") {
    const std::string axis = g.contains("axis") ? util::get_string(g, "axis") : "z";
    if (axis == "x") place.rotation = geom::axis_angle<double>(Vec3d::UnitY(), std::numbers::pi / 2);
    else if (axis == "y") place.rotation = geom::axis_angle<double>(Vec3d::UnitX(), -std::numbers::pi / 2);
    else if (axis != "z") throw ParseError("axis must be x, y or z", 0, "axis");
    return geom::make_cylinder(util::get_number(g, "radius"), util::get_number(g, "height"), 16).transformed(place);
  }
  if (type == "obj") return geom::load_obj((base_dir / util::get_string(g, "path")).string());
  throw ParseError("unknown geometry type '" + type + "'", 0, "type");
}

/// Largest-remainder apportionment of `total` over `weights`.
inline std::vector<std::size_t> apportion(const std::vector<double>& weights, std::size_t total) {
  double sum = 0.0;
  for (double w : weights) sum += w;
  std::vector<std::size_t> out(weights.size(), 0);
  if (!(sum > 0.0)) return out;
  std::vector<std::pair<double, std::size_t>> rema;
  std::size_t used = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double exact = static_cast<double>(total) * weights[i] / sum;
    out[i] = static_cast<std::size_t>(std::floor(exact));
    used += out[i];
    rema.emplace_back(exact - std::floor(exact), i);
  }
  std::stable_sort(rema.begin(), rema.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; used < total; ++k, ++used) out[rema[k % rema.size()].second]++;
  return out;
}

/// Area-proportional collision points over all meshed links.
inline std::vector<HandPoint> generate_collision_points(const std::vector<Link>& links, std::uint64_t seed) {
  std::vector<double> areas;
  for (const auto& l : links) areas.push_back(l.mesh ? l.mesh->total_area() : 0.0);
  const auto counts = apportion(areas, kCollisionPointCount);
  std::vector<HandPoint> out;
  for (std::size_t l = 0; l < links.size(); ++l) {
    if (counts[l] == 0) continue;
    const auto cloud = geom::sample_surface(*links[l].mesh, counts[l], util::derive_seed(seed, l));
    for (const auto& p : cloud.points) out.push_back({static_cast<int>(l), p});
  }
  return out;
}

/// Inner points on the palm-facing faces flagged per link.
inline std::vector<HandPoint> generate_inner_points(const std::vector<Link>& links, std::uint64_t seed) {
  std::vector<HandPoint> out;
  for (std::size_t l = 0; l < links.size(); ++l) {
    const auto& link = links[l];
    if (link.inner_count <= 0) continue;
    if (!link.mesh || !link.inner_normal) throw ValidationError("link '" + link.name + "' flags inner points without geometry");
    std::vector<bool> filter(link.mesh->num_faces());
    bool any = false;
    for (std::size_t f = 0; f < filter.size(); ++f) {
      filter[f] = link.mesh->face_normals()[f].dot(*link.inner_normal) > 0.9;
      any = any || filter[f];
    }
    if (!any) throw ValidationError("link '" + link.name + "' has no faces facing its inner normal");
    const auto cloud = geom::sample_surface(*link.mesh, static_cast<std::size_t>(link.inner_count),
                                            util::derive_seed(seed, 1000 + l), filter);
    for (const auto& p : cloud.points) out.push_back({static_cast<int>(l), p});
  }
  return out;
}

inline std::vector<HandPoint> parse_points(const json& arr, const std::string& name, std::size_t nlinks) {
  if (!arr.is_array()) throw ParseError("expected an array of [link, x, y, z]", 0, name);
  std::vector<HandPoint> out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const auto& e = arr[i];
    if (!e.is_array() || e.size() != 4 || !e[0].is_number_integer() || !e[1].is_number() || !e[2].is_number() || !e[3].is_number())
      throw ParseError("entry " + std::to_string(i) + " must be [link, x, y, z]", 0, name);
    const auto link = e[0].get<long long>();
    if (link < 0 || static_cast<std::size_t>(link) >= nlinks)
      throw ValidationError(name + " entry " + std::to_string(i) + " references an unknown link");
    out.push_back({static_cast<int>(link), Vec3d(e[1].get<double>(), e[2].get<double>(), e[3].get<double>())});
  }
  return out;
}

inline HandModel parse_hand(const json& j, const std::filesystem::path& base_dir = ".") {
  HandModel hand;
  hand.name = j.contains("name") ? util::get_string(j, "name") : "hand";
  hand.sampling_seed = static_cast<std::uint64_t>(util::get_int(j, "sampling_seed", 0));
  if (j.contains("palm_reference_point")) hand.palm_reference_point = util::get_vec3(j, "palm_reference_point");
  hand.open_hand_bias = util::get_number(j, "open_hand_bias", 0.5);
  if (!(hand.open_hand_bias >= 0.0 && hand.open_hand_bias <= 1.0)) throw ValidationError("open_hand_bias must lie in [0, 1]");

  const json& links = util::field(j, "links");
  if (!links.is_array() || links.empty()) throw ParseError("expected a non-empty array", 0, "links");
  std::map<std::string, int> index;
  for (const auto& lj : links) {
    Link link;
    link.name = util::get_string(lj, "name");
    if (index.count(link.name)) throw ValidationError("duplicate link name '" + link.name + "'");
    if (lj.contains("geometry")) {
      link.geometry = lj.at("geometry");
      try {
        link.mesh = build_geometry(link.geometry, base_dir);
      } catch (const ParseError& e) {
        throw ParseError(std::string(e.what()), 0, "links." + link.name + ".geometry");
      }
    }
    if (lj.contains("inner")) {
      const json& inner = lj.at("inner");
      link.inner_normal = util::get_vec3(inner, "normal").normalized();
      link.inner_count = static_cast<int>(util::get_int(inner, "count"));
    }
    index[link.name] = static_cast<int>(hand.links.size());
    hand.links.push_back(std::move(link));
  }

  auto link_ref = [&](const json& jj, const std::string& key) {
    const json& v = util::field(jj, key);
    if (v.is_string()) {
      const auto it = index.find(v.get<std::string>());
      if (it == index.end()) throw ValidationError("unknown link '" + v.get<std::string>() + "'");
      return it->second;
    }
    if (v.is_number_integer()) return static_cast<int>(v.get<long long>());
    throw ParseError("expected a link name or index", 0, key);
  };

  for (const auto& jj : util::field(j, "joints")) {
    JointSpec js;
    js.name = util::get_string(jj, "name");
    js.parent_link = link_ref(jj, "parent");
    js.child_link = link_ref(jj, "child");
    if (jj.contains("origin")) {
      const json& o = jj.at("origin");
      js.origin.translation = o.contains("translation") ? util::get_vec3(o, "translation") : Vec3d::Zero();
      if (o.contains("quaternion")) js.origin_quaternion = util::get_quaternion(o, "quaternion");
      js.origin.rotation = util::quaternion_matrix(js.origin_quaternion);
    }
    js.axis = util::get_vec3(jj, "axis");
    const json& lim = util::field(jj, "limits");
    if (!lim.is_array() || lim.size() != 2 || !lim[0].is_number() || !lim[1].is_number())
      throw ParseError("expected [min, max]", 0, "limits");
    js.limit_min = lim[0].get<double>();
    js.limit_max = lim[1].get<double>();
    js.closes = !jj.contains("closes") || jj.at("closes").get<bool>();
    hand.joints.push_back(std::move(js));
  }

  hand.collision_points = j.contains("collision_points")
                              ? parse_points(j.at("collision_points"), "collision_points", hand.links.size())
                              : generate_collision_points(hand.links, hand.sampling_seed);
  hand.inner_points = j.contains("inner_points") ? parse_points(j.at("inner_points"), "inner_points", hand.links.size())
                                                 : generate_inner_points(hand.links, hand.sampling_seed);
  hand.finalize();
  return hand;
}

inline HandModel load_hand(const std::string& path) {
  const json j = util::load_json(path);
  return parse_hand(j, std::filesystem::path(path).parent_path());
}

/// Serializes the model with its point sets made explicit, so that
/// load -> save -> load reproduces the model bit for bit.
inline json hand_to_json(const HandModel& hand) {
  json j;
  j["name"] = hand.name;
  j["sampling_seed"] = hand.sampling_seed;
  j["palm_reference_point"] = util::vec3_json(hand.palm_reference_point);
  j["open_hand_bias"] = hand.open_hand_bias;
  json links = json::array();
  for (const auto& l : hand.links) {
    json lj;
    lj["name"] = l.name;
    if (!l.geometry.is_null()) lj["geometry"] = l.geometry;
    if (l.inner_count > 0) lj["inner"] = {{"normal", util::vec3_json(*l.inner_normal)}, {"count", l.inner_count}};
    links.push_back(lj);
  }
  j["links"] = links;
  json joints = json::array();
  for (const auto& js : hand.joints) {
    joints.push_back({{"name", js.name},
                      {"parent", hand.links[static_cast<std::size_t>(js.parent_link)].name},
                      {"child", hand.links[static_cast<std::size_t>(js.child_link)].name},
                      {"origin", {{"translation", util::vec3_json(js.origin.translation)},
                                  {"quaternion", util::quaternion_json(js.origin_quaternion)}}},
                      {"axis", util::vec3_json(js.axis)},
                      {"limits", json::array({js.limit_min, js.limit_max})},
                      {"closes", js.closes}});
  }
  j["joints"] = joints;
  auto points = [](const std::vector<HandPoint>& pts) {
    json arr = json::array();
    for (const auto& p : pts) arr.push_back(json::array({p.link, p.position.x(), p.position.y(), p.position.z()}));
    return arr;
  };
  j["collision_points"] = points(hand.collision_points);
  j["inner_points"] = points(hand.inner_points);
  return j;
}

inline void save_hand(const HandModel& hand, const std::string& path) { util::write_file(path, util::dump(hand_to_json(hand), 1)); }

/// Directories searched for bundled hands: $DENSEGRASP_HAND_PATH (colon
/// separated) first, then the installed data directory.
inline std::vector<std::filesystem::path> hand_search_path() {
  std::vector<std::filesystem::path> dirs;
  if (const char* env = std::getenv("DENSEGRASP_HAND_PATH")) {
    std::string s(env);
    std::size_t pos = 0;
    while (pos <= s.size()) {
      const auto next = s.find(':', pos);
      const std::string part = s.substr(pos, next == std::string::npos ? std::string::npos : next - pos);
      if (!part.empty()) dirs.emplace_back(part);
      if (next == std::string::npos) break;
      pos = next + 1;
    }
  }
  dirs.emplace_back(std::filesystem::path(DENSEGRASP_DATA_DIR) / "hands");
  return dirs;
}

/// Resolves a hand by file path or bundled name ("simple-2f", "shadow-like").
inline std::string resolve_hand_path(const std::string& name_or_path) {
  if (std::filesystem::is_regular_file(name_or_path)) return name_or_path;
  for (const auto& dir : hand_search_path()) {
    const auto candidate = dir / (name_or_path + ".json");
    if (std::filesystem::is_regular_file(candidate)) return candidate.string();
  }
  throw ParseError("hand '" + name_or_path + "' not found");
}

inline HandModel load_hand_by_name(const std::string& name_or_path) { return load_hand(resolve_hand_path(name_or_path)); }

}  // namespace densegrasp::hand
