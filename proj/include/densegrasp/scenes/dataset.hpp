#pragma once

// Dataset layout, one directory per scene:
//   scene_0000/scene.json     objects (mesh id, translation, quaternion), table, seed
//   scene_0000/cloud.bin      N records of little-endian float64 x y z nx ny nz
//   scene_0000/labels.jsonl   grasp labels (see grasp_io.hpp)
//   scene_0000/labelset.json  matched label indices per cloud point

#include "densegrasp/grasp/grasp_io.hpp"
#include "densegrasp/scenes/labels.hpp"
#include "densegrasp/scenes/render.hpp"
#include "densegrasp/util/checksum.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <functional>

namespace densegrasp::scenes {

namespace fs = std::filesystem;

struct DatasetConfig {
  int scene_count = 10;
  int objects_min = 3;
  int objects_max = 5;
  double table_x = 0.5, table_y = 0.5;
  std::vector<std::string> catalog = catalog_ids();
  std::string hand = "shadow-like";
  std::size_t cloud_points = kCloudPoints;
  RigParams rig;
  PlacementParams placement;
  LabelParams labels;
  std::uint64_t seed = 0;

  void validate() const {
    if (scene_count < 0) throw ValidationError("scene_count must be non-negative");
    if (objects_min < 1 || objects_max < objects_min) throw ValidationError("need 1 <= objects_min <= objects_max");
    if (!(table_x > 0.0 && table_y > 0.0)) throw ValidationError("table size must be positive");
    if (catalog.empty()) throw ValidationError("catalog must not be empty");
    for (const auto& id : catalog) catalog_mesh(id);
    if (cloud_points < 1) throw ValidationError("cloud_points must be positive");
    if (labels.per_object < 0) throw ValidationError("labels_per_object must be non-negative");
    if (placement.min_gap < 0.0) throw ValidationError("min_gap must be non-negative");
  }
};

/// Reads a dataset config; unknown keys are rejected so typos surface.
inline DatasetConfig dataset_config_from_json(const util::json& j) {
  if (!j.is_object()) throw ParseError("dataset config must be a JSON object");
  static const std::vector<std::string> known{"scene_count", "objects_min", "objects_max", "table_size", "catalog", "hand",
                                              "cloud_points", "camera", "min_gap", "standard_pose", "labels_per_object",
                                              "label_standoff", "seed"};
  for (const auto& [k, v] : j.items())
    if (std::find(known.begin(), known.end(), k) == known.end()) throw ParseError("unknown key", 0, k);
  DatasetConfig c;
  c.scene_count = static_cast<int>(util::get_int(j, "scene_count", c.scene_count));
  c.objects_min = static_cast<int>(util::get_int(j, "objects_min", c.objects_min));
  c.objects_max = static_cast<int>(util::get_int(j, "objects_max", c.objects_max));
  if (j.contains("table_size")) {
    const auto& t = j.at("table_size");
    if (!t.is_array() || t.size() != 2 || !t[0].is_number() || !t[1].is_number()) throw ParseError("expected [x, y]", 0, "table_size");
    c.table_x = t[0].get<double>();
    c.table_y = t[1].get<double>();
  }
  if (j.contains("catalog")) {
    if (!j.at("catalog").is_array()) throw ParseError("expected an array of ids", 0, "catalog");
    c.catalog.clear();
    for (const auto& id : j.at("catalog")) {
      if (!id.is_string()) throw ParseError("expected an array of ids", 0, "catalog");
      c.catalog.push_back(id.get<std::string>());
    }
  }
  if (j.contains("hand")) c.hand = util::get_string(j, "hand");
  c.cloud_points = static_cast<std::size_t>(util::get_int(j, "cloud_points", static_cast<long long>(c.cloud_points)));
  if (j.contains("camera")) {
    const auto& cam = j.at("camera");
    c.rig.width = static_cast<int>(util::get_int(cam, "width", c.rig.width));
    c.rig.height = static_cast<int>(util::get_int(cam, "height", c.rig.height));
    c.rig.fov_y = util::get_number(cam, "fov_deg", c.rig.fov_y * 180.0 / std::numbers::pi) * std::numbers::pi / 180.0;
    c.rig.elevation = util::get_number(cam, "elevation_deg", c.rig.elevation * 180.0 / std::numbers::pi) * std::numbers::pi / 180.0;
  }
  c.placement.min_gap = util::get_number(j, "min_gap", c.placement.min_gap);
  if (j.contains("standard_pose")) {
    if (!j.at("standard_pose").is_boolean()) throw ParseError("expected a boolean", 0, "standard_pose");
    c.placement.standard_pose = j.at("standard_pose").get<bool>();
  }
  c.labels.per_object = static_cast<int>(util::get_int(j, "labels_per_object", c.labels.per_object));
  c.labels.standoff = util::get_number(j, "label_standoff", c.labels.standoff);
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_integer() || j.at("seed").get<long long>() < 0) throw ParseError("expected a non-negative integer", 0, "seed");
    c.seed = j.at("seed").get<std::uint64_t>();
  }
  c.validate();
  return c;
}

// ---------------------------------------------------------------------------
// cloud.bin

inline std::string cloud_to_bytes(const geom::PointCloud& cloud) {
  cloud.validate();
  std::string out(cloud.size() * 6 * sizeof(double), '\0');
  char* w = out.data();
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const double rec[6] = {cloud.points[i].x(), cloud.points[i].y(), cloud.points[i].z(),
                           cloud.normals[i].x(), cloud.normals[i].y(), cloud.normals[i].z()};
    for (double v : rec) {
      auto bits = std::bit_cast<std::uint64_t>(v);
      if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
      std::memcpy(w, &bits, sizeof bits);
      w += sizeof bits;
    }
  }
  return out;
}

inline geom::PointCloud cloud_from_bytes(const std::string& bytes) {
  constexpr std::size_t rec = 6 * sizeof(double);
  if (bytes.size() % rec != 0) throw ParseError("cloud.bin size is not a multiple of 48 bytes");
  geom::PointCloud c;
  const char* r = bytes.data();
  for (std::size_t i = 0; i < bytes.size() / rec; ++i) {
    double v[6];
    for (double& x : v) {
      std::uint64_t bits;
      std::memcpy(&bits, r, sizeof bits);
      if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
      x = std::bit_cast<double>(bits);
      r += sizeof bits;
    }
    c.points.emplace_back(v[0], v[1], v[2]);
    c.normals.emplace_back(v[3], v[4], v[5]);
  }
  return c;
}

// ---------------------------------------------------------------------------

struct DatasetRecord {
  std::string name;
  Scene scene;
  geom::PointCloud cloud;
  std::vector<grasp::GraspLabel> labels;
  grasp::LabelSet labelset;
  std::string cloud_checksum;
};

inline std::string scene_dir_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "scene_%04zu", index);
  return buf;
}

/// Builds one scene record: placement, synthetic labels, fused cloud, matching.
inline DatasetRecord generate_record(const DatasetConfig& cfg, const hand::HandModel& hand, std::size_t index) {
  const std::uint64_t s = util::derive_seed(cfg.seed, index);
  util::Rng rng(util::derive_seed(s, 0));
  const int count = cfg.objects_min + static_cast<int>(rng.index(static_cast<std::uint64_t>(cfg.objects_max - cfg.objects_min + 1)));
  DatasetRecord r;
  r.name = scene_dir_name(index);
  r.scene = place_objects(cfg.catalog, count, cfg.table_x, cfg.table_y, util::derive_seed(s, 1), cfg.placement);
  r.labels = synth_labels(r.scene, hand, util::derive_seed(s, 2), cfg.labels);
  const auto cams = default_rig(cfg.table_x, cfg.table_y, cfg.rig);
  r.cloud = fuse_point_cloud(r.scene, cams, util::derive_seed(s, 3), cfg.cloud_points);
  r.labelset = grasp::match_labels(r.cloud, r.labels);
  r.cloud_checksum = util::checksum_hex(cloud_to_bytes(r.cloud));
  return r;
}

inline void write_record(const DatasetRecord& r, const fs::path& root, const std::string& hand_name) {
  const fs::path dir = root / r.name;
  fs::create_directories(dir);
  util::json sj = scene_to_json(r.scene);
  sj["name"] = r.name;
  sj["hand"] = hand_name;
  util::write_file((dir / "scene.json").string(), util::dump(sj, 1));
  util::write_file((dir / "cloud.bin").string(), cloud_to_bytes(r.cloud));
  util::write_file((dir / "labels.jsonl").string(), grasp::labels_to_jsonl(r.labels));
  util::write_file((dir / "labelset.json").string(),
                   util::dump(grasp::labelset_to_json(r.labelset, r.labels.size(), r.cloud_checksum), 1));
}

struct GenerateResult {
  std::vector<std::string> written;
  std::vector<std::string> failed;  ///< "scene_0003: reason"
};

/// Generates and writes every scene; a scene that fails is logged through
/// `log` and skipped.
inline GenerateResult generate_dataset(const DatasetConfig& cfg, const hand::HandModel& hand, const fs::path& root,
                                       const std::function<void(const std::string&)>& log = {}) {
  cfg.validate();
  GenerateResult res;
  for (int i = 0; i < cfg.scene_count; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    try {
      const DatasetRecord r = generate_record(cfg, hand, idx);
      write_record(r, root, hand.name);
      res.written.push_back(r.name);
    } catch (const Error& e) {
      res.failed.push_back(scene_dir_name(idx) + ": " + e.what());
      if (log) log(res.failed.back());
    }
  }
  return res;
}

/// Scene directories of a dataset in name order.
inline std::vector<fs::path> list_scenes(const fs::path& root) {
  std::vector<fs::path> out;
  if (!fs::is_directory(root)) throw ParseError("dataset directory not found: " + root.string());
  for (const auto& e : fs::directory_iterator(root))
    if (e.is_directory() && fs::exists(e.path() / "scene.json")) out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

inline Scene load_scene(const fs::path& dir) { return scene_from_json(util::load_json((dir / "scene.json").string())); }

inline geom::PointCloud load_cloud(const fs::path& dir) {
  auto c = cloud_from_bytes(util::read_file((dir / "cloud.bin").string()));
  c.validate();
  return c;
}

}  // namespace densegrasp::scenes
