#pragma once

// Label files.
//   labels.jsonl    one GraspLabel per line:
//                   {"translation": [x,y,z], "quaternion": [w,x,y,z], "joints": [...]}
//   labelset.json   {"cloud_checksum": "...", "labels_file": "labels.jsonl",
//                    "num_points": N, "num_labels": G,
//                    "positive": [{"point": i, "labels": [l0, l1, ...]}, ...]}

#include "densegrasp/grasp/grasp.hpp"
#include "densegrasp/util/json_io.hpp"

#include <sstream>
#include <string>

namespace densegrasp::grasp {

using util::json;

inline std::string label_line(const GraspLabel& l) {
  json j;
  j["translation"] = util::vec3_json(l.palm_pose.translation);
  j["quaternion"] = util::quaternion_json(l.quaternion);
  j["joints"] = std::vector<double>(l.theta.data(), l.theta.data() + l.theta.size());
  return j.dump();
}

inline std::string labels_to_jsonl(const std::vector<GraspLabel>& labels) {
  std::string out;
  for (const auto& l : labels) out += label_line(l) + "\n";
  return out;
}

/// Parses JSONL labels. Blank lines are skipped. Wrong joint counts raise
/// DimensionMismatch; anything malformed raises ParseError with the line.
inline std::vector<GraspLabel> parse_labels(const std::string& text, const HandModel& hand) {
  std::vector<GraspLabel> out;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      const Vec3d t = util::get_vec3(j, "translation");
      const auto q = util::get_quaternion(j, "quaternion");
      const json& jj = util::field(j, "joints");
      if (!jj.is_array()) throw ParseError("expected an array", 0, "joints");
      JointVector theta(static_cast<Eigen::Index>(jj.size()));
      for (std::size_t k = 0; k < jj.size(); ++k) {
        if (!jj[k].is_number()) throw ParseError("expected numbers", 0, "joints");
        theta[static_cast<Eigen::Index>(k)] = jj[k].get<double>();
      }
      out.push_back(make_label(t, q, theta, hand));
    } catch (const json::exception& e) {
      throw ParseError(std::string("label JSON: ") + e.what(), lineno);
    } catch (const ParseError& e) {
      throw ParseError(e.what(), lineno, e.field());
    } catch (const DimensionMismatch& e) {
      throw DimensionMismatch("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

inline json labelset_to_json(const LabelSet& set, std::size_t num_labels, const std::string& cloud_checksum,
                             const std::string& labels_file = "labels.jsonl") {
  json j;
  j["cloud_checksum"] = cloud_checksum;
  j["labels_file"] = labels_file;
  j["num_points"] = set.size();
  j["num_labels"] = num_labels;
  json pos = json::array();
  for (std::size_t i = 0; i < set.size(); ++i)
    if (set.positive(i)) pos.push_back({{"point", i}, {"labels", set.matches[i]}});
  j["positive"] = pos;
  return j;
}

inline LabelSet labelset_from_json(const json& j) {
  LabelSet set;
  const auto n = util::get_int(j, "num_points");
  if (n < 0) throw ParseError("must be non-negative", 0, "num_points");
  const auto g = util::get_int(j, "num_labels");
  set.matches.resize(static_cast<std::size_t>(n));
  for (const auto& e : util::field(j, "positive")) {
    const auto i = util::get_int(e, "point");
    if (i < 0 || i >= n) throw ParseError("point index out of range", 0, "positive.point");
    for (const auto& l : util::field(e, "labels")) {
      if (!l.is_number_integer() || l.get<long long>() < 0 || l.get<long long>() >= g)
        throw ParseError("label index out of range", 0, "positive.labels");
      set.matches[static_cast<std::size_t>(i)].push_back(static_cast<int>(l.get<long long>()));
    }
  }
  return set;
}

}  // namespace densegrasp::grasp
