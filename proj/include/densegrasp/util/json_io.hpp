#pragma once

// Small helpers for reading typed fields out of nlohmann::json with
// ParseError messages that name the offending field.

#include "densegrasp/errors.hpp"
#include "densegrasp/geom/types.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <fstream>
#include <sstream>
#include <string>

namespace densegrasp::util {

using nlohmann::json;

/// Parses JSON text; syntax errors become ParseError with a 1-based line.
inline json parse_json(const std::string& text, const std::string& what = "JSON") {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    const auto upto = std::min<std::size_t>(e.byte, text.size());
    const auto line = static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n')) + 1;
    throw ParseError(what + " syntax error: " + e.what(), line);
  }
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline json load_json(const std::string& path) { return parse_json(read_file(path), path); }

inline const json& field(const json& j, const std::string& name) {
  if (!j.is_object() || !j.contains(name)) throw ParseError("missing required field", 0, name);
  return j.at(name);
}

inline double get_number(const json& j, const std::string& name) {
  const json& v = field(j, name);
  if (!v.is_number()) throw ParseError("expected a number", 0, name);
  return v.get<double>();
}

inline double get_number(const json& j, const std::string& name, double fallback) {
  if (!j.is_object() || !j.contains(name) || j.at(name).is_null()) return fallback;
  return get_number(j, name);
}

inline long long get_int(const json& j, const std::string& name) {
  const json& v = field(j, name);
  if (!v.is_number_integer()) throw ParseError("expected an integer", 0, name);
  return v.get<long long>();
}

inline long long get_int(const json& j, const std::string& name, long long fallback) {
  if (!j.is_object() || !j.contains(name) || j.at(name).is_null()) return fallback;
  return get_int(j, name);
}

inline std::string get_string(const json& j, const std::string& name) {
  const json& v = field(j, name);
  if (!v.is_string()) throw ParseError("expected a string", 0, name);
  return v.get<std::string>();
}

inline geom::Vec3d to_vec3(const json& v, const std::string& name) {
  if (!v.is_array() || v.size() != 3) throw ParseError("expected an array of 3 numbers", 0, name);
  geom::Vec3d out;
  for (int i = 0; i < 3; ++i) {
    if (!v[static_cast<std::size_t>(i)].is_number()) throw ParseError("expected an array of 3 numbers", 0, name);
    out[i] = v[static_cast<std::size_t>(i)].get<double>();
  }
  return out;
}

inline geom::Vec3d get_vec3(const json& j, const std::string& name) { return to_vec3(field(j, name), name); }

inline json vec3_json(const geom::Vec3d& v) { return json::array({v.x(), v.y(), v.z()}); }

/// Quaternion as [w, x, y, z].
inline std::array<double, 4> get_quaternion(const json& j, const std::string& name) {
  const json& v = field(j, name);
  if (!v.is_array() || v.size() != 4) throw ParseError("expected [w, x, y, z]", 0, name);
  std::array<double, 4> q{};
  for (std::size_t i = 0; i < 4; ++i) {
    if (!v[i].is_number()) throw ParseError("expected [w, x, y, z]", 0, name);
    q[i] = v[i].get<double>();
  }
  const double norm = std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]);
  if (!(norm > 1e-12)) throw ParseError("zero quaternion", 0, name);
  return q;
}

inline geom::Mat3d quaternion_matrix(const std::array<double, 4>& q) {
  return Eigen::Quaterniond(q[0], q[1], q[2], q[3]).normalized().toRotationMatrix();
}

inline std::array<double, 4> matrix_quaternion(const geom::Mat3d& r) {
  const auto v = geom::quaternion_wxyz(r);
  return {v[0], v[1], v[2], v[3]};
}

inline json quaternion_json(const std::array<double, 4>& q) { return json::array({q[0], q[1], q[2], q[3]}); }

/// Compact, stable JSON text (key order is sorted by nlohmann's std::map).
inline std::string dump(const json& j, int indent = -1) { return j.dump(indent) + (indent >= 0 ? "\n" : ""); }

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << text;
  if (!out) throw Error("failed writing " + path);
}

}  // namespace densegrasp::util
