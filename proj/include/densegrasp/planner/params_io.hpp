#pragma once

// Planner config JSON. Every key is optional; unknown keys are rejected.
//
//   {"m": 512, "iterations": 200, "step_size": 0.001, "optimizer": "momentum",
//    "momentum": 0.9, "weights": {"w1": 1, "w2": 1, "w3": 1, "w4": 0, "w5": 1},
//    "contact": {"friction_mu": 0.5, "cone_edges": 8, "torque_scale": 0,
//                "contact_threshold": 0.002, "directions": 64, "direction_seed": 0},
//    "prune_threshold": 0.15, "K": 4, "standoff": 0.02, "penetration_tol": 0.002,
//    "q1_threshold": 0.0429, "min_contacts": 3, "self_collision": true,
//    "hard_rounds": 0, "hard_examples": 64, "seed": 0, "hand": "shadow-like"}
//
// "hand", when present, names the hand the parameters were tuned for.

#include "densegrasp/planner/planner.hpp"
#include "densegrasp/util/json_io.hpp"

#include <optional>

namespace densegrasp::planner {

struct PlannerConfig {
  PlannerParams params;
  std::optional<std::string> hand;
};

namespace detail {

inline void reject_unknown(const util::json& j, const std::vector<std::string>& known, const std::string& where) {
  if (!j.is_object()) throw ParseError("expected a JSON object", 0, where);
  for (const auto& [k, v] : j.items())
    if (std::find(known.begin(), known.end(), k) == known.end())
      throw ParseError("unknown key", 0, where.empty() ? k : where + "." + k);
}

inline bool get_bool(const util::json& j, const std::string& name, bool fallback) {
  if (!j.contains(name)) return fallback;
  if (!j.at(name).is_boolean()) throw ParseError("expected a boolean", 0, name);
  return j.at(name).get<bool>();
}

inline std::uint64_t get_seed(const util::json& j, const std::string& name, std::uint64_t fallback) {
  if (!j.contains(name)) return fallback;
  const auto& v = j.at(name);
  if (!v.is_number_integer() || v.get<long long>() < 0) throw ParseError("expected a non-negative integer", 0, name);
  return v.get<std::uint64_t>();
}

inline std::size_t get_count(const util::json& j, const std::string& name, std::size_t fallback) {
  const auto v = util::get_int(j, name, static_cast<long long>(fallback));
  if (v < 0) throw ParseError("must be non-negative", 0, name);
  return static_cast<std::size_t>(v);
}

}  // namespace detail

inline PlannerConfig planner_config_from_json(const util::json& j) {
  detail::reject_unknown(j, {"m", "iterations", "step_size", "optimizer", "momentum", "weights", "contact", "prune_threshold", "K",
                             "standoff", "penetration_tol", "q1_threshold", "min_contacts", "self_collision", "hard_rounds",
                             "hard_examples", "seed", "hand"},
                         "");
  PlannerConfig c;
  PlannerParams& p = c.params;
  p.m = detail::get_count(j, "m", p.m);
  p.iterations = static_cast<int>(util::get_int(j, "iterations", p.iterations));
  p.step_size = util::get_number(j, "step_size", p.step_size);
  if (j.contains("optimizer")) {
    const auto o = util::get_string(j, "optimizer");
    if (o == "momentum") p.optimizer = Optimizer::Momentum;
    else if (o == "gd") p.optimizer = Optimizer::GradientDescent;
    else throw ParseError("expected \"momentum\" or \"gd\"", 0, "optimizer");
  }
  p.momentum = util::get_number(j, "momentum", p.momentum);
  if (j.contains("weights")) {
    const auto& w = j.at("weights");
    detail::reject_unknown(w, {"w1", "w2", "w3", "w4", "w5"}, "weights");
    p.weights.w1 = util::get_number(w, "w1", p.weights.w1);
    p.weights.w2 = util::get_number(w, "w2", p.weights.w2);
    p.weights.w3 = util::get_number(w, "w3", p.weights.w3);
    p.weights.w4 = util::get_number(w, "w4", p.weights.w4);
    p.weights.w5 = util::get_number(w, "w5", p.weights.w5);
  }
  if (j.contains("contact")) {
    const auto& cj = j.at("contact");
    detail::reject_unknown(cj, {"friction_mu", "cone_edges", "torque_scale", "contact_threshold", "directions", "direction_seed"}, "contact");
    p.contact.friction_mu = util::get_number(cj, "friction_mu", p.contact.friction_mu);
    p.contact.cone_edges = static_cast<int>(util::get_int(cj, "cone_edges", p.contact.cone_edges));
    p.contact.torque_scale = util::get_number(cj, "torque_scale", p.contact.torque_scale);
    p.contact.contact_threshold = util::get_number(cj, "contact_threshold", p.contact.contact_threshold);
    p.contact.directions = static_cast<int>(util::get_int(cj, "directions", p.contact.directions));
    p.contact.direction_seed = detail::get_seed(cj, "direction_seed", p.contact.direction_seed);
  }
  p.prune_threshold = util::get_number(j, "prune_threshold", p.prune_threshold);
  p.K = detail::get_count(j, "K", p.K);
  p.standoff = util::get_number(j, "standoff", p.standoff);
  p.penetration_tol = util::get_number(j, "penetration_tol", p.penetration_tol);
  p.q1_threshold = util::get_number(j, "q1_threshold", p.q1_threshold);
  p.min_contacts = static_cast<int>(util::get_int(j, "min_contacts", p.min_contacts));
  p.self_collision = detail::get_bool(j, "self_collision", p.self_collision);
  p.hard_rounds = static_cast<int>(util::get_int(j, "hard_rounds", p.hard_rounds));
  p.hard_examples = detail::get_count(j, "hard_examples", p.hard_examples);
  p.seed = detail::get_seed(j, "seed", p.seed);
  if (j.contains("hand")) c.hand = util::get_string(j, "hand");
  p.validate();
  return c;
}

inline util::json planner_params_to_json(const PlannerParams& p) {
  const auto& w = p.weights;
  const auto& c = p.contact;
  return {{"m", p.m},
          {"iterations", p.iterations},
          {"step_size", p.step_size},
          {"optimizer", p.optimizer == Optimizer::Momentum ? "momentum" : "gd"},
          {"momentum", p.momentum},
          {"weights", {{"w1", w.w1}, {"w2", w.w2}, {"w3", w.w3}, {"w4", w.w4}, {"w5", w.w5}}},
          {"contact",
           {{"friction_mu", c.friction_mu}, {"cone_edges", c.cone_edges}, {"torque_scale", c.torque_scale},
            {"contact_threshold", c.contact_threshold}, {"directions", c.directions}, {"direction_seed", c.direction_seed}}},
          {"prune_threshold", p.prune_threshold},
          {"K", p.K},
          {"standoff", p.standoff},
          {"penetration_tol", p.penetration_tol},
          {"q1_threshold", p.q1_threshold},
          {"min_contacts", p.min_contacts},
          {"self_collision", p.self_collision},
          {"hard_rounds", p.hard_rounds},
          {"hard_examples", p.hard_examples},
          {"seed", p.seed}};
}

}  // namespace densegrasp::planner
