#pragma once

#include "densegrasp/grasp/grasp_io.hpp"
#include "densegrasp/planner/planner.hpp"

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

namespace densegrasp::planner {

struct GraspOutcome {
  std::string scene;
  std::size_t rank = 0;  ///< position in the selection
  Candidate candidate;
  bool valid = false;
  bool success = false;
  std::size_t contacts = 0;
  double q1 = 0.0;
};

struct ScenePlan {
  std::vector<Candidate> candidates;  ///< all m optimized candidates
  std::vector<GraspOutcome> selected;
};

/// init -> optimize -> select -> validity and proxy success for one scene.
inline ScenePlan plan_scene(const std::string& name, const PointCloud& cloud, const grasp::LabelSet& labelset,
                            const std::vector<GraspLabel>& labels, std::span<const TriMesh> meshes, std::size_t num_objects,
                            const HandModel& hand, const PlannerParams& p, std::uint64_t seed,
                            const std::function<void(const std::string&)>& log = {}) {
  p.validate();
  if (labelset.size() != cloud.size()) throw DimensionMismatch("labelset size does not match the cloud");
  if (num_objects == 0 || num_objects > meshes.size()) throw ValidationError("scene has no objects");
  const PlanContext ctx{&hand, meshes, num_objects};
  ScenePlan plan;
  plan.candidates = init_candidates(cloud, hand, p, seed);
  auto run = [&](Candidate& c) {
    const auto matched = grasp::labels_at(labelset, c.anchor_index, labels);
    c = optimize_candidate(std::move(c), matched, ctx, p, log);
  };
  for (auto& c : plan.candidates) run(c);
  for (int round = 0; round < p.hard_rounds; ++round) {
    std::vector<std::size_t> order(plan.candidates.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return plan.candidates[a].final_loss() > plan.candidates[b].final_loss();
    });
    order.resize(std::min(order.size(), p.hard_examples));
    for (std::size_t i : order) run(plan.candidates[i]);
  }

  const auto chosen = score_and_select(plan.candidates, p);
  const auto objects = meshes.first(num_objects);
  for (std::size_t k = 0; k < chosen.size(); ++k) {
    GraspOutcome o;
    o.scene = name;
    o.rank = k;
    o.candidate = chosen[k];
    o.valid = check_valid(o.candidate.grasp, hand, meshes, p);
    const int target = target_object(objects, o.candidate.grasp.anchor);
    const auto px = proxy_evaluate(o.candidate.grasp, hand, objects[static_cast<std::size_t>(target)], meshes, p);
    o.contacts = px.contacts;
    o.q1 = px.q1;
    o.success = o.valid && px.success;
    plan.selected.push_back(std::move(o));
  }
  return plan;
}

inline util::json outcome_to_json(const GraspOutcome& o) {
  const auto x = grasp::flatten(o.candidate.grasp);
  return {{"scene", o.scene},
          {"k", o.rank},
          {"anchor_index", o.candidate.anchor_index},
          {"anchor", util::vec3_json(o.candidate.grasp.anchor)},
          {"x", std::vector<double>(x.data(), x.data() + x.size())},
          {"score", o.candidate.score},
          {"valid", o.valid},
          {"success", o.success},
          {"contacts", o.contacts},
          {"q1", o.q1},
          {"loss_initial", o.candidate.initial_loss()},
          {"loss_final", o.candidate.final_loss()},
          {"iterations", o.candidate.trace.empty() ? 0 : o.candidate.trace.size() - 1}};
}

/// One evaluated grasp as read back from a results file.
struct ResultLine {
  std::string scene;
  std::size_t anchor_index = 0;
  Eigen::VectorXd x;
  double score = 0.0;
  bool valid = false;
  bool success = false;
};

inline std::vector<ResultLine> parse_results(const std::string& text) {
  std::vector<ResultLine> out;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = util::json::parse(line);
      ResultLine r;
      r.scene = util::get_string(j, "scene");
      const auto a = util::get_int(j, "anchor_index");
      if (a < 0) throw ParseError("must be non-negative", 0, "anchor_index");
      r.anchor_index = static_cast<std::size_t>(a);
      const auto& x = util::field(j, "x");
      if (!x.is_array()) throw ParseError("expected an array", 0, "x");
      r.x.resize(static_cast<Eigen::Index>(x.size()));
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (!x[i].is_number()) throw ParseError("expected numbers", 0, "x");
        r.x[static_cast<Eigen::Index>(i)] = x[i].get<double>();
      }
      r.score = util::get_number(j, "score");
      const auto& v = util::field(j, "valid");
      const auto& s = util::field(j, "success");
      if (!v.is_boolean()) throw ParseError("expected a boolean", 0, "valid");
      if (!s.is_boolean()) throw ParseError("expected a boolean", 0, "success");
      r.valid = v.get<bool>();
      r.success = s.get<bool>();
      out.push_back(std::move(r));
    } catch (const util::json::exception& e) {
      throw ParseError(std::string("results JSON: ") + e.what(), lineno);
    } catch (const ParseError& e) {
      throw ParseError(e.what(), lineno, e.field());
    }
  }
  return out;
}

struct SceneRates {
  std::string scene;
  std::size_t valid = 0;
  std::size_t success = 0;  ///< successes among valid grasps
  std::size_t K = 4;

  double valid_rate() const { return static_cast<double>(valid) / static_cast<double>(K); }
  double success_rate() const { return valid == 0 ? 0.0 : static_cast<double>(success) / static_cast<double>(valid); }
  double overall_rate() const { return static_cast<double>(success) / static_cast<double>(K); }
};

/// valid/K, successes/valid (0 when nothing is valid), successes/K.
inline SceneRates scene_rates(const std::string& scene, std::size_t K, std::size_t valid, std::size_t success) {
  if (K == 0) throw InvalidK("K must be positive");
  if (valid > K || success > valid) throw ValidationError("scene '" + scene + "': counts must satisfy success <= valid <= K");
  return {scene, valid, success, K};
}

struct Stat {
  double mean = 0.0;
  double std = 0.0;  ///< population standard deviation
};

inline Stat mean_std(const std::vector<double>& v) {
  Stat s;
  if (v.empty()) return s;
  for (double x : v) s.mean += x;
  s.mean /= static_cast<double>(v.size());
  for (double x : v) s.std += (x - s.mean) * (x - s.mean);
  s.std = std::sqrt(s.std / static_cast<double>(v.size()));
  return s;
}

struct EvalReport {
  std::vector<SceneRates> scenes;
  Stat valid, success, overall;
  std::size_t grasps = 0;
};

inline EvalReport aggregate(std::vector<SceneRates> scenes) {
  EvalReport r;
  std::vector<double> v, s, o;
  for (const auto& sc : scenes) {
    v.push_back(sc.valid_rate());
    s.push_back(sc.success_rate());
    o.push_back(sc.overall_rate());
    r.grasps += sc.K;
  }
  r.valid = mean_std(v);
  r.success = mean_std(s);
  r.overall = mean_std(o);
  r.scenes = std::move(scenes);
  return r;
}

inline util::json report_to_json(const EvalReport& r) {
  util::json per = util::json::array();
  for (const auto& s : r.scenes)
    per.push_back({{"scene", s.scene}, {"K", s.K}, {"valid", s.valid}, {"success", s.success},
                   {"valid_rate", s.valid_rate()}, {"success_rate", s.success_rate()}, {"overall_rate", s.overall_rate()}});
  auto stat = [](const Stat& s) { return util::json{{"mean", s.mean}, {"std", s.std}}; };
  return {{"valid_rate", stat(r.valid)}, {"success_rate", stat(r.success)}, {"overall_rate", stat(r.overall)},
          {"scenes", per}, {"scene_count", r.scenes.size()}};
}

/// Three-column table: valid rate, success, overall (mean ± std).
inline std::string format_report(const EvalReport& r, const std::string& label = "planner") {
  // Pads by code points so the two-byte "±" keeps columns aligned.
  auto pad = [](std::string s, std::size_t width) {
    std::size_t shown = 0;
    for (unsigned char ch : s) shown += (ch & 0xC0) != 0x80;
    if (shown < width) s.append(width - shown, ' ');
    return s;
  };
  auto cell = [](const Stat& s) {
    char c[64];
    std::snprintf(c, sizeof c, "%.3f ± %.3f", s.mean, s.std);
    return std::string(c);
  };
  std::string out = pad("", 24) + " " + pad("Valid rate", 18) + " " + pad("Success", 18) + " Overall\n";
  out += pad(label, 24) + " " + pad(cell(r.valid), 18) + " " + pad(cell(r.success), 18) + " " + cell(r.overall) + "\n";
  return out;
}

}  // namespace densegrasp::planner
