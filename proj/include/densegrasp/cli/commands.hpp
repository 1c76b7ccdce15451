#pragma once

// Commands behind the `densegrasp` tool. Each returns a process exit code:
//   0 ok, 2 config, 3 data, 4 model, 5 reference, 6 verification.
// Human-readable tables go to `out`, warnings and errors to `err`; machine
// output is always written to files next to a manifest.json.

#include "densegrasp/hand/hand_io.hpp"
#include "densegrasp/losses/grad_suite.hpp"
#include "densegrasp/planner/params_io.hpp"
#include "densegrasp/planner/pipeline.hpp"
#include "densegrasp/scenes/dataset.hpp"

#include <chrono>
#include <map>
#include <optional>
#include <ostream>

namespace densegrasp::cli {

namespace fs = std::filesystem;
using util::json;

inline constexpr const char* kToolVersion = "0.1.0";

enum ExitCode : int { kOk = 0, kConfigError = 2, kDataError = 3, kModelError = 4, kReferenceError = 5, kVerificationError = 6 };

class CommandError : public Error {
 public:
  CommandError(int code, const std::string& what) : Error(what), code_(code) {}
  int code() const { return code_; }

 private:
  int code_;
};

/// Runs `f`, turning any library error into a CommandError with `code`.
template <class F>
auto guarded(int code, const std::string& context, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const CommandError&) {
    throw;
  } catch (const std::exception& e) {
    throw CommandError(code, context + ": " + e.what());
  }
}

struct RunManifest {
  std::string command;
  json args = json::object();
  std::string config_checksum;
  std::vector<std::uint64_t> seeds;
  double wall_time_s = 0.0;
  std::vector<std::string> outputs;
};

inline json manifest_run_json(const RunManifest& m) {
  return {{"command", m.command}, {"args", m.args},           {"config_checksum", m.config_checksum}, {"seeds", m.seeds},
          {"tool_version", kToolVersion}, {"wall_time_s", m.wall_time_s}, {"outputs", m.outputs}};
}

/// Writes `dir`/manifest.json. With `append`, the run is added to the runs
/// already recorded there (a directory holds a single manifest).
inline void write_manifest(const fs::path& dir, const RunManifest& m, bool append) {
  const fs::path path = dir / "manifest.json";
  json doc{{"tool", "densegrasp"}, {"runs", json::array()}};
  if (append && fs::exists(path)) {
    try {
      const json old = util::load_json(path.string());
      if (old.is_object() && old.contains("runs") && old.at("runs").is_array()) doc["runs"] = old.at("runs");
    } catch (const Error&) {
    }
  }
  doc["runs"].push_back(manifest_run_json(m));
  util::write_file(path.string(), util::dump(doc, 1));
}

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------------------
// gen-scenes

struct GenScenesArgs {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
};

inline int cmd_gen_scenes(const GenScenesArgs& a, std::ostream& out, std::ostream& err) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::string text = guarded(kConfigError, "config", [&] { return util::read_file(a.config); });
  scenes::DatasetConfig cfg = guarded(kConfigError, a.config, [&] { return scenes::dataset_config_from_json(util::parse_json(text, "config")); });
  if (a.seed) cfg.seed = *a.seed;
  const hand::HandModel hand = guarded(kModelError, "hand", [&] { return hand::load_hand_by_name(cfg.hand); });
  fs::create_directories(a.out);
  const auto res = scenes::generate_dataset(cfg, hand, a.out, [&](const std::string& m) { err << "warning: " << m << "\n"; });
  RunManifest m;
  m.command = "gen-scenes";
  m.args = {{"config", a.config}, {"out", a.out}};
  m.config_checksum = util::checksum_hex(text);
  m.seeds = {cfg.seed};
  m.outputs = res.written;
  m.wall_time_s = seconds_since(t0);
  write_manifest(a.out, m, false);
  out << "wrote " << res.written.size() << " scene(s) to " << a.out << "\n";
  if (!res.failed.empty()) out << res.failed.size() << " scene(s) failed\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// label

struct LabelArgs {
  std::string dataset;
  std::optional<std::string> labels;  ///< JSONL applied to every scene; default: each scene's labels.jsonl
  std::optional<std::string> hand;
};

/// Hand named in a scene's scene.json, if any.
inline std::optional<std::string> scene_hand(const fs::path& dir) {
  const json j = util::load_json((dir / "scene.json").string());
  if (j.contains("hand") && j.at("hand").is_string()) return j.at("hand").get<std::string>();
  return std::nullopt;
}

class HandCache {
 public:
  const hand::HandModel& get(const std::string& name) {
    auto it = cache_.find(name);
    if (it == cache_.end())
      it = cache_.emplace(name, guarded(kModelError, "hand '" + name + "'", [&] { return hand::load_hand_by_name(name); })).first;
    return it->second;
  }

 private:
  std::map<std::string, hand::HandModel> cache_;
};

inline std::vector<fs::path> dataset_scenes(const std::string& dataset) {
  const auto scenes = guarded(kDataError, "dataset", [&] { return scenes::list_scenes(dataset); });
  if (scenes.empty()) throw CommandError(kDataError, "dataset " + dataset + " has no scenes");
  return scenes;
}

inline int cmd_label(const LabelArgs& a, std::ostream& out, std::ostream& err) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto dirs = dataset_scenes(a.dataset);
  std::optional<std::string> user_text;
  if (a.labels) user_text = guarded(kDataError, "labels", [&] { return util::read_file(*a.labels); });
  HandCache hands;
  RunManifest m;
  m.command = "label";
  m.args = {{"dataset", a.dataset}};
  if (a.labels) m.args["labels"] = *a.labels;
  if (a.hand) m.args["hand"] = *a.hand;
  m.config_checksum = user_text ? util::checksum_hex(*user_text) : std::string();
  bool warned_empty = false;
  for (const auto& dir : dirs) {
    const std::string name = dir.filename().string();
    const auto hand_name = a.hand ? a.hand : guarded(kDataError, name, [&] { return scene_hand(dir); });
    if (!hand_name) throw CommandError(kModelError, name + ": no hand given and scene.json names none");
    const auto& hand = hands.get(*hand_name);
    const auto cloud = guarded(kDataError, name + "/cloud.bin", [&] { return scenes::load_cloud(dir); });
    const std::string text = user_text ? *user_text : guarded(kDataError, name + "/labels.jsonl", [&] {
      return util::read_file((dir / "labels.jsonl").string());
    });
    std::vector<grasp::GraspLabel> labels;
    try {
      labels = grasp::parse_labels(text, hand);
    } catch (const DimensionMismatch& e) {
      throw CommandError(kModelError, name + ": labels do not fit hand '" + *hand_name + "': " + e.what());
    } catch (const Error& e) {
      throw CommandError(kDataError, name + ": " + e.what());
    }
    if (labels.empty() && !warned_empty) {
      err << "warning: label file is empty; every labelset will be all-negative\n";
      warned_empty = true;
    }
    const auto set = grasp::match_labels(cloud, labels);
    const std::string checksum = util::checksum_hex(scenes::cloud_to_bytes(cloud));
    if (user_text) util::write_file((dir / "labels.jsonl").string(), grasp::labels_to_jsonl(labels));
    util::write_file((dir / "labelset.json").string(), util::dump(grasp::labelset_to_json(set, labels.size(), checksum), 1));
    m.outputs.push_back(name + "/labelset.json");
    out << name << ": " << labels.size() << " label(s), " << set.positive_count() << " positive point(s)\n";
  }
  m.wall_time_s = seconds_since(t0);
  write_manifest(a.dataset, m, true);
  return kOk;
}

// ---------------------------------------------------------------------------
// plan

struct PlanArgs {
  std::string dataset;
  std::optional<std::string> hand;
  std::optional<std::string> params;
  std::string out;
  std::optional<std::uint64_t> seed;
};

/// Per-scene seed: independent of which other scenes the dataset holds.
inline std::uint64_t scene_seed(std::uint64_t master, const std::string& scene) {
  util::Fnv1a h;
  h.update(scene);
  return util::derive_seed(master, h.digest());
}

inline int cmd_plan(const PlanArgs& a, std::ostream& out, std::ostream& err) {
  const auto t0 = std::chrono::steady_clock::now();
  std::string params_text = "{}";
  if (a.params) params_text = guarded(kConfigError, "params", [&] { return util::read_file(*a.params); });
  auto cfg = guarded(kConfigError, a.params.value_or("params"), [&] {
    return planner::planner_config_from_json(util::parse_json(params_text, "params"));
  });
  if (a.seed) cfg.params.seed = *a.seed;
  if (a.hand && cfg.hand && *a.hand != *cfg.hand)
    throw CommandError(kModelError, "params are for hand '" + *cfg.hand + "' but --hand is '" + *a.hand + "'");
  const auto dirs = dataset_scenes(a.dataset);
  HandCache hands;
  const planner::PlannerParams& p = cfg.params;

  std::string results, candidates;
  RunManifest m;
  m.command = "plan";
  m.args = {{"dataset", a.dataset}, {"out", a.out}};
  if (a.params) m.args["params"] = *a.params;
  if (a.hand) m.args["hand"] = *a.hand;
  m.config_checksum = util::checksum_hex(util::dump(planner::planner_params_to_json(p)));
  m.seeds = {p.seed};
  for (const auto& dir : dirs) {
    const std::string name = dir.filename().string();
    const auto recorded = guarded(kDataError, name, [&] { return scene_hand(dir); });
    const auto hand_name = a.hand ? a.hand : cfg.hand ? cfg.hand : recorded;
    if (!hand_name) throw CommandError(kModelError, name + ": no hand given and scene.json names none");
    if (recorded && *recorded != *hand_name)
      throw CommandError(kModelError, name + ": scene was labeled for hand '" + *recorded + "', planning with '" + *hand_name + "'");
    const auto& hand = hands.get(*hand_name);
    const auto scene = guarded(kDataError, name + "/scene.json", [&] { return scenes::load_scene(dir); });
    const auto cloud = guarded(kDataError, name + "/cloud.bin", [&] { return scenes::load_cloud(dir); });
    const json lsj = guarded(kDataError, name + "/labelset.json", [&] { return util::load_json((dir / "labelset.json").string()); });
    const auto labelset = guarded(kDataError, name + "/labelset.json", [&] { return grasp::labelset_from_json(lsj); });
    if (guarded(kDataError, name + "/labelset.json", [&] { return util::get_string(lsj, "cloud_checksum"); }) !=
        util::checksum_hex(scenes::cloud_to_bytes(cloud)))
      throw CommandError(kDataError, name + ": labelset.json was matched against a different cloud; re-run label");
    std::vector<grasp::GraspLabel> labels;
    try {
      labels = grasp::parse_labels(util::read_file((dir / "labels.jsonl").string()), hand);
    } catch (const DimensionMismatch& e) {
      throw CommandError(kModelError, name + ": labels do not fit hand '" + *hand_name + "': " + e.what());
    } catch (const Error& e) {
      throw CommandError(kDataError, name + "/labels.jsonl: " + e.what());
    }
    const auto meshes = scene.meshes();
    const std::uint64_t seed = scene_seed(p.seed, name);
    const auto plan = guarded(kDataError, name, [&] {
      return planner::plan_scene(name, cloud, labelset, labels, meshes, scene.objects.size(), hand, p, seed,
                                 [&](const std::string& msg) { err << name << ": " << msg << "\n"; });
    });
    for (const auto& c : plan.candidates)
      candidates += util::dump(json{{"scene", name},
                                    {"anchor_index", c.anchor_index},
                                    {"score", c.score},
                                    {"loss_initial", c.initial_loss()},
                                    {"loss_final", c.final_loss()}}) +
                    "\n";
    std::size_t valid = 0, success = 0;
    for (const auto& o : plan.selected) {
      results += util::dump(planner::outcome_to_json(o)) + "\n";
      valid += o.valid;
      success += o.success;
    }
    out << name << ": " << plan.candidates.size() << " candidates, " << plan.selected.size() << " selected, " << valid << " valid, "
        << success << " successful\n";
  }
  fs::create_directories(a.out);
  util::write_file((fs::path(a.out) / "results.jsonl").string(), results);
  util::write_file((fs::path(a.out) / "candidates.jsonl").string(), candidates);
  util::write_file((fs::path(a.out) / "params.json").string(), util::dump(planner::planner_params_to_json(p), 1));
  m.outputs = {"results.jsonl", "candidates.jsonl", "params.json"};
  m.wall_time_s = seconds_since(t0);
  write_manifest(a.out, m, false);
  return kOk;
}

// ---------------------------------------------------------------------------
// eval

struct EvalArgs {
  std::string results;
  std::string dataset;
  std::optional<std::string> out;  ///< default: the directory holding the results
  std::size_t K = 4;
  std::string label = "planner";
};

/// Per-scene counts over the dataset's scenes; scenes without result lines
/// count as 0 of K.
inline planner::EvalReport evaluate_results(const std::vector<planner::ResultLine>& lines, const std::vector<fs::path>& dirs,
                                            std::size_t K) {
  if (K == 0) throw InvalidK("K must be positive");
  std::map<std::string, std::size_t> index;
  for (const auto& d : dirs) index.emplace(d.filename().string(), index.size());
  std::vector<std::size_t> count(dirs.size(), 0), valid(dirs.size(), 0), success(dirs.size(), 0);
  std::vector<std::optional<std::size_t>> cloud_size(dirs.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto& r = lines[i];
    const auto it = index.find(r.scene);
    if (it == index.end()) throw CommandError(kReferenceError, "result " + std::to_string(i + 1) + " references unknown scene '" + r.scene + "'");
    const std::size_t s = it->second;
    if (!cloud_size[s]) cloud_size[s] = guarded(kDataError, r.scene, [&] { return scenes::load_cloud(dirs[s]).size(); });
    if (r.anchor_index >= *cloud_size[s])
      throw CommandError(kReferenceError, "result " + std::to_string(i + 1) + " references point " + std::to_string(r.anchor_index) +
                                              " but " + r.scene + " has " + std::to_string(*cloud_size[s]) + " points");
    ++count[s];
    valid[s] += r.valid;
    success[s] += r.success;
    if (r.success && !r.valid) throw CommandError(kDataError, "result " + std::to_string(i + 1) + " is successful but not valid");
  }
  std::vector<planner::SceneRates> rates;
  for (const auto& [name, s] : index) {
    if (count[s] > K) throw CommandError(kConfigError, name + " has " + std::to_string(count[s]) + " results, more than K = " + std::to_string(K));
    rates.push_back(planner::scene_rates(name, K, valid[s], success[s]));
  }
  return planner::aggregate(std::move(rates));
}

inline int cmd_eval(const EvalArgs& a, std::ostream& out, std::ostream& err) {
  const auto t0 = std::chrono::steady_clock::now();
  if (a.K == 0) throw CommandError(kConfigError, "K must be positive");
  const std::string text = guarded(kDataError, "results", [&] { return util::read_file(a.results); });
  const auto lines = guarded(kDataError, a.results, [&] { return planner::parse_results(text); });
  const auto dirs = dataset_scenes(a.dataset);
  if (lines.empty()) err << "warning: " << a.results << " holds no results; every rate is 0\n";
  const auto report = evaluate_results(lines, dirs, a.K);
  const fs::path out_dir = a.out ? fs::path(*a.out) : fs::absolute(a.results).parent_path();
  fs::create_directories(out_dir);
  util::write_file((out_dir / "eval.json").string(), util::dump(planner::report_to_json(report), 1));
  out << planner::format_report(report, a.label);
  RunManifest m;
  m.command = "eval";
  m.args = {{"results", a.results}, {"dataset", a.dataset}, {"k", a.K}};
  m.config_checksum = util::checksum_hex(text);
  m.outputs = {"eval.json"};
  m.wall_time_s = seconds_since(t0);
  write_manifest(out_dir, m, true);
  return kOk;
}

// ---------------------------------------------------------------------------
// grad-check

struct GradCheckArgs {
  std::string hand = "simple-2f";
  std::uint64_t seed = 0;
  int trials = 100;
  bool corrupt_gradient = false;
};

inline int cmd_grad_check(const GradCheckArgs& a, std::ostream& out, std::ostream& err) {
  if (a.trials < 1) throw CommandError(kConfigError, "trials must be positive");
  const auto hand = guarded(kModelError, "hand '" + a.hand + "'", [&] { return hand::load_hand_by_name(a.hand); });
  losses::GradSuiteParams p;
  p.trials = a.trials;
  p.seed = a.seed;
  p.corrupt_gradient = a.corrupt_gradient;
  const auto results = losses::run_grad_suite(hand, p, [&](const std::string& m) { err << "warning: " << m << "\n"; });
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-10s %8s %9s %14s %6s  %s\n", "loss", "checked", "boundary", "max rel error", "coord", "result");
  out << buf;
  bool ok = true;
  for (const auto& r : results) {
    std::snprintf(buf, sizeof buf, "%-10s %8d %9d %14.3e %6d  %s\n", r.loss.c_str(), r.checked, r.boundary, r.max_rel_error,
                  r.worst_coordinate, r.passed() ? "PASS" : "FAIL");
    out << buf;
    if (!r.passed()) {
      ok = false;
      err << "gradient mismatch: " << r.loss << " coordinate " << r.worst_coordinate << " (draw " << r.worst_trial
          << "), relative error " << r.max_rel_error << "\n";
    }
  }
  return ok ? kOk : kVerificationError;
}

/// Runs a command, reporting CommandError and any stray library error.
template <class F>
int run_command(F&& f, std::ostream& err) {
  try {
    return f();
  } catch (const CommandError& e) {
    err << "error: " << e.what() << "\n";
    return e.code();
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  }
}

}  // namespace densegrasp::cli
