#pragma once

// Seeded finite-difference sweep over every loss: random grasps around a box
// resting on a table, each loss checked until `trials` configurations away
// from selection boundaries have been seen.

#include "densegrasp/geom/primitives.hpp"
#include "densegrasp/losses/gradient_check.hpp"
#include "densegrasp/losses/task.hpp"
#include "densegrasp/util/rng.hpp"

#include <functional>
#include <string>

namespace densegrasp::losses {

struct GradSuiteResult {
  std::string loss;
  int checked = 0;   ///< non-boundary configurations compared
  int boundary = 0;  ///< configurations skipped at a selection boundary
  double max_rel_error = 0.0;
  int worst_coordinate = -1;
  int worst_trial = -1;
  double tolerance = 1e-4;

  bool passed() const { return max_rel_error < tolerance; }
};

struct GradSuiteParams {
  int trials = 100;
  std::uint64_t seed = 0;
  double h = 1e-5;
  double tolerance = 1e-4;
  int max_draws = 5000;  ///< per loss, including boundary draws
  bool corrupt_gradient = false;  ///< test hook: perturbs every analytic gradient
};

/// Scene used by the sweep: a 6 cm box on a table.
inline std::vector<TriMesh> grad_suite_scene() {
  return {geom::make_box({0.06, 0.06, 0.06}, {0.0, 0.0, 0.03}), geom::make_box({1.0, 1.0, 0.05}, {0.0, 0.0, -0.025})};
}

/// Random grasp near the box top with joints spread beyond their limits so
/// clamping is exercised too.
inline GraspConfig random_grasp(const HandModel& hand, util::Rng& rng) {
  GraspConfig g;
  g.anchor = {rng.uniform(-0.03, 0.03), rng.uniform(-0.03, 0.03), 0.06};
  g.offset = {rng.uniform(-0.02, 0.02), rng.uniform(-0.02, 0.02), rng.uniform(0.0, 0.05)};
  g.a = {rng.normal(), rng.normal(), rng.normal()};
  g.b = {rng.normal(), rng.normal(), rng.normal()};
  g.theta.resize(static_cast<Eigen::Index>(hand.dof()));
  const auto lo = hand.lower_limits(), hi = hand.upper_limits();
  for (Eigen::Index j = 0; j < g.theta.size(); ++j) {
    const double span = hi[j] - lo[j];
    g.theta[j] = rng.uniform(lo[j] - 0.1 * span, hi[j] + 0.1 * span);
  }
  return g;
}

/// A few labels scattered around `g`.
inline std::vector<GraspLabel> random_labels(const GraspConfig& g, const HandModel& hand, util::Rng& rng, int count = 3) {
  std::vector<GraspLabel> out;
  for (int l = 0; l < count; ++l) {
    GraspConfig h = g;
    for (int i = 0; i < 3; ++i) {
      h.offset[i] += rng.uniform(-0.02, 0.02);
      h.a[i] += rng.uniform(-1.0, 1.0);
    }
    const auto pose = grasp::grasp_to_pose(h, hand);
    out.push_back(grasp::make_label(pose.palm_pose, pose.theta, hand));
  }
  return out;
}

inline std::vector<std::string> grad_suite_losses() { return {"chamfer", "collision", "guidance", "q1", "task"}; }

inline std::vector<GradSuiteResult> run_grad_suite(const HandModel& hand, const GradSuiteParams& p,
                                                   const std::function<void(const std::string&)>& log = {}) {
  if (p.trials < 0) throw ValidationError("trials must be non-negative");
  const auto meshes = grad_suite_scene();
  const ContactParams cp = for_object(ContactParams{}, meshes[0]);
  const auto dirs = q1_directions(cp.directions, cp.direction_seed);
  // Random hands rarely come within the default 2 mm of the box; a wide band
  // keeps contacts (and so a nonzero Q1 gradient) in most draws.
  ContactParams cp_q1 = cp;
  cp_q1.contact_threshold = 0.03;
  const LossWeights w{1.0, 1.0, 1.0, 1.0, 1.0};
  std::vector<GradSuiteResult> out;
  const auto names = grad_suite_losses();
  for (std::size_t k = 0; k < names.size(); ++k) {
    GradSuiteResult r;
    r.loss = names[k];
    r.tolerance = p.tolerance;
    util::Rng rng(util::derive_seed(p.seed, k));
    for (int draw = 0; draw < p.max_draws && r.checked < p.trials; ++draw) {
      const GraspConfig g = random_grasp(hand, rng);
      const auto labels = random_labels(g, hand, rng);
      std::function<DiffValue(const GraspConfig&)> f;
      switch (k) {
        case 0: f = [&](const GraspConfig& x) { return chamfer_loss(x, labels, hand); }; break;
        case 1: f = [&](const GraspConfig& x) { return collision_loss(x, hand, meshes); }; break;
        case 2: f = [&](const GraspConfig& x) { return guidance_loss(x, hand, meshes); }; break;
        case 3: f = [&](const GraspConfig& x) { return q1_loss(q1_upper(evaluate_pose(x, hand), hand, meshes[0], cp_q1, dirs)); }; break;
        default: f = [&](const GraspConfig& x) { return task_loss(x, labels, hand, meshes, w, cp, {0, 1}); }; break;
      }
      auto checked = [&](const GraspConfig& x) {
        DiffValue d = f(x);
        if (p.corrupt_gradient) d.gradient *= 1.01;
        return d;
      };
      const auto rep = gradient_check(checked, g, p.h);
      if (rep.selection_boundary()) {
        ++r.boundary;
        continue;
      }
      if (rep.max_rel_error > r.max_rel_error || r.worst_trial < 0) {
        r.max_rel_error = rep.max_rel_error;
        r.worst_coordinate = rep.worst_coordinate;
        r.worst_trial = draw;
      }
      ++r.checked;
    }
    if (r.checked < p.trials) {
      r.max_rel_error = std::numeric_limits<double>::infinity();
      if (log) log(r.loss + ": only " + std::to_string(r.checked) + " non-boundary configurations in " + std::to_string(p.max_draws) + " draws");
    }
    out.push_back(r);
  }
  return out;
}

}  // namespace densegrasp::losses
