// Plans grasps for the two-finger hand on a sphere resting on a table and
// prints the selected grasps.

#include "densegrasp/hand/hand_io.hpp"
#include "densegrasp/planner/pipeline.hpp"
#include "densegrasp/scenes/labels.hpp"
#include "densegrasp/scenes/render.hpp"

#include <cstdio>

using namespace densegrasp;

int main() {
  const auto hand = hand::load_hand_by_name("simple-2f");

  scenes::Scene scene;
  scene.table_x = scene.table_y = 0.5;
  scene.table = scenes::make_table(0.5, 0.5);
  scene.objects.push_back(scenes::make_instance("sphere", scenes::stable_pose(scenes::catalog_mesh("sphere"), 0, true)));

  const auto cloud = scenes::fuse_point_cloud(scene, scenes::default_rig(0.5, 0.5), 1);
  const auto labels = scenes::synth_labels(scene, hand, 1);
  const auto labelset = grasp::match_labels(cloud, labels);
  std::printf("%zu points, %zu labels, %zu positive points\n", cloud.size(), labels.size(), labelset.positive_count());

  planner::PlannerParams p;
  p.m = 64;
  p.iterations = 40;
  p.weights.w2 = 1e6;
  const auto plan = planner::plan_scene("sphere", cloud, labelset, labels, scene.meshes(), scene.objects.size(), hand, p, 0);

  std::printf("%4s %6s %8s %10s %10s %6s %8s\n", "k", "anchor", "score", "loss0", "loss", "valid", "contacts");
  for (const auto& o : plan.selected)
    std::printf("%4zu %6zu %8.3f %10.4g %10.4g %6s %8zu\n", o.rank, o.candidate.anchor_index, o.candidate.score,
                o.candidate.initial_loss(), o.candidate.final_loss(), o.valid ? "yes" : "no", o.contacts);
}
