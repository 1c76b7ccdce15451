#include "densegrasp/cli/commands.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace densegrasp;

int main(int argc, char** argv) {
  CLI::App app{"Dense multi-fingered grasp synthesis: scenes, labels, planning and evaluation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(cli::kToolVersion));

  cli::GenScenesArgs gen;
  std::uint64_t gen_seed = 0;
  auto* g = app.add_subcommand("gen-scenes", "Generate a dataset of tabletop scenes from a config file");
  g->add_option("config", gen.config, "dataset config (JSON)")->required();
  g->add_option("--out,-o", gen.out, "output dataset directory")->required();
  auto* gs = g->add_option("--seed", gen_seed, "override the config seed");

  cli::LabelArgs label;
  auto* l = app.add_subcommand("label", "Match grasp labels to every scene's cloud");
  l->add_option("dataset", label.dataset, "dataset directory")->required();
  l->add_option("--labels", label.labels, "JSONL label file applied to every scene (default: each scene's labels.jsonl)");
  l->add_option("--hand", label.hand, "hand name or file (default: the one recorded in scene.json)");

  cli::PlanArgs plan;
  std::uint64_t plan_seed = 0;
  auto* p = app.add_subcommand("plan", "Optimize dense grasp candidates and select K per scene");
  p->add_option("dataset", plan.dataset, "dataset directory")->required();
  p->add_option("--hand", plan.hand, "hand name or file (default: the one recorded in scene.json)");
  p->add_option("--params", plan.params, "planner config (JSON)");
  p->add_option("--out,-o", plan.out, "output directory for results")->required();
  auto* ps = p->add_option("--seed", plan_seed, "override the planner seed");

  cli::EvalArgs eval;
  auto* e = app.add_subcommand("eval", "Valid, success and overall rates of planned grasps");
  e->add_option("results", eval.results, "results.jsonl written by plan")->required();
  e->add_option("--dataset", eval.dataset, "dataset directory")->required();
  e->add_option("--out,-o", eval.out, "directory for eval.json (default: next to the results)");
  e->add_option("--k", eval.K, "grasps per scene")->capture_default_str();
  e->add_option("--label", eval.label, "row label of the table")->capture_default_str();

  cli::GradCheckArgs grad;
  auto* c = app.add_subcommand("grad-check", "Finite-difference check of every loss gradient");
  c->add_option("--hand", grad.hand, "hand name or file")->capture_default_str();
  c->add_option("--seed", grad.seed, "seed")->capture_default_str();
  c->add_option("--trials", grad.trials, "non-boundary configurations per loss")->capture_default_str();
  c->add_flag("--corrupt-gradient", grad.corrupt_gradient)->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : cli::kConfigError;
  }

  return cli::run_command(
      [&] {
        if (g->parsed()) {
          if (*gs) gen.seed = gen_seed;
          return cli::cmd_gen_scenes(gen, std::cout, std::cerr);
        }
        if (l->parsed()) return cli::cmd_label(label, std::cout, std::cerr);
        if (p->parsed()) {
          if (*ps) plan.seed = plan_seed;
          return cli::cmd_plan(plan, std::cout, std::cerr);
        }
        if (e->parsed()) return cli::cmd_eval(eval, std::cout, std::cerr);
        return cli::cmd_grad_check(grad, std::cout, std::cerr);
      },
      std::cerr);
}
