// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "densegrasp/cli/commands.hpp"
#include "densegrasp/losses/gradient_check.hpp"
#include "densegrasp/losses/losses.hpp"
#include "densegrasp/losses/q1.hpp"
#include "densegrasp/losses/task.hpp"
#include "support.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

using namespace densegrasp;
namespace dt = densegrasp::testing;
namespace fs = std::filesystem;
using geom::Mat3d;
using geom::Vec3d;
using util::json;

namespace {

using Clock = std::chrono::steady_clock;

struct Check {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) detail << "failed: " << what << "; ";
    pass = pass && ok;
  }
};

const hand::HandModel& simple() {
  static const hand::HandModel h = hand::load_hand_by_name("simple-2f");
  return h;
}

fs::path work_dir() {
  static const fs::path dir = dt::temp_dir("acceptance");
  return dir;
}

std::map<std::string, std::string> tree_bytes(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file() && e.path().filename() != "manifest.json")
      out[fs::relative(e.path(), root).string()] = util::read_file(e.path().string());
  return out;
}

std::vector<json> read_jsonl(const fs::path& path) {
  std::vector<json> out;
  std::istringstream in(util::read_file(path.string()));
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) out.push_back(json::parse(line));
  return out;
}

void command(const std::string& what, const std::function<int(std::ostream&, std::ostream&)>& f) {
  std::ostringstream out, err;
  const int code = cli::run_command([&] { return f(out, err); }, err);
  if (code != cli::kOk) throw std::runtime_error(what + " exited " + std::to_string(code) + ": " + err.str());
}

std::string fixture(const std::string& name, const std::string& file) { return dt::data_path("fixtures/" + name + "/" + file); }

// ---------------------------------------------------------------------------

void gradient_contract(Check& c) {
  const auto t0 = Clock::now();
  const auto results = losses::run_grad_suite(simple(), losses::GradSuiteParams{});
  const double secs = cli::seconds_since(t0);
  c.require(results.size() == 5, "five losses swept");
  for (const auto& r : results) {
    c.require(r.checked == 100, r.loss + " checked 100 configurations");
    c.require(r.passed() && r.max_rel_error < 1e-4, r.loss + " max relative error < 1e-4");
    c.detail << r.loss << " " << r.max_rel_error << " (" << r.boundary << " boundary), ";
  }
  c.require(secs < 60.0, "runtime < 60 s");
  c.detail << secs << " s";
}

void rotation_representation(Check& c) {
  util::Rng rng(101);
  double ortho = 0.0, det = 0.0, scale = 0.0;
  int tested = 0;
  while (tested < 10000) {
    const Vec3d a = dt::random_vec(rng), b = dt::random_vec(rng);
    if (geom::is_degenerate(a, b)) continue;
    ++tested;
    const Mat3d r = geom::gram_schmidt_rot6d(a, b);
    ortho = std::max(ortho, (r.transpose() * r - Mat3d::Identity()).cwiseAbs().maxCoeff());
    det = std::max(det, std::abs(r.determinant() - 1.0));
    const double s = std::exp(rng.uniform(-5.0, 5.0));
    scale = std::max(scale, (geom::gram_schmidt_rot6d(Vec3d(s * a), b) - r).cwiseAbs().maxCoeff());
  }
  c.require(ortho <= 1e-9, "orthonormality within 1e-9");
  c.require(det <= 1e-9, "det within 1e-9");
  c.require(scale <= 1e-12, "scale invariance within 1e-12");
  int rejected = 0;
  const std::vector<std::pair<Vec3d, Vec3d>> degenerate{{Vec3d::Zero(), Vec3d::UnitY()},
                                                          {Vec3d::UnitX(), Vec3d::Zero()},
                                                          {Vec3d(1, 2, 3), Vec3d(-2, -4, -6)},
                                                          {Vec3d(std::nan(""), 0, 0), Vec3d::UnitY()}};
  for (const auto& [a, b] : degenerate) {
    try {
      geom::gram_schmidt_rot6d(a, b);
    } catch (const DegenerateRotation&) {
      ++rejected;
    }
  }
  c.require(rejected == 4, "degenerate inputs rejected");
  c.detail << tested << " inputs, orthonormality " << ortho << ", det " << det << ", scale " << scale << ", " << rejected
           << "/4 degenerate rejected";
}

grasp::LabelSet brute_match(const geom::PointCloud& cloud, const std::vector<grasp::GraspLabel>& labels) {
  grasp::LabelSet s;
  s.matches.resize(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i)
    for (std::size_t l = 0; l < labels.size(); ++l) {
      const Vec3d d = labels[l].palm_reference_world - cloud.points[i];
      const double dist = std::sqrt(d.x() * d.x() + d.y() * d.y() + d.z() * d.z());
      const double dn = cloud.normals[i].x() * d.x() + cloud.normals[i].y() * d.y() + cloud.normals[i].z() * d.z();
      if (dist <= 0.005 && dn > 0.0) s.matches[i].push_back(static_cast<int>(l));
    }
  return s;
}

void matching_oracle(Check& c) {
  const auto& h = simple();
  util::Rng rng(102);
  int boundary_matches = 0, identical = 0;
  for (int inst = 0; inst < 50; ++inst) {
    geom::PointCloud cloud;
    std::vector<grasp::GraspLabel> labels;
    const std::size_t np = 1 + rng.index(500), nl = rng.index(201);
    for (std::size_t i = 0; i < np; ++i) {
      const bool flat = i % 5 == 0;
      cloud.points.emplace_back(rng.uniform(-0.05, 0.05), rng.uniform(-0.05, 0.05), flat ? 0.0 : rng.uniform(-0.05, 0.05));
      cloud.normals.push_back(flat ? Vec3d(0, 0, rng.uniform() < 0.5 ? 1.0 : -1.0) : dt::random_unit(rng));
    }
    std::vector<std::pair<std::size_t, std::size_t>> exact;
    for (std::size_t l = 0; l < nl; ++l) {
      const std::size_t i = rng.index(np);
      const Vec3d& base = cloud.points[i];
      const double r = rng.uniform();
      Vec3d ref;
      if (r < 0.3 && base.z() == 0.0) {
        // Exactly 5 mm straight above a point on z = 0.
        ref = Vec3d(base.x(), base.y(), 0.005);
        if (cloud.normals[i].z() > 0) exact.emplace_back(i, l);
      } else if (r < 0.7) {
        ref = base + dt::random_vec(rng, 0.004);
      } else {
        ref = Vec3d(rng.uniform(-0.05, 0.05), rng.uniform(-0.05, 0.05), rng.uniform(-0.05, 0.05));
      }
      labels.push_back(grasp::make_label(ref, {1.0, 0.0, 0.0, 0.0}, hand::JointVector::Zero(static_cast<Eigen::Index>(h.dof())), h));
    }
    const auto fast = grasp::match_labels(cloud, labels);
    identical += fast == brute_match(cloud, labels);
    for (const auto& [i, l] : exact) {
      const auto& m = fast.matches[i];
      const bool hit = std::find(m.begin(), m.end(), static_cast<int>(l)) != m.end();
      c.require(hit, "label exactly 5 mm above its point is matched");
      boundary_matches += hit;
    }
  }
  c.require(identical == 50, "all 50 instances identical to the double loop");
  c.require(boundary_matches > 0, "exact 5 mm boundary exercised");
  c.detail << identical << "/50 identical, " << boundary_matches << " exact-boundary matches";
}

void loss_arithmetic(Check& c) {
  {
    const auto h = dt::point_hand(Vec3d(0, 0, 0), Vec3d(5, 5, 5));
    const std::vector<geom::TriMesh> meshes{geom::make_box({1, 1, 1}, {0.4, 0, 0})};
    const double v = losses::collision_loss(dt::identity_grasp(h), h, meshes, false).value;
    c.require(std::abs(v - 5.0e-6) <= 1e-15, "single penetration 5.0e-6");
    c.detail << "collision " << v << ", ";
  }
  {
    const auto h = dt::point_hand(Vec3d(0.6, 0, 0), Vec3d(0.5, 0, 0));
    const std::vector<geom::TriMesh> meshes{geom::make_box({1, 1, 1}, {0, 0, 0})};
    const double v = losses::guidance_loss(dt::identity_grasp(h), h, meshes).value;
    c.require(std::abs(v - 0.01) <= 1e-15, "guidance single term 0.01");
    c.detail << "guidance " << v << ", ";
  }
  {
    const double one = losses::confidence_joint_loss(std::vector<double>{0.7}, std::vector<double>{1.0}, 1.0, 1);
    const double two = losses::confidence_joint_loss(std::vector<double>{0.4, 0.6}, std::vector<double>{1.0, 1.0}, 1.0, 1);
    c.require(one == 0.7, "confidence m=1 fixture 0.7");
    c.require(two == 0.5, "confidence m=2 fixture 0.5");
    for (double L : {0.2, 0.9, 2.5, 8.0}) {
      double best_c = 0.0, best = std::numeric_limits<double>::infinity();
      for (int i = 1; i <= 100000; ++i) {
        const double v = losses::confidence_joint_loss(std::vector<double>{L}, std::vector<double>{i * 1e-5}, 1.0, 1);
        if (v < best) best = v, best_c = i * 1e-5;
      }
      c.require(std::abs(best_c - std::min(1.0, 1.0 / L)) <= 1e-5, "confidence optimum min(1, 1/L)");
    }
    c.detail << "confidence " << one << " / " << two << ", ";
  }
  {
    util::Rng rng(104);
    const auto meshes = losses::grad_suite_scene();
    const losses::ContactParams cp{};
    const auto cpo = losses::for_object(cp, meshes[0]);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
      const auto g = losses::random_grasp(simple(), rng);
      const auto labels = losses::random_labels(g, simple(), rng);
      const losses::LossWeights w{rng.uniform(0.1, 2), rng.uniform(0.1, 2), rng.uniform(0.1, 2), rng.uniform(0.1, 2), 1.0};
      const auto ch = losses::chamfer_loss(g, labels, simple());
      const auto co = losses::collision_loss(g, simple(), meshes);
      const auto gu = losses::guidance_loss(g, simple(), meshes);
      const auto q = losses::q1_loss(losses::q1_upper(g, simple(), meshes[0], cpo));
      const auto t = losses::task_loss(g, labels, simple(), meshes, w, cp, {-1, 1});
      worst = std::max(worst, std::abs(t.value - (w.w1 * ch.value + w.w2 * co.value + w.w3 * gu.value + w.w4 * q.value)));
      const Eigen::VectorXd grad = w.w1 * ch.gradient + w.w2 * co.gradient + w.w3 * gu.gradient + w.w4 * q.gradient;
      worst = std::max(worst, (t.gradient - grad).cwiseAbs().maxCoeff());
    }
    c.require(worst <= 1e-12, "task linearity within 1e-12");
    c.detail << "task linearity " << worst;
  }
}

// Dense-direction values from tests/oracles/q1_dense_oracle.py (D = 1e5).
constexpr double kAntipodal = 0.08586476449074032;
constexpr double kTetrahedral = 0.3778583217563171;

std::vector<losses::Contact> on_sphere(const std::vector<Vec3d>& normals) {
  std::vector<losses::Contact> out;
  for (const auto& n : normals) {
    losses::Contact k;
    k.point = n.normalized();
    k.normal = n.normalized();
    out.push_back(k);
  }
  return out;
}

void q1_properties(Check& c) {
  losses::ContactParams p;
  p.torque_scale = 1.0;
  p.com = Vec3d::Zero();
  util::Rng rng(105);

  const auto nested = losses::q1_directions(8192, 0);
  int violations = 0;
  for (int set = 0; set < 20; ++set) {
    std::vector<losses::Contact> contacts;
    for (int i = 0; i < 2 + set % 5; ++i) {
      losses::Contact k;
      k.normal = dt::random_unit(rng);
      k.point = k.normal * rng.uniform(0.5, 1.5) + dt::random_vec(rng, 0.1);
      contacts.push_back(k);
    }
    double prev = std::numeric_limits<double>::infinity();
    for (int D : {1, 4, 16, 64, 256, 1024, 4096, 8192}) {
      const double q = losses::q1_upper(contacts, p, nested.topRows(D)).value;
      violations += q > prev;
      prev = q;
    }
  }
  c.require(violations == 0, "monotone in D over nested sets");

  const auto empty = losses::q1_upper(std::vector<losses::Contact>{}, p);
  c.require(empty.value == 0.0 && losses::q1_loss(empty).value == 1.0, "empty contacts give 0 and loss 1");

  const Eigen::MatrixXd dense = losses::q1_directions(100000, 0);
  const auto antipodal = on_sphere({Vec3d::UnitX(), -Vec3d::UnitX()});
  const double qa = losses::q1_upper(antipodal, p, dense).value;
  const double rel_a = std::abs(qa - kAntipodal) / kAntipodal;
  c.require(rel_a < 0.02, "antipodal sphere within 2% of the dense oracle");

  double worst = 0.0;
  const std::vector<std::pair<std::vector<losses::Contact>, double>> cases{
      {antipodal, kAntipodal}, {on_sphere({{1, 1, 1}, {1, -1, -1}, {-1, 1, -1}, {-1, -1, 1}}), kTetrahedral}};
  for (const auto& [contacts, expect] : cases)
    for (int trial = 0; trial < 3; ++trial) {
      const auto t = dt::random_pose(rng, 2.0);
      std::vector<losses::Contact> moved;
      for (auto k : contacts) {
        k.tangent = t.rotation * geom::tangent_basis(k.normal).first;
        k.point = t.apply(k.point);
        k.normal = t.rotation * k.normal;
        moved.push_back(k);
      }
      losses::ContactParams pm = p;
      pm.com = t.translation;
      Eigen::MatrixXd dirs = dense;
      dirs.leftCols<3>() = dense.leftCols<3>() * t.rotation.transpose();
      dirs.rightCols<3>() = dense.rightCols<3>() * t.rotation.transpose();
      worst = std::max(worst, std::abs(losses::q1_upper(moved, pm, dirs).value - expect) / expect);
    }
  c.require(worst < 0.02, "rigid invariance within 2%");
  c.detail << "monotonicity violations " << violations << ", antipodal " << qa << " (rel " << rel_a << "), rigid worst rel " << worst;
}

std::vector<Eigen::Matrix4d> matrix_fk(const hand::HandModel& h, const geom::RigidTransform& palm, const hand::JointVector& theta) {
  std::vector<Eigen::Matrix4d> out(h.num_links());
  out[0] = dt::homogeneous(palm);
  std::vector<bool> done(h.num_links(), false);
  done[0] = true;
  for (std::size_t pass = 0; pass < h.num_links(); ++pass)
    for (std::size_t j = 0; j < h.dof(); ++j) {
      const auto& js = h.joints[j];
      const auto parent = static_cast<std::size_t>(js.parent_link), child = static_cast<std::size_t>(js.child_link);
      if (!done[parent] || done[child]) continue;
      Eigen::Matrix4d rot = Eigen::Matrix4d::Identity();
      rot.topLeftCorner<3, 3>() = Eigen::AngleAxisd(theta[static_cast<Eigen::Index>(j)], js.axis).toRotationMatrix();
      out[child] = out[parent] * dt::homogeneous(js.origin) * rot;
      done[child] = true;
    }
  return out;
}

hand::JointVector random_theta(const hand::HandModel& h, util::Rng& rng) {
  hand::JointVector t(static_cast<Eigen::Index>(h.dof()));
  for (std::size_t k = 0; k < h.dof(); ++k) t[static_cast<Eigen::Index>(k)] = rng.uniform(h.joints[k].limit_min, h.joints[k].limit_max);
  return t;
}

void forward_kinematics(Check& c) {
  util::Rng rng(106);
  double oracle = 0.0, equivariance = 0.0;
  for (int t = 0; t < 100; ++t) {
    const auto h = hand::parse_hand(dt::random_chain_json(rng, 3));
    const auto palm = dt::random_pose(rng);
    const auto th = random_theta(h, rng);
    const auto poses = hand::forward_kinematics(h, palm, th);
    const auto expect = matrix_fk(h, palm, th);
    for (std::size_t l = 0; l < h.num_links(); ++l)
      oracle = std::max(oracle, (dt::homogeneous(poses[l]) - expect[l]).cwiseAbs().maxCoeff());
    const auto g = dt::random_pose(rng);
    const auto moved = hand::forward_kinematics(h, g.compose(palm), th);
    for (std::size_t l = 0; l < h.num_links(); ++l)
      equivariance = std::max(equivariance, (dt::homogeneous(moved[l]) - dt::homogeneous(g.compose(poses[l]))).cwiseAbs().maxCoeff());
  }
  const auto shadow = hand::load_hand_by_name("shadow-like");
  int idempotent = 0;
  for (int t = 0; t < 200; ++t) {
    hand::JointVector th(static_cast<Eigen::Index>(shadow.dof()));
    for (auto& v : th) v = rng.uniform(-3.0, 3.0);
    const auto once = hand::clamp_joints(shadow, th);
    idempotent += hand::clamp_joints(shadow, once) == once;
  }
  c.require(oracle <= 1e-12, "oracle equivalence within 1e-12");
  c.require(equivariance <= 1e-12, "rigid equivariance within 1e-12");
  c.require(idempotent == 200, "clamp idempotent");
  c.detail << "oracle " << oracle << ", equivariance " << equivariance << ", clamp " << idempotent << "/200";
}

// ---------------------------------------------------------------------------
// End-to-end runs shared by criteria 7 to 10.

struct PipelineRun {
  fs::path root;
  double seconds = 0.0;
};

PipelineRun tabletop_pipeline(const std::string& name) {
  PipelineRun r;
  r.root = work_dir() / name;
  fs::create_directories(r.root);
  const auto ds = (r.root / "dataset").string(), plan = (r.root / "plan").string();
  const auto t0 = Clock::now();
  command("gen-scenes", [&](auto& o, auto& e) { return cli::cmd_gen_scenes({fixture("tabletop", "config.json"), ds, std::nullopt}, o, e); });
  command("label", [&](auto& o, auto& e) { return cli::cmd_label({ds, std::nullopt, std::nullopt}, o, e); });
  command("plan", [&](auto& o, auto& e) {
    return cli::cmd_plan({ds, std::nullopt, fixture("tabletop", "params.json"), plan, std::nullopt}, o, e);
  });
  command("eval", [&](auto& o, auto& e) { return cli::cmd_eval({plan + "/results.jsonl", ds, std::nullopt, 4, "w4 = 0"}, o, e); });
  r.seconds = cli::seconds_since(t0);
  return r;
}

const PipelineRun& first_run() {
  static const PipelineRun r = tabletop_pipeline("run_a");
  return r;
}

void pipeline_determinism(Check& c) {
  const auto& a = first_run();
  const auto b = tabletop_pipeline("run_b");
  const auto ta = tree_bytes(a.root), tb = tree_bytes(b.root);
  c.require(ta == tb, "byte-identical outputs across two runs");
  c.require(scenes::list_scenes((a.root / "dataset").string()).size() == 10, "10 scenes");
  for (const char* dir : {"dataset", "plan"}) {
    const auto ma = util::load_json((a.root / dir / "manifest.json").string()).at("runs");
    const auto mb = util::load_json((b.root / dir / "manifest.json").string()).at("runs");
    bool same = ma.size() == mb.size();
    for (std::size_t i = 0; same && i < ma.size(); ++i)
      same = ma[i].at("config_checksum") == mb[i].at("config_checksum") && ma[i].at("seeds") == mb[i].at("seeds") &&
             ma[i].at("outputs") == mb[i].at("outputs");
    c.require(same, std::string(dir) + " manifests agree aside from wall time and paths");
  }
  c.require(a.seconds < 600.0 && b.seconds < 600.0, "each run < 10 min");
  c.detail << ta.size() << " files identical, runs took " << a.seconds << " s and " << b.seconds << " s";
}

void planner_regression(Check& c) {
  const auto root = work_dir() / "sphere";
  const auto ds = (root / "dataset").string(), plan = (root / "plan").string();
  command("gen-scenes", [&](auto& o, auto& e) { return cli::cmd_gen_scenes({fixture("sphere", "config.json"), ds, std::nullopt}, o, e); });
  command("plan", [&](auto& o, auto& e) { return cli::cmd_plan({ds, std::nullopt, fixture("sphere", "params.json"), plan, std::nullopt}, o, e); });
  const auto candidates = read_jsonl(fs::path(plan) / "candidates.jsonl");
  std::size_t improved = 0;
  for (const auto& j : candidates) improved += j.at("loss_final").get<double>() <= j.at("loss_initial").get<double>();
  const double fraction = candidates.empty() ? 0.0 : static_cast<double>(improved) / static_cast<double>(candidates.size());
  std::size_t valid = 0;
  const auto results = read_jsonl(fs::path(plan) / "results.jsonl");
  for (const auto& j : results) valid += j.at("valid").get<bool>();
  c.require(fraction >= 0.9, ">= 90% of candidates end at or below their initial loss");
  c.require(valid >= 1, "at least one selected grasp is valid");
  c.detail << improved << "/" << candidates.size() << " not worse (" << fraction << "), " << valid << "/" << results.size()
           << " selected valid";
}

void dense_shape(Check& c, const fs::path& plan, const fs::path& dataset, const std::string& tag) {
  const auto params = util::load_json((plan / "params.json").string());
  c.require(params.at("m") == 512 && params.at("K") == 4 && params.at("prune_threshold") == 0.15, tag + " runs with m 512, K 4, prune 0.15");
  std::map<std::string, std::vector<std::size_t>> anchors;
  for (const auto& j : read_jsonl(plan / "candidates.jsonl"))
    anchors[j.at("scene").get<std::string>()].push_back(j.at("anchor_index").get<std::size_t>());
  std::map<std::string, std::size_t> selected;
  for (const auto& j : read_jsonl(plan / "results.jsonl")) {
    ++selected[j.at("scene").get<std::string>()];
    c.require(j.at("score").get<double>() >= 0.15, tag + " selected scores >= 0.15");
  }
  const auto dirs = scenes::list_scenes(dataset.string());
  c.require(anchors.size() == dirs.size(), tag + " every scene planned");
  std::size_t most = 0;
  for (const auto& dir : dirs) {
    const std::string name = dir.filename().string();
    const auto& a = anchors[name];
    const std::size_t cloud = scenes::load_cloud(dir).size();
    c.require(a.size() == 512, tag + " " + name + " has 512 candidates");
    c.require(std::set<std::size_t>(a.begin(), a.end()).size() == a.size(), tag + " " + name + " anchors distinct");
    c.require(std::all_of(a.begin(), a.end(), [&](std::size_t i) { return i < cloud; }), tag + " " + name + " anchors in the cloud");
    c.require(selected[name] <= 4, tag + " " + name + " selects <= 4");
    most = std::max(most, selected[name]);
  }
  c.detail << tag << ": " << dirs.size() << " scene(s) x 512 candidates, at most " << most << " selected; ";
}

void dense_prediction_shape(Check& c) {
  const auto& a = first_run();
  dense_shape(c, a.root / "plan", a.root / "dataset", "tabletop");
  dense_shape(c, work_dir() / "sphere" / "plan", work_dir() / "sphere" / "dataset", "sphere");
}

void ablation_analog(Check& c) {
  const auto& a = first_run();
  const auto ds = (a.root / "dataset").string();
  json params = util::load_json(fixture("tabletop", "params.json"));
  params["weights"]["w4"] = 1;
  const auto with_q1 = work_dir() / "params_w4.json";
  util::write_file(with_q1.string(), util::dump(params, 1));
  const auto plan = (work_dir() / "plan_w4").string();
  command("plan", [&](auto& o, auto& e) { return cli::cmd_plan({ds, std::nullopt, with_q1.string(), plan, std::nullopt}, o, e); });
  command("eval", [&](auto& o, auto& e) { return cli::cmd_eval({plan + "/results.jsonl", ds, std::nullopt, 4, "w4 = 1"}, o, e); });

  std::string table;
  for (const auto& [dir, label] : {std::pair{a.root / "plan", "weights (1,1,1,0,1)"}, std::pair{fs::path(plan), "weights (1,1,1,1,1)"}}) {
    const fs::path path = dir / "eval.json";
    c.require(fs::exists(path), std::string(label) + " report written");
    const auto j = util::load_json(path.string());
    for (const auto& s : j.at("scenes")) {
      const double v = s.at("valid_rate"), su = s.at("success_rate"), o = s.at("overall_rate");
      c.require(o <= std::min(v, su), std::string(label) + " per-scene overall <= min(valid, success)");
    }
    const double v = j.at("valid_rate").at("mean"), su = j.at("success_rate").at("mean"), o = j.at("overall_rate").at("mean");
    c.require(o <= std::min(v, su), std::string(label) + " mean overall <= min(valid, success)");
    const auto report = cli::evaluate_results(planner::parse_results(util::read_file((dir / "results.jsonl").string())),
                                              scenes::list_scenes(ds), 4);
    const auto text = planner::format_report(report, label);
    table += text.substr(table.empty() ? 0 : text.find('\n') + 1);
  }
  c.require(table.find("Valid rate") != std::string::npos && table.find("Success") != std::string::npos &&
                table.find("Overall") != std::string::npos,
            "three-column table");
  std::cout << table;
  c.detail << "two reports produced, overall <= min(valid, success) throughout";
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Check&)>>> criteria{
      {"gradient contract", gradient_contract},
      {"rotation representation", rotation_representation},
      {"matching oracle equivalence", matching_oracle},
      {"loss arithmetic fixtures", loss_arithmetic},
      {"Q1 properties", q1_properties},
      {"forward kinematics", forward_kinematics},
      {"pipeline determinism", pipeline_determinism},
      {"planner regression fixture", planner_regression},
      {"dense-prediction shape", dense_prediction_shape},
      {"ablation analog", ablation_analog},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Check c;
    const auto t0 = Clock::now();
    try {
      criteria[i].second(c);
    } catch (const std::exception& e) {
      c.pass = false;
      c.detail << "exception: " << e.what();
    }
    failed += !c.pass;
    std::printf("criterion %2zu %s  %s [%.1f s]: %s\n", i + 1, c.pass ? "PASS" : "FAIL", criteria[i].first.c_str(), cli::seconds_since(t0),
                c.detail.str().c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
