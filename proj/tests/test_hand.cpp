#include "densegrasp/hand/closing.hpp"
#include "densegrasp/hand/hand_io.hpp"
#include "densegrasp/losses/diff.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

using namespace densegrasp;
using namespace densegrasp::hand;
namespace dt = densegrasp::testing;
using geom::Mat3d;

namespace {

const HandModel& simple() {
  static const HandModel h = load_hand_by_name("simple-2f");
  return h;
}

const HandModel& shadow() {
  static const HandModel h = load_hand_by_name("shadow-like");
  return h;
}

util::json single_joint_json() {
  util::Rng rng(1);
  util::json j = dt::random_chain_json(rng, 1);
  j["joints"][0]["origin"] = {{"translation", {0, 0, 0}}, {"quaternion", {1, 0, 0, 0}}};
  j["joints"][0]["axis"] = {0, 0, 1};
  return j;
}

JointVector random_theta(const HandModel& h, util::Rng& rng, double margin = 0.0) {
  JointVector t(static_cast<Eigen::Index>(h.dof()));
  for (std::size_t k = 0; k < h.dof(); ++k)
    t[static_cast<Eigen::Index>(k)] = rng.uniform(h.joints[k].limit_min + margin, h.joints[k].limit_max - margin);
  return t;
}

/// Link poses by explicit 4x4 products along each link's chain.
std::vector<Eigen::Matrix4d> matrix_fk(const HandModel& h, const RigidTransform& palm, const JointVector& theta) {
  std::vector<Eigen::Matrix4d> out(h.num_links());
  out[0] = dt::homogeneous(palm);
  std::vector<bool> done(h.num_links(), false);
  done[0] = true;
  for (std::size_t pass = 0; pass < h.num_links(); ++pass)
    for (std::size_t j = 0; j < h.dof(); ++j) {
      const auto& js = h.joints[j];
      if (!done[static_cast<std::size_t>(js.parent_link)] || done[static_cast<std::size_t>(js.child_link)]) continue;
      Eigen::Matrix4d rot = Eigen::Matrix4d::Identity();
      rot.topLeftCorner<3, 3>() = Eigen::AngleAxisd(theta[static_cast<Eigen::Index>(j)], js.axis).toRotationMatrix();
      out[static_cast<std::size_t>(js.child_link)] = out[static_cast<std::size_t>(js.parent_link)] * dt::homogeneous(js.origin) * rot;
      done[static_cast<std::size_t>(js.child_link)] = true;
    }
  return out;
}

}  // namespace

TEST(Clamp, Examples) {
  const auto& h = simple();
  const JointVector mid = 0.5 * (h.lower_limits() + h.upper_limits());
  EXPECT_EQ(clamp_joints(h, mid), mid);
  JointVector above = mid, below = mid;
  above[1] = h.joints[1].limit_max + 0.3;
  below[2] = h.joints[2].limit_min - 0.3;
  EXPECT_EQ(clamp_joints(h, above)[1], h.joints[1].limit_max);
  EXPECT_EQ(clamp_joints(h, below)[2], h.joints[2].limit_min);
  EXPECT_EQ(clamp_joints(h, above)[0], mid[0]);
}

TEST(Clamp, IdempotentAndChecksSize) {
  const auto& h = shadow();
  util::Rng rng(2);
  for (int t = 0; t < 200; ++t) {
    JointVector th(static_cast<Eigen::Index>(h.dof()));
    for (auto& v : th) v = rng.uniform(-3.0, 3.0);
    const auto once = clamp_joints(h, th);
    EXPECT_EQ(clamp_joints(h, once), once);
  }
  EXPECT_THROW(clamp_joints(h, JointVector::Zero(3)), DimensionMismatch);
}

TEST(ForwardKinematics, ZeroAnglesComposeOrigins) {
  const auto& h = shadow();
  const auto poses = forward_kinematics(h, RigidTransform{}, JointVector::Zero(static_cast<Eigen::Index>(h.dof())));
  for (std::size_t l = 1; l < h.num_links(); ++l) {
    Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
    for (int link = static_cast<int>(l); link != 0;) {
      const auto& js = h.joints[static_cast<std::size_t>(h.parent_joint(link))];
      m = dt::homogeneous(js.origin) * m;
      link = js.parent_link;
    }
    EXPECT_LT((dt::homogeneous(poses[l]) - m).cwiseAbs().maxCoeff(), 1e-12) << h.links[l].name;
  }
}

TEST(ForwardKinematics, QuarterTurnAboutZ) {
  const auto h = parse_hand(single_joint_json());
  JointVector th(1);
  th[0] = std::numbers::pi / 2;
  const auto poses = forward_kinematics(h, RigidTransform{}, th);
  EXPECT_LT((poses[1].apply(Vec3d(1, 0, 0)) - Vec3d(0, 1, 0)).norm(), 1e-15);
}

TEST(ForwardKinematics, MatchesMatrixProductOnRandomChains) {
  util::Rng rng(3);
  for (int t = 0; t < 50; ++t) {
    const auto h = parse_hand(dt::random_chain_json(rng, 3));
    const auto palm = dt::random_pose(rng);
    const auto th = random_theta(h, rng);
    const auto poses = forward_kinematics(h, palm, th);
    const auto oracle = matrix_fk(h, palm, th);
    for (std::size_t l = 0; l < h.num_links(); ++l) EXPECT_LT((dt::homogeneous(poses[l]) - oracle[l]).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(ForwardKinematics, RigidEquivariance) {
  util::Rng rng(4);
  for (const HandModel* h : {&simple(), &shadow()})
    for (int t = 0; t < 20; ++t) {
      const auto g = dt::random_pose(rng), palm = dt::random_pose(rng);
      const auto th = random_theta(*h, rng);
      const auto moved = forward_kinematics(*h, g.compose(palm), th);
      const auto base = forward_kinematics(*h, palm, th);
      for (std::size_t l = 0; l < h->num_links(); ++l)
        EXPECT_LT((dt::homogeneous(moved[l]) - dt::homogeneous(g.compose(base[l]))).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(ForwardKinematics, ChecksDimensions) {
  EXPECT_THROW(forward_kinematics(simple(), RigidTransform{}, JointVector::Zero(5)), DimensionMismatch);
}

TEST(PlaceHandPoints, IdentityAndTranslation) {
  const auto& h = shadow();
  std::vector<RigidTransform> id(h.num_links());
  const auto at = place_hand_points(h, id);
  ASSERT_EQ(at.collision.size(), 2000u);
  ASSERT_EQ(at.inner.size(), 45u);
  for (std::size_t i = 0; i < at.collision.size(); ++i) EXPECT_EQ(at.collision[i], h.collision_points[i].position);
  for (std::size_t i = 0; i < at.inner.size(); ++i) EXPECT_EQ(at.inner[i], h.inner_points[i].position);

  const Vec3d t(0.3, -0.2, 0.1);
  auto shifted = id;
  for (auto& p : shifted) p.translation = t;
  const auto moved = place_hand_points(h, shifted);
  for (std::size_t i = 0; i < moved.collision.size(); ++i) EXPECT_LT((moved.collision[i] - at.collision[i] - t).norm(), 1e-15);
}

TEST(PlaceHandPoints, MatchesPerPointArithmetic) {
  const auto& h = shadow();
  util::Rng rng(5);
  const auto poses = forward_kinematics(h, dt::random_pose(rng), random_theta(h, rng));
  const auto placed = place_hand_points(h, poses);
  for (std::size_t i = 0; i < placed.collision.size(); ++i) {
    const auto& p = h.collision_points[i];
    const auto& T = poses[static_cast<std::size_t>(p.link)];
    EXPECT_LT((placed.collision[i] - (T.rotation * p.position + T.translation)).norm(), 1e-12);
  }
}

TEST(PlaceHandPoints, JacobianMatchesFiniteDifferences) {
  // Derivatives of world collision points w.r.t. palm translation and joint angles.
  const auto& h = shadow();
  util::Rng rng(6);
  const double step = 1e-6;
  for (int t = 0; t < 10; ++t) {
    grasp::GraspConfig g;
    g.anchor = dt::random_vec(rng, 0.1);
    g.offset = dt::random_vec(rng, 0.05);
    g.a = dt::random_vec(rng);
    g.b = dt::random_vec(rng);
    g.theta = random_theta(h, rng, 0.05);
    const auto pe = losses::evaluate_pose(g, h);
    std::vector<Eigen::Index> params = {0, 1, 2};
    for (Eigen::Index k = 0; k < g.theta.size(); ++k) params.push_back(grasp::kPoseParams + k);
    const Eigen::VectorXd x = grasp::flatten(g);
    for (std::size_t i = 0; i < h.collision_points.size(); i += 37) {
      const auto& hp = h.collision_points[i];
      const auto pj = pe.point_jet(hp);
      for (Eigen::Index k : params) {
        Eigen::VectorXd xp = x, xm = x;
        xp[k] += step;
        xm[k] -= step;
        auto point = [&](const Eigen::VectorXd& y) {
          const auto pose = grasp::grasp_to_pose(grasp::unflatten(y, g.anchor), h);
          return forward_kinematics(h, pose.palm_pose, pose.theta)[static_cast<std::size_t>(hp.link)].apply(hp.position);
        };
        const Vec3d numeric = (point(xp) - point(xm)) / (2 * step);
        const Vec3d analytic(pj[0].d[k], pj[1].d[k], pj[2].d[k]);
        const double denom = std::max({analytic.norm(), numeric.norm(), 1e-8});
        EXPECT_LT((analytic - numeric).norm() / denom, 1e-5) << "point " << i << " param " << k;
      }
    }
  }
}

TEST(LoadHand, BundledHands) {
  EXPECT_EQ(simple().dof(), 4u);
  EXPECT_EQ(shadow().dof(), 18u);
  for (const HandModel* h : {&simple(), &shadow()}) {
    EXPECT_EQ(h->collision_points.size(), 2000u);
    EXPECT_EQ(h->inner_points.size(), 45u);
    EXPECT_EQ(h->palm_reference_point, Vec3d::Zero());
  }
}

TEST(LoadHand, SaveLoadRoundTripIsExact) {
  for (const HandModel* h : {&simple(), &shadow()}) {
    const auto dir = dt::temp_dir("hand_roundtrip");
    const auto path = (dir / "hand.json").string();
    save_hand(*h, path);
    const auto back = load_hand(path);
    EXPECT_EQ(util::dump(hand_to_json(back)), util::dump(hand_to_json(*h)));
    for (std::size_t i = 0; i < h->collision_points.size(); ++i) {
      EXPECT_EQ(back.collision_points[i].link, h->collision_points[i].link);
      EXPECT_EQ(back.collision_points[i].position, h->collision_points[i].position);
    }
    for (std::size_t j = 0; j < h->dof(); ++j) EXPECT_EQ(back.joints[j].origin.rotation, h->joints[j].origin.rotation);
  }
}

TEST(LoadHand, RejectsCyclesAndBadModels) {
  util::Rng rng(7);
  auto j = dt::random_chain_json(rng, 3);
  // l2 -> l1 in addition to l1 -> l2: l1 and l2 form a cycle.
  auto cyc = j;
  cyc["joints"][0]["child"] = "l1";
  cyc["joints"][2] = cyc["joints"][1];
  cyc["joints"][2]["name"] = "back";
  cyc["joints"][2]["parent"] = "l2";
  cyc["joints"][2]["child"] = "l1";
  EXPECT_THROW(parse_hand(cyc), ValidationError);

  auto to_palm = j;
  to_palm["joints"][2]["child"] = "l0";
  EXPECT_THROW(parse_hand(to_palm), ValidationError);

  auto limits = j;
  limits["joints"][0]["limits"] = {1.0, -1.0};
  EXPECT_THROW(parse_hand(limits), ValidationError);

  auto axis = j;
  axis["joints"][0]["axis"] = {0, 0, 2};
  EXPECT_THROW(parse_hand(axis), ValidationError);

  auto points = j;
  points["collision_points"] = util::json::array({{0, 0.0, 0.0, 0.0}});
  EXPECT_THROW(parse_hand(points), ValidationError);

  auto missing = j;
  missing["joints"][0].erase("limits");
  EXPECT_THROW(parse_hand(missing), ParseError);
}

TEST(LoadHand, SearchPathResolvesBundledNames) {
  EXPECT_NO_THROW(resolve_hand_path("simple-2f"));
  EXPECT_THROW(load_hand_by_name("no-such-hand"), Error);
}

TEST(InitialJoints, BlendOfMidRangeAndOpen) {
  const auto& h = simple();
  const JointVector expect = (1.0 - h.open_hand_bias) * 0.5 * (h.lower_limits() + h.upper_limits()) + h.open_hand_bias * open_hand(h);
  EXPECT_LT((initial_joints(h) - expect).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_EQ(clamp_joints(h, initial_joints(h)), initial_joints(h));
}

TEST(CloseUntilContact, StopsAtTheWall) {
  // A finger sweeping towards a wall ends within tolerance of its surface.
  const auto& h = simple();
  const auto wall = geom::make_box({0.2, 0.2, 0.02}, {0.0, 0.0, 0.07});
  std::vector<geom::TriMesh> meshes = {wall};
  const auto theta = close_until_contact(h, RigidTransform{}, open_hand(h), meshes);
  const auto poses = forward_kinematics(h, RigidTransform{}, theta);
  const double d = max_signed_distance(h, poses, meshes, all_links(h), 0.01);
  EXPECT_LE(std::abs(d), 1e-4);
}
