#include "densegrasp/losses/gradient_check.hpp"
#include "densegrasp/losses/q1.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace densegrasp;
using namespace densegrasp::losses;
namespace dt = densegrasp::testing;

namespace {

// Dense-direction values from tests/oracles/q1_dense_oracle.py (D = 1e5,
// mu 0.5, 8 edges, unit torque scale, com at the origin).
constexpr double kAntipodal = 0.08586476449074032;
constexpr double kTetrahedral = 0.3778583217563171;
constexpr double kOctahedral = 0.42556042888439843;

constexpr int kDense = 100000;

const Eigen::MatrixXd& dense_dirs() {
  static const Eigen::MatrixXd d = q1_directions(kDense, 0);
  return d;
}

ContactParams unit_params() {
  ContactParams p;
  p.torque_scale = 1.0;
  p.com = Vec3d::Zero();
  return p;
}

// Contacts on the unit sphere at the given outward normals.
std::vector<Contact> on_sphere(const std::vector<Vec3d>& normals) {
  std::vector<Contact> out;
  for (const auto& n : normals) {
    Contact c;
    c.point = n.normalized();
    c.normal = n.normalized();
    out.push_back(c);
  }
  return out;
}

std::vector<Contact> random_contacts(util::Rng& rng, int count) {
  std::vector<Contact> out;
  for (int i = 0; i < count; ++i) {
    Contact c;
    c.normal = dt::random_unit(rng);
    c.point = c.normal * rng.uniform(0.5, 1.5) + dt::random_vec(rng, 0.1);
    out.push_back(c);
  }
  return out;
}

double dense_q1(const std::vector<Contact>& c, const ContactParams& p) { return q1_upper(c, p, dense_dirs()).value; }

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST(Q1Directions, UnitAndNested) {
  const auto big = q1_directions(4096, 3);
  for (Eigen::Index j = 0; j < big.rows(); ++j) EXPECT_NEAR(big.row(j).norm(), 1.0, 1e-12);
  EXPECT_EQ(q1_directions(64, 3), big.topRows(64));
  EXPECT_EQ(q1_directions(64, 3), q1_directions(64, 3));
  EXPECT_NE(q1_directions(64, 3), q1_directions(64, 4));
}

TEST(Q1Directions, ConeEdges) {
  util::Rng rng(5);
  Contact c;
  c.normal = dt::random_unit(rng);
  const auto edges = cone_edges(c, 0.5, 8);
  ASSERT_EQ(edges.size(), 8u);
  Vec3d sum = Vec3d::Zero();
  for (const auto& f : edges) {
    EXPECT_NEAR(f.dot(-c.normal), 1.0, 1e-12);
    EXPECT_NEAR((f + c.normal).norm(), 0.5, 1e-12);
    sum += f;
  }
  EXPECT_NEAR((sum / 8.0 + c.normal).norm(), 0.0, 1e-12);
}

TEST(Q1, EmptyContacts) {
  const auto q = q1_upper(std::vector<Contact>{}, unit_params());
  EXPECT_EQ(q.value, 0.0);
  EXPECT_EQ(q1_loss(q).value, 1.0);
}

TEST(Q1, SingleContactIsZero) {
  const auto c = on_sphere({Vec3d::UnitX()});
  EXPECT_EQ(q1_upper(c, unit_params()).value, 0.0);
  EXPECT_EQ(dense_q1(c, unit_params()), 0.0);
}

TEST(Q1, AntipodalMatchesOracle) {
  const auto c = on_sphere({Vec3d::UnitX(), -Vec3d::UnitX()});
  const double q = dense_q1(c, unit_params());
  EXPECT_GT(q, 0.0);
  EXPECT_LT(rel(q, kAntipodal), 0.02) << q;
}

TEST(Q1, TetrahedralMatchesOracle) {
  const auto c = on_sphere({{1, 1, 1}, {1, -1, -1}, {-1, 1, -1}, {-1, -1, 1}});
  EXPECT_LT(rel(dense_q1(c, unit_params()), kTetrahedral), 0.02);
}

TEST(Q1, OctahedralMatchesOracle) {
  const auto c = on_sphere({{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}});
  EXPECT_LT(rel(dense_q1(c, unit_params()), kOctahedral), 0.02);
}

TEST(Q1, MonotoneInDirectionCount) {
  util::Rng rng(31);
  const auto dirs = q1_directions(8192, 0);
  const auto p = unit_params();
  int positive = 0;
  for (int set = 0; set < 20; ++set) {
    const auto c = random_contacts(rng, 2 + set % 5);
    double prev = std::numeric_limits<double>::infinity();
    for (int D : {1, 4, 16, 64, 256, 1024, 4096, 8192}) {
      const double q = q1_upper(c, p, dirs.topRows(D)).value;
      EXPECT_LE(q, prev) << "set " << set << " D " << D;
      prev = q;
    }
    positive += prev > 0.0;
  }
  EXPECT_GT(positive, 3);
}

TEST(Q1, RigidInvarianceUnderDenseDirections) {
  util::Rng rng(32);
  const std::vector<std::pair<std::vector<Contact>, double>> cases{
      {on_sphere({Vec3d::UnitX(), -Vec3d::UnitX()}), kAntipodal},
      {on_sphere({{1, 1, 1}, {1, -1, -1}, {-1, 1, -1}, {-1, -1, 1}}), kTetrahedral},
      {on_sphere({{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}}), kOctahedral}};
  for (const auto& [contacts, expect] : cases) {
    for (int trial = 0; trial < 3; ++trial) {
      const auto t = dt::random_pose(rng, 2.0);
      std::vector<Contact> moved;
      for (auto c : contacts) {
        // Carry the cone orientation along with the contact.
        c.tangent = t.rotation * geom::tangent_basis(c.normal).first;
        c.point = t.apply(c.point);
        c.normal = t.rotation * c.normal;
        moved.push_back(c);
      }
      ContactParams p = unit_params();
      p.com = t.translation;
      // Wrenches rotate as (R f, R tau), so the directions follow the same map.
      Eigen::MatrixXd dirs = dense_dirs();
      dirs.leftCols<3>() = dense_dirs().leftCols<3>() * t.rotation.transpose();
      dirs.rightCols<3>() = dense_dirs().rightCols<3>() * t.rotation.transpose();
      EXPECT_LT(rel(q1_upper(moved, p, dirs).value, expect), 0.02);
    }
  }
}

TEST(Q1, AntipodalValueIsASamplingArtifact) {
  // Two point contacts cannot resist torque about the line through them, so
  // the wrench hull is flat and only directions near that torque axis see it.
  const auto c = on_sphere({Vec3d::UnitX(), -Vec3d::UnitX()});
  Eigen::MatrixXd dirs = dense_dirs();
  dirs.conservativeResize(kDense + 1, 6);
  dirs.row(kDense) << 0, 0, 0, 1, 0, 0;
  EXPECT_EQ(q1_upper(c, unit_params(), dirs).value, 0.0);
}

TEST(Q1, TorqueScaleFromObject) {
  const auto sphere = geom::make_sphere(0.05, 2);
  const auto p = for_object(ContactParams{}, sphere);
  EXPECT_NEAR(p.torque_scale, 1.0 / 0.05, 1e-9);
  EXPECT_LT(p.com.norm(), 1e-12);
  ContactParams fixed;
  fixed.torque_scale = 3.0;
  EXPECT_EQ(for_object(fixed, sphere).torque_scale, 3.0);
}

TEST(Q1, ValidatesParams) {
  const auto bad = [](auto edit) {
    ContactParams p;
    edit(p);
    return p;
  };
  EXPECT_THROW(bad([](ContactParams& p) { p.friction_mu = 0.0; }).validate(), ValidationError);
  EXPECT_THROW(bad([](ContactParams& p) { p.cone_edges = 2; }).validate(), ValidationError);
  EXPECT_THROW(bad([](ContactParams& p) { p.directions = 0; }).validate(), ValidationError);
  EXPECT_THROW(bad([](ContactParams& p) { p.contact_threshold = 0.0; }).validate(), ValidationError);
  EXPECT_NO_THROW(ContactParams{}.validate());
}

TEST(Q1Loss, Values) {
  EXPECT_EQ(q1_loss(DiffValue{0.0, Eigen::VectorXd::Zero(3), {}}).value, 1.0);
  EXPECT_NEAR(q1_loss(DiffValue{std::log(2.0), Eigen::VectorXd::Zero(3), {}}).value, 0.5, 1e-16);
}

TEST(Q1Loss, ChainRuleMatchesFiniteDifferences) {
  util::Rng rng(33);
  Eigen::VectorXd x(27);
  for (auto& v : x) v = 0.2 * rng.normal();
  const auto f = [](const Eigen::VectorXd& y) { return q1_loss(DiffValue{y.squaredNorm(), 2.0 * y, {}}); };
  const auto rep = gradient_check(f, x, 1e-5);
  EXPECT_FALSE(rep.selection_boundary());
  EXPECT_LT(rep.max_rel_error, 1e-6);
}
