// Q1 upper bound of a few contact layouts on the unit sphere, with the
// default 64 directions and with a dense set.

#include "densegrasp/losses/q1.hpp"

#include <cstdio>

using namespace densegrasp;
using geom::Vec3d;

static std::vector<losses::Contact> on_sphere(std::initializer_list<Vec3d> normals) {
  std::vector<losses::Contact> out;
  for (const auto& n : normals) {
    losses::Contact c;
    c.point = c.normal = n.normalized();
    out.push_back(c);
  }
  return out;
}

int main() {
  losses::ContactParams p;
  p.torque_scale = 1.0;
  p.com = Vec3d::Zero();
  const auto dense = losses::q1_directions(20000, 0);

  const std::pair<const char*, std::vector<losses::Contact>> layouts[] = {
      {"single", on_sphere({{1, 0, 0}})},
      {"antipodal", on_sphere({{1, 0, 0}, {-1, 0, 0}})},
      {"tetrahedral", on_sphere({{1, 1, 1}, {1, -1, -1}, {-1, 1, -1}, {-1, -1, 1}})},
      {"octahedral", on_sphere({{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}})},
  };
  std::printf("%-12s %10s %10s %10s\n", "layout", "D=64", "D=20000", "loss");
  for (const auto& [name, contacts] : layouts) {
    const auto q = losses::q1_upper(contacts, p);
    std::printf("%-12s %10.5f %10.5f %10.5f\n", name, q.value, losses::q1_upper(contacts, p, dense).value, losses::q1_loss(q).value);
  }
}
