#pragma once

// Bundled object set: procedural, watertight primitives sized for a hand.

#include "densegrasp/geom/primitives.hpp"

#include <string>
#include <vector>

namespace densegrasp::scenes {

using geom::TriMesh;

inline const std::vector<std::string>& catalog_ids() {
  static const std::vector<std::string> ids{"box", "flat-box", "cylinder", "sphere", "cone", "l-block"};
  return ids;
}

/// Object mesh in its canonical frame. Throws ValidationError for unknown ids.
inline TriMesh catalog_mesh(const std::string& id) {
  if (id == "box") return geom::make_box({0.05, 0.05, 0.08});
  if (id == "flat-box") return geom::make_box({0.09, 0.045, 0.04});
  if (id == "cylinder") return geom::make_cylinder(0.03, 0.09, 24);
  if (id == "sphere") return geom::make_sphere(0.035, 2);
  if (id == "cone") return geom::make_frustum(0.04, 0.02, 0.08, 24);
  if (id == "l-block") return geom::make_l_prism(0.08, 0.07, 0.03, 0.04);
  throw ValidationError("unknown object id '" + id + "'");
}

}  // namespace densegrasp::scenes
