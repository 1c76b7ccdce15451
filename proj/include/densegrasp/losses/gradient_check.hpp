#pragma once

#include "densegrasp/losses/diff.hpp"

#include <algorithm>
#include <cmath>

namespace densegrasp::losses {

struct GradientCheckReport {
  Eigen::VectorXd analytic;
  Eigen::VectorXd numeric;
  Eigen::VectorXd rel_error;
  double max_rel_error = 0.0;  ///< over coordinates that are not at a selection boundary
  int worst_coordinate = -1;
  std::vector<int> boundary_coordinates;

  /// A ±h step changed some discrete choice; such coordinates are reported
  /// but excluded from max_rel_error.
  bool selection_boundary() const { return !boundary_coordinates.empty(); }
  bool passed(double tol = 1e-4) const { return max_rel_error < tol; }
};

/// Central differences (f(x+h·e_i) - f(x-h·e_i)) / 2h against the analytic
/// gradient; relative error uses max(|analytic|, |numeric|, 1e-8).
template <class F>
GradientCheckReport gradient_check(F&& f, const Eigen::VectorXd& x, double h = 1e-5) {
  const DiffValue at = f(x);
  GradientCheckReport r;
  r.analytic = at.gradient;
  const auto n = x.size();
  if (r.analytic.size() != n) throw DimensionMismatch("gradient size does not match the parameter vector");
  r.numeric.resize(n);
  r.rel_error.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::VectorXd xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    const DiffValue fp = f(xp);
    const DiffValue fm = f(xm);
    r.numeric[i] = (fp.value - fm.value) / (2.0 * h);
    const double a = r.analytic[i], nu = r.numeric[i];
    r.rel_error[i] = std::abs(a - nu) / std::max({std::abs(a), std::abs(nu), 1e-8});
    if (fp.selection != at.selection || fm.selection != at.selection) {
      r.boundary_coordinates.push_back(static_cast<int>(i));
      continue;
    }
    if (!(r.rel_error[i] <= r.max_rel_error)) {
      r.max_rel_error = r.rel_error[i];
      r.worst_coordinate = static_cast<int>(i);
    }
  }
  return r;
}

/// Same check with the loss written against a GraspConfig.
template <class F>
GradientCheckReport gradient_check(F&& f, const GraspConfig& g, double h = 1e-5) {
  return gradient_check([&](const Eigen::VectorXd& x) { return f(grasp::unflatten(x, g.anchor)); }, grasp::flatten(g), h);
}

}  // namespace densegrasp::losses
