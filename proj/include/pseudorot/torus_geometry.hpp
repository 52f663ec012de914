#pragma once

#include <cmath>

#include <Eigen/Core>

namespace pseudorot {

/// Reduce an angle (in units of full turns) to [0, 1).
inline double wrap_unit(double x) {
  double r = x - std::floor(x);
  // floor can round x - floor(x) up to exactly 1 for tiny negative x
  return r >= 1.0 ? 0.0 : r;
}

/// Distance on R/Z.
inline double circular_distance(double a, double b) {
  double d = std::fabs(wrap_unit(a - b));
  return std::min(d, 1.0 - d);
}

/// Max over coordinates of the circular distance. Used everywhere a torus
/// metric is needed.
inline double torus_distance(const Eigen::Ref<const Eigen::VectorXd>& a,
                             const Eigen::Ref<const Eigen::VectorXd>& b) {
  double best = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    best = std::max(best, circular_distance(a[i], b[i]));
  }
  return best;
}

inline Eigen::VectorXd wrap_unit(const Eigen::Ref<const Eigen::VectorXd>& x) {
  Eigen::VectorXd out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) out[i] = wrap_unit(x[i]);
  return out;
}

}  // namespace pseudorot
