#pragma once

#include <functional>
#include <string>
#include <vector>

namespace pseudorot {

/// Closed-form evaluators for a smooth scalar function and two derivatives.
struct ScalarProfile {
  std::function<double(double)> value;
  std::function<double(double)> first;
  std::function<double(double)> second;
};

/// alpha : R/Z -> R Morse with exactly two critical points theta1, theta2;
/// beta : R -> R with beta(alpha(theta_i)) = 0 and beta(alpha(eta)) = 1.
struct ProfilePair {
  std::string id;
  ScalarProfile alpha;
  ScalarProfile beta;
  double theta1 = 0.0;
  double theta2 = 0.0;
  double eta = 0.0;
};

/// alpha(theta) = beta(theta) = sin(2 pi theta), theta1 = 1/4, theta2 = 3/4,
/// eta the root of sin(2 pi eta) = 1/4 in (0, 1/4).
ProfilePair make_sin_profiles();

/// Lookup by identifier. Only "sin" takes no parameters; unknown ids throw.
ProfilePair make_profiles(const std::string& id, const std::vector<double>& params);

/// Checks the ingredient conditions on a 10^4-point grid and at the
/// distinguished angles; throws std::invalid_argument with the failing one.
void validate_profiles(const ProfilePair& profiles, int grid = 10000);

/// Largest |beta'(alpha(theta))| over the circle (grid plus golden-section
/// refinement).
double max_abs_beta_prime_on_alpha(const ProfilePair& profiles, int grid = 4096);

}  // namespace pseudorot
