#include "pseudorot/profiles.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>

#include <boost/math/tools/minima.hpp>

namespace pseudorot {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// sin(2 pi s) and cos(2 pi s) with the argument reduced to an eighth of a
// turn first, so quarter turns give exact zeros and ones.
double sin_turns(double s) {
  double r = s - std::nearbyint(s);
  if (r > 0.25) r = 0.5 - r;
  if (r < -0.25) r = -0.5 - r;
  return std::sin(kTwoPi * r);
}

double cos_turns(double s) {
  const double a = std::fabs(s - std::nearbyint(s));
  if (a <= 0.125) return std::cos(kTwoPi * a);
  if (a <= 0.375) return std::sin(kTwoPi * (0.25 - a));
  return -std::cos(kTwoPi * (0.5 - a));
}

ScalarProfile sin_profile() {
  return {
      [](double s) { return sin_turns(s); },
      [](double s) { return kTwoPi * cos_turns(s); },
      [](double s) { return -kTwoPi * kTwoPi * sin_turns(s); },
  };
}

double bisect_sin_root(double target) {
  double lo = 0.0;
  double hi = 0.25;
  auto f = [&](double s) { return sin_turns(s) - target; };
  while (hi - lo > 1e-16) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (f(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

ProfilePair make_sin_profiles() {
  ProfilePair p;
  p.id = "sin";
  p.alpha = sin_profile();
  p.beta = sin_profile();
  p.theta1 = 0.25;
  p.theta2 = 0.75;
  p.eta = bisect_sin_root(0.25);
  return p;
}

ProfilePair make_profiles(const std::string& id, const std::vector<double>& params) {
  if (id == "sin") {
    if (!params.empty()) throw std::invalid_argument("profile 'sin' takes no parameters");
    return make_sin_profiles();
  }
  throw std::invalid_argument("unknown profile id '" + id + "'");
}

void validate_profiles(const ProfilePair& p, int grid) {
  const auto& a = p.alpha;
  const auto& b = p.beta;
  for (double th : {p.theta1, p.theta2}) {
    if (std::fabs(a.first(th)) > 1e-12) {
      throw std::invalid_argument("alpha'(theta_i) != 0 at theta_i = " + std::to_string(th));
    }
    if (std::fabs(a.second(th)) < 1e-8) {
      throw std::invalid_argument("alpha''(theta_i) vanishes: alpha is not Morse at " + std::to_string(th));
    }
    if (std::fabs(b.value(a.value(th))) > 1e-12) {
      throw std::invalid_argument("beta(alpha(theta_i)) != 0 at theta_i = " + std::to_string(th));
    }
  }
  if (std::fabs(b.value(a.value(p.eta)) - 1.0) > 1e-12) {
    throw std::invalid_argument("beta(alpha(eta)) != 1");
  }
  // Exactly two zeros of alpha' on the circle: count cyclic sign changes on a
  // half-shifted grid.
  int changes = 0;
  double prev = a.first((grid - 0.5) / grid);
  for (int j = 0; j < grid; ++j) {
    const double cur = a.first((j + 0.5) / grid);
    if ((prev < 0.0) != (cur < 0.0)) ++changes;
    prev = cur;
  }
  if (changes != 2) {
    throw std::invalid_argument("alpha' has " + std::to_string(changes) +
                                " sign changes; alpha must have exactly two critical points");
  }
}

double max_abs_beta_prime_on_alpha(const ProfilePair& p, int grid) {
  auto objective = [&](double th) { return -std::fabs(p.beta.first(p.alpha.value(th))); };
  int best = 0;
  double best_val = objective(0.0);
  for (int j = 1; j < grid; ++j) {
    const double v = objective(double(j) / grid);
    if (v < best_val) {
      best_val = v;
      best = j;
    }
  }
  const double lo = (best - 1.0) / grid;
  const double hi = (best + 1.0) / grid;
  auto [arg, val] = boost::math::tools::brent_find_minima(objective, lo, hi, 52);
  (void)arg;
  return std::max(-val, -best_val);
}

}  // namespace pseudorot
