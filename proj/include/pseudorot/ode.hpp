#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace pseudorot::ode {

using Vector = Eigen::VectorXd;
using Rhs = std::function<void(double t, const Vector& y, Vector& dydt)>;

class IntegratorError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Method { Dop853, ImplicitMidpoint };

Method parse_method(const std::string& name);
std::string to_string(Method m);

struct Options {
  Method method = Method::Dop853;
  /// Local error per accepted step, used as both absolute and relative
  /// tolerance. Ignored by the midpoint rule.
  double tol = 1e-10;
  /// Number of leading components entering the step-size control norm;
  /// 0 means all of them.
  Eigen::Index control_size = 0;
  double max_step = 0.0;  // 0: unbounded
  std::size_t max_steps = 2'000'000;
  /// Fixed steps per unit time for the midpoint rule.
  int midpoint_steps_per_unit = 2000;
  double midpoint_solve_tol = 1e-15;
};

struct Stats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t evaluations = 0;
};

/// Continuous extension of one accepted DOP853 step (7th order).
struct DenseSegment {
  double t0 = 0.0;
  double h = 0.0;
  std::array<Vector, 8> coeff;

  Vector operator()(double t) const;
};

using DenseObserver = std::function<void(const DenseSegment&)>;

/// Adaptive explicit Runge-Kutta 8(5,3) of Dormand and Prince with Hairer's
/// step-size control and dense output.
class Dop853 {
 public:
  Dop853(Rhs rhs, Options options);

  /// Integrates from t0 to t1 (t1 > t0). The observer, when given, receives
  /// the dense segment of every accepted step.
  Vector integrate(double t0, double t1, Vector y0, const DenseObserver& observer = {});
  const Stats& stats() const { return stats_; }

 private:
  double initial_step(double t0, const Vector& y0, const Vector& f0, double span);
  double control_norm_squared(const Vector& v, const Vector& y_old, const Vector& y_new) const;

  Rhs rhs_;
  Options opt_;
  Stats stats_;
};

/// Implicit midpoint rule with fixed steps; preserves every quadratic
/// invariant of linear systems and is symplectic for constant forms.
Vector implicit_midpoint(const Rhs& rhs, double t0, double t1, Vector y0, int steps,
                         double solve_tol = 1e-15, Stats* stats = nullptr);

/// Dispatch on options.method.
Vector integrate(const Rhs& rhs, double t0, double t1, Vector y0, const Options& options,
                 Stats* stats = nullptr);

/// Samples the solution at the given increasing times (first time >= t0)
/// using dense output (DOP853) or step-aligned evaluation (midpoint).
std::vector<Vector> integrate_dense(const Rhs& rhs, double t0, std::span<const double> times,
                                    Vector y0, const Options& options);

}  // namespace pseudorot::ode
