#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "pseudorot/hamiltonian.hpp"
#include "pseudorot/ode.hpp"

namespace pseudorot {

/// Catalog of base Hamiltonians on (T^2, dy ^ dx).
///   "constant"            [C0]          H = C0
///   "small-autonomous"    [eps]         H = eps cos(2 pi x), |eps| <= 1e-3
///   "kicked-rotor-smooth" [K] | [K, kappa]
///       H = cos(2 pi y) / (2 pi) + K / (4 pi^2) cos(2 pi x) w(t),
///       w a von Mises bump centred at t = 1/2 with unit mean (kappa = 8)
///   "trig-series"         [c, kx, ky, kt, phase]...
///       H = sum c cos(2 pi (kx x + ky y + kt t) + phase), integer modes
BaseHamiltonianPtr catalog_get(const std::string& id, const std::vector<double>& params);

std::vector<std::string> catalog_ids();

/// Bump used by the kicked rotor: 1-periodic, smooth, mean one.
double kick_profile(double t, double kappa);

struct BaseFlowResult {
  Eigen::VectorXd point;     // lifted (not reduced mod 1)
  Eigen::MatrixXd jacobian;  // empty unless requested
};

/// Time-one map (or time-k with k iterates of a 1-periodic Hamiltonian) of
/// X_H on the base, integrated from t0 to t0 + duration.
class BaseFlow {
 public:
  explicit BaseFlow(BaseHamiltonianPtr h);

  const BaseHamiltonian& hamiltonian() const { return *h_; }
  BaseHamiltonianPtr hamiltonian_ptr() const { return h_; }
  const Eigen::MatrixXd& form_inverse() const { return form_inverse_; }

  void vector_field(double t, const Eigen::Ref<const Eigen::VectorXd>& p, Eigen::Ref<Eigen::VectorXd> out) const;

  Eigen::VectorXd flow(const Eigen::Ref<const Eigen::VectorXd>& p, double t0, double duration,
                       const ode::Options& options) const;

  /// Point together with the linearization (variational equations).
  BaseFlowResult flow_with_jacobian(const Eigen::Ref<const Eigen::VectorXd>& p, double t0, double duration,
                                    const ode::Options& options) const;

 private:
  BaseHamiltonianPtr h_;
  Eigen::MatrixXd form_inverse_;
};

/// phi_H(p), reduced mod 1, with DOP853 at the given local tolerance.
Eigen::VectorXd base_time_one_map(BaseHamiltonianPtr h, const Eigen::Ref<const Eigen::VectorXd>& p, double tol);

}  // namespace pseudorot
