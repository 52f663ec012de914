#pragma once

#include <memory>
#include <vector>

#include <Eigen/Core>

#include "pseudorot/hamiltonian.hpp"
#include "pseudorot/profiles.hpp"
#include "pseudorot/torus_symplectic.hpp"

namespace pseudorot {

/// max |H(t, p)| over the time-space torus: grid search with at least 64
/// points per dimension, then pattern-search refinement of the best cells.
double max_abs_hamiltonian(const BaseHamiltonian& h, int grid_per_dim = 64);

/// C_H = 2 max_{t,p,theta} |H(t,p) beta'(alpha(theta))|. The variables
/// separate, so the joint maximum is max|H| * max|beta' o alpha|.
double c_norm(const BaseHamiltonian& h, const ProfilePair& profiles, int grid_per_dim = 64);

/// F(H)(t, p, z, theta) = C alpha(theta) + beta(alpha(theta)) H(t, p) on
/// T^{2m} x T^{2n-1} x R/Z. States are laid out as (p, z, theta) with z the
/// torus coordinates x_1, y_1, ..., x_n (theta = y_n last).
class DressedHamiltonian {
 public:
  /// C is computed by c_norm.
  DressedHamiltonian(BaseHamiltonianPtr base, ProfilePair profiles,
                     std::shared_ptr<const TorusSymplecticStructure> torus);
  DressedHamiltonian(BaseHamiltonianPtr base, ProfilePair profiles,
                     std::shared_ptr<const TorusSymplecticStructure> torus, double c);

  double c() const { return c_; }
  /// H == 0: C = 0, the flow is trivial and the non-degeneracy claims do not apply.
  bool degenerate() const { return degenerate_; }

  const BaseHamiltonian& base() const { return *base_; }
  BaseHamiltonianPtr base_ptr() const { return base_; }
  const ProfilePair& profiles() const { return profiles_; }
  const ProductSymplecticStructure& structure() const { return structure_; }
  const TorusSymplecticStructure& torus() const { return structure_.torus(); }
  std::shared_ptr<const TorusSymplecticStructure> torus_ptr() const { return structure_.torus_ptr(); }

  int base_dim() const { return base_->dim(); }
  int torus_dim() const { return structure_.torus().dim(); }
  int state_dim() const { return base_dim() + torus_dim(); }
  int theta_index() const { return state_dim() - 1; }

  double eval(double t, const Eigen::Ref<const Eigen::VectorXd>& p, const Eigen::Ref<const Eigen::VectorXd>& z,
              double theta) const;
  double eval_state(double t, const Eigen::Ref<const Eigen::VectorXd>& x) const;

  /// g_H = C + beta'(alpha(theta)) H(t, p).
  double g(double t, const Eigen::Ref<const Eigen::VectorXd>& p, double theta) const;

  /// dF(H) as a covector on the product, in state order.
  Eigen::VectorXd differential(double t, const Eigen::Ref<const Eigen::VectorXd>& x) const;

  /// X_{F(H)} = g alpha'(theta) X + beta(alpha(theta)) X_H.
  void vector_field(double t, const Eigen::Ref<const Eigen::VectorXd>& x, Eigen::Ref<Eigen::VectorXd> out) const;
  Eigen::VectorXd vector_field(double t, const Eigen::Ref<const Eigen::VectorXd>& x) const;

  /// Analytic Jacobian of the vector field with respect to the state.
  void vector_field_jacobian(double t, const Eigen::Ref<const Eigen::VectorXd>& x,
                             Eigen::Ref<Eigen::MatrixXd> out) const;

  /// F(H)^{#k}: base replaced by H^{#k}, C by k C.
  DressedHamiltonian iterate(int k) const;

  /// {C alpha(theta1), C alpha(theta2)}, sorted, duplicates removed
  /// (a single 0 when H == 0).
  std::vector<double> spectrum() const;

 private:
  BaseHamiltonianPtr base_;
  ProfilePair profiles_;
  ProductSymplecticStructure structure_;
  double c_ = 0.0;
  bool degenerate_ = false;
};

/// Action of a constant loop, int_0^1 F(H)(t, x) dt, by adaptive
/// Gauss-Kronrod quadrature.
double constant_orbit_action(const DressedHamiltonian& fh, const Eigen::Ref<const Eigen::VectorXd>& x);

}  // namespace pseudorot
