#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include <Eigen/Core>

namespace pseudorot {

/// One-periodic in time Hamiltonian on a base torus T^{2m} with the standard
/// form. Coordinates of p are angles in units of full turns, so H is
/// 1-periodic in every coordinate as well.
class BaseHamiltonian {
 public:
  virtual ~BaseHamiltonian() = default;

  virtual int dim() const = 0;
  virtual bool autonomous() const = 0;
  virtual std::string describe() const = 0;

  virtual double value(double t, const Eigen::Ref<const Eigen::VectorXd>& p) const = 0;
  virtual void gradient(double t, const Eigen::Ref<const Eigen::VectorXd>& p,
                        Eigen::Ref<Eigen::VectorXd> out) const = 0;
  virtual void hessian(double t, const Eigen::Ref<const Eigen::VectorXd>& p,
                       Eigen::Ref<Eigen::MatrixXd> out) const = 0;

  /// True only when H vanishes identically (known structurally, not sampled).
  virtual bool identically_zero() const { return false; }

  Eigen::VectorXd gradient(double t, const Eigen::Ref<const Eigen::VectorXd>& p) const {
    Eigen::VectorXd g(dim());
    gradient(t, p, g);
    return g;
  }
  Eigen::MatrixXd hessian(double t, const Eigen::Ref<const Eigen::VectorXd>& p) const {
    Eigen::MatrixXd h(dim(), dim());
    hessian(t, p, h);
    return h;
  }
};

using BaseHamiltonianPtr = std::shared_ptr<const BaseHamiltonian>;

/// H^{#k}(t, p) = k H(k t, p).
BaseHamiltonianPtr iterate_hamiltonian(BaseHamiltonianPtr h, int k);

/// lambda * H.
BaseHamiltonianPtr scale_hamiltonian(BaseHamiltonianPtr h, double lambda);

/// Largest |H(t+1, p) - H(t, p)| and |H(t, p + e_i) - H(t, p)| over random
/// samples.
double periodicity_defect(const BaseHamiltonian& h, int samples, std::uint64_t seed);

}  // namespace pseudorot

namespace pseudorot {

/// X_H = Omega^{-1} dH for a constant base form with precomputed inverse.
/// Shared by the base flow and the dressed flow so both discretize the base
/// factor with identical arithmetic.
inline void hamiltonian_field(const BaseHamiltonian& h, const Eigen::MatrixXd& form_inverse, double t,
                              const Eigen::Ref<const Eigen::VectorXd>& p, Eigen::Ref<Eigen::VectorXd> out) {
  Eigen::VectorXd grad(h.dim());
  h.gradient(t, p, grad);
  out.noalias() = form_inverse * grad;
}

}  // namespace pseudorot
