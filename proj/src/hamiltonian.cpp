#include "pseudorot/hamiltonian.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace pseudorot {

namespace {

class IteratedHamiltonian final : public BaseHamiltonian {
 public:
  IteratedHamiltonian(BaseHamiltonianPtr parent, int k) : parent_(std::move(parent)), k_(k) {}

  int dim() const override { return parent_->dim(); }
  bool autonomous() const override { return parent_->autonomous(); }
  bool identically_zero() const override { return parent_->identically_zero(); }
  std::string describe() const override {
    return "iterate(" + parent_->describe() + ", " + std::to_string(k_) + ")";
  }

  double value(double t, const Eigen::Ref<const Eigen::VectorXd>& p) const override {
    return k_ * parent_->value(k_ * t, p);
  }
  void gradient(double t, const Eigen::Ref<const Eigen::VectorXd>& p,
                Eigen::Ref<Eigen::VectorXd> out) const override {
    parent_->gradient(k_ * t, p, out);
    out *= double(k_);
  }
  void hessian(double t, const Eigen::Ref<const Eigen::VectorXd>& p,
               Eigen::Ref<Eigen::MatrixXd> out) const override {
    parent_->hessian(k_ * t, p, out);
    out *= double(k_);
  }

 private:
  BaseHamiltonianPtr parent_;
  int k_;
};

class ScaledHamiltonian final : public BaseHamiltonian {
 public:
  ScaledHamiltonian(BaseHamiltonianPtr parent, double lambda) : parent_(std::move(parent)), lambda_(lambda) {}

  int dim() const override { return parent_->dim(); }
  bool autonomous() const override { return parent_->autonomous(); }
  bool identically_zero() const override { return lambda_ == 0.0 || parent_->identically_zero(); }
  std::string describe() const override {
    return "scale(" + parent_->describe() + ", " + std::to_string(lambda_) + ")";
  }

  double value(double t, const Eigen::Ref<const Eigen::VectorXd>& p) const override {
    return lambda_ * parent_->value(t, p);
  }
  void gradient(double t, const Eigen::Ref<const Eigen::VectorXd>& p,
                Eigen::Ref<Eigen::VectorXd> out) const override {
    parent_->gradient(t, p, out);
    out *= lambda_;
  }
  void hessian(double t, const Eigen::Ref<const Eigen::VectorXd>& p,
               Eigen::Ref<Eigen::MatrixXd> out) const override {
    parent_->hessian(t, p, out);
    out *= lambda_;
  }

 private:
  BaseHamiltonianPtr parent_;
  double lambda_;
};

}  // namespace

BaseHamiltonianPtr iterate_hamiltonian(BaseHamiltonianPtr h, int k) {
  if (!h) throw std::invalid_argument("iterate of a null Hamiltonian");
  if (k <= 0) throw std::invalid_argument("iteration count must be >= 1, got " + std::to_string(k));
  if (k == 1) return h;
  return std::make_shared<IteratedHamiltonian>(std::move(h), k);
}

BaseHamiltonianPtr scale_hamiltonian(BaseHamiltonianPtr h, double lambda) {
  if (!h) throw std::invalid_argument("scale of a null Hamiltonian");
  return std::make_shared<ScaledHamiltonian>(std::move(h), lambda);
}

double periodicity_defect(const BaseHamiltonian& h, int samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst = 0.0;
  Eigen::VectorXd p(h.dim());
  for (int s = 0; s < samples; ++s) {
    const double t = unit(rng);
    for (int i = 0; i < h.dim(); ++i) p[i] = unit(rng);
    const double base = h.value(t, p);
    worst = std::max(worst, std::fabs(h.value(t + 1.0, p) - base));
    for (int i = 0; i < h.dim(); ++i) {
      Eigen::VectorXd q = p;
      q[i] += 1.0;
      worst = std::max(worst, std::fabs(h.value(t, q) - base));
    }
  }
  return worst;
}

}  // namespace pseudorot
