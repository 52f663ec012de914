#include "pseudorot/construction.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace pseudorot {

namespace {

struct Candidate {
  double value;
  Eigen::VectorXd point;  // (t, p)
};

double abs_h(const BaseHamiltonian& h, const Eigen::VectorXd& tp) {
  return std::fabs(h.value(tp[0], tp.tail(h.dim())));
}

// Compass search for a local maximum of |H| in (t, p), starting step `step`.
double pattern_search(const BaseHamiltonian& h, Eigen::VectorXd x, double step, bool autonomous) {
  double best = abs_h(h, x);
  const Eigen::Index first = autonomous ? 1 : 0;
  while (step > 1e-13) {
    bool improved = false;
    for (Eigen::Index i = first; i < x.size(); ++i) {
      for (double dir : {1.0, -1.0}) {
        Eigen::VectorXd trial = x;
        trial[i] += dir * step;
        const double v = abs_h(h, trial);
        if (v > best) {
          best = v;
          x = std::move(trial);
          improved = true;
        }
      }
    }
    if (!improved) step *= 0.5;
  }
  return best;
}

}  // namespace

double max_abs_hamiltonian(const BaseHamiltonian& h, int grid_per_dim) {
  if (grid_per_dim < 64) throw std::invalid_argument("c_norm grid needs >= 64 points per dimension");
  if (h.identically_zero()) return 0.0;
  const int d = h.dim();
  const bool autonomous = h.autonomous();
  const int dims = d + 1;
  const int time_points = autonomous ? 1 : grid_per_dim;

  std::size_t total = static_cast<std::size_t>(time_points);
  for (int i = 0; i < d; ++i) total *= static_cast<std::size_t>(grid_per_dim);

  constexpr std::size_t kKeep = 4;
  std::vector<Candidate> top;
  Eigen::VectorXd tp(dims);
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t rest = idx;
    tp[0] = autonomous ? 0.0 : double(rest % grid_per_dim) / grid_per_dim;
    if (!autonomous) rest /= grid_per_dim;
    for (int i = 0; i < d; ++i) {
      tp[1 + i] = double(rest % grid_per_dim) / grid_per_dim;
      rest /= grid_per_dim;
    }
    const double v = abs_h(h, tp);
    if (top.size() < kKeep || v > top.back().value) {
      top.push_back({v, tp});
      std::sort(top.begin(), top.end(), [](const Candidate& a, const Candidate& b) { return a.value > b.value; });
      if (top.size() > kKeep) top.pop_back();
    }
  }
  double best = top.front().value;
  for (const auto& cand : top) {
    best = std::max(best, pattern_search(h, cand.point, 1.0 / grid_per_dim, autonomous));
  }
  return best;
}

double c_norm(const BaseHamiltonian& h, const ProfilePair& profiles, int grid_per_dim) {
  if (h.identically_zero()) return 0.0;
  return 2.0 * max_abs_hamiltonian(h, grid_per_dim) * max_abs_beta_prime_on_alpha(profiles);
}

DressedHamiltonian::DressedHamiltonian(BaseHamiltonianPtr base, ProfilePair profiles,
                                       std::shared_ptr<const TorusSymplecticStructure> torus)
    : DressedHamiltonian(base, profiles, torus, base ? c_norm(*base, profiles) : 0.0) {}

DressedHamiltonian::DressedHamiltonian(BaseHamiltonianPtr base, ProfilePair profiles,
                                       std::shared_ptr<const TorusSymplecticStructure> torus, double c)
    : base_(std::move(base)),
      profiles_(std::move(profiles)),
      structure_(base_ ? base_->dim() : 0, std::move(torus)),
      c_(c) {
  if (!base_) throw std::invalid_argument("dressed Hamiltonian needs a base Hamiltonian");
  if (!(c_ >= 0.0) || !std::isfinite(c_)) throw std::invalid_argument("C_H must be finite and >= 0");
  degenerate_ = base_->identically_zero() || c_ == 0.0;
}

double DressedHamiltonian::eval(double t, const Eigen::Ref<const Eigen::VectorXd>& p,
                                const Eigen::Ref<const Eigen::VectorXd>& /*z*/, double theta) const {
  const double a = profiles_.alpha.value(theta);
  return c_ * a + profiles_.beta.value(a) * base_->value(t, p);
}

double DressedHamiltonian::eval_state(double t, const Eigen::Ref<const Eigen::VectorXd>& x) const {
  return eval(t, x.head(base_dim()), x.segment(base_dim(), torus_dim() - 1), x[theta_index()]);
}

double DressedHamiltonian::g(double t, const Eigen::Ref<const Eigen::VectorXd>& p, double theta) const {
  return c_ + profiles_.beta.first(profiles_.alpha.value(theta)) * base_->value(t, p);
}

Eigen::VectorXd DressedHamiltonian::differential(double t, const Eigen::Ref<const Eigen::VectorXd>& x) const {
  const int bd = base_dim();
  const double theta = x[theta_index()];
  const double a = profiles_.alpha.value(theta);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(state_dim());
  out.head(bd) = profiles_.beta.value(a) * base_->gradient(t, x.head(bd));
  out[theta_index()] = g(t, x.head(bd), theta) * profiles_.alpha.first(theta);
  return out;
}

void DressedHamiltonian::vector_field(double t, const Eigen::Ref<const Eigen::VectorXd>& x,
                                      Eigen::Ref<Eigen::VectorXd> out) const {
  const int bd = base_dim();
  const double theta = x[theta_index()];
  const double a = profiles_.alpha.value(theta);
  const auto p = x.head(bd);
  hamiltonian_field(*base_, structure_.base_inverse(), t, p, out.head(bd));
  out.head(bd) *= profiles_.beta.value(a);
  const double speed = (c_ + profiles_.beta.first(a) * base_->value(t, p)) * profiles_.alpha.first(theta);
  out.tail(torus_dim()) = speed * torus().distinguished_vector_field();
}

Eigen::VectorXd DressedHamiltonian::vector_field(double t, const Eigen::Ref<const Eigen::VectorXd>& x) const {
  Eigen::VectorXd out(state_dim());
  vector_field(t, x, out);
  return out;
}

void DressedHamiltonian::vector_field_jacobian(double t, const Eigen::Ref<const Eigen::VectorXd>& x,
                                               Eigen::Ref<Eigen::MatrixXd> out) const {
  const int bd = base_dim();
  const int td = torus_dim();
  const int th = theta_index();
  const double theta = x[th];
  const auto p = x.head(bd);
  const auto& A = profiles_.alpha;
  const auto& B = profiles_.beta;
  const double a = A.value(theta);
  const double a1 = A.first(theta);
  const double a2 = A.second(theta);
  const double b0 = B.value(a);
  const double b1 = B.first(a);
  const double b2 = B.second(a);
  const double hv = base_->value(t, p);
  const Eigen::VectorXd grad = base_->gradient(t, p);
  const Eigen::MatrixXd hess = base_->hessian(t, p);
  const Eigen::MatrixXd& jinv = structure_.base_inverse();
  const Eigen::VectorXd& X = torus().distinguished_vector_field();
  const double gv = c_ + b1 * hv;

  out.setZero();
  // base rows: beta(alpha) X_H
  out.block(0, 0, bd, bd) = b0 * (jinv * hess);
  out.block(0, th, bd, 1) = (b1 * a1) * (jinv * grad);
  // torus rows: g alpha' X
  out.block(bd, 0, td, bd) = (a1 * b1) * (X * grad.transpose());
  out.block(bd, th, td, 1) = (b2 * a1 * a1 * hv + gv * a2) * X;
}

DressedHamiltonian DressedHamiltonian::iterate(int k) const {
  if (k <= 0) throw std::invalid_argument("iteration count must be >= 1, got " + std::to_string(k));
  return DressedHamiltonian(iterate_hamiltonian(base_, k), profiles_, torus_ptr(), k * c_);
}

std::vector<double> DressedHamiltonian::spectrum() const {
  std::vector<double> s{c_ * profiles_.alpha.value(profiles_.theta1), c_ * profiles_.alpha.value(profiles_.theta2)};
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  return s;
}

double constant_orbit_action(const DressedHamiltonian& fh, const Eigen::Ref<const Eigen::VectorXd>& x) {
  const Eigen::VectorXd state = x;
  auto integrand = [&](double t) { return fh.eval_state(t, state); };
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, 0.0, 1.0, 15, 1e-15);
}

}  // namespace pseudorot
