#include "pseudorot/torus_symplectic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace pseudorot {

namespace {

std::vector<int> first_primes(std::size_t count) {
  std::vector<int> primes;
  for (int c = 2; primes.size() < count; ++c) {
    bool prime = true;
    for (int p : primes) {
      if (p * p > c) break;
      if (c % p == 0) {
        prime = false;
        break;
      }
    }
    if (prime) primes.push_back(c);
  }
  return primes;
}

struct HalfSum {
  double frac;
  std::size_t index;
};

// All coefficient tuples in [-h, h]^count, enumerated in mixed radix.
std::vector<long> decode(std::size_t index, std::size_t count, long h) {
  std::vector<long> c(count);
  const std::size_t radix = static_cast<std::size_t>(2 * h + 1);
  for (std::size_t i = 0; i < count; ++i) {
    c[i] = static_cast<long>(index % radix) - h;
    index /= radix;
  }
  return c;
}

std::vector<HalfSum> enumerate_half(const std::vector<double>& x, long h, double sign) {
  const std::size_t radix = static_cast<std::size_t>(2 * h + 1);
  std::size_t total = 1;
  for (std::size_t i = 0; i < x.size(); ++i) total *= radix;
  std::vector<HalfSum> out;
  out.reserve(total);
  for (std::size_t idx = 0; idx < total; ++idx) {
    auto c = decode(idx, x.size(), h);
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += static_cast<double>(c[i]) * x[i];
    s *= sign;
    out.push_back({s - std::floor(s), idx});
  }
  std::sort(out.begin(), out.end(), [](const HalfSum& a, const HalfSum& b) { return a.frac < b.frac; });
  return out;
}

}  // namespace

IrrationalityVector::IrrationalityVector(int n, std::vector<double> entries)
    : n_(n), entries_(std::move(entries)) {
  if (n_ < 2) throw std::invalid_argument("irrational torus needs n >= 2 (dimension 2n > 2)");
  if (entries_.size() != static_cast<std::size_t>(2 * n_ - 2)) {
    throw std::invalid_argument("irrationality vector for n=" + std::to_string(n_) + " needs " +
                                std::to_string(2 * n_ - 2) + " entries, got " +
                                std::to_string(entries_.size()));
  }
  for (double v : entries_) {
    if (!std::isfinite(v)) throw std::invalid_argument("irrationality vector has a non-finite entry");
  }
}

IrrationalityVector IrrationalityVector::sqrt_primes(int n) {
  if (n < 2) throw std::invalid_argument("irrational torus needs n >= 2 (dimension 2n > 2)");
  std::vector<double> entries;
  for (int p : first_primes(static_cast<std::size_t>(2 * n - 2))) entries.push_back(std::sqrt(double(p)));
  return IrrationalityVector(n, std::move(entries));
}

long default_relation_height(int n, double tol) {
  const double r = 2.0 * n - 2.0;
  const double h = 0.5 * std::pow(1e-2 / tol, 1.0 / r);
  return std::clamp(static_cast<long>(std::floor(h)), 1L, 1000L);
}

std::optional<IntegerRelation> find_integer_relation(const IrrationalityVector& vec, long height,
                                                     double tol) {
  if (height < 1) throw std::invalid_argument("relation height must be >= 1");
  const auto& x = vec.entries();
  const std::size_t split = (x.size() + 1) / 2;
  std::vector<double> left(x.begin(), x.begin() + static_cast<long>(split));
  std::vector<double> right(x.begin() + static_cast<long>(split), x.end());

  // frac(L) == frac(-R) (mod 1) within tol <=> L + R is within tol of an integer.
  const auto lhs = enumerate_half(left, height, 1.0);
  const auto rhs = enumerate_half(right, height, -1.0);
  auto is_trivial = [&](std::size_t li, std::size_t ri) {
    for (long c : decode(li, left.size(), height)) if (c != 0) return false;
    for (long c : decode(ri, right.size(), height)) if (c != 0) return false;
    return true;
  };

  auto try_pair = [&](const HalfSum& a, const HalfSum& b) -> std::optional<IntegerRelation> {
    double d = std::fabs(a.frac - b.frac);
    d = std::min(d, 1.0 - d);
    if (d > tol || is_trivial(a.index, b.index)) return std::nullopt;
    IntegerRelation rel;
    rel.coefficients = decode(a.index, left.size(), height);
    auto rc = decode(b.index, right.size(), height);
    rel.coefficients.insert(rel.coefficients.end(), rc.begin(), rc.end());
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += static_cast<double>(rel.coefficients[i]) * x[i];
    rel.constant = -std::lround(s);
    rel.residual = std::fabs(s + static_cast<double>(rel.constant));
    return rel;
  };

  // Two-pointer sweep over both sorted lists; windows of width tol, plus the
  // wrap-around between values near 0 and values near 1.
  std::size_t j = 0;
  for (const auto& a : lhs) {
    while (j < rhs.size() && rhs[j].frac < a.frac - tol) ++j;
    for (std::size_t k = j; k < rhs.size() && rhs[k].frac <= a.frac + tol; ++k) {
      if (auto rel = try_pair(a, rhs[k])) return rel;
    }
  }
  for (const auto& a : lhs) {
    if (a.frac > tol) break;
    for (auto it = rhs.rbegin(); it != rhs.rend() && it->frac >= 1.0 - tol; ++it) {
      if (auto rel = try_pair(a, *it)) return rel;
    }
  }
  for (const auto& b : rhs) {
    if (b.frac > tol) break;
    for (auto it = lhs.rbegin(); it != lhs.rend() && it->frac >= 1.0 - tol; ++it) {
      if (auto rel = try_pair(*it, b)) return rel;
    }
  }
  return std::nullopt;
}

Eigen::MatrixXd standard_form_matrix(int dim) {
  if (dim < 0 || dim % 2 != 0) throw std::invalid_argument("standard form needs an even dimension");
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim, dim);
  for (int i = 0; i < dim / 2; ++i) {
    // dy_i ^ dx_i : omega(e_y, e_x) = 1
    m(2 * i + 1, 2 * i) = 1.0;
    m(2 * i, 2 * i + 1) = -1.0;
  }
  return m;
}

double pfaffian(const Eigen::MatrixXd& a) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n) throw std::invalid_argument("pfaffian of a non-square matrix");
  if (n == 0) return 1.0;
  if (n % 2 != 0) return 0.0;
  if (n == 2) return a(0, 1);
  double sum = 0.0;
  for (Eigen::Index j = 1; j < n; ++j) {
    if (a(0, j) == 0.0) continue;
    Eigen::MatrixXd minor(n - 2, n - 2);
    Eigen::Index r = 0;
    for (Eigen::Index i = 1; i < n; ++i) {
      if (i == j) continue;
      Eigen::Index c = 0;
      for (Eigen::Index k = 1; k < n; ++k) {
        if (k == j) continue;
        minor(r, c++) = a(i, k);
      }
      ++r;
    }
    const double sign = (j % 2 == 1) ? 1.0 : -1.0;
    sum += sign * a(0, j) * pfaffian(minor);
  }
  return sum;
}

TorusSymplecticStructure::TorusSymplecticStructure(IrrationalityVector vec) : vec_(std::move(vec)) {
  const int n = vec_.n();
  const int d = 2 * n;
  auto x = [](int i) { return 2 * i; };      // x_{i+1}
  auto y = [](int i) { return 2 * i + 1; };  // y_{i+1}
  const int xn = x(n - 1);

  omega_ = standard_form_matrix(d);
  for (int i = 0; i < n - 1; ++i) {
    // a_i dx_n ^ dy_i
    omega_(xn, y(i)) += vec_.a(i);
    omega_(y(i), xn) -= vec_.a(i);
    // b_i dx_i ^ dx_n
    omega_(x(i), xn) += vec_.b(i);
    omega_(xn, x(i)) -= vec_.b(i);
  }

  lu_.compute(omega_);
  if (std::fabs(lu_.determinant()) <= 1e-12) {
    throw std::invalid_argument("irrational torus form is degenerate");
  }
  inverse_ = lu_.inverse();
  Eigen::VectorXd dtheta = Eigen::VectorXd::Zero(d);
  dtheta[theta_index()] = 1.0;
  distinguished_ = hamiltonian_vector_field(dtheta);
  // d theta(X) = -omega(X, X) = 0
  distinguished_[theta_index()] = 0.0;
}

Eigen::VectorXd TorusSymplecticStructure::hamiltonian_vector_field(
    const Eigen::Ref<const Eigen::VectorXd>& dH) const {
  if (dH.size() != dim()) {
    throw std::invalid_argument("covector has dimension " + std::to_string(dH.size()) +
                                ", torus form has " + std::to_string(dim()));
  }
  return lu_.solve(dH);
}

ProductSymplecticStructure::ProductSymplecticStructure(
    int base_dim, std::shared_ptr<const TorusSymplecticStructure> torus)
    : base_dim_(base_dim), torus_(std::move(torus)) {
  if (!torus_) throw std::invalid_argument("product structure needs a torus factor");
  base_ = standard_form_matrix(base_dim_);
  base_inverse_ = base_.inverse();
  const int d = dim();
  omega_ = Eigen::MatrixXd::Zero(d, d);
  omega_.topLeftCorner(base_dim_, base_dim_) = base_;
  omega_.bottomRightCorner(torus_->dim(), torus_->dim()) = torus_->matrix();
  lu_.compute(omega_);
}

Eigen::VectorXd ProductSymplecticStructure::hamiltonian_vector_field(
    const Eigen::Ref<const Eigen::VectorXd>& dH) const {
  if (dH.size() != dim()) {
    throw std::invalid_argument("covector has dimension " + std::to_string(dH.size()) +
                                ", product form has " + std::to_string(dim()));
  }
  return lu_.solve(dH);
}

Eigen::VectorXd ProductSymplecticStructure::base_vector_field(
    const Eigen::Ref<const Eigen::VectorXd>& dH) const {
  if (dH.size() != base_dim_) {
    throw std::invalid_argument("base covector has dimension " + std::to_string(dH.size()) +
                                ", base form has " + std::to_string(base_dim_));
  }
  return base_inverse_ * dH;
}

double contraction_residual(const Eigen::MatrixXd& omega, const Eigen::VectorXd& X,
                            const Eigen::VectorXd& dH) {
  // omega(X, v) = X^T Omega v, i.e. the covector Omega^T X.
  return (omega.transpose() * X + dH).cwiseAbs().maxCoeff();
}

}  // namespace pseudorot
