#pragma once

#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Core>
#include <Eigen/LU>

namespace pseudorot {

/// Coefficients (a_1, b_1, ..., a_{n-1}, b_{n-1}) of the irrational torus form
/// on T^{2n}. Stored interleaved in that order.
class IrrationalityVector {
 public:
  IrrationalityVector(int n, std::vector<double> entries);

  /// sqrt(2), sqrt(3), sqrt(5), ... : square roots of distinct primes.
  static IrrationalityVector sqrt_primes(int n);

  int n() const { return n_; }
  double a(int i) const { return entries_[2 * i]; }      // i in [0, n-1)
  double b(int i) const { return entries_[2 * i + 1]; }  // i in [0, n-1)
  const std::vector<double>& entries() const { return entries_; }

 private:
  int n_;
  std::vector<double> entries_;
};

/// A small integer relation q_0 + sum c_i x_i ~ 0 among {1, entries}.
struct IntegerRelation {
  long constant = 0;
  std::vector<long> coefficients;
  double residual = 0.0;
};

/// Height bound used by the rational-independence surrogate. Beyond two reals
/// a box of size 10^3 is guaranteed to contain relations below 1e-9
/// (pigeonhole), so the bound shrinks with the number of coefficients.
long default_relation_height(int n, double tol = 1e-9);

/// Meet-in-the-middle search for an integer relation with
/// 0 < max|c_i| <= height and |q_0 + sum c_i x_i| <= tol.
/// This is a bounded-height approximation of rational independence only.
std::optional<IntegerRelation> find_integer_relation(const IrrationalityVector& vec,
                                                     long height, double tol = 1e-9);

/// Matrix of the standard form sum dy_i ^ dx_i on R^{dim}, coordinates
/// (x_1, y_1, ..., x_m, y_m).
Eigen::MatrixXd standard_form_matrix(int dim);

/// Pfaffian of an antisymmetric matrix by expansion along the first row.
double pfaffian(const Eigen::MatrixXd& antisymmetric);

/// Convention: omega(u, v) = u^T Omega v, so omega(X, .) = -dH reads
/// Omega X = dH. This is the ordering that reproduces
/// X = (a_1, b_1, ..., a_{n-1}, b_{n-1}, 1, 0) for dH = dy_n.
class TorusSymplecticStructure {
 public:
  explicit TorusSymplecticStructure(IrrationalityVector vec);

  int n() const { return vec_.n(); }
  int dim() const { return 2 * vec_.n(); }
  /// Index of the distinguished coordinate theta = y_n.
  int theta_index() const { return dim() - 1; }
  const Eigen::MatrixXd& matrix() const { return omega_; }
  const Eigen::MatrixXd& inverse() const { return inverse_; }
  const IrrationalityVector& irrationality() const { return vec_; }

  Eigen::VectorXd hamiltonian_vector_field(const Eigen::Ref<const Eigen::VectorXd>& dH) const;
  /// Solution of omega(X, .) = -d(theta); cached at construction.
  const Eigen::VectorXd& distinguished_vector_field() const { return distinguished_; }

 private:
  IrrationalityVector vec_;
  Eigen::MatrixXd omega_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
  Eigen::MatrixXd inverse_;
  Eigen::VectorXd distinguished_;
};

/// omega (+) omega_irr on T^{2m} x T^{2n}; base coordinates come first.
class ProductSymplecticStructure {
 public:
  ProductSymplecticStructure(int base_dim, std::shared_ptr<const TorusSymplecticStructure> torus);

  int base_dim() const { return base_dim_; }
  int dim() const { return base_dim_ + torus_->dim(); }
  const TorusSymplecticStructure& torus() const { return *torus_; }
  std::shared_ptr<const TorusSymplecticStructure> torus_ptr() const { return torus_; }
  const Eigen::MatrixXd& matrix() const { return omega_; }
  const Eigen::MatrixXd& base_matrix() const { return base_; }
  const Eigen::MatrixXd& base_inverse() const { return base_inverse_; }

  Eigen::VectorXd hamiltonian_vector_field(const Eigen::Ref<const Eigen::VectorXd>& dH) const;
  /// X_H on the base factor only.
  Eigen::VectorXd base_vector_field(const Eigen::Ref<const Eigen::VectorXd>& dH) const;

 private:
  int base_dim_;
  std::shared_ptr<const TorusSymplecticStructure> torus_;
  Eigen::MatrixXd base_;
  Eigen::MatrixXd base_inverse_;
  Eigen::MatrixXd omega_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
};

/// || omega(X, .) + dH ||_inf for a constant form matrix.
double contraction_residual(const Eigen::MatrixXd& omega, const Eigen::VectorXd& X,
                            const Eigen::VectorXd& dH);

}  // namespace pseudorot
