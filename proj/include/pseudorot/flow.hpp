#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "pseudorot/construction.hpp"
#include "pseudorot/ode.hpp"

namespace pseudorot {

/// A point (p, z, theta) of T^{2m} x T^{2n-1} x R/Z, coordinates in [0, 1).
struct ProductPoint {
  Eigen::VectorXd p;
  Eigen::VectorXd z;
  double theta = 0.0;

  static ProductPoint from_state(const Eigen::Ref<const Eigen::VectorXd>& x, int base_dim);
  Eigen::VectorXd state() const;
  int dim() const { return static_cast<int>(p.size() + z.size() + 1); }
};

/// iota_{(z0, eta)}(p) = (p, z0, eta).
ProductPoint embed_slice(const Eigen::Ref<const Eigen::VectorXd>& p, const Eigen::Ref<const Eigen::VectorXd>& z0,
                         double eta);

/// Checks the tolerance range accepted by the flow routines ([1e-13, 1e-3]).
void validate_flow_tolerance(double tol);

struct Trajectory {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> states;  // lifted coordinates
  double max_theta_drift = 0.0;
};

/// Samples the flow of F(H) on [t0, t1] at `samples` + 1 uniform times.
Trajectory integrate_dressed(const DressedHamiltonian& fh, const ProductPoint& x0, double t0, double t1,
                             const ode::Options& options, int samples = 100);

/// Lifted state after flowing for `duration` from time t0.
Eigen::VectorXd flow_lifted(const DressedHamiltonian& fh, const Eigen::Ref<const Eigen::VectorXd>& x0, double t0,
                            double duration, const ode::Options& options);

/// phi^k by composing k time-one maps, reducing mod 1 in between.
ProductPoint time_k_map(const DressedHamiltonian& fh, const ProductPoint& x0, int k, const ode::Options& options);

struct Monodromy {
  int k = 1;
  Eigen::MatrixXd matrix;
  ProductPoint basepoint;
  ProductPoint image;
  double symplectic_residual = 0.0;  // || M^T Omega M - Omega ||_inf
};

/// D phi^k at x0 from the variational equation M' = DX(x(t)) M over [0, k].
Monodromy monodromy(const DressedHamiltonian& fh, const ProductPoint& x0, int k, const ode::Options& options);

struct FixedSetScanOptions {
  int theta_grid = 100;
  int samples_per_theta = 100;
  std::vector<int> ks{1, 2, 3, 4, 5, 6, 7, 8};
  std::uint64_t seed = 1;
  /// displacement <= fixed_factor * tol counts as fixed
  double fixed_factor = 1e3;
  double moved_threshold = 1e-2;
  double alpha_prime_min = 0.1;
  double required_moved_fraction = 0.99;
};

struct ScanSample {
  ProductPoint point;
  bool on_level = false;
  double alpha_prime = 0.0;
  std::vector<double> displacement;  // one per entry of ks
  double min_displacement = 0.0;
  double max_displacement = 0.0;
};

struct FixedSetScanReport {
  std::vector<ScanSample> samples;
  std::vector<int> ks;
  double fixed_threshold = 0.0;
  double max_on_level = 0.0;
  double min_off_level = 0.0;
  std::size_t on_level_count = 0;
  std::size_t on_level_fixed = 0;
  std::size_t off_level_checked = 0;  // |alpha'| above alpha_prime_min
  std::size_t off_level_moved = 0;
  double moved_fraction = 0.0;
  /// log10-binned counts (bins [-17, 1) in unit steps, under/overflow at the ends)
  std::vector<std::size_t> on_level_histogram;
  std::vector<std::size_t> off_level_histogram;
  bool degenerate = false;
  bool pass = false;
};

/// Displacement of phi^k on a theta grid (plus the two critical levels)
/// times random (p, z). Samples are processed in parallel; the report is in
/// grid order.
FixedSetScanReport fixed_set_scan(const DressedHamiltonian& fh, const FixedSetScanOptions& scan,
                                  const ode::Options& options);

struct DisplacementCheck {
  Eigen::VectorXd lifted_z_displacement;
  Eigen::VectorXd predicted;  // alpha'(theta) * int_0^k g dt * pi_* X
  double g_bar = 0.0;         // int_0^k g along the orbit
  double relative_residual = 0.0;
};

/// z(k) - z(0) against the prediction from the time integral of g along the
/// orbit, integrated as an extra component of the flow.
DisplacementCheck displacement_formula_check(const DressedHamiltonian& fh, const ProductPoint& x0, int k,
                                             const ode::Options& options);

struct MorseBottResult {
  int kernel_dim = 0;
  int rank = 0;
  double gap = 0.0;  // sigma_rank / sigma_{rank+1}; +inf when the next one is exactly 0
  std::vector<double> singular_values;
  double displacement = 0.0;
  /// (M - I) d/dtheta: coefficient along X, its prediction g_bar * alpha''(theta_i),
  /// base-block size and angle to pi_* X.
  double theta_coefficient = 0.0;
  double predicted_coefficient = 0.0;
  double coefficient_relative_error = 0.0;
  double base_block_norm = 0.0;
  double angle_to_x = 0.0;
  double symplectic_residual = 0.0;
  bool degenerate = false;
};

/// Singular values of D phi^k - I at a point on a critical level. Throws
/// std::invalid_argument if the point is not fixed (displacement above
/// 1e3 * tol).
MorseBottResult morse_bott_rank(const DressedHamiltonian& fh, const ProductPoint& y, int k,
                                const ode::Options& options, double kernel_threshold = 1e-5);

struct SemiconjugacyResult {
  /// torus distance between pi_M(phi^k_F(p, z0, eta)) and phi^k_H(p), both
  /// sides discretized on the same base step sequence at tol / 10
  double residual = 0.0;
  /// max_j dist(pi_M phi_F(x_j), phi_H(pi_M x_j)) along the dressed orbit,
  /// every map integrated independently with full error control
  double step_residual = 0.0;
};

SemiconjugacyResult semiconjugacy(const DressedHamiltonian& fh, const Eigen::Ref<const Eigen::VectorXd>& p,
                                  const Eigen::Ref<const Eigen::VectorXd>& z0, int k, const ode::Options& options);

/// Residual part of semiconjugacy().
double semiconjugacy_residual(const DressedHamiltonian& fh, const Eigen::Ref<const Eigen::VectorXd>& p,
                              const Eigen::Ref<const Eigen::VectorXd>& z0, int k, const ode::Options& options);

}  // namespace pseudorot
