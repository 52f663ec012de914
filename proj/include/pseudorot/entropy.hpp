#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "pseudorot/construction.hpp"
#include "pseudorot/ode.hpp"
#include "pseudorot/persistence.hpp"

namespace pseudorot {

/// A self-map of a torus T^d in angle coordinates (images reduced mod 1).
using TorusMap = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct TangentStep {
  Eigen::VectorXd image;
  Eigen::MatrixXd jacobian;
};

/// A map together with its derivative at the input point.
using TangentMap = std::function<TangentStep(const Eigen::VectorXd&)>;

// Reference maps with known entropy.
TangentMap rotation_map(const Eigen::VectorXd& shift);
TangentMap cat_map();       // (x, y) -> (2x + y, x + y)
TangentMap doubling_map();  // x -> 2x

/// Drops the derivative of a tangent map.
TorusMap without_tangent(TangentMap f);

/// phi_H on the base torus with its linearization.
TangentMap base_tangent_map(BaseHamiltonianPtr h, const ode::Options& options);
/// phi_{F(H)} on the product with its linearization (monodromy over [0, 1]).
TangentMap dressed_tangent_map(const DressedHamiltonian& fh, const ode::Options& options);

/// phi_H on the base torus.
TorusMap base_map(BaseHamiltonianPtr h, const ode::Options& options);
/// phi_{F(H)} on the full product state (p, z, theta).
TorusMap dressed_map(const DressedHamiltonian& fh, const ode::Options& options);
/// phi_{F(H)} with step-size control restricted to the base block, so the
/// base components follow the same step sequence as base_map with the same
/// options.
TorusMap dressed_map_base_controlled(const DressedHamiltonian& fh, const ode::Options& options);
/// p -> (p, z0, eta): the slice embedding as a state vector.
std::vector<Eigen::VectorXd> embed_grid(const std::vector<Eigen::VectorXd>& base_points, const Eigen::VectorXd& z0,
                                        double eta);

struct LyapunovResult {
  double value = 0.0;
  int n = 0;
  std::vector<double> running;  // (1/j) sum log growth, j = 1..n
};

/// Largest finite-time Lyapunov exponent: the tangent vector v0 (a fixed
/// generic unit vector when empty) is pushed forward and renormalized every
/// step. Throws std::overflow_error on a non-finite tangent norm and
/// std::invalid_argument for n < 100.
LyapunovResult lyapunov_max(const TangentMap& f, const Eigen::VectorXd& x0, int n,
                            Eigen::VectorXd v0 = Eigen::VectorXd());

struct SeparatedOptions {
  double epsilon = 0.01;
  int n_max = 12;
  /// Coordinates 0..metric_dims-1 define the torus distance (max metric);
  /// 0 means every coordinate.
  int metric_dims = 0;
  /// Fit window for the plateau slope: n from fit_from (0 means 2) up to
  /// n_max, stopping at the first count above saturation * grid size.
  int fit_from = 0;
  double saturation = 0.25;
};

struct SeparatedResult {
  std::vector<std::size_t> counts;  // N(n, eps), n = 1..n_max
  std::vector<double> rates;        // (1/n) log N(n, eps)
  double plateau = 0.0;             // least-squares slope of log N over the fit window
  int fit_from = 0;
  int fit_to = 0;
  std::size_t grid_size = 0;
};

/// Greedy maximal (n, eps)-separated subsets of `grid` for n = 1..n_max,
/// scanning the grid in order. When a fresh scan at window n finds fewer
/// points than window n - 1, the previous subset (still separated) is
/// extended instead, so counts are nondecreasing in n. Candidate
/// conflicts are found by hashing the orbit's first and last points on
/// cells of side >= eps.
SeparatedResult separated_entropy(const TorusMap& f, const std::vector<Eigen::VectorXd>& grid,
                                  const SeparatedOptions& options);

/// Uniform grid of per_dim^d points (i + 1/2) / per_dim on T^d.
std::vector<Eigen::VectorXd> uniform_grid(int dims, int per_dim);

/// Proxy for barcode entropy: max over k in [ceil(K/2), K] of
/// (1/k) log max(1, #finite bars of B_k longer than eps). bars[k-1] is B_k.
double barcode_entropy(const std::vector<Barcode>& bars, double epsilon);

enum class EntropyMethod { Lyapunov, Separated };
std::string to_string(EntropyMethod m);

/// Aggregate estimate: value is the mean over seeds, band the min/max.
struct EntropyEstimate {
  EntropyMethod method = EntropyMethod::Lyapunov;
  double value = 0.0;
  int window = 0;
  double epsilon = 0.0;  // separated only
  std::size_t samples = 0;
  double band_min = 0.0;
  double band_max = 0.0;
  std::vector<std::uint64_t> seeds;
  std::vector<double> per_seed;
};

/// Draws an initial point from a seeded generator.
using PointSampler = std::function<Eigen::VectorXd(std::mt19937_64&)>;

/// Uniform sampler on T^d.
PointSampler uniform_sampler(int dims);

/// lyapunov_max from one sampled initial point per seed; seeds run in
/// parallel and are aggregated in the given order.
EntropyEstimate lyapunov_estimate(const TangentMap& f, const PointSampler& sampler, int n,
                                  const std::vector<std::uint64_t>& seeds, const Eigen::VectorXd& v0 = Eigen::VectorXd());

}  // namespace pseudorot
