#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "pseudorot/base_systems.hpp"
#include "pseudorot/flow.hpp"

using namespace pseudorot;

namespace {

DressedHamiltonian dressed(const std::string& id, std::vector<double> params) {
  return DressedHamiltonian(catalog_get(id, params), make_sin_profiles(),
                            std::make_shared<const TorusSymplecticStructure>(IrrationalityVector::sqrt_primes(2)));
}

ode::Options opts(double tol = 1e-10) {
  ode::Options o;
  o.tol = tol;
  return o;
}

ProductPoint random_point(std::mt19937_64& rng, double theta) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ProductPoint x;
  x.p = Eigen::Vector2d(u(rng), u(rng));
  x.z = Eigen::Vector3d(u(rng), u(rng), u(rng));
  x.theta = theta;
  return x;
}

double torus_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  double d = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) d = std::max(d, std::fabs(std::remainder(a[i] - b[i], 1.0)));
  return d;
}

}  // namespace

TEST_CASE("product points round-trip through the state layout") {
  std::mt19937_64 rng(1);
  const ProductPoint x = random_point(rng, 0.3);
  const ProductPoint y = ProductPoint::from_state(x.state(), 2);
  CHECK(y.state() == x.state());
  CHECK(x.dim() == 6);
  const ProductPoint s = embed_slice(x.p, x.z, 0.04);
  CHECK(s.theta == 0.04);
  CHECK(s.p == x.p);
}

TEST_CASE("flow tolerance range") {
  CHECK_NOTHROW(validate_flow_tolerance(1e-10));
  CHECK_THROWS_AS(validate_flow_tolerance(1e-2), std::invalid_argument);
  CHECK_THROWS_AS(validate_flow_tolerance(1e-15), std::invalid_argument);
}

TEST_CASE("trajectories on a critical level are constant") {
  const DressedHamiltonian fh = dressed("kicked-rotor-smooth", {6.0});
  std::mt19937_64 rng(2);
  const ProductPoint x = random_point(rng, fh.profiles().theta1);
  const Trajectory tr = integrate_dressed(fh, x, 0.0, 3.0, opts(), 30);
  REQUIRE(tr.states.size() == 31);
  for (const auto& s : tr.states) CHECK((s - x.state()).cwiseAbs().maxCoeff() <= 1e-13);
  CHECK(tr.max_theta_drift == 0.0);
}

TEST_CASE("theta is conserved along every trajectory") {
  const DressedHamiltonian fh = dressed("kicked-rotor-smooth", {6.0});
  std::mt19937_64 rng(3);
  for (int i = 0; i < 10; ++i) {
    const ProductPoint x = random_point(rng, 0.1 * i + 0.03);
    const Trajectory tr = integrate_dressed(fh, x, 0.0, 1.0, opts(), 20);
    CHECK(tr.max_theta_drift <= 1e-12);
  }
}

TEST_CASE("F(H) is conserved for a constant Hamiltonian") {
  const DressedHamiltonian fh = dressed("constant", {1.0});
  std::mt19937_64 rng(4);
  for (int i = 0; i < 10; ++i) {
    const ProductPoint x = random_point(rng, 0.1 * i + 0.05);
    const Trajectory tr = integrate_dressed(fh, x, 0.0, 1.0, opts(1e-11), 10);
    const double e0 = fh.eval_state(0.0, x.state());
    for (std::size_t j = 0; j < tr.states.size(); ++j) {
      CHECK(std::fabs(fh.eval_state(tr.times[j], tr.states[j]) - e0) <= 1e-9);
    }
  }
}

TEST_CASE("composed time-one maps agree with the reparametrized iterate") {
  const double tol = 1e-10;
  for (const auto& [id, params] : std::vector<std::pair<std::string, std::vector<double>>>{
           {"constant", {1.0}},
           {"small-autonomous", {1e-3}},
           {"trig-series", {0.05, 1, 0, 1, 0.3, 0.03, 0, 1, 1, 0.1}},
           {"kicked-rotor-smooth", {0.3}}}) {
    const DressedHamiltonian fh = dressed(id, params);
    std::mt19937_64 rng(5);
    for (int k : {2, 3}) {
      const DressedHamiltonian it = fh.iterate(k);
      for (int i = 0; i < 30; ++i) {
        const ProductPoint x = random_point(rng, (i + 0.5) / 30);
        const ProductPoint a = time_k_map(fh, x, k, opts(tol));
        const ProductPoint b = time_k_map(it, x, 1, opts(tol));
        CHECK(torus_distance(a.state(), b.state()) <= 1e2 * tol);
      }
    }
  }
}

TEST_CASE("composition and reparametrization agree typically for the chaotic kicked rotor") {
  const DressedHamiltonian fh = dressed("kicked-rotor-smooth", {6.0});
  const double tol = 1e-10;
  std::mt19937_64 rng(5);
  for (int k : {2, 3}) {
    const DressedHamiltonian it = fh.iterate(k);
    std::vector<double> d;
    for (int i = 0; i < 40; ++i) {
      const ProductPoint x = random_point(rng, (i + 0.5) / 40);
      d.push_back(torus_distance(time_k_map(fh, x, k, opts(tol)).state(), time_k_map(it, x, 1, opts(tol)).state()));
    }
    std::nth_element(d.begin(), d.begin() + 20, d.end());
    CHECK(d[20] <= 1e2 * tol);
  }
}

TEST_CASE("points on the second critical level stay fixed") {
  const DressedHamiltonian fh = dressed("kicked-rotor-smooth", {6.0});
  std::mt19937_64 rng(6);
  const ProductPoint x = random_point(rng, fh.profiles().theta2);
  for (int k = 1; k <= 10; ++k) {
    CHECK(torus_distance(time_k_map(fh, x, k, opts()).state(), x.state()) <= 1e-13);
  }
}

TEST_CASE("monodromy is symplectic and trivial for H = 0") {
  const DressedHamiltonian fh = dressed("kicked-rotor-smooth", {6.0});
  std::mt19937_64 rng(7);
  for (int k : {1, 2}) {
    const Monodromy m = monodromy(fh, random_point(rng, 0.13), k, opts());
    CHECK(m.symplectic_residual <= 1e-6);
  }
  const DressedHamiltonian zero = dressed("constant", {0.0});
  const Monodromy m0 = monodromy(zero, random_point(rng, 0.4), 3, opts());
  CHECK(m0.matrix == Eigen::MatrixXd::Identity(6, 6));
}

TEST_CASE("monodromy matches finite differences of the flow") {
  const DressedHamiltonian fh = dressed("kicked-rotor-smooth", {6.0});
  std::mt19937_64 rng(8);
  const ProductPoint x = random_point(rng, 0.31);
  const Monodromy m = monodromy(fh, x, 1, opts(1e-12));
  const double h = 1e-6;
  for (int j = 0; j < 6; ++j) {
    Eigen::VectorXd a = x.state();
    Eigen::VectorXd b = x.state();
    a[j] += h;
    b[j] -= h;
    const Eigen::VectorXd col =
        (flow_lifted(fh, a, 0.0, 1.0, opts(1e-12)) - flow_lifted(fh, b, 0.0, 1.0, opts(1e-12))) / (2 * h);
    CHECK((col - m.matrix.col(j)).cwiseAbs().maxCoeff() <= 1e-4 * std::max(1.0, m.matrix.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("fixed-set scan separates critical levels from the rest") {
  const DressedHamiltonian fh = dressed("kicked-rotor-smooth", {6.0});
  FixedSetScanOptions scan;
  scan.theta_grid = 8;
  scan.samples_per_theta = 3;
  scan.ks = {1, 2};
  const FixedSetScanReport r = fixed_set_scan(fh, scan, opts());
  CHECK(r.pass);
  CHECK(r.on_level_count == 6);
  CHECK(r.on_level_fixed == 6);
  CHECK(r.max_on_level <= r.fixed_threshold);
  CHECK(r.min_off_level > 1e-2);
  CHECK(r.on_level_histogram.size() == 20);
  std::size_t on = 0;
  std::size_t off = 0;
  for (auto c : r.on_level_histogram) on += c;
  for (auto c : r.off_level_histogram) off += c;
  CHECK(on == r.on_level_count);
  CHECK(off == r.samples.size() - r.on_level_count);
}

TEST_CASE("fixed-set scan is deterministic for a fixed seed") {
  const DressedHamiltonian fh = dressed("constant", {1.0});
  FixedSetScanOptions scan;
  scan.theta_grid = 6;
  scan.samples_per_theta = 2;
  scan.ks = {1};
  const auto a = fixed_set_scan(fh, scan, opts());
  const auto b = fixed_set_scan(fh, scan, opts());
  REQUIRE(a.samples.size() == b.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i) CHECK(a.samples[i].displacement == b.samples[i].displacement);
}

TEST_CASE("H = 0 scan is flagged degenerate with everything fixed") {
  const DressedHamiltonian fh = dressed("constant", {0.0});
  FixedSetScanOptions scan;
  scan.theta_grid = 5;
  scan.samples_per_theta = 2;
  scan.ks = {1, 2};
  const auto r = fixed_set_scan(fh, scan, opts());
  CHECK(r.degenerate);
  for (const auto& s : r.samples) CHECK(s.max_displacement == 0.0);
}

TEST_CASE("torus displacement follows the integral of g") {
  const DressedHamiltonian fh = dressed("kicked-rotor-smooth", {6.0});
  std::mt19937_64 rng(9);
  for (int k : {1, 2}) {
    const DisplacementCheck d = displacement_formula_check(fh, random_point(rng, 0.17), k, opts());
    CHECK(d.relative_residual <= 1e-8);
    CHECK(d.g_bar > 0.0);
  }
}

TEST_CASE("Morse-Bott kernel on the critical levels") {
  const DressedHamiltonian fh = dressed("kicked-rotor-smooth", {6.0});
  std::mt19937_64 rng(10);
  for (int k = 1; k <= 3; ++k) {
    for (double th : {fh.profiles().theta1, fh.profiles().theta2}) {
      const MorseBottResult r = morse_bott_rank(fh, random_point(rng, th), k, opts());
      CHECK(r.kernel_dim == 5);
      CHECK(r.rank == 1);
      CHECK(r.gap >= 1e3);
      CHECK(r.coefficient_relative_error <= 1e-6);
      CHECK(r.angle_to_x <= 1e-6);
      CHECK(r.base_block_norm <= 1e-8);
    }
  }
}

TEST_CASE("Morse-Bott analysis for H = 0 and off-level points") {
  const DressedHamiltonian zero = dressed("constant", {0.0});
  std::mt19937_64 rng(11);
  const MorseBottResult r = morse_bott_rank(zero, random_point(rng, 0.25), 1, opts());
  CHECK(r.kernel_dim == 6);
  CHECK(r.degenerate);
  const DressedHamiltonian fh = dressed("kicked-rotor-smooth", {6.0});
  CHECK_THROWS_AS(morse_bott_rank(fh, random_point(rng, 0.1), 1, opts()), std::invalid_argument);
}

TEST_CASE("slice dynamics is semiconjugate to the base map") {
  std::mt19937_64 rng(12);
  for (const char* id : {"constant", "kicked-rotor-smooth"}) {
    const DressedHamiltonian fh = dressed(id, std::string(id) == "constant" ? std::vector<double>{1.0}
                                                                          : std::vector<double>{6.0});
    for (int k : {1, 2}) {
      const ProductPoint x = random_point(rng, 0.0);
      const SemiconjugacyResult r = semiconjugacy(fh, x.p, x.z, k, opts());
      CHECK(r.residual <= 1e-10);
      CHECK(r.step_residual <= 1e-6);
    }
  }
}
