#include <doctest.h>

#include <cmath>
#include <random>

#include "pseudorot/base_systems.hpp"
#include "pseudorot/construction.hpp"
#include "pseudorot/profiles.hpp"

using namespace pseudorot;

namespace {

constexpr double kPi = 3.14159265358979323846;

std::shared_ptr<const TorusSymplecticStructure> torus2() {
  return std::make_shared<const TorusSymplecticStructure>(IrrationalityVector::sqrt_primes(2));
}

DressedHamiltonian dressed(const std::string& id, std::vector<double> params) {
  return DressedHamiltonian(catalog_get(id, params), make_sin_profiles(), torus2());
}

Eigen::VectorXd random_state(std::mt19937_64& rng, int d) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::VectorXd x(d);
  for (int i = 0; i < d; ++i) x[i] = u(rng);
  return x;
}

}  // namespace

TEST_CASE("sin profiles: critical angles and eta") {
  const ProfilePair p = make_sin_profiles();
  CHECK(p.theta1 == 0.25);
  CHECK(p.theta2 == 0.75);
  CHECK(std::fabs(std::sin(2 * kPi * p.eta) - 0.25) <= 1e-14);
  CHECK(p.eta > 0.0);
  CHECK(p.eta < 0.25);
  CHECK(p.eta == doctest::Approx(0.040215).epsilon(1e-5));
  CHECK(std::fabs(p.beta.value(p.alpha.value(p.theta1))) <= 1e-12);
  CHECK(std::fabs(p.beta.value(p.alpha.value(p.theta2))) <= 1e-12);
  CHECK(std::fabs(p.beta.value(p.alpha.value(p.eta)) - 1.0) <= 1e-12);
  CHECK_NOTHROW(validate_profiles(p));
}

TEST_CASE("profile validation rejects broken ingredients") {
  ProfilePair p = make_sin_profiles();
  p.eta = 0.1;
  CHECK_THROWS_AS(validate_profiles(p), std::invalid_argument);
  ProfilePair q = make_sin_profiles();
  q.theta1 = 0.3;
  CHECK_THROWS_AS(validate_profiles(q), std::invalid_argument);
  CHECK_THROWS(make_profiles("unknown", {}));
}

TEST_CASE("C for a constant Hamiltonian is 4 pi C0") {
  for (double c0 : {1.0, 0.5, 2.5}) {
    CHECK(c_norm(*catalog_get("constant", {c0}), make_sin_profiles()) == doctest::Approx(4 * kPi * c0).epsilon(1e-12));
  }
  CHECK(c_norm(*catalog_get("constant", {0.0}), make_sin_profiles()) == 0.0);
}

TEST_CASE("C for cos(2 pi x) is 4 pi") {
  const auto h = catalog_get("trig-series", {1.0, 1, 0, 0, 0.0});
  CHECK(std::fabs(c_norm(*h, make_sin_profiles()) - 4 * kPi) <= 1e-6);
  // off-grid maximum: phase-shifted mode, refinement must find max |H| = 1
  const auto shifted = catalog_get("trig-series", {1.0, 1, 1, 1, 0.123});
  CHECK(std::fabs(max_abs_hamiltonian(*shifted) - 1.0) <= 1e-9);
}

TEST_CASE("degenerate dressing of H = 0") {
  const DressedHamiltonian fh = dressed("constant", {0.0});
  CHECK(fh.degenerate());
  CHECK(fh.c() == 0.0);
  CHECK(fh.spectrum() == std::vector<double>{0.0});
  std::mt19937_64 rng(1);
  for (int i = 0; i < 100; ++i) {
    const Eigen::VectorXd x = random_state(rng, 6);
    CHECK(fh.eval_state(0.3, x) == 0.0);
    CHECK(fh.g(0.3, x.head(2), x[5]) == 0.0);
  }
}

TEST_CASE("dressed Hamiltonian on the critical levels and the slice") {
  const DressedHamiltonian fh = dressed("kicked-rotor-smooth", {6.0});
  const auto& p = fh.profiles();
  std::mt19937_64 rng(2);
  for (int i = 0; i < 200; ++i) {
    const Eigen::VectorXd x = random_state(rng, 6);
    const double t = x[0];
    const Eigen::VectorXd pt = x.head(2);
    const Eigen::VectorXd z = x.segment(2, 3);
    CHECK(fh.eval(t, pt, z, p.theta1) == doctest::Approx(fh.c() * p.alpha.value(p.theta1)).epsilon(1e-15));
    CHECK(fh.eval(t, pt, z, p.theta2) == doctest::Approx(fh.c() * p.alpha.value(p.theta2)).epsilon(1e-15));
    const double at_eta = fh.c() * p.alpha.value(p.eta) + fh.base().value(t, pt);
    CHECK(std::fabs(fh.eval(t, pt, z, p.eta) - at_eta) <= 1e-12);
    // z independence
    const Eigen::VectorXd z2 = random_state(rng, 3);
    CHECK(fh.eval(t, pt, z, x[5]) == fh.eval(t, pt, z2, x[5]));
  }
}

TEST_CASE("g at theta_1 for a constant Hamiltonian is 6 pi C0") {
  for (double c0 : {1.0, 0.3}) {
    const DressedHamiltonian fh = dressed("constant", {c0});
    CHECK(fh.g(0.2, Eigen::Vector2d(0.1, 0.4), 0.25) == doctest::Approx(6 * kPi * c0).epsilon(1e-12));
  }
}

TEST_CASE("g stays above C/2 on random samples") {
  for (const auto& [id, params] : std::vector<std::pair<std::string, std::vector<double>>>{
           {"kicked-rotor-smooth", {6.0}}, {"constant", {1.0}}, {"trig-series", {1.0, 1, 2, 1, 0.4, 0.5, 0, 1, 0, 0}}}) {
    const DressedHamiltonian fh = dressed(id, params);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double min_g = 1e300;
    for (int i = 0; i < 100000; ++i) {
      const Eigen::Vector2d p(u(rng), u(rng));
      min_g = std::min(min_g, fh.g(u(rng), p, u(rng)));
    }
    CHECK(min_g >= fh.c() / 2);
  }
}

TEST_CASE("dressed vector field: zero on critical levels, no theta component, X_H on the slice") {
  const DressedHamiltonian fh = dressed("kicked-rotor-smooth", {6.0});
  const auto& prof = fh.profiles();
  std::mt19937_64 rng(4);
  for (int i = 0; i < 500; ++i) {
    Eigen::VectorXd x = random_state(rng, 6);
    const double t = x[0];
    CHECK(fh.vector_field(t, x)[5] == 0.0);
    x[5] = prof.theta1;
    CHECK(fh.vector_field(t, x).cwiseAbs().maxCoeff() <= 1e-13);
    x[5] = prof.theta2;
    CHECK(fh.vector_field(t, x).cwiseAbs().maxCoeff() <= 1e-13);
    x[5] = prof.eta;
    const Eigen::VectorXd v = fh.vector_field(t, x);
    const Eigen::VectorXd dh = fh.base().gradient(t, x.head(2));
    CHECK(v[0] == dh[1]);
    CHECK(v[1] == -dh[0]);
    const double expected_scale = fh.g(t, x.head(2), prof.eta) * prof.alpha.first(prof.eta);
    const Eigen::VectorXd expected_torus = expected_scale * fh.torus().distinguished_vector_field();
    CHECK((v.segment(2, 4) - expected_torus).cwiseAbs().maxCoeff() <= 1e-12 * std::fabs(expected_scale) * 2);
  }
}

TEST_CASE("dressed vector field is the Hamiltonian field of the differential") {
  const DressedHamiltonian fh = dressed("kicked-rotor-smooth", {6.0});
  std::mt19937_64 rng(5);
  for (int i = 0; i < 200; ++i) {
    const Eigen::VectorXd x = random_state(rng, 6);
    const Eigen::VectorXd df = fh.differential(0.37, x);
    const Eigen::VectorXd expected = fh.structure().hamiltonian_vector_field(df);
    const Eigen::VectorXd v = fh.vector_field(0.37, x);
    CHECK((v - expected).cwiseAbs().maxCoeff() <= 1e-10 * std::max(1.0, v.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("differential matches central differences with second-order Richardson ratio") {
  const DressedHamiltonian fh = dressed("kicked-rotor-smooth", {6.0});
  std::mt19937_64 rng(6);
  int checked = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::VectorXd x = random_state(rng, 6);
    const double t = 0.41;
    const Eigen::VectorXd df = fh.differential(t, x);
    for (int j : {0, 1, 5}) {
      auto fd = [&](double h) {
        Eigen::VectorXd xp = x;
        Eigen::VectorXd xm = x;
        xp[j] += h;
        xm[j] -= h;
        return (fh.eval_state(t, xp) - fh.eval_state(t, xm)) / (2 * h);
      };
      const double e4 = std::fabs(fd(1e-4) - df[j]);
      const double e5 = std::fabs(fd(1e-5) - df[j]);
      // skip components whose third derivative nearly vanishes
      if (e4 < 1e-7) continue;
      ++checked;
      CHECK(e4 / e5 == doctest::Approx(100.0).epsilon(0.2));
    }
    for (int j : {2, 3, 4}) CHECK(df[j] == 0.0);
  }
  CHECK(checked >= 20);
}

TEST_CASE("vector field Jacobian matches finite differences") {
  const DressedHamiltonian fh = dressed("kicked-rotor-smooth", {6.0});
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::VectorXd x = random_state(rng, 6);
    Eigen::MatrixXd jac(6, 6);
    fh.vector_field_jacobian(0.6, x, jac);
    const double h = 1e-6;
    for (int j = 0; j < 6; ++j) {
      Eigen::VectorXd xp = x;
      Eigen::VectorXd xm = x;
      xp[j] += h;
      xm[j] -= h;
      const Eigen::VectorXd col = (fh.vector_field(0.6, xp) - fh.vector_field(0.6, xm)) / (2 * h);
      CHECK((col - jac.col(j)).cwiseAbs().maxCoeff() <= 1e-5 * std::max(1.0, jac.cwiseAbs().maxCoeff()));
    }
  }
}

TEST_CASE("iteration: k = 1 is the identity and C scales by k") {
  const DressedHamiltonian fh = dressed("kicked-rotor-smooth", {6.0});
  CHECK(iterate_hamiltonian(fh.base_ptr(), 1) == fh.base_ptr());
  CHECK_THROWS_AS(iterate_hamiltonian(fh.base_ptr(), 0), std::invalid_argument);
  CHECK_THROWS_AS(fh.iterate(-1), std::invalid_argument);
  for (int k : {2, 3, 5}) {
    const DressedHamiltonian it = fh.iterate(k);
    CHECK(it.c() == k * fh.c());
    const double recomputed = c_norm(it.base(), it.profiles());
    CHECK(std::fabs(recomputed - k * fh.c()) <= 1e-6 * k * fh.c());
  }
}

TEST_CASE("F(H^#k) agrees with F(H)^#k pointwise") {
  const DressedHamiltonian fh = dressed("kicked-rotor-smooth", {6.0});
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k : {2, 3, 5}) {
    const DressedHamiltonian it = fh.iterate(k);
    double worst = 0.0;
    for (int i = 0; i < 10000; ++i) {
      const double t = u(rng);
      const Eigen::VectorXd x = random_state(rng, 6);
      worst = std::max(worst, std::fabs(it.eval_state(t, x) - k * fh.eval_state(k * t, x)));
    }
    CHECK(worst <= 1e-12);
  }
}

TEST_CASE("spectrum is {-4 pi, 4 pi} for max |H| = 1") {
  for (const auto& [id, params] : std::vector<std::pair<std::string, std::vector<double>>>{
           {"constant", {1.0}}, {"trig-series", {1.0, 1, 0, 0, 0.0}}, {"constant", {-1.0}}}) {
    const auto spec = dressed(id, params).spectrum();
    REQUIRE(spec.size() == 2);
    CHECK(std::fabs(spec[0] + 4 * kPi) <= 1e-6);
    CHECK(std::fabs(spec[1] - 4 * kPi) <= 1e-6);
  }
}

TEST_CASE("closed-form spectrum matches quadrature of constant orbits") {
  const DressedHamiltonian fh = dressed("kicked-rotor-smooth", {6.0});
  std::mt19937_64 rng(9);
  for (int i = 0; i < 20; ++i) {
    Eigen::VectorXd x = random_state(rng, 6);
    x[5] = i % 2 ? fh.profiles().theta1 : fh.profiles().theta2;
    const double expected = fh.c() * fh.profiles().alpha.value(x[5]);
    CHECK(std::fabs(constant_orbit_action(fh, x) - expected) <= 1e-10);
  }
}

TEST_CASE("scaling H scales C and the spectrum") {
  const auto h = catalog_get("kicked-rotor-smooth", {6.0});
  const DressedHamiltonian fh(h, make_sin_profiles(), torus2());
  const DressedHamiltonian scaled(scale_hamiltonian(h, 2.5), make_sin_profiles(), torus2());
  CHECK(scaled.c() == doctest::Approx(2.5 * fh.c()).epsilon(1e-9));
}
