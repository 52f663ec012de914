#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "pseudorot/base_systems.hpp"
#include "pseudorot/persistence.hpp"
#include "support/f2_oracle.hpp"

using namespace pseudorot;

namespace {

constexpr double kPi = 3.14159265358979323846;

DressedHamiltonian dressed(const std::string& id, std::vector<double> params) {
  return DressedHamiltonian(catalog_get(id, params), make_sin_profiles(),
                            std::make_shared<const TorusSymplecticStructure>(IrrationalityVector::sqrt_primes(2)));
}

std::size_t svg_bar_lines(const std::string& svg) {
  std::size_t count = 0;
  for (std::size_t pos = svg.find("<line class=\"bar"); pos != std::string::npos;
       pos = svg.find("<line class=\"bar", pos + 1)) {
    ++count;
  }
  return count;
}

}  // namespace

TEST_CASE("two-vertex circle") {
  FilteredComplex k;
  k.add_cell(0, 0, 0.0);
  k.add_cell(1, 0, 1.0);
  k.add_cell(2, 1, 2.0, {0, 1});
  k.add_cell(3, 1, 3.0, {0, 1});
  const Barcode b = reduce_filtered_complex(k);
  REQUIRE(b.bars().size() == 3);
  CHECK(b.persistent_betti(0, 1.5, 1.5) == 2);
  CHECK(b.persistent_betti(0, 2.5, 2.5) == 1);
  CHECK(b.persistent_betti(1, 3.0, 3.0) == 1);
  CHECK(b.infinite_count(0) == 1);
  CHECK(b.infinite_count(1) == 1);
  CHECK(b.finite_count() == 1);
}

TEST_CASE("lower-star barcode of sin on the circle") {
  const Barcode b = reduce_filtered_complex(lower_star_circle([](double t) { return std::sin(2 * kPi * t); }, 1024));
  CHECK(b.finite_count() == 0);
  REQUIRE(b.infinite_count() == 2);
  CHECK(b.count_born_at(-1.0, 1e-12) == 1);
  CHECK(b.count_born_at(1.0, 1e-12) == 1);
  CHECK(b.infinite_count(0) == 1);
  CHECK(b.infinite_count(1) == 1);
}

TEST_CASE("perfect Morse function with two minima") {
  const Barcode b = reduce_filtered_complex(lower_star_circle([](double t) { return std::cos(4 * kPi * t); }, 512));
  CHECK(b.infinite_count(0) == 1);
  CHECK(b.infinite_count(1) == 1);
  REQUIRE(b.finite_count() == 1);
  for (const auto& bar : b.bars()) {
    if (!bar.infinite()) {
      CHECK(bar.birth == doctest::Approx(-1.0));
      CHECK(bar.death == doctest::Approx(1.0));
    }
  }
}

TEST_CASE("constant function gives only essential classes") {
  const Barcode b = reduce_filtered_complex(lower_star_circle(std::vector<double>(64, 0.7)));
  CHECK(b.total() == 2);
  CHECK(b.finite_count() == 0);
  CHECK(b.count_born_at(0.7, 0.0) == 2);
  CHECK_THROWS(lower_star_circle(std::vector<double>(8, 0.0)));
}

TEST_CASE("barcodes converge under grid refinement") {
  auto f = [](double t) { return std::sin(2 * kPi * t) + 0.3 * std::cos(6 * kPi * t); };
  const double lip = 2 * kPi * (1.0 + 0.9);
  const Barcode coarse = reduce_filtered_complex(lower_star_circle(f, 256));
  const Barcode fine = reduce_filtered_complex(lower_star_circle(f, 4096));
  CHECK(bottleneck_distance(coarse, fine) <= lip / 256);
}

TEST_CASE("persistent Betti numbers match brute-force linear algebra") {
  std::mt19937_64 rng(2024);
  int complexes = 0;
  for (int trial = 0; trial < 220; ++trial) {
    const FilteredComplex k = oracle::random_complex(rng, 60);
    REQUIRE_NOTHROW(k.validate());
    REQUIRE(k.size() <= 60);
    ++complexes;
    const Barcode bars = reduce_filtered_complex(k);
    std::set<double> values;
    for (const auto& c : k.cells()) values.insert(c.value);
    for (int d = 0; d <= 2; ++d) {
      for (double a : values) {
        for (double b : values) {
          if (b < a) continue;
          const int expected = oracle::brute_persistent_betti(k, d, a, b);
          const auto got = static_cast<int>(bars.persistent_betti(d, a, b));
          if (got != expected) {
            FAIL_CHECK("trial " << trial << " degree " << d << " a=" << a << " b=" << b << ": " << got
                                << " vs " << expected);
          }
        }
      }
    }
  }
  CHECK(complexes >= 200);
}

TEST_CASE("barcodes do not depend on cell ids") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 30; ++trial) {
    const FilteredComplex k = oracle::random_complex(rng, 40);
    std::vector<Cell> cells = k.cells();
    std::vector<int> ids;
    for (const auto& c : cells) ids.push_back(c.id);
    std::vector<int> shuffled = ids;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    std::map<int, int> relabel;
    for (std::size_t i = 0; i < ids.size(); ++i) relabel[ids[i]] = shuffled[i] + 1000;
    for (auto& c : cells) {
      c.id = relabel[c.id];
      for (auto& f : c.boundary) f = relabel[f];
    }
    std::shuffle(cells.begin(), cells.end(), rng);
    CHECK(reduce_filtered_complex(FilteredComplex(cells)) == reduce_filtered_complex(k));
  }
}

TEST_CASE("invalid complexes are rejected") {
  {
    FilteredComplex k;
    k.add_cell(0, 0, 0.0);
    k.add_cell(1, 1, 1.0, {0, 5});
    CHECK_THROWS_AS(k.validate(), InvalidComplex);
  }
  {
    FilteredComplex k;
    k.add_cell(0, 0, 0.0);
    k.add_cell(1, 0, 0.0);
    k.add_cell(2, 2, 1.0, {0, 1});
    CHECK_THROWS_AS(k.validate(), InvalidComplex);
  }
  {
    FilteredComplex k;
    k.add_cell(0, 0, 2.0);
    k.add_cell(1, 0, 0.0);
    k.add_cell(2, 1, 1.0, {0, 1});
    CHECK_THROWS_AS(k.validate(), InvalidComplex);
  }
  {
    FilteredComplex k;
    k.add_cell(0, 0, 0.0);
    k.add_cell(1, 0, 0.0);
    k.add_cell(2, 1, 0.0, {0, 1});
    k.add_cell(3, 2, 0.0, {2});
    CHECK_THROWS_AS(k.validate(), InvalidComplex);
  }
  {
    FilteredComplex k;
    k.add_cell(0, 0, 0.0);
    k.add_cell(0, 0, 1.0);
    CHECK_THROWS_AS(k.validate(), InvalidComplex);
  }
  CHECK_THROWS(Barcode({Bar{1.0, 1.0, 0, 1}}));
}

TEST_CASE("Betti numbers of tori") {
  CHECK(betti_torus(0) == std::vector<long long>{1});
  CHECK(betti_torus(3) == std::vector<long long>{1, 3, 3, 1});
  const auto b5 = betti_torus(5);
  CHECK(std::accumulate(b5.begin(), b5.end(), 0LL) == 32);
}

TEST_CASE("Kunneth assembly of a circle barcode") {
  const Barcode circle({Bar{-1.0, kInfinity, 0, 1}, Bar{1.0, kInfinity, 1, 1}});
  const Barcode product = kunneth_assemble(circle, betti_torus(3));
  CHECK(product.total() == 16);
  CHECK(product.infinite_count(0) == 1);
  CHECK(product.infinite_count(1) == 4);
  CHECK(product.infinite_count(2) == 6);
  CHECK(product.infinite_count(3) == 4);
  CHECK(product.infinite_count(4) == 1);
  CHECK_THROWS(kunneth_assemble(Barcode({Bar{0.0, 1.0, 0, 1}}), betti_torus(1)));
}

TEST_CASE("model barcode of the dressed Hamiltonian") {
  const DressedHamiltonian fh = dressed("constant", {1.0});
  CHECK(product_total_betti(fh) == 32);
  const Barcode model = model_floer_barcode(fh);
  CHECK(model.total() == 64);
  CHECK(model.finite_count() == 0);
  CHECK(model.count_born_at(-4 * kPi, 1e-9) == 32);
  CHECK(model.count_born_at(4 * kPi, 1e-9) == 32);
  CHECK(model.infinite_count(0) == 1);
  CHECK(model.infinite_count(6) == 1);
  CHECK_THROWS(model_floer_barcode(dressed("constant", {0.0})));
}

TEST_CASE("model barcode scales with H and with iteration") {
  const DressedHamiltonian fh = dressed("kicked-rotor-smooth", {6.0});
  const Barcode base = model_floer_barcode(fh);
  for (int k : {2, 3, 5}) {
    CHECK(bottleneck_distance(model_floer_barcode(fh.iterate(k)), base.scaled(k)) <= 1e-9 * k * fh.c());
  }
  const DressedHamiltonian c1 = dressed("constant", {1.0});
  for (double lambda : {0.5, 2.0, 3.7}) {
    const DressedHamiltonian cl = dressed("constant", {lambda});
    CHECK(bottleneck_distance(model_floer_barcode(cl), model_floer_barcode(c1).scaled(lambda)) <= 1e-9 * lambda);
  }
}

TEST_CASE("Kunneth cross-check against the lower-star model") {
  const KunnethCrossCheck r = kunneth_cross_check(dressed("kicked-rotor-smooth", {6.0}));
  CHECK(r.pass);
  CHECK(r.counts_match);
  CHECK(r.max_birth_error <= 1e-3);
  CHECK(r.homotopy_max_finite == 0);
  CHECK(r.homotopy_t.size() == 9);
}

TEST_CASE("bottleneck distance examples") {
  const Barcode one({Bar{0.0, 1.0, 0, 1}});
  CHECK(bottleneck_distance(one, Barcode()) == doctest::Approx(0.5));
  CHECK(bottleneck_distance(one, Barcode({Bar{0.2, 1.1, 0, 1}})) == doctest::Approx(0.2));
  CHECK(bottleneck_distance(Barcode({Bar{0.0, kInfinity, 0, 1}}), Barcode()) == kInfinity);
  CHECK(bottleneck_distance(Barcode({Bar{0.0, kInfinity, 0, 1}}), Barcode({Bar{0.0, kInfinity, 1, 1}})) ==
        kInfinity);
  CHECK(bottleneck_distance(Barcode({Bar{0.0, kInfinity, 1, 2}}), Barcode({Bar{0.3, kInfinity, 1, 1},
                                                                             Bar{-0.1, kInfinity, 1, 1}})) ==
        doctest::Approx(0.3));
  CHECK(bottleneck_distance(one, one) == 0.0);
}

TEST_CASE("lower-star barcodes are stable under perturbation") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n01(0.0, 1.0);
  std::uniform_real_distribution<double> small(-0.05, 0.05);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> f(64);
    std::vector<double> g(64);
    double sup = 0.0;
    for (int i = 0; i < 64; ++i) {
      f[i] = n01(rng);
      g[i] = f[i] + small(rng);
      sup = std::max(sup, std::fabs(f[i] - g[i]));
    }
    const double d = bottleneck_distance(reduce_filtered_complex(lower_star_circle(f)),
                                         reduce_filtered_complex(lower_star_circle(g)));
    CHECK(d <= sup + 1e-15);
  }
}

TEST_CASE("bar endpoints are filtration values") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> f(40);
    for (auto& v : f) v = u(rng);
    const FilteredComplex k = lower_star_circle(f);
    std::set<double> values;
    for (const auto& c : k.cells()) values.insert(c.value);
    const Barcode bars = reduce_filtered_complex(k);
    for (const auto& bar : bars.bars()) {
      CHECK(values.count(bar.birth) == 1);
      if (!bar.infinite()) CHECK(values.count(bar.death) == 1);
    }
  }
}

TEST_CASE("JSON round trip and SVG rendering") {
  const Barcode model = model_floer_barcode(dressed("kicked-rotor-smooth", {6.0}));
  const Barcode mixed({Bar{0.0, 1.5, 0, 2}, Bar{-1.0, kInfinity, 1, 1}});
  CHECK(barcode_from_json(to_json(model)) == model);
  CHECK(barcode_from_json(to_json(mixed)) == mixed);
  CHECK(to_json(mixed).dump().find("\"inf\"") != std::string::npos);
  CHECK(svg_bar_lines(barcode_svg(model)) == 64);
  CHECK(svg_bar_lines(barcode_svg(mixed)) == 3);
}
