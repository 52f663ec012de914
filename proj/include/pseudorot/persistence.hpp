#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "pseudorot/construction.hpp"

namespace pseudorot {

class InvalidComplex : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Cell {
  int id = 0;
  int degree = 0;
  double value = 0.0;
  std::vector<int> boundary;  // facet ids, coefficients in F_2
};

/// Finite cell complex with a real filtration value per cell.
class FilteredComplex {
 public:
  FilteredComplex() = default;
  explicit FilteredComplex(std::vector<Cell> cells);

  /// Adds a cell; ids must be unique. Facets may be added later, validate()
  /// checks everything at once.
  void add_cell(int id, int degree, double value, std::vector<int> boundary = {});

  /// Throws InvalidComplex on unknown facets, wrong facet degree, a facet
  /// appearing later than its cell, or a nonzero boundary of a boundary.
  void validate() const;

  const std::vector<Cell>& cells() const { return cells_; }
  std::size_t size() const { return cells_.size(); }
  int max_degree() const;

  /// Cell indices ordered by (value, degree, id).
  std::vector<std::size_t> filtration_order() const;

 private:
  std::vector<Cell> cells_;
};

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct Bar {
  double birth = 0.0;
  double death = kInfinity;
  int degree = 0;
  std::size_t multiplicity = 1;

  bool infinite() const { return death == kInfinity; }
  double length() const { return death - birth; }
};

/// Graded multiset of intervals, kept sorted by (degree, birth, death) with
/// equal intervals merged into one entry carrying a multiplicity.
class Barcode {
 public:
  Barcode() = default;
  explicit Barcode(std::vector<Bar> bars);

  void add(const Bar& bar);
  const std::vector<Bar>& bars() const { return bars_; }

  std::size_t total() const;
  std::size_t finite_count() const;
  std::size_t infinite_count() const;
  std::size_t infinite_count(int degree) const;
  /// Bars counted with multiplicity whose birth equals `value` within `tol`.
  std::size_t count_born_at(double value, double tol, bool infinite_only = true) const;
  /// Finite bars strictly longer than eps, with multiplicity.
  std::size_t finite_longer_than(double eps) const;
  int max_degree() const;

  /// Rank of H_d(a) -> H_d(b) read off the barcode: bars with birth <= a and
  /// death > b.
  std::size_t persistent_betti(int degree, double a, double b) const;

  /// All birth values scaled by s (s > 0).
  Barcode scaled(double s) const;

  bool operator==(const Barcode& other) const;

 private:
  void normalize();
  std::vector<Bar> bars_;
};

/// Standard persistence pairing by column reduction over F_2 in
/// (value, degree, id) order. Intervals with birth == death are dropped.
Barcode reduce_filtered_complex(const FilteredComplex& complex);

/// Circle graph on `grid_size` equally spaced vertices theta_i = i / N with
/// edges (i, i+1 mod N); vertex values f(theta_i), edge values the max of the
/// endpoints. Vertex ids are 0..N-1, edge ids N..2N-1.
FilteredComplex lower_star_circle(const std::function<double(double)>& f, int grid_size);
FilteredComplex lower_star_circle(const std::vector<double>& samples);

/// Binomial coefficients C(m, k), k = 0..m (Betti numbers of T^m).
std::vector<long long> betti_torus(int m);

/// Replicates each circle bar (b, inf, d) with multiplicity factor[j] in
/// degree d + j. Throws std::invalid_argument when the input has finite bars.
Barcode kunneth_assemble(const Barcode& circle, const std::vector<long long>& betti_factor);

/// dim H_*(M x T^{2n-1}) = 2^{base_dim + torus_dim - 1} for a torus base.
long long product_total_betti(const DressedHamiltonian& fh);

/// Infinite bars only: dim H_*(M x T^{2n-1}) bars born at each of
/// C alpha(theta_1), C alpha(theta_2), graded by the Morse index of alpha
/// (0 at the minimum, 1 at the maximum) plus the factor degree.
/// Throws std::invalid_argument when H == 0.
Barcode model_floer_barcode(const DressedHamiltonian& fh);

struct KunnethCrossCheck {
  Barcode model;
  Barcode assembled;  // Kunneth assembly of the lower-star barcode of C alpha
  bool counts_match = false;
  double max_birth_error = 0.0;
  double bottleneck = 0.0;
  /// Lower-star barcodes of C_H alpha + t c0 beta(alpha) along the homotopy
  /// t in [0, 1], with c0 = max |H|: worst bottleneck distance to t = 0 and
  /// worst finite-bar count.
  std::vector<double> homotopy_t;
  double homotopy_max_bottleneck = 0.0;
  std::size_t homotopy_max_finite = 0;
  bool pass = false;
};

KunnethCrossCheck kunneth_cross_check(const DressedHamiltonian& fh, int grid_size = 4096, int homotopy_steps = 8,
                                      double birth_tol = 1e-3);

/// Bottleneck distance with the sup metric on endpoints. Unmatched finite
/// bars pay half their length, infinite bars must match infinite bars of
/// the same degree (otherwise +inf). Finite parts use binary search over
/// candidate costs with a bipartite feasibility test.
double bottleneck_distance(const Barcode& a, const Barcode& b);

/// [{birth, death ("inf" when infinite), degree, multiplicity}, ...]
nlohmann::json to_json(const Barcode& barcode);
Barcode barcode_from_json(const nlohmann::json& j);

/// One horizontal segment per bar copy, sorted by (degree, birth).
std::string barcode_svg(const Barcode& barcode, const std::string& title = "barcode");

}  // namespace pseudorot
