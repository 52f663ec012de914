#include "pseudorot/persistence.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <tuple>
#include <unordered_map>

namespace pseudorot {

// ---------------------------------------------------------------------------
// FilteredComplex

FilteredComplex::FilteredComplex(std::vector<Cell> cells) : cells_(std::move(cells)) {}

void FilteredComplex::add_cell(int id, int degree, double value, std::vector<int> boundary) {
  cells_.push_back(Cell{id, degree, value, std::move(boundary)});
}

int FilteredComplex::max_degree() const {
  int d = -1;
  for (const auto& c : cells_) d = std::max(d, c.degree);
  return d;
}

std::vector<std::size_t> FilteredComplex::filtration_order() const {
  std::vector<std::size_t> order(cells_.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [this](std::size_t i, std::size_t j) {
    const Cell& a = cells_[i];
    const Cell& b = cells_[j];
    return std::tie(a.value, a.degree, a.id) < std::tie(b.value, b.degree, b.id);
  });
  return order;
}

void FilteredComplex::validate() const {
  std::unordered_map<int, std::size_t> index;
  for (std::size_t i = 0; i < cells_.size(); ++i) {
    const Cell& c = cells_[i];
    if (c.degree < 0) throw InvalidComplex("cell " + std::to_string(c.id) + " has negative degree");
    if (!std::isfinite(c.value)) throw InvalidComplex("cell " + std::to_string(c.id) + " has a non-finite value");
    if (!index.emplace(c.id, i).second) throw InvalidComplex("duplicate cell id " + std::to_string(c.id));
  }
  for (const Cell& c : cells_) {
    if (c.degree == 0 && !c.boundary.empty()) {
      throw InvalidComplex("vertex " + std::to_string(c.id) + " has a nonempty boundary");
    }
    for (int f : c.boundary) {
      auto it = index.find(f);
      if (it == index.end()) {
        throw InvalidComplex("cell " + std::to_string(c.id) + " has unknown facet " + std::to_string(f));
      }
      const Cell& facet = cells_[it->second];
      if (facet.degree != c.degree - 1) {
        throw InvalidComplex("facet " + std::to_string(f) + " of cell " + std::to_string(c.id) +
                             " has the wrong degree");
      }
      if (facet.value > c.value) {
        throw InvalidComplex("non-monotone filtration: facet " + std::to_string(f) + " enters after cell " +
                             std::to_string(c.id));
      }
    }
    // boundary of the boundary, over F_2
    std::map<int, int> parity;
    for (int f : c.boundary) {
      for (int g : cells_[index.at(f)].boundary) parity[g] ^= 1;
    }
    for (const auto& [g, odd] : parity) {
      if (odd) throw InvalidComplex("boundary of boundary of cell " + std::to_string(c.id) + " is nonzero");
    }
  }
}

// ---------------------------------------------------------------------------
// Barcode

Barcode::Barcode(std::vector<Bar> bars) : bars_(std::move(bars)) { normalize(); }

void Barcode::add(const Bar& bar) {
  bars_.push_back(bar);
  normalize();
}

void Barcode::normalize() {
  for (const Bar& b : bars_) {
    if (!(b.birth < b.death)) throw std::invalid_argument("bar with birth >= death");
    if (b.degree < 0) throw std::invalid_argument("bar with negative degree");
  }
  std::sort(bars_.begin(), bars_.end(), [](const Bar& a, const Bar& b) {
    return std::tie(a.degree, a.birth, a.death) < std::tie(b.degree, b.birth, b.death);
  });
  std::vector<Bar> merged;
  for (const Bar& b : bars_) {
    if (b.multiplicity == 0) continue;
    if (!merged.empty() && merged.back().degree == b.degree && merged.back().birth == b.birth &&
        merged.back().death == b.death) {
      merged.back().multiplicity += b.multiplicity;
    } else {
      merged.push_back(b);
    }
  }
  bars_ = std::move(merged);
}

std::size_t Barcode::total() const {
  std::size_t n = 0;
  for (const Bar& b : bars_) n += b.multiplicity;
  return n;
}

std::size_t Barcode::finite_count() const { return total() - infinite_count(); }

std::size_t Barcode::infinite_count() const {
  std::size_t n = 0;
  for (const Bar& b : bars_) n += b.infinite() ? b.multiplicity : 0;
  return n;
}

std::size_t Barcode::infinite_count(int degree) const {
  std::size_t n = 0;
  for (const Bar& b : bars_) n += (b.infinite() && b.degree == degree) ? b.multiplicity : 0;
  return n;
}

std::size_t Barcode::count_born_at(double value, double tol, bool infinite_only) const {
  std::size_t n = 0;
  for (const Bar& b : bars_) {
    if (infinite_only && !b.infinite()) continue;
    if (std::fabs(b.birth - value) <= tol) n += b.multiplicity;
  }
  return n;
}

std::size_t Barcode::finite_longer_than(double eps) const {
  std::size_t n = 0;
  for (const Bar& b : bars_) n += (!b.infinite() && b.length() > eps) ? b.multiplicity : 0;
  return n;
}

int Barcode::max_degree() const {
  int d = -1;
  for (const Bar& b : bars_) d = std::max(d, b.degree);
  return d;
}

std::size_t Barcode::persistent_betti(int degree, double a, double b) const {
  std::size_t n = 0;
  for (const Bar& bar : bars_) {
    if (bar.degree == degree && bar.birth <= a && bar.death > b) n += bar.multiplicity;
  }
  return n;
}

Barcode Barcode::scaled(double s) const {
  if (!(s > 0.0)) throw std::invalid_argument("barcode scale must be positive");
  std::vector<Bar> out = bars_;
  for (Bar& b : out) {
    b.birth *= s;
    if (!b.infinite()) b.death *= s;
  }
  return Barcode(std::move(out));
}

bool Barcode::operator==(const Barcode& other) const {
  if (bars_.size() != other.bars_.size()) return false;
  for (std::size_t i = 0; i < bars_.size(); ++i) {
    const Bar& a = bars_[i];
    const Bar& b = other.bars_[i];
    if (a.degree != b.degree || a.birth != b.birth || a.death != b.death || a.multiplicity != b.multiplicity) {
      return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Reduction

Barcode reduce_filtered_complex(const FilteredComplex& complex) {
  complex.validate();
  const auto& cells = complex.cells();
  const std::vector<std::size_t> order = complex.filtration_order();
  const std::size_t n = order.size();
  std::unordered_map<int, std::size_t> position;
  for (std::size_t pos = 0; pos < n; ++pos) position[cells[order[pos]].id] = pos;

  // columns hold sorted positions of nonzero rows
  std::vector<std::vector<std::size_t>> columns(n);
  for (std::size_t pos = 0; pos < n; ++pos) {
    auto& col = columns[pos];
    for (int f : cells[order[pos]].boundary) col.push_back(position.at(f));
    std::sort(col.begin(), col.end());
    // repeated facets cancel over F_2
    std::vector<std::size_t> reduced;
    for (std::size_t i = 0; i < col.size();) {
      std::size_t j = i;
      while (j < col.size() && col[j] == col[i]) ++j;
      if ((j - i) % 2 == 1) reduced.push_back(col[i]);
      i = j;
    }
    col = std::move(reduced);
  }

  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::vector<std::size_t> pivot_owner(n, kNone);
  std::vector<bool> paired(n, false);
  std::vector<Bar> bars;
  std::vector<std::size_t> scratch;
  for (std::size_t j = 0; j < n; ++j) {
    auto& col = columns[j];
    while (!col.empty() && pivot_owner[col.back()] != kNone) {
      const auto& other = columns[pivot_owner[col.back()]];
      scratch.clear();
      std::set_symmetric_difference(col.begin(), col.end(), other.begin(), other.end(), std::back_inserter(scratch));
      col.swap(scratch);
    }
    if (!col.empty()) {
      const std::size_t i = col.back();
      pivot_owner[i] = j;
      paired[i] = true;
      paired[j] = true;
      const Cell& born = cells[order[i]];
      const Cell& dies = cells[order[j]];
      if (born.value < dies.value) bars.push_back(Bar{born.value, dies.value, born.degree, 1});
    }
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (!paired[j] && columns[j].empty()) {
      const Cell& c = cells[order[j]];
      bars.push_back(Bar{c.value, kInfinity, c.degree, 1});
    }
  }
  return Barcode(std::move(bars));
}

// ---------------------------------------------------------------------------
// Circle model and Kunneth

FilteredComplex lower_star_circle(const std::vector<double>& samples) {
  const int n = static_cast<int>(samples.size());
  if (n < 16) throw std::invalid_argument("lower_star_circle needs at least 16 grid points");
  std::vector<Cell> cells;
  cells.reserve(2 * n);
  for (int i = 0; i < n; ++i) cells.push_back(Cell{i, 0, samples[i], {}});
  for (int i = 0; i < n; ++i) {
    const int j = (i + 1) % n;
    cells.push_back(Cell{n + i, 1, std::max(samples[i], samples[j]), {i, j}});
  }
  return FilteredComplex(std::move(cells));
}

FilteredComplex lower_star_circle(const std::function<double(double)>& f, int grid_size) {
  if (grid_size < 16) throw std::invalid_argument("lower_star_circle needs at least 16 grid points");
  std::vector<double> samples(grid_size);
  for (int i = 0; i < grid_size; ++i) samples[i] = f(double(i) / grid_size);
  return lower_star_circle(samples);
}

std::vector<long long> betti_torus(int m) {
  if (m < 0) throw std::invalid_argument("betti_torus needs m >= 0");
  if (m > 62) throw std::invalid_argument("betti_torus overflows beyond m = 62");
  std::vector<long long> row{1};
  for (int i = 1; i <= m; ++i) {
    std::vector<long long> next(i + 1, 1);
    for (int k = 1; k < i; ++k) next[k] = row[k - 1] + row[k];
    row = std::move(next);
  }
  return row;
}

Barcode kunneth_assemble(const Barcode& circle, const std::vector<long long>& betti_factor) {
  if (circle.finite_count() != 0) {
    throw std::invalid_argument("kunneth_assemble expects a circle barcode without finite bars");
  }
  std::vector<Bar> out;
  for (const Bar& b : circle.bars()) {
    for (std::size_t j = 0; j < betti_factor.size(); ++j) {
      if (betti_factor[j] < 0) throw std::invalid_argument("negative Betti number");
      if (betti_factor[j] == 0) continue;
      out.push_back(Bar{b.birth, kInfinity, b.degree + static_cast<int>(j),
                        b.multiplicity * static_cast<std::size_t>(betti_factor[j])});
    }
  }
  return Barcode(std::move(out));
}

long long product_total_betti(const DressedHamiltonian& fh) {
  const int m = fh.base_dim() + fh.torus_dim() - 1;
  if (m > 62) throw std::invalid_argument("product dimension too large");
  return 1LL << m;
}

Barcode model_floer_barcode(const DressedHamiltonian& fh) {
  if (fh.degenerate()) throw std::invalid_argument("model_floer_barcode: H is identically zero");
  const auto& prof = fh.profiles();
  const double v1 = fh.c() * prof.alpha.value(prof.theta1);
  const double v2 = fh.c() * prof.alpha.value(prof.theta2);
  if (v1 == v2) throw std::invalid_argument("model_floer_barcode: critical values coincide");
  Barcode circle({Bar{std::min(v1, v2), kInfinity, 0, 1}, Bar{std::max(v1, v2), kInfinity, 1, 1}});
  return kunneth_assemble(circle, betti_torus(fh.base_dim() + fh.torus_dim() - 1));
}

KunnethCrossCheck kunneth_cross_check(const DressedHamiltonian& fh, int grid_size, int homotopy_steps,
                                      double birth_tol) {
  if (homotopy_steps < 1) throw std::invalid_argument("homotopy needs at least one step");
  KunnethCrossCheck out;
  out.model = model_floer_barcode(fh);
  const auto& prof = fh.profiles();
  const double c = fh.c();
  const std::vector<long long> factor = betti_torus(fh.base_dim() + fh.torus_dim() - 1);

  const Barcode circle = reduce_filtered_complex(
      lower_star_circle([&](double th) { return c * prof.alpha.value(th); }, grid_size));
  out.counts_match = circle.finite_count() == 0;
  if (out.counts_match) {
    out.assembled = kunneth_assemble(circle, factor);
    out.counts_match = out.assembled.total() == out.model.total();
    for (int d = 0; d <= std::max(out.model.max_degree(), out.assembled.max_degree()); ++d) {
      out.counts_match = out.counts_match && out.assembled.infinite_count(d) == out.model.infinite_count(d);
    }
    out.bottleneck = bottleneck_distance(out.model, out.assembled);
    out.max_birth_error = out.bottleneck;
  } else {
    out.bottleneck = kInfinity;
    out.max_birth_error = kInfinity;
  }

  const double c0 = max_abs_hamiltonian(fh.base());
  auto homotopy = [&](double t) {
    return reduce_filtered_complex(lower_star_circle(
        [&](double th) {
          const double a = prof.alpha.value(th);
          return c * a + t * c0 * prof.beta.value(a);
        },
        grid_size));
  };
  const Barcode start = homotopy(0.0);
  for (int s = 0; s <= homotopy_steps; ++s) {
    const double t = double(s) / homotopy_steps;
    const Barcode bt = homotopy(t);
    out.homotopy_t.push_back(t);
    out.homotopy_max_bottleneck = std::max(out.homotopy_max_bottleneck, bottleneck_distance(start, bt));
    out.homotopy_max_finite = std::max(out.homotopy_max_finite, bt.finite_count());
  }
  out.pass = out.counts_match && out.max_birth_error <= birth_tol && out.homotopy_max_finite == 0 &&
             out.homotopy_max_bottleneck <= birth_tol;
  return out;
}

// ---------------------------------------------------------------------------
// Bottleneck distance

namespace {

struct Interval {
  double birth;
  double death;
};

double sup_cost(const Interval& a, const Interval& b) {
  return std::max(std::fabs(a.birth - b.birth), std::fabs(a.death - b.death));
}

double diagonal_cost(const Interval& a) { return 0.5 * (a.death - a.birth); }

// Perfect matching test on the standard augmented bipartite graph: left =
// A plus diagonal copies of B, right = B plus diagonal copies of A.
bool matching_exists(const std::vector<Interval>& a, const std::vector<Interval>& b, double delta) {
  const std::size_t na = a.size();
  const std::size_t nb = b.size();
  const std::size_t n = na + nb;
  std::vector<std::vector<std::size_t>> adj(n);
  for (std::size_t i = 0; i < na; ++i) {
    for (std::size_t j = 0; j < nb; ++j) {
      if (sup_cost(a[i], b[j]) <= delta) adj[i].push_back(j);
    }
    if (diagonal_cost(a[i]) <= delta) adj[i].push_back(nb + i);
  }
  for (std::size_t j = 0; j < nb; ++j) {
    if (diagonal_cost(b[j]) <= delta) adj[na + j].push_back(j);
    for (std::size_t i = 0; i < na; ++i) adj[na + j].push_back(nb + i);
  }
  std::vector<std::size_t> match_right(n, n);
  std::vector<char> seen;
  std::function<bool(std::size_t)> augment = [&](std::size_t u) {
    for (std::size_t v : adj[u]) {
      if (seen[v]) continue;
      seen[v] = 1;
      if (match_right[v] == n || augment(match_right[v])) {
        match_right[v] = u;
        return true;
      }
    }
    return false;
  };
  for (std::size_t u = 0; u < n; ++u) {
    seen.assign(n, 0);
    if (!augment(u)) return false;
  }
  return true;
}

double finite_bottleneck(const std::vector<Interval>& a, const std::vector<Interval>& b) {
  if (a.empty() && b.empty()) return 0.0;
  std::vector<double> candidates{0.0};
  for (const auto& x : a) candidates.push_back(diagonal_cost(x));
  for (const auto& y : b) candidates.push_back(diagonal_cost(y));
  for (const auto& x : a) {
    for (const auto& y : b) candidates.push_back(sup_cost(x, y));
  }
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  std::size_t lo = 0;
  std::size_t hi = candidates.size() - 1;
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (matching_exists(a, b, candidates[mid])) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return candidates[lo];
}

}  // namespace

double bottleneck_distance(const Barcode& a, const Barcode& b) {
  const int top = std::max(a.max_degree(), b.max_degree());
  double result = 0.0;
  for (int d = 0; d <= top; ++d) {
    std::vector<double> inf_a;
    std::vector<double> inf_b;
    std::vector<Interval> fin_a;
    std::vector<Interval> fin_b;
    auto collect = [d](const Barcode& bc, std::vector<double>& inf, std::vector<Interval>& fin) {
      for (const Bar& bar : bc.bars()) {
        if (bar.degree != d) continue;
        for (std::size_t k = 0; k < bar.multiplicity; ++k) {
          if (bar.infinite()) {
            inf.push_back(bar.birth);
          } else {
            fin.push_back(Interval{bar.birth, bar.death});
          }
        }
      }
    };
    collect(a, inf_a, fin_a);
    collect(b, inf_b, fin_b);
    if (inf_a.size() != inf_b.size()) return kInfinity;
    // on a line, sorted order is an optimal matching for the sup cost
    std::sort(inf_a.begin(), inf_a.end());
    std::sort(inf_b.begin(), inf_b.end());
    for (std::size_t i = 0; i < inf_a.size(); ++i) result = std::max(result, std::fabs(inf_a[i] - inf_b[i]));
    result = std::max(result, finite_bottleneck(fin_a, fin_b));
  }
  return result;
}

// ---------------------------------------------------------------------------
// Serialization

nlohmann::json to_json(const Barcode& barcode) {
  nlohmann::json arr = nlohmann::json::array();
  for (const Bar& b : barcode.bars()) {
    nlohmann::json entry;
    entry["birth"] = b.birth;
    if (b.infinite()) {
      entry["death"] = "inf";
    } else {
      entry["death"] = b.death;
    }
    entry["degree"] = b.degree;
    entry["multiplicity"] = b.multiplicity;
    arr.push_back(entry);
  }
  return arr;
}

Barcode barcode_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw std::invalid_argument("barcode JSON must be an array");
  std::vector<Bar> bars;
  for (const auto& e : j) {
    Bar b;
    b.birth = e.at("birth").get<double>();
    const auto& death = e.at("death");
    if (death.is_string()) {
      if (death.get<std::string>() != "inf") throw std::invalid_argument("death must be a number or \"inf\"");
      b.death = kInfinity;
    } else {
      b.death = death.get<double>();
    }
    b.degree = e.at("degree").get<int>();
    b.multiplicity = e.value("multiplicity", std::size_t{1});
    bars.push_back(b);
  }
  return Barcode(std::move(bars));
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

}  // namespace

std::string barcode_svg(const Barcode& barcode, const std::string& title) {
  double lo = kInfinity;
  double hi = -kInfinity;
  for (const Bar& b : barcode.bars()) {
    lo = std::min(lo, b.birth);
    hi = std::max(hi, b.birth);
    if (!b.infinite()) hi = std::max(hi, b.death);
  }
  if (barcode.bars().empty()) {
    lo = 0.0;
    hi = 1.0;
  }
  const double span = hi > lo ? hi - lo : 1.0;
  lo -= 0.1 * span;
  hi += 0.25 * span;

  const double width = 640.0;
  const double left = 60.0;
  const double right = 20.0;
  const double top = 40.0;
  const double row = 6.0;
  const std::size_t rows = barcode.total();
  const double height = top + row * static_cast<double>(rows) + 40.0;
  auto x_of = [&](double v) { return left + (v - lo) / (hi - lo) * (width - left - right); };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(width) << "\" height=\"" << fmt(height)
      << "\" viewBox=\"0 0 " << fmt(width) << ' ' << fmt(height) << "\">\n";
  svg << "<title>" << escape_xml(title) << "</title>\n";
  svg << "<text x=\"" << fmt(left) << "\" y=\"20\" font-family=\"sans-serif\" font-size=\"12\">"
      << escape_xml(title) << " (" << rows << " bars)</text>\n";
  const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
  std::size_t r = 0;
  for (const Bar& b : barcode.bars()) {
    for (std::size_t k = 0; k < b.multiplicity; ++k, ++r) {
      const double y = top + row * (static_cast<double>(r) + 0.5);
      const double x1 = x_of(b.birth);
      const double x2 = b.infinite() ? width - right : x_of(b.death);
      svg << "<line class=\"bar " << (b.infinite() ? "infinite" : "finite") << "\" data-degree=\"" << b.degree
          << "\" x1=\"" << fmt(x1) << "\" y1=\"" << fmt(y) << "\" x2=\"" << fmt(x2) << "\" y2=\"" << fmt(y)
          << "\" stroke=\"" << palette[b.degree % 8] << "\" stroke-width=\"3\"/>\n";
    }
  }
  const double axis_y = top + row * static_cast<double>(rows) + 10.0;
  svg << "<g class=\"axis\" font-family=\"sans-serif\" font-size=\"10\">\n";
  svg << "<line x1=\"" << fmt(left) << "\" y1=\"" << fmt(axis_y) << "\" x2=\"" << fmt(width - right) << "\" y2=\""
      << fmt(axis_y) << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double v = lo + (hi - lo) * i / 4.0;
    svg << "<text x=\"" << fmt(x_of(v)) << "\" y=\"" << fmt(axis_y + 15.0) << "\" text-anchor=\"middle\">"
        << fmt(v) << "</text>\n";
  }
  svg << "</g>\n</svg>\n";
  return svg.str();
}

}  // namespace pseudorot
