#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <random>
#include <vector>

#include "pseudorot/persistence.hpp"

namespace pseudorot::oracle {

// Random simplicial complex (vertices, edges, triangles) with a monotone
// filtration on a coarse value lattice so that ties occur.
inline FilteredComplex random_complex(std::mt19937_64& rng, int max_cells) {
  std::uniform_int_distribution<int> nv(3, 8);
  std::uniform_int_distribution<int> level(0, 5);
  std::bernoulli_distribution coin(0.55);
  const int v = nv(rng);
  std::vector<Cell> cells;
  std::map<std::pair<int, int>, int> edge_index;
  for (int i = 0; i < v; ++i) cells.push_back({i, 0, static_cast<double>(level(rng)), {}});
  for (int a = 0; a < v; ++a) {
    for (int b = a + 1; b < v; ++b) {
      if (!coin(rng) || static_cast<int>(cells.size()) >= max_cells) continue;
      const double lo = std::max(cells[a].value, cells[b].value);
      const int id = static_cast<int>(cells.size());
      cells.push_back({id, 1, lo + level(rng) % 3, {a, b}});
      edge_index[{a, b}] = id;
    }
  }
  for (int a = 0; a < v; ++a) {
    for (int b = a + 1; b < v; ++b) {
      for (int c = b + 1; c < v; ++c) {
        if (static_cast<int>(cells.size()) >= max_cells) break;
        auto ab = edge_index.find({a, b});
        auto bc = edge_index.find({b, c});
        auto ac = edge_index.find({a, c});
        if (ab == edge_index.end() || bc == edge_index.end() || ac == edge_index.end() || !coin(rng)) continue;
        const double lo =
            std::max({cells[ab->second].value, cells[bc->second].value, cells[ac->second].value});
        const int id = static_cast<int>(cells.size());
        cells.push_back({id, 2, lo + level(rng) % 2, {ab->second, bc->second, ac->second}});
      }
    }
  }
  // shuffle ids
  std::vector<int> perm(cells.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  for (auto& c : cells) {
    c.id = perm[c.id] * 7 + 3;
    for (auto& f : c.boundary) f = perm[f] * 7 + 3;
  }
  return FilteredComplex(cells);
}

using Mask = std::uint64_t;

// Rank of a set of vectors over F_2 (xor basis).
inline int f2_rank(std::vector<Mask> vectors) {
  std::vector<Mask> basis;
  for (Mask v : vectors) {
    for (Mask b : basis) v = std::min(v, v ^ b);
    if (v) {
      basis.push_back(v);
      std::sort(basis.rbegin(), basis.rend());
    }
  }
  return static_cast<int>(basis.size());
}

// rank(H_d(K_a) -> H_d(K_b)) = dim(Z_d(a) + B_d(b)) - dim B_d(b), all by
// explicit linear algebra on bitmasks.
inline int brute_persistent_betti(const FilteredComplex& k, int d, double a, double b) {
  std::map<int, int> index_in_degree;
  std::vector<const Cell*> dcells;
  std::vector<const Cell*> lower;
  std::vector<const Cell*> upper;
  for (const auto& c : k.cells()) {
    if (c.degree == d) dcells.push_back(&c);
    if (c.degree == d - 1) lower.push_back(&c);
    if (c.degree == d + 1) upper.push_back(&c);
  }
  for (std::size_t i = 0; i < dcells.size(); ++i) index_in_degree[dcells[i]->id] = static_cast<int>(i);
  std::map<int, int> lower_index;
  for (std::size_t i = 0; i < lower.size(); ++i) lower_index[lower[i]->id] = static_cast<int>(i);

  // cycles of K_a: kernel of the boundary restricted to d-cells with value <= a
  std::vector<std::pair<Mask, Mask>> rows;  // (boundary, combination)
  for (std::size_t i = 0; i < dcells.size(); ++i) {
    if (dcells[i]->value > a) continue;
    Mask bd = 0;
    for (int f : dcells[i]->boundary) bd ^= Mask{1} << lower_index.at(f);
    rows.push_back({bd, Mask{1} << i});
  }
  // Gaussian elimination with one pivot row per leading bit; rows that
  // reduce to zero contribute their combination to the cycle space.
  std::vector<Mask> cycles;
  std::map<int, std::pair<Mask, Mask>> pivot_at;
  for (auto [bd, comb] : rows) {
    while (bd) {
      const int top = 63 - __builtin_clzll(bd);
      auto it = pivot_at.find(top);
      if (it == pivot_at.end()) break;
      bd ^= it->second.first;
      comb ^= it->second.second;
    }
    if (bd == 0) {
      cycles.push_back(comb);
    } else {
      pivot_at[63 - __builtin_clzll(bd)] = {bd, comb};
    }
  }
  std::vector<Mask> boundaries;
  for (const Cell* c : upper) {
    if (c->value > b) continue;
    Mask m = 0;
    for (int f : c->boundary) m ^= Mask{1} << index_in_degree.at(f);
    boundaries.push_back(m);
  }
  std::vector<Mask> sum = cycles;
  sum.insert(sum.end(), boundaries.begin(), boundaries.end());
  return f2_rank(sum) - f2_rank(boundaries);
}

}  // namespace pseudorot::oracle
