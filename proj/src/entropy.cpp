#include "pseudorot/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

#include "pseudorot/base_systems.hpp"
#include "pseudorot/flow.hpp"
#include "pseudorot/parallel.hpp"
#include "pseudorot/torus_geometry.hpp"

namespace pseudorot {

TangentMap rotation_map(const Eigen::VectorXd& shift) {
  return [shift](const Eigen::VectorXd& x) {
    if (x.size() != shift.size()) throw std::invalid_argument("rotation_map: dimension mismatch");
    return TangentStep{wrap_unit(x + shift), Eigen::MatrixXd::Identity(x.size(), x.size())};
  };
}

TangentMap cat_map() {
  return [](const Eigen::VectorXd& x) {
    if (x.size() != 2) throw std::invalid_argument("cat_map acts on T^2");
    Eigen::Matrix2d a;
    a << 2.0, 1.0, 1.0, 1.0;
    return TangentStep{wrap_unit(Eigen::VectorXd(a * x)), Eigen::MatrixXd(a)};
  };
}

TangentMap doubling_map() {
  return [](const Eigen::VectorXd& x) {
    if (x.size() != 1) throw std::invalid_argument("doubling_map acts on T^1");
    return TangentStep{wrap_unit(Eigen::VectorXd(2.0 * x)), Eigen::MatrixXd::Constant(1, 1, 2.0)};
  };
}

TorusMap without_tangent(TangentMap f) {
  return [f = std::move(f)](const Eigen::VectorXd& x) { return f(x).image; };
}

TangentMap base_tangent_map(BaseHamiltonianPtr h, const ode::Options& options) {
  auto flow = std::make_shared<const BaseFlow>(std::move(h));
  return [flow, options](const Eigen::VectorXd& p) {
    BaseFlowResult r = flow->flow_with_jacobian(p, 0.0, 1.0, options);
    return TangentStep{wrap_unit(r.point), std::move(r.jacobian)};
  };
}

TangentMap dressed_tangent_map(const DressedHamiltonian& fh, const ode::Options& options) {
  auto owned = std::make_shared<const DressedHamiltonian>(fh);
  return [owned, options](const Eigen::VectorXd& x) {
    const Monodromy m = monodromy(*owned, ProductPoint::from_state(x, owned->base_dim()), 1, options);
    return TangentStep{m.image.state(), m.matrix};
  };
}

TorusMap base_map(BaseHamiltonianPtr h, const ode::Options& options) {
  auto flow = std::make_shared<const BaseFlow>(std::move(h));
  return [flow, options](const Eigen::VectorXd& p) { return wrap_unit(flow->flow(p, 0.0, 1.0, options)); };
}

TorusMap dressed_map(const DressedHamiltonian& fh, const ode::Options& options) {
  auto owned = std::make_shared<const DressedHamiltonian>(fh);
  return [owned, options](const Eigen::VectorXd& x) {
    return time_k_map(*owned, ProductPoint::from_state(x, owned->base_dim()), 1, options).state();
  };
}

TorusMap dressed_map_base_controlled(const DressedHamiltonian& fh, const ode::Options& options) {
  ode::Options matched = options;
  matched.control_size = fh.base_dim();
  return dressed_map(fh, matched);
}

std::vector<Eigen::VectorXd> embed_grid(const std::vector<Eigen::VectorXd>& base_points, const Eigen::VectorXd& z0,
                                        double eta) {
  std::vector<Eigen::VectorXd> out;
  out.reserve(base_points.size());
  for (const auto& p : base_points) out.push_back(embed_slice(p, z0, eta).state());
  return out;
}

LyapunovResult lyapunov_max(const TangentMap& f, const Eigen::VectorXd& x0, int n, Eigen::VectorXd v0) {
  if (n < 100) throw std::invalid_argument("lyapunov_max needs n >= 100");
  if (v0.size() == 0) {
    v0.resize(x0.size());
    for (Eigen::Index i = 0; i < v0.size(); ++i) v0[i] = 1.0 + 0.618033988749895 * double(i);
  }
  if (v0.size() != x0.size()) throw std::invalid_argument("lyapunov_max: tangent vector has the wrong size");
  const double norm0 = v0.norm();
  if (!(norm0 > 0.0)) throw std::invalid_argument("lyapunov_max: zero tangent vector");
  Eigen::VectorXd v = v0 / norm0;
  Eigen::VectorXd x = x0;
  LyapunovResult out;
  out.n = n;
  out.running.reserve(n);
  double sum = 0.0;
  for (int j = 1; j <= n; ++j) {
    TangentStep step = f(x);
    v = step.jacobian * v;
    const double growth = v.norm();
    if (!std::isfinite(growth) || growth == 0.0) {
      throw std::overflow_error("lyapunov_max: tangent vector norm is " + std::to_string(growth) + " at step " +
                                std::to_string(j));
    }
    v /= growth;
    sum += std::log(growth);
    out.running.push_back(sum / j);
    x = std::move(step.image);
  }
  out.value = sum / n;
  return out;
}

std::vector<Eigen::VectorXd> uniform_grid(int dims, int per_dim) {
  if (dims < 1 || per_dim < 1) throw std::invalid_argument("uniform_grid needs positive sizes");
  std::size_t total = 1;
  for (int d = 0; d < dims; ++d) total *= static_cast<std::size_t>(per_dim);
  std::vector<Eigen::VectorXd> grid;
  grid.reserve(total);
  std::vector<int> idx(dims, 0);
  for (std::size_t i = 0; i < total; ++i) {
    Eigen::VectorXd x(dims);
    for (int d = 0; d < dims; ++d) x[d] = (idx[d] + 0.5) / per_dim;
    grid.push_back(std::move(x));
    for (int d = dims - 1; d >= 0; --d) {
      if (++idx[d] < per_dim) break;
      idx[d] = 0;
    }
  }
  return grid;
}

namespace {

std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
  h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  return h;
}

}  // namespace

SeparatedResult separated_entropy(const TorusMap& f, const std::vector<Eigen::VectorXd>& grid,
                                  const SeparatedOptions& options) {
  const double eps = options.epsilon;
  if (!(eps > 0.0 && eps < 0.25)) throw std::invalid_argument("separated_entropy needs eps in (0, 0.25)");
  if (options.n_max < 1) throw std::invalid_argument("separated_entropy needs n_max >= 1");
  if (grid.empty()) throw std::invalid_argument("separated_entropy needs a nonempty grid");
  if (grid.size() > 1000000) throw std::invalid_argument("separated_entropy grid is limited to 1e6 points");
  const int dims = static_cast<int>(grid.front().size());
  const int md = options.metric_dims > 0 ? options.metric_dims : dims;
  if (md > dims) throw std::invalid_argument("metric_dims exceeds the state dimension");
  const int n_max = options.n_max;
  const std::size_t count = grid.size();

  // projected orbits, point-major
  const std::size_t stride = static_cast<std::size_t>(n_max) * md;
  std::vector<double> orbit(count * stride);
  parallel_for(count, [&](std::size_t i) {
    Eigen::VectorXd x = wrap_unit(grid[i]);
    double* out = orbit.data() + i * stride;
    for (int j = 0; j < n_max; ++j) {
      for (int c = 0; c < md; ++c) out[j * md + c] = x[c];
      if (j + 1 < n_max) x = wrap_unit(f(x));
    }
  });

  const int cells = static_cast<int>(std::floor(1.0 / eps));
  auto cell_of = [cells](double v) { return std::min(cells - 1, static_cast<int>(v * cells)); };
  // neighbour offsets in the 2 md hashed coordinates, deduplicated when
  // there are fewer than three cells per axis
  std::vector<int> offsets{0};
  if (cells >= 2) offsets.push_back(1);
  if (cells >= 3) offsets.push_back(cells - 1);
  const int hashed = 2 * md;

  auto separated = [&](std::size_t a, std::size_t b, int n) {
    const double* oa = orbit.data() + a * stride;
    const double* ob = orbit.data() + b * stride;
    for (int j = 0; j < n * md; ++j) {
      if (circular_distance(oa[j], ob[j]) > eps) return true;
    }
    return false;
  };

  // greedy scan in grid order, starting from `seed_set`
  auto greedy = [&](int n, const std::vector<std::size_t>& seed_set) {
    auto cell_key = [&](std::size_t i, std::vector<int>& k) {
      const double* o = orbit.data() + i * stride;
      for (int c = 0; c < md; ++c) {
        k[c] = cell_of(o[c]);
        k[md + c] = cell_of(o[(n - 1) * md + c]);
      }
    };
    auto hash_key = [](const std::vector<int>& k) {
      std::uint64_t h = 0x12345678ULL;
      for (int v : k) h = mix(h, static_cast<std::uint64_t>(v));
      return h;
    };
    std::vector<std::size_t> accepted = seed_set;
    std::vector<char> in_set(count, 0);
    std::unordered_map<std::uint64_t, std::vector<std::size_t>> table;
    table.reserve(accepted.size() * 2 + 16);
    std::vector<int> key(hashed);
    for (std::size_t s : accepted) {
      in_set[s] = 1;
      cell_key(s, key);
      table[hash_key(key)].push_back(s);
    }
    std::vector<int> probe(hashed);
    std::vector<std::size_t> digit(hashed);
    for (std::size_t i = 0; i < count; ++i) {
      if (in_set[i]) continue;
      cell_key(i, key);
      bool conflict = false;
      std::fill(digit.begin(), digit.end(), 0);
      // enumerate neighbour cells in mixed radix over the hashed coordinates
      while (!conflict) {
        for (int c = 0; c < hashed; ++c) probe[c] = (key[c] + offsets[digit[c]]) % cells;
        auto it = table.find(hash_key(probe));
        if (it != table.end()) {
          for (std::size_t s : it->second) {
            if (!separated(i, s, n)) {
              conflict = true;
              break;
            }
          }
        }
        int c = 0;
        while (c < hashed && ++digit[c] == offsets.size()) digit[c++] = 0;
        if (c == hashed) break;
      }
      if (!conflict) {
        accepted.push_back(i);
        in_set[i] = 1;
        table[hash_key(key)].push_back(i);
      }
    }
    return accepted;
  };

  SeparatedResult out;
  out.grid_size = count;
  std::vector<std::size_t> previous;
  for (int n = 1; n <= n_max; ++n) {
    std::vector<std::size_t> current = greedy(n, {});
    // the previous set is still separated at window n; extending it keeps
    // the counts nondecreasing when the fresh scan comes out smaller
    if (current.size() < previous.size()) current = greedy(n, previous);
    previous = std::move(current);
    out.counts.push_back(previous.size());
    out.rates.push_back(std::log(double(previous.size())) / n);
  }

  out.fit_from = options.fit_from > 0 ? options.fit_from : std::min(2, n_max);
  out.fit_to = out.fit_from - 1;
  std::vector<double> xs;
  std::vector<double> ys;
  for (int n = out.fit_from; n <= n_max; ++n) {
    const std::size_t nc = out.counts[n - 1];
    if (double(nc) > options.saturation * double(count)) break;
    xs.push_back(n);
    ys.push_back(std::log(double(nc)));
    out.fit_to = n;
  }
  if (xs.size() >= 2) {
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / ys.size();
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sxy += (xs[i] - mx) * (ys[i] - my);
      sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    out.plateau = std::max(0.0, sxy / sxx);
  }
  return out;
}

double barcode_entropy(const std::vector<Barcode>& bars, double epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("barcode_entropy needs eps > 0");
  const int K = static_cast<int>(bars.size());
  double best = 0.0;
  for (int k = (K + 1) / 2; k <= K; ++k) {
    if (k == 0) continue;
    const std::size_t c = bars[k - 1].finite_longer_than(epsilon);
    best = std::max(best, std::log(std::max<double>(1.0, double(c))) / k);
  }
  return best;
}

std::string to_string(EntropyMethod m) { return m == EntropyMethod::Lyapunov ? "lyapunov" : "separated"; }

PointSampler uniform_sampler(int dims) {
  return [dims](std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Eigen::VectorXd x(dims);
    for (int i = 0; i < dims; ++i) x[i] = u(rng);
    return x;
  };
}

EntropyEstimate lyapunov_estimate(const TangentMap& f, const PointSampler& sampler, int n,
                                  const std::vector<std::uint64_t>& seeds, const Eigen::VectorXd& v0) {
  if (seeds.empty()) throw std::invalid_argument("lyapunov_estimate needs at least one seed");
  EntropyEstimate est;
  est.method = EntropyMethod::Lyapunov;
  est.window = n;
  est.samples = seeds.size();
  est.seeds = seeds;
  est.per_seed.assign(seeds.size(), 0.0);
  std::vector<Eigen::VectorXd> starts;
  for (std::uint64_t s : seeds) {
    std::mt19937_64 rng(s);
    starts.push_back(sampler(rng));
  }
  parallel_for(seeds.size(), [&](std::size_t i) { est.per_seed[i] = lyapunov_max(f, starts[i], n, v0).value; });
  double sum = 0.0;
  for (double v : est.per_seed) sum += v;
  est.value = std::max(0.0, sum / seeds.size());
  est.band_min = *std::min_element(est.per_seed.begin(), est.per_seed.end());
  est.band_max = *std::max_element(est.per_seed.begin(), est.per_seed.end());
  return est;
}

}  // namespace pseudorot
