#include "pseudorot/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/SVD>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "pseudorot/base_systems.hpp"
#include "pseudorot/parallel.hpp"
#include "pseudorot/torus_geometry.hpp"

namespace pseudorot {

namespace {

ode::Rhs dressed_rhs(const DressedHamiltonian& fh) {
  return [&fh](double t, const ode::Vector& y, ode::Vector& dy) { fh.vector_field(t, y, dy); };
}

constexpr int kHistogramBins = 20;

std::size_t histogram_bin(double d) {
  if (!(d > 0.0)) return 0;
  const double l = std::floor(std::log10(d));
  if (l < -17.0) return 0;
  if (l >= 1.0) return kHistogramBins - 1;
  return static_cast<std::size_t>(l + 17.0) + 1;
}

double g_time_integral(const DressedHamiltonian& fh, const Eigen::VectorXd& p, double theta, int k) {
  auto integrand = [&](double t) { return fh.g(t, p, theta); };
  double one = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, 0.0, 1.0, 15, 1e-15);
  return k * one;
}

}  // namespace

ProductPoint ProductPoint::from_state(const Eigen::Ref<const Eigen::VectorXd>& x, int base_dim) {
  ProductPoint pt;
  const Eigen::Index zd = x.size() - base_dim - 1;
  if (base_dim < 0 || zd < 0) throw std::invalid_argument("state too short for a product point");
  pt.p = wrap_unit(x.head(base_dim));
  pt.z = wrap_unit(x.segment(base_dim, zd));
  pt.theta = wrap_unit(x[x.size() - 1]);
  return pt;
}

Eigen::VectorXd ProductPoint::state() const {
  Eigen::VectorXd x(dim());
  x << p, z, theta;
  return x;
}

ProductPoint embed_slice(const Eigen::Ref<const Eigen::VectorXd>& p, const Eigen::Ref<const Eigen::VectorXd>& z0,
                         double eta) {
  ProductPoint pt;
  pt.p = wrap_unit(p);
  pt.z = wrap_unit(z0);
  pt.theta = wrap_unit(eta);
  return pt;
}

void validate_flow_tolerance(double tol) {
  if (!(tol >= 1e-13 && tol <= 1e-3)) {
    throw std::invalid_argument("integrator tolerance must lie in [1e-13, 1e-3], got " + std::to_string(tol));
  }
}

Trajectory integrate_dressed(const DressedHamiltonian& fh, const ProductPoint& x0, double t0, double t1,
                             const ode::Options& options, int samples) {
  validate_flow_tolerance(options.tol);
  if (samples < 1) throw std::invalid_argument("trajectory needs at least one sample interval");
  if (!(t1 > t0)) throw std::invalid_argument("trajectory needs t1 > t0");
  Trajectory traj;
  for (int i = 0; i <= samples; ++i) traj.times.push_back(t0 + (t1 - t0) * i / samples);
  traj.times.back() = t1;
  traj.states = ode::integrate_dense(dressed_rhs(fh), t0, traj.times, x0.state(), options);
  for (const auto& s : traj.states) {
    traj.max_theta_drift = std::max(traj.max_theta_drift, std::fabs(s[fh.theta_index()] - x0.theta));
  }
  return traj;
}

Eigen::VectorXd flow_lifted(const DressedHamiltonian& fh, const Eigen::Ref<const Eigen::VectorXd>& x0, double t0,
                            double duration, const ode::Options& options) {
  validate_flow_tolerance(options.tol);
  return ode::integrate(dressed_rhs(fh), t0, t0 + duration, x0, options);
}

ProductPoint time_k_map(const DressedHamiltonian& fh, const ProductPoint& x0, int k, const ode::Options& options) {
  if (k < 1) throw std::invalid_argument("time_k_map needs k >= 1");
  validate_flow_tolerance(options.tol);
  ProductPoint x = x0;
  const auto rhs = dressed_rhs(fh);
  for (int i = 0; i < k; ++i) {
    x = ProductPoint::from_state(ode::integrate(rhs, 0.0, 1.0, x.state(), options), fh.base_dim());
  }
  return x;
}

Monodromy monodromy(const DressedHamiltonian& fh, const ProductPoint& x0, int k, const ode::Options& options) {
  if (k < 1) throw std::invalid_argument("monodromy needs k >= 1");
  validate_flow_tolerance(options.tol);
  const int d = fh.state_dim();
  ode::Rhs rhs = [&fh, d](double t, const ode::Vector& y, ode::Vector& dy) {
    const auto x = y.head(d);
    fh.vector_field(t, x, dy.head(d));
    Eigen::MatrixXd a(d, d);
    fh.vector_field_jacobian(t, x, a);
    Eigen::Map<const Eigen::MatrixXd> m(y.data() + d, d, d);
    Eigen::Map<Eigen::MatrixXd> dm(dy.data() + d, d, d);
    dm.noalias() = a * m;
  };
  ode::Vector y0(d + d * d);
  y0.head(d) = x0.state();
  Eigen::Map<Eigen::MatrixXd>(y0.data() + d, d, d).setIdentity();
  const ode::Vector y = ode::integrate(rhs, 0.0, double(k), y0, options);

  Monodromy out;
  out.k = k;
  out.basepoint = x0;
  out.image = ProductPoint::from_state(y.head(d), fh.base_dim());
  out.matrix = Eigen::Map<const Eigen::MatrixXd>(y.data() + d, d, d);
  const Eigen::MatrixXd& omega = fh.structure().matrix();
  out.symplectic_residual = (out.matrix.transpose() * omega * out.matrix - omega).cwiseAbs().maxCoeff();
  return out;
}

FixedSetScanReport fixed_set_scan(const DressedHamiltonian& fh, const FixedSetScanOptions& scan,
                                  const ode::Options& options) {
  validate_flow_tolerance(options.tol);
  if (scan.theta_grid < 1 || scan.samples_per_theta < 1) throw std::invalid_argument("empty fixed-set scan");
  if (scan.ks.empty()) throw std::invalid_argument("fixed-set scan needs at least one iterate");
  std::vector<int> ks = scan.ks;
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  if (ks.front() < 1) throw std::invalid_argument("iterates must be >= 1");

  const auto& prof = fh.profiles();
  const double resolution = 0.5 / scan.theta_grid;
  auto on_level = [&](double th) {
    return circular_distance(th, prof.theta1) < resolution || circular_distance(th, prof.theta2) < resolution;
  };

  // theta values: the grid, plus both critical levels when the grid misses them
  std::vector<double> thetas;
  for (int j = 0; j < scan.theta_grid; ++j) thetas.push_back(double(j) / scan.theta_grid);
  for (double crit : {prof.theta1, prof.theta2}) {
    bool present = false;
    for (double th : thetas) present = present || th == crit;
    if (!present) thetas.push_back(crit);
  }

  FixedSetScanReport rep;
  rep.ks = ks;
  rep.degenerate = fh.degenerate();
  rep.fixed_threshold = scan.fixed_factor * options.tol;

  std::mt19937_64 rng(scan.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (double th : thetas) {
    for (int s = 0; s < scan.samples_per_theta; ++s) {
      ScanSample sample;
      sample.point.p.resize(fh.base_dim());
      sample.point.z.resize(fh.torus_dim() - 1);
      for (Eigen::Index i = 0; i < sample.point.p.size(); ++i) sample.point.p[i] = unit(rng);
      for (Eigen::Index i = 0; i < sample.point.z.size(); ++i) sample.point.z[i] = unit(rng);
      // the critical levels are exact samples, not grid approximations
      sample.on_level = on_level(th);
      sample.point.theta = th;
      sample.alpha_prime = prof.alpha.first(th);
      rep.samples.push_back(std::move(sample));
    }
  }

  const auto rhs = dressed_rhs(fh);
  parallel_for(rep.samples.size(), [&](std::size_t i) {
    auto& sample = rep.samples[i];
    Eigen::VectorXd x0 = sample.point.state();
    Eigen::VectorXd x = x0;
    int done = 0;
    for (int k : ks) {
      while (done < k) {
        x = wrap_unit(ode::integrate(rhs, 0.0, 1.0, x, options));
        ++done;
      }
      sample.displacement.push_back(torus_distance(x, x0));
    }
    sample.min_displacement = *std::min_element(sample.displacement.begin(), sample.displacement.end());
    sample.max_displacement = *std::max_element(sample.displacement.begin(), sample.displacement.end());
  });

  rep.on_level_histogram.assign(kHistogramBins, 0);
  rep.off_level_histogram.assign(kHistogramBins, 0);
  rep.min_off_level = std::numeric_limits<double>::infinity();
  for (const auto& s : rep.samples) {
    if (s.on_level) {
      ++rep.on_level_count;
      rep.max_on_level = std::max(rep.max_on_level, s.max_displacement);
      if (s.max_displacement <= rep.fixed_threshold) ++rep.on_level_fixed;
      ++rep.on_level_histogram[histogram_bin(s.max_displacement)];
    } else {
      rep.min_off_level = std::min(rep.min_off_level, s.min_displacement);
      ++rep.off_level_histogram[histogram_bin(s.min_displacement)];
      if (std::fabs(s.alpha_prime) > scan.alpha_prime_min) {
        ++rep.off_level_checked;
        if (s.min_displacement >= scan.moved_threshold) ++rep.off_level_moved;
      }
    }
  }
  rep.moved_fraction = rep.off_level_checked ? double(rep.off_level_moved) / double(rep.off_level_checked) : 0.0;
  const bool levels_fixed = rep.on_level_fixed == rep.on_level_count;
  if (rep.degenerate) {
    // H == 0: the whole space is fixed
    rep.pass = levels_fixed && rep.min_off_level <= rep.fixed_threshold;
  } else {
    rep.pass = levels_fixed && rep.moved_fraction >= scan.required_moved_fraction;
  }
  return rep;
}

DisplacementCheck displacement_formula_check(const DressedHamiltonian& fh, const ProductPoint& x0, int k,
                                             const ode::Options& options) {
  if (k < 1) throw std::invalid_argument("displacement check needs k >= 1");
  validate_flow_tolerance(options.tol);
  const int d = fh.state_dim();
  const int bd = fh.base_dim();
  ode::Rhs rhs = [&fh, d, bd](double t, const ode::Vector& y, ode::Vector& dy) {
    const auto x = y.head(d);
    fh.vector_field(t, x, dy.head(d));
    dy[d] = fh.g(t, x.head(bd), x[d - 1]);
  };
  ode::Vector y0(d + 1);
  y0.head(d) = x0.state();
  y0[d] = 0.0;
  const ode::Vector y = ode::integrate(rhs, 0.0, double(k), y0, options);

  DisplacementCheck out;
  const int zd = fh.torus_dim() - 1;
  out.lifted_z_displacement = y.segment(bd, zd) - y0.segment(bd, zd);
  out.g_bar = y[d];
  out.predicted = fh.profiles().alpha.first(x0.theta) * out.g_bar * fh.torus().distinguished_vector_field().head(zd);
  const double scale = std::max(out.predicted.cwiseAbs().maxCoeff(), 1e-300);
  out.relative_residual = (out.lifted_z_displacement - out.predicted).cwiseAbs().maxCoeff() / scale;
  return out;
}

MorseBottResult morse_bott_rank(const DressedHamiltonian& fh, const ProductPoint& y, int k,
                                const ode::Options& options, double kernel_threshold) {
  const auto& prof = fh.profiles();
  const bool level1 = circular_distance(y.theta, prof.theta1) <= 1e-12;
  const bool level2 = circular_distance(y.theta, prof.theta2) <= 1e-12;
  if (!level1 && !level2) {
    throw std::invalid_argument("morse_bott_rank: point is not on a critical level (theta = " +
                                std::to_string(y.theta) + ")");
  }
  const Monodromy mono = monodromy(fh, y, k, options);
  MorseBottResult out;
  out.degenerate = fh.degenerate();
  out.symplectic_residual = mono.symplectic_residual;
  out.displacement = torus_distance(mono.image.state(), y.state());
  if (out.displacement > 1e3 * options.tol) {
    throw std::invalid_argument("morse_bott_rank: point is not fixed (displacement " +
                                std::to_string(out.displacement) + ")");
  }

  const int d = fh.state_dim();
  const Eigen::MatrixXd a = mono.matrix - Eigen::MatrixXd::Identity(d, d);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  const Eigen::VectorXd sv = svd.singularValues();
  out.singular_values.assign(sv.data(), sv.data() + sv.size());
  out.kernel_dim = 0;
  for (double s : out.singular_values) {
    if (s <= kernel_threshold) ++out.kernel_dim;
  }
  out.rank = d - out.kernel_dim;
  if (out.rank == 0 || out.rank == d) {
    out.gap = 1.0;
  } else {
    const double next = sv[out.rank];
    out.gap = next > 0.0 ? sv[out.rank - 1] / next : std::numeric_limits<double>::infinity();
  }

  const int bd = fh.base_dim();
  const int td = fh.torus_dim();
  const Eigen::VectorXd v = a.col(fh.theta_index());
  const Eigen::VectorXd& X = fh.torus().distinguished_vector_field();
  const Eigen::VectorXd tv = v.segment(bd, td);
  out.base_block_norm = v.head(bd).cwiseAbs().maxCoeff();
  out.theta_coefficient = tv.dot(X) / X.squaredNorm();
  const double theta_i = level1 ? prof.theta1 : prof.theta2;
  out.predicted_coefficient = g_time_integral(fh, y.p, theta_i, k) * prof.alpha.second(theta_i);
  out.coefficient_relative_error =
      out.predicted_coefficient != 0.0
          ? std::fabs(out.theta_coefficient - out.predicted_coefficient) / std::fabs(out.predicted_coefficient)
          : std::fabs(out.theta_coefficient);
  const Eigen::VectorXd piz = tv.head(td - 1);
  const Eigen::VectorXd pix = X.head(td - 1);
  if (piz.norm() > 0.0) {
    const Eigen::VectorXd perp = piz - (piz.dot(pix) / pix.squaredNorm()) * pix;
    out.angle_to_x = std::atan2(perp.norm(), std::fabs(piz.dot(pix)) / pix.norm());
  }
  return out;
}

SemiconjugacyResult semiconjugacy(const DressedHamiltonian& fh, const Eigen::Ref<const Eigen::VectorXd>& p,
                                  const Eigen::Ref<const Eigen::VectorXd>& z0, int k, const ode::Options& options) {
  if (k < 1) throw std::invalid_argument("semiconjugacy needs k >= 1");
  validate_flow_tolerance(options.tol);
  const int bd = fh.base_dim();
  const double eta = fh.profiles().eta;
  BaseFlow base(fh.base_ptr());
  const auto rhs_f = dressed_rhs(fh);
  ode::Rhs rhs_h = [&base](double t, const ode::Vector& y, ode::Vector& dy) { base.vector_field(t, y, dy); };

  SemiconjugacyResult out;
  {
    ode::Options matched = options;
    matched.tol = std::max(options.tol / 10.0, 1e-14);
    matched.control_size = bd;
    Eigen::VectorXd x = embed_slice(p, z0, eta).state();
    Eigen::VectorXd q = wrap_unit(p);
    for (int i = 0; i < k; ++i) {
      x = wrap_unit(ode::integrate(rhs_f, 0.0, 1.0, x, matched));
      q = wrap_unit(ode::integrate(rhs_h, 0.0, 1.0, q, matched));
    }
    out.residual = torus_distance(x.head(bd), q);
  }
  {
    ode::Options full = options;
    full.control_size = 0;
    Eigen::VectorXd x = embed_slice(p, z0, eta).state();
    for (int i = 0; i < k; ++i) {
      const Eigen::VectorXd next = wrap_unit(ode::integrate(rhs_f, 0.0, 1.0, x, full));
      const Eigen::VectorXd q = wrap_unit(ode::integrate(rhs_h, 0.0, 1.0, Eigen::VectorXd(x.head(bd)), full));
      out.step_residual = std::max(out.step_residual, torus_distance(next.head(bd), q));
      x = next;
    }
  }
  return out;
}

double semiconjugacy_residual(const DressedHamiltonian& fh, const Eigen::Ref<const Eigen::VectorXd>& p,
                              const Eigen::Ref<const Eigen::VectorXd>& z0, int k, const ode::Options& options) {
  return semiconjugacy(fh, p, z0, k, options).residual;
}

}  // namespace pseudorot
