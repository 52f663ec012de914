#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "pseudorot/base_systems.hpp"
#include "pseudorot/cli.hpp"
#include "pseudorot/entropy.hpp"
#include "pseudorot/flow.hpp"
#include "pseudorot/parallel.hpp"
#include "pseudorot/persistence.hpp"
#include "pseudorot/profiles.hpp"
#include "pseudorot/torus_geometry.hpp"

namespace pseudorot::cli {

namespace {

using nlohmann::json;

double symplectic_threshold(double tol) { return std::max(1e-6, 1e4 * tol); }

json vec_json(const Eigen::VectorXd& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    std::vector<double> row(m.cols());
    for (Eigen::Index j = 0; j < m.cols(); ++j) row[j] = m(i, j);
    rows.push_back(row);
  }
  return rows;
}

// JSON has no infinities; they are written as the string "inf".
json num(double v) {
  if (std::isinf(v)) return v > 0 ? json("inf") : json("-inf");
  if (std::isnan(v)) return json("nan");
  return json(v);
}

Eigen::VectorXd random_unit(std::mt19937_64& rng, int dims) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::VectorXd x(dims);
  for (int i = 0; i < dims; ++i) x[i] = u(rng);
  return x;
}

ProductPoint random_point(std::mt19937_64& rng, const DressedHamiltonian& fh, double theta) {
  ProductPoint pt;
  pt.p = random_unit(rng, fh.base_dim());
  pt.z = random_unit(rng, fh.torus_dim() - 1);
  pt.theta = wrap_unit(theta);
  return pt;
}

CheckRow skipped_row(const std::string& tag, const std::string& name, const std::string& note) {
  CheckRow row;
  row.tag = tag;
  row.name = name;
  row.pass = true;
  row.skipped = true;
  row.note = note;
  return row;
}

constexpr const char* kDegenerateNote = "H == 0: degenerate case, non-degeneracy claims do not apply";

CheckRow check_distinguished_field(const DressedHamiltonian& fh) {
  CheckRow row;
  row.tag = "distinguished-field";
  row.name = "X solves omega_irr(X, .) = -dy_n and equals (a_1, b_1, ..., 1, 0)";
  const auto& torus = fh.torus();
  const Eigen::VectorXd& x = torus.distinguished_vector_field();
  Eigen::VectorXd expected(torus.dim());
  for (int i = 0; i + 1 < torus.n(); ++i) {
    expected[2 * i] = torus.irrationality().a(i);
    expected[2 * i + 1] = torus.irrationality().b(i);
  }
  expected[torus.dim() - 2] = 1.0;
  expected[torus.dim() - 1] = 0.0;
  Eigen::VectorXd dy = Eigen::VectorXd::Zero(torus.dim());
  dy[torus.dim() - 1] = 1.0;
  const double err = (x - expected).cwiseAbs().maxCoeff();
  const double residual = contraction_residual(torus.matrix(), x, dy);
  row.pass = err <= 1e-12 && residual <= 1e-12 && x[torus.dim() - 1] == 0.0;
  row.measured = {{"max_error", err}, {"contraction_residual", residual}, {"theta_component", x[torus.dim() - 1]},
                  {"X", vec_json(x)}};
  return row;
}

CheckRow check_irrationality(const DressedHamiltonian& fh) {
  CheckRow row;
  row.tag = "irrationality";
  row.name = "no small integer relation among {1, a_i, b_i} (bounded-height surrogate)";
  const auto& vec = fh.torus().irrationality();
  const long height = default_relation_height(vec.n());
  const auto rel = find_integer_relation(vec, height);
  row.pass = !rel.has_value();
  row.measured = {{"height", height}, {"tolerance", 1e-9}};
  if (rel) {
    row.measured["relation"] = {{"constant", rel->constant},
                                {"coefficients", rel->coefficients},
                                {"residual", rel->residual}};
  }
  return row;
}

CheckRow check_profiles(const DressedHamiltonian& fh) {
  CheckRow row;
  row.tag = "profiles";
  row.name = "alpha Morse with two critical points, beta(alpha(theta_i)) = 0, beta(alpha(eta)) = 1";
  const auto& p = fh.profiles();
  try {
    validate_profiles(p);
    row.pass = true;
  } catch (const std::exception& e) {
    row.pass = false;
    row.note = e.what();
  }
  row.measured = {{"theta1", p.theta1}, {"theta2", p.theta2}, {"eta", p.eta}};
  return row;
}

json scan_sample_json(const ScanSample& s, std::size_t index) {
  return {{"index", index},
          {"theta", s.point.theta},
          {"on_level", s.on_level},
          {"alpha_prime", s.alpha_prime},
          {"p", vec_json(s.point.p)},
          {"z", vec_json(s.point.z)},
          {"displacement", s.displacement},
          {"min_displacement", s.min_displacement},
          {"max_displacement", s.max_displacement}};
}

CheckRow check_fixed_set(const DressedHamiltonian& fh, const ExperimentConfig& c, const ode::Options& o,
                         json& data) {
  FixedSetScanOptions scan;
  scan.theta_grid = c.theta_grid;
  scan.samples_per_theta = c.samples_per_theta;
  scan.ks = c.ks;
  scan.seed = c.seed;
  const FixedSetScanReport rep = fixed_set_scan(fh, scan, o);
  CheckRow row;
  row.tag = "fixed-set";
  row.name = "fixed and periodic points of phi^k lie exactly on the two critical theta levels";
  row.pass = rep.pass;
  row.measured = {{"ks", rep.ks},
                  {"fixed_threshold", rep.fixed_threshold},
                  {"max_on_level_displacement", rep.max_on_level},
                  {"min_off_level_displacement", num(rep.min_off_level)},
                  {"on_level_samples", rep.on_level_count},
                  {"on_level_fixed", rep.on_level_fixed},
                  {"off_level_checked", rep.off_level_checked},
                  {"off_level_moved", rep.off_level_moved},
                  {"moved_fraction", rep.moved_fraction},
                  {"on_level_histogram_log10", rep.on_level_histogram},
                  {"off_level_histogram_log10", rep.off_level_histogram},
                  {"degenerate", rep.degenerate}};
  if (rep.degenerate) row.note = "H == 0: every point is fixed";
  json samples = json::array();
  for (std::size_t i = 0; i < rep.samples.size(); ++i) samples.push_back(scan_sample_json(rep.samples[i], i));
  data["fixed_scan"] = {{"ks", rep.ks}, {"samples", samples}};
  return row;
}

std::vector<CheckRow> check_morse_bott(const DressedHamiltonian& fh, const ExperimentConfig& c,
                                       const ode::Options& o) {
  std::vector<CheckRow> rows;
  for (int k : c.ks) {
    const std::string name = "D phi^" + std::to_string(k) + " - I has rank one on the fixed set (Morse-Bott)";
    if (fh.degenerate()) {
      rows.push_back(skipped_row("morse-bott", name, kDegenerateNote));
      rows.back().measured = {{"k", k}};
      continue;
    }
    std::mt19937_64 rng(c.seed + 1000003ULL * static_cast<std::uint64_t>(k));
    std::vector<ProductPoint> points;
    for (int j = 0; j < c.morse_bott_points; ++j) {
      points.push_back(random_point(rng, fh, j % 2 == 0 ? fh.profiles().theta1 : fh.profiles().theta2));
    }
    std::vector<MorseBottResult> results(points.size());
    std::vector<std::string> errors(points.size());
    parallel_for(points.size(), [&](std::size_t i) {
      try {
        results[i] = morse_bott_rank(fh, points[i], k, o);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    });
    CheckRow row;
    row.tag = "morse-bott";
    row.name = name;
    const int expected = fh.state_dim() - 1;
    double min_gap = kInfinity;
    double max_coef = 0.0;
    double max_base = 0.0;
    double max_angle = 0.0;
    double max_symp = 0.0;
    int min_kernel = fh.state_dim();
    int max_kernel = 0;
    bool ok = true;
    for (std::size_t i = 0; i < results.size(); ++i) {
      if (!errors[i].empty()) {
        ok = false;
        row.note = errors[i];
        continue;
      }
      const auto& r = results[i];
      min_gap = std::min(min_gap, r.gap);
      max_coef = std::max(max_coef, r.coefficient_relative_error);
      max_base = std::max(max_base, r.base_block_norm);
      max_angle = std::max(max_angle, r.angle_to_x);
      max_symp = std::max(max_symp, r.symplectic_residual);
      min_kernel = std::min(min_kernel, r.kernel_dim);
      max_kernel = std::max(max_kernel, r.kernel_dim);
    }
    ok = ok && min_kernel == expected && max_kernel == expected && min_gap >= 1e3 && max_coef <= 1e-4 &&
         max_base <= 1e-6 && max_angle <= 1e-4 && max_symp <= symplectic_threshold(o.tol);
    row.pass = ok;
    row.measured = {{"k", k},
                    {"points", points.size()},
                    {"expected_kernel_dim", expected},
                    {"kernel_dim_min", min_kernel},
                    {"kernel_dim_max", max_kernel},
                    {"min_gap", num(min_gap)},
                    {"max_theta_coefficient_relative_error", max_coef},
                    {"max_base_block_norm", max_base},
                    {"max_angle_to_x", max_angle},
                    {"max_symplectic_residual", max_symp}};
    rows.push_back(row);
  }
  return rows;
}

CheckRow check_spectrum(const DressedHamiltonian& fh, const ExperimentConfig& c, json& data) {
  CheckRow row;
  row.tag = "spectrum";
  row.name = "action spectrum is {C alpha(theta_1), C alpha(theta_2)} (quadrature at constant orbits)";
  const auto spec = fh.spectrum();
  std::mt19937_64 rng(c.seed + 77);
  double max_err = 0.0;
  json actions = json::array();
  for (double theta : {fh.profiles().theta1, fh.profiles().theta2}) {
    const double expected = fh.c() * fh.profiles().alpha.value(theta);
    for (int j = 0; j < 5; ++j) {
      const ProductPoint pt = random_point(rng, fh, theta);
      const double a = constant_orbit_action(fh, pt.state());
      // nearest spectral value
      double err = kInfinity;
      for (double s : spec) err = std::min(err, std::fabs(a - s));
      max_err = std::max(max_err, std::max(err, fh.degenerate() ? std::fabs(a) : std::fabs(a - expected)));
      actions.push_back({{"theta", theta}, {"action", a}});
    }
  }
  const std::size_t expected_size = fh.degenerate() ? 1 : 2;
  row.pass = spec.size() == expected_size && max_err <= 1e-10;
  row.measured = {{"spectrum", spec}, {"C", fh.c()}, {"max_action_error", max_err}, {"degenerate", fh.degenerate()}};
  if (fh.degenerate()) row.note = "H == 0: spectrum is {0}";
  data["spectrum"] = {{"closed_form", spec}, {"actions", actions}};
  return row;
}

// F(0) = 0: every homology class of M x T^{2n} is born at 0 and never dies
Barcode degenerate_barcode(const DressedHamiltonian& fh) {
  return kunneth_assemble(Barcode({Bar{0.0, kInfinity, 0, 1}}), betti_torus(fh.state_dim()));
}

CheckRow check_barcode(const DressedHamiltonian& fh, json& data) {
  const std::string name = "model barcode: only infinite bars, dim H_*(M x T^{2n-1}) at each spectral value";
  if (fh.degenerate()) {
    data["barcode"] = to_json(degenerate_barcode(fh));
    return skipped_row("barcode", name, kDegenerateNote);
  }
  CheckRow row;
  row.tag = "barcode";
  row.name = name;
  const Barcode b = model_floer_barcode(fh);
  const auto spec = fh.spectrum();
  const long long expected = product_total_betti(fh);
  bool ok = b.finite_count() == 0 && spec.size() == 2;
  json per_value = json::array();
  for (double s : spec) {
    const std::size_t n = b.count_born_at(s, 0.0);
    ok = ok && static_cast<long long>(n) == expected;
    per_value.push_back({{"value", s}, {"infinite_bars", n}});
  }
  // every endpoint in the spectrum
  bool endpoints = true;
  for (const Bar& bar : b.bars()) {
    endpoints = endpoints && std::find(spec.begin(), spec.end(), bar.birth) != spec.end();
  }
  row.pass = ok && endpoints;
  row.measured = {{"expected_per_value", expected},
                  {"per_value", per_value},
                  {"finite_bars", b.finite_count()},
                  {"total_bars", b.total()},
                  {"endpoints_in_spectrum", endpoints}};
  data["barcode"] = to_json(b);
  return row;
}

CheckRow check_kunneth(const DressedHamiltonian& fh, const ExperimentConfig& c) {
  const std::string name = "Kunneth assembly of the circle lower-star barcode and the homotopy f_t agree with the model";
  if (fh.degenerate()) return skipped_row("kunneth", name, kDegenerateNote);
  const KunnethCrossCheck k = kunneth_cross_check(fh, c.barcode_grid);
  CheckRow row;
  row.tag = "kunneth";
  row.name = name;
  row.pass = k.pass;
  row.measured = {{"grid", c.barcode_grid},
                  {"counts_match", k.counts_match},
                  {"max_birth_error", num(k.max_birth_error)},
                  {"homotopy_max_bottleneck", num(k.homotopy_max_bottleneck)},
                  {"homotopy_max_finite_bars", k.homotopy_max_finite},
                  {"birth_tolerance", 1e-3}};
  return row;
}

std::vector<CheckRow> check_semiconjugacy(const DressedHamiltonian& fh, const ExperimentConfig& c,
                                          const ode::Options& o) {
  std::vector<CheckRow> rows;
  std::mt19937_64 rng(c.seed + 31337);
  std::vector<Eigen::VectorXd> ps;
  std::vector<Eigen::VectorXd> zs;
  for (int j = 0; j < c.semiconjugacy_points; ++j) {
    ps.push_back(random_unit(rng, fh.base_dim()));
    zs.push_back(random_unit(rng, fh.torus_dim() - 1));
  }
  for (int k : c.ks) {
    std::vector<SemiconjugacyResult> res(ps.size());
    parallel_for(ps.size(), [&](std::size_t i) { res[i] = semiconjugacy(fh, ps[i], zs[i], k, o); });
    double worst = 0.0;
    double worst_step = 0.0;
    for (const auto& r : res) {
      worst = std::max(worst, r.residual);
      worst_step = std::max(worst_step, r.step_residual);
    }
    CheckRow row;
    row.tag = "semiconjugacy";
    row.name = "pi_M phi^" + std::to_string(k) + "_F(H) on the slice theta = eta equals phi^" + std::to_string(k) +
               "_H";
    const double bound = 1e2 * k * o.tol;
    row.pass = worst <= bound;
    row.measured = {{"k", k},
                    {"points", ps.size()},
                    {"max_residual", worst},
                    {"bound", bound},
                    {"max_step_residual", worst_step}};
    rows.push_back(row);
  }
  return rows;
}

CheckRow check_barcode_entropy(const DressedHamiltonian& fh, const ExperimentConfig& c) {
  const std::string name = "barcode entropy of the iterates is zero";
  if (fh.degenerate()) return skipped_row("barcode-entropy", name, kDegenerateNote);
  std::vector<Barcode> seq;
  for (int k = 1; k <= c.barcode_iterates; ++k) seq.push_back(model_floer_barcode(fh.iterate(k)));
  CheckRow row;
  row.tag = "barcode-entropy";
  row.name = name;
  json values = json::array();
  bool ok = true;
  for (double eps : c.barcode_epsilons) {
    const double h = barcode_entropy(seq, eps);
    ok = ok && h == 0.0;
    values.push_back({{"epsilon", eps}, {"entropy", h}});
  }
  std::size_t max_finite = 0;
  for (const auto& b : seq) max_finite = std::max(max_finite, b.finite_count());
  row.pass = ok;
  row.measured = {{"iterates", c.barcode_iterates}, {"values", values}, {"max_finite_bars", max_finite}};
  return row;
}

CheckRow check_iteration(const DressedHamiltonian& fh, const ExperimentConfig& c) {
  CheckRow row;
  row.tag = "iteration";
  row.name = "F(H^#k) = F(H)^#k pointwise and C_{H^#k} = k C_H";
  std::mt19937_64 rng(c.seed + 4242);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double max_diff = 0.0;
  double max_c_rel = 0.0;
  bool exact_scaling = true;
  json per_k = json::array();
  for (int k : c.ks) {
    const DressedHamiltonian it = fh.iterate(k);
    exact_scaling = exact_scaling && it.c() == k * fh.c();
    const double recomputed = c_norm(it.base(), it.profiles());
    const double rel = fh.c() > 0.0 ? std::fabs(recomputed - k * fh.c()) / (k * fh.c()) : std::fabs(recomputed);
    max_c_rel = std::max(max_c_rel, rel);
    double diff_k = 0.0;
    for (int j = 0; j < c.iteration_samples; ++j) {
      const double t = u(rng);
      const Eigen::VectorXd x = random_unit(rng, fh.state_dim());
      const double lhs = it.eval_state(t, x);
      const double rhs = k * fh.eval_state(k * t, x);
      diff_k = std::max(diff_k, std::fabs(lhs - rhs));
    }
    max_diff = std::max(max_diff, diff_k);
    per_k.push_back({{"k", k}, {"max_difference", diff_k}, {"recomputed_C_relative_error", rel}});
  }
  row.pass = max_diff <= 1e-12 && exact_scaling && max_c_rel <= 1e-6;
  row.measured = {{"samples_per_k", c.iteration_samples},
                  {"max_difference", max_diff},
                  {"exact_C_scaling", exact_scaling},
                  {"max_recomputed_C_relative_error", max_c_rel},
                  {"per_k", per_k}};
  return row;
}

CheckRow check_theta_conservation(const DressedHamiltonian& fh, const ExperimentConfig& c, const ode::Options& o) {
  CheckRow row;
  row.tag = "theta-conservation";
  row.name = "theta is a first integral of the dressed flow";
  std::mt19937_64 rng(c.seed + 999);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double drift = 0.0;
  for (int j = 0; j < 5; ++j) {
    const ProductPoint pt = random_point(rng, fh, u(rng));
    drift = std::max(drift, integrate_dressed(fh, pt, 0.0, 1.0, o, 20).max_theta_drift);
  }
  row.pass = drift <= 10.0 * o.tol;
  row.measured = {{"max_theta_drift", drift}, {"bound", 10.0 * o.tol}};
  return row;
}

CheckRow check_symplecticity(const DressedHamiltonian& fh, const ExperimentConfig& c, const ode::Options& o) {
  CheckRow row;
  row.tag = "symplecticity";
  row.name = "monodromy preserves omega + omega_irr";
  std::mt19937_64 rng(c.seed + 555);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int j = 0; j < 3; ++j) {
    const ProductPoint pt = random_point(rng, fh, u(rng));
    worst = std::max(worst, monodromy(fh, pt, 1, o).symplectic_residual);
  }
  const double bound = symplectic_threshold(o.tol);
  row.pass = worst <= bound;
  row.measured = {{"max_residual", worst}, {"bound", bound}};
  return row;
}

Report make_report(const std::string& command, const ExperimentConfig& c) {
  Report r;
  r.command = command;
  r.config = config_to_json(c);
  return r;
}

ProductPoint flow_start(const DressedHamiltonian& fh, const ExperimentConfig& c) {
  if (c.flow_point.empty()) {
    ProductPoint pt;
    pt.p = Eigen::VectorXd::Constant(fh.base_dim(), 0.3);
    pt.z = Eigen::VectorXd::Constant(fh.torus_dim() - 1, 0.1);
    pt.theta = fh.profiles().eta;
    return pt;
  }
  if (static_cast<int>(c.flow_point.size()) != fh.state_dim()) {
    throw ConfigError(0, "flow.point needs " + std::to_string(fh.state_dim()) + " coordinates");
  }
  const Eigen::Map<const Eigen::VectorXd> x(c.flow_point.data(), c.flow_point.size());
  return ProductPoint::from_state(x, fh.base_dim());
}

}  // namespace

bool Report::pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckRow& r) { return r.pass; });
}

nlohmann::json to_json(const Report& report) {
  json checks = json::array();
  for (const auto& r : report.checks) {
    json row = {{"tag", r.tag}, {"name", r.name}, {"pass", r.pass}, {"skipped", r.skipped}, {"measured", r.measured}};
    if (!r.note.empty()) row["note"] = r.note;
    checks.push_back(row);
  }
  return {{"command", report.command},
          {"pass", report.pass()},
          {"config", report.config},
          {"checks", checks},
          {"data", report.data},
          {"disclaimer",
           "numerical evidence at finite tolerance; barcodes use Morse degrees of the product model; entropy "
           "values are heuristic estimates"}};
}

Format parse_format(const std::string& text) {
  if (text == "json") return Format::Json;
  if (text == "csv") return Format::Csv;
  if (text == "svg") return Format::Svg;
  throw std::invalid_argument("unknown format '" + text + "' (json, csv or svg)");
}

Report run_verify(const ExperimentConfig& c) {
  validate_config(c);
  const DressedHamiltonian fh = build_dressed(c);
  const ode::Options o = integrator_options(c);
  Report r = make_report("verify", c);
  r.data["C"] = fh.c();
  r.data["degenerate"] = fh.degenerate();
  r.checks.push_back(check_distinguished_field(fh));
  r.checks.push_back(check_irrationality(fh));
  r.checks.push_back(check_profiles(fh));
  r.checks.push_back(check_theta_conservation(fh, c, o));
  r.checks.push_back(check_symplecticity(fh, c, o));
  r.checks.push_back(check_fixed_set(fh, c, o, r.data));
  for (auto& row : check_morse_bott(fh, c, o)) r.checks.push_back(std::move(row));
  r.checks.push_back(check_spectrum(fh, c, r.data));
  r.checks.push_back(check_barcode(fh, r.data));
  r.checks.push_back(check_kunneth(fh, c));
  for (auto& row : check_semiconjugacy(fh, c, o)) r.checks.push_back(std::move(row));
  r.checks.push_back(check_barcode_entropy(fh, c));
  r.checks.push_back(check_iteration(fh, c));
  return r;
}

Report run_flow(const ExperimentConfig& c) {
  validate_config(c);
  const DressedHamiltonian fh = build_dressed(c);
  const ode::Options o = integrator_options(c);
  Report r = make_report("flow", c);
  const ProductPoint x0 = flow_start(fh, c);
  const Trajectory traj = integrate_dressed(fh, x0, c.flow_t0, c.flow_t1, o, c.flow_samples);
  json states = json::array();
  for (const auto& s : traj.states) states.push_back(vec_json(s));
  r.data["trajectory"] = {{"times", traj.times}, {"states", states}};

  CheckRow drift;
  drift.tag = "theta-conservation";
  drift.name = "theta is constant along the trajectory";
  drift.pass = traj.max_theta_drift <= 10.0 * o.tol;
  drift.measured = {{"max_theta_drift", traj.max_theta_drift}, {"bound", 10.0 * o.tol}};
  r.checks.push_back(drift);

  if (fh.base().autonomous()) {
    double energy = 0.0;
    const double f0 = fh.eval_state(traj.times.front(), traj.states.front());
    for (std::size_t i = 0; i < traj.states.size(); ++i) {
      energy = std::max(energy, std::fabs(fh.eval_state(traj.times[i], traj.states[i]) - f0));
    }
    CheckRow e;
    e.tag = "energy";
    e.name = "F(H) is conserved for autonomous H";
    const double scale = std::max(1.0, std::fabs(f0));
    e.pass = energy <= 10.0 * o.tol * scale;
    e.measured = {{"max_drift", energy}, {"bound", 10.0 * o.tol * scale}};
    r.checks.push_back(e);
  }

  const int k = c.ks.front();
  const Monodromy m = monodromy(fh, x0, k, o);
  r.data["monodromy"] = {{"k", k},
                         {"basepoint", vec_json(m.basepoint.state())},
                         {"image", vec_json(m.image.state())},
                         {"rows", m.matrix.rows()},
                         {"cols", m.matrix.cols()},
                         {"matrix", matrix_json(m.matrix)},
                         {"symplectic_residual", m.symplectic_residual}};
  CheckRow symp;
  symp.tag = "symplecticity";
  symp.name = "monodromy preserves omega + omega_irr";
  symp.pass = m.symplectic_residual <= symplectic_threshold(o.tol);
  symp.measured = {{"residual", m.symplectic_residual}, {"bound", symplectic_threshold(o.tol)}};
  r.checks.push_back(symp);
  return r;
}

Report run_barcode(const ExperimentConfig& c) {
  validate_config(c);
  const DressedHamiltonian fh = build_dressed(c);
  Report r = make_report("barcode", c);
  r.checks.push_back(check_barcode(fh, r.data));
  r.checks.push_back(check_kunneth(fh, c));
  r.checks.push_back(check_barcode_entropy(fh, c));
  return r;
}

Report run_entropy(const ExperimentConfig& c) {
  validate_config(c);
  const DressedHamiltonian fh = build_dressed(c);
  ode::Options o = integrator_options(c);
  o.tol = c.entropy_tol;
  Report r = make_report("entropy", c);
  std::vector<std::uint64_t> seeds;
  for (int i = 0; i < c.entropy_seeds; ++i) seeds.push_back(c.seed + static_cast<std::uint64_t>(i));
  const Eigen::VectorXd z0 = Eigen::VectorXd::Constant(fh.torus_dim() - 1, 0.1);
  const double eta = fh.profiles().eta;
  const bool lyap = c.entropy_method != "separated";
  const bool sep = c.entropy_method != "lyapunov";
  auto estimate_json = [](const EntropyEstimate& e) {
    return json{{"method", to_string(e.method)}, {"value", e.value},   {"window", e.window},
                {"samples", e.samples},          {"band_min", e.band_min}, {"band_max", e.band_max},
                {"seeds", e.seeds},              {"per_seed", e.per_seed}};
  };
  if (lyap) {
    const int bd = fh.base_dim();
    Eigen::VectorXd v_base(bd);
    for (int i = 0; i < bd; ++i) v_base[i] = 1.0 + 0.618033988749895 * i;
    const EntropyEstimate base =
        lyapunov_estimate(base_tangent_map(fh.base_ptr(), o), uniform_sampler(bd), c.lyapunov_steps, seeds, v_base);
    r.data["lyapunov"]["base"] = estimate_json(base);
    if (c.entropy_slice) {
      Eigen::VectorXd v_slice = Eigen::VectorXd::Zero(fh.state_dim());
      v_slice.head(bd) = v_base;
      const PointSampler sampler = [&](std::mt19937_64& rng) {
        return embed_slice(uniform_sampler(bd)(rng), z0, eta).state();
      };
      const EntropyEstimate slice =
          lyapunov_estimate(dressed_tangent_map(fh, o), sampler, c.lyapunov_steps, seeds, v_slice);
      r.data["lyapunov"]["slice"] = estimate_json(slice);
      CheckRow row;
      row.tag = "slice-consistency";
      row.name = "Lyapunov exponent on the slice theta = eta agrees with the base map";
      const double scale = std::max(std::fabs(base.value), 1e-3);
      const double rel = std::fabs(slice.value - base.value) / scale;
      row.pass = rel <= 0.05;
      row.measured = {{"base", base.value}, {"slice", slice.value}, {"relative_difference", rel}, {"bound", 0.05}};
      r.checks.push_back(row);
    }
  }
  if (sep) {
    SeparatedOptions so;
    so.epsilon = c.separated_epsilon;
    so.n_max = c.separated_n_max;
    const auto grid = uniform_grid(fh.base_dim(), c.separated_grid);
    const SeparatedResult base = separated_entropy(base_map(fh.base_ptr(), o), grid, so);
    auto sep_json = [&](const SeparatedResult& s) {
      return json{{"method", "separated"}, {"epsilon", so.epsilon}, {"counts", s.counts},
                  {"rates", s.rates},       {"plateau", s.plateau},  {"fit_from", s.fit_from},
                  {"fit_to", s.fit_to},     {"grid_size", s.grid_size}};
    };
    r.data["separated"]["base"] = sep_json(base);
    if (c.entropy_slice) {
      so.metric_dims = fh.base_dim();
      const SeparatedResult slice =
          separated_entropy(dressed_map_base_controlled(fh, o), embed_grid(grid, z0, eta), so);
      r.data["separated"]["slice"] = sep_json(slice);
      CheckRow row;
      row.tag = "slice-consistency";
      row.name = "separated-set counts of the base projection on the slice equal the base counts";
      row.pass = slice.counts == base.counts;
      row.measured = {{"base_counts", base.counts}, {"slice_counts", slice.counts}};
      r.checks.push_back(row);
    }
  }
  return r;
}

Report run_spectrum(const ExperimentConfig& c) {
  validate_config(c);
  const DressedHamiltonian fh = build_dressed(c);
  Report r = make_report("spectrum", c);
  r.data["C"] = fh.c();
  r.data["max_abs_H"] = max_abs_hamiltonian(fh.base());
  r.checks.push_back(check_spectrum(fh, c, r.data));
  return r;
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& content, std::vector<std::string>& written) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
  written.push_back(path.string());
}

std::string csv_number(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  std::ostringstream os;
  os.precision(17);
  os << v.get<double>();
  return os.str();
}

}  // namespace

std::vector<std::string> emit_report(const Report& report, Format format, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory '" + dir + "': " + ec.message());
  std::vector<std::string> written;
  const json doc = to_json(report);
  write_file(fs::path(dir) / (report.command + ".json"), doc.dump(2) + "\n", written);

  if (report.command == "flow" && report.data.contains("monodromy")) {
    write_file(fs::path(dir) / "monodromy.json", report.data["monodromy"].dump(2) + "\n", written);
  }
  if (format == Format::Csv) {
    std::ostringstream os;
    if (report.command == "verify" && report.data.contains("fixed_scan")) {
      const auto& scan = report.data["fixed_scan"];
      os << "index,theta,on_level,alpha_prime";
      for (int k : scan["ks"]) os << ",displacement_k" << k;
      os << ",min_displacement,max_displacement\n";
      for (const auto& s : scan["samples"]) {
        os << s["index"].get<std::size_t>() << ',' << csv_number(s["theta"]) << ','
           << (s["on_level"].get<bool>() ? 1 : 0) << ',' << csv_number(s["alpha_prime"]);
        for (const auto& d : s["displacement"]) os << ',' << csv_number(d);
        os << ',' << csv_number(s["min_displacement"]) << ',' << csv_number(s["max_displacement"]) << '\n';
      }
      write_file(fs::path(dir) / "fixed_scan.csv", os.str(), written);
    } else if (report.command == "flow") {
      const auto& traj = report.data["trajectory"];
      const std::size_t d = traj["states"][0].size();
      os << 't';
      for (std::size_t i = 0; i < d; ++i) os << ",coord_" << i;
      os << '\n';
      for (std::size_t j = 0; j < traj["times"].size(); ++j) {
        os << csv_number(traj["times"][j]);
        for (const auto& v : traj["states"][j]) os << ',' << csv_number(v);
        os << '\n';
      }
      write_file(fs::path(dir) / "trajectory.csv", os.str(), written);
    } else if (report.command == "barcode" && report.data.contains("barcode")) {
      os << "birth,death,degree,multiplicity\n";
      for (const auto& b : report.data["barcode"]) {
        os << csv_number(b["birth"]) << ',' << csv_number(b["death"]) << ',' << b["degree"].get<int>() << ','
           << b["multiplicity"].get<std::size_t>() << '\n';
      }
      write_file(fs::path(dir) / "barcode.csv", os.str(), written);
    } else if (report.command == "entropy") {
      os << "method,source,n,value\n";
      for (const char* src : {"base", "slice"}) {
        if (report.data.contains("separated") && report.data["separated"].contains(src)) {
          const auto& s = report.data["separated"][src];
          for (std::size_t i = 0; i < s["counts"].size(); ++i) {
            os << "separated_count," << src << ',' << i + 1 << ',' << s["counts"][i].get<std::size_t>() << '\n';
          }
        }
        if (report.data.contains("lyapunov") && report.data["lyapunov"].contains(src)) {
          const auto& l = report.data["lyapunov"][src];
          os << "lyapunov," << src << ',' << l["window"].get<int>() << ',' << csv_number(l["value"]) << '\n';
        }
      }
      write_file(fs::path(dir) / "entropy.csv", os.str(), written);
    } else if (report.command == "spectrum") {
      os << "theta,action\n";
      for (const auto& a : report.data["spectrum"]["actions"]) {
        os << csv_number(a["theta"]) << ',' << csv_number(a["action"]) << '\n';
      }
      write_file(fs::path(dir) / "spectrum.csv", os.str(), written);
    } else {
      os << "tag,pass,skipped\n";
      for (const auto& r : report.checks) os << r.tag << ',' << r.pass << ',' << r.skipped << '\n';
      write_file(fs::path(dir) / (report.command + "_checks.csv"), os.str(), written);
    }
  } else if (format == Format::Svg) {
    if (!report.data.contains("barcode")) {
      throw std::invalid_argument("svg output needs a barcode (use the barcode or verify command)");
    }
    const Barcode b = barcode_from_json(report.data["barcode"]);
    write_file(fs::path(dir) / "barcode.svg", barcode_svg(b, "model barcode"), written);
  }
  return written;
}

int run_main(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Dressed Hamiltonians on products with an irrational torus: flows, barcodes and checks"};
  app.require_subcommand(0, 1);
  std::string config_path;
  std::string out_dir;
  std::string format_text = "json";
  std::string k_text;
  std::uint64_t seed = 0;
  double tol = 0.0;
  bool print_defaults = false;
  app.add_option("--config", config_path, "experiment config file");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--seed", seed, "random seed (u64)");
  app.add_option("--tol", tol, "integrator tolerance");
  app.add_option("--format", format_text, "json | csv | svg")->check(CLI::IsMember({"json", "csv", "svg"}));
  app.add_option("--k", k_text, "iterate list, e.g. 1,2,3 or 1-8");
  app.add_flag("--print-defaults", print_defaults, "print the default config and exit");
  struct Sub {
    const char* name;
    const char* help;
    Report (*run)(const ExperimentConfig&);
  };
  const Sub subs[] = {{"verify", "run every check and report pass/fail", run_verify},
                      {"flow", "integrate a trajectory and its monodromy", run_flow},
                      {"barcode", "model barcode and Kunneth cross-check", run_barcode},
                      {"entropy", "Lyapunov and separated-set entropy estimates", run_entropy},
                      {"spectrum", "closed-form action spectrum against quadrature", run_spectrum}};
  for (const auto& s : subs) app.add_subcommand(s.name, s.help)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  if (print_defaults) {
    out << default_config_text();
    return 0;
  }
  const Sub* chosen = nullptr;
  for (const auto& s : subs) {
    if (app.got_subcommand(s.name)) chosen = &s;
  }
  if (!chosen) {
    err << "error: a subcommand is required (verify, flow, barcode, entropy, spectrum)\n";
    return 2;
  }

  ExperimentConfig config;
  Format format = Format::Json;
  try {
    if (!config_path.empty()) config = load_config(config_path);
    if (app.count("--seed")) config.seed = seed;
    if (app.count("--tol")) config.tol = tol;
    if (app.count("--k")) config.ks = parse_int_list(k_text);
    if (app.count("--out")) config.out = out_dir;
    format = parse_format(format_text);
    validate_config(config);
    if (format == Format::Svg && std::string(chosen->name) != "barcode" && std::string(chosen->name) != "verify") {
      throw ConfigError(0, "svg output is available for barcode and verify only");
    }
  } catch (const ConfigError& e) {
    err << "config error: " << (config_path.empty() ? "" : config_path + ": ") << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  }

  Report report;
  try {
    report = chosen->run(config);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  try {
    const auto files = emit_report(report, format, config.out);
    for (const auto& row : report.checks) {
      out << (row.skipped ? "SKIP" : (row.pass ? "PASS" : "FAIL")) << "  " << row.tag << "  " << row.name;
      if (!row.note.empty()) out << "  [" << row.note << "]";
      out << "\n";
    }
    for (const auto& f : files) out << "wrote " << f << "\n";
    return report.pass() ? 0 : 1;
  } catch (const std::exception& e) {
    err << "output error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace pseudorot::cli
