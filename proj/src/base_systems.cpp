#include "pseudorot/base_systems.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "pseudorot/torus_geometry.hpp"
#include "pseudorot/torus_symplectic.hpp"

namespace pseudorot {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * kPi;

std::string join(const std::vector<double>& v) {
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  return os.str();
}

class ConstantHamiltonian final : public BaseHamiltonian {
 public:
  explicit ConstantHamiltonian(double c) : c_(c) {}
  int dim() const override { return 2; }
  bool autonomous() const override { return true; }
  bool identically_zero() const override { return c_ == 0.0; }
  std::string describe() const override { return "constant[" + join({c_}) + "]"; }
  double value(double, const Eigen::Ref<const Eigen::VectorXd>&) const override { return c_; }
  void gradient(double, const Eigen::Ref<const Eigen::VectorXd>&, Eigen::Ref<Eigen::VectorXd> out) const override {
    out.setZero();
  }
  void hessian(double, const Eigen::Ref<const Eigen::VectorXd>&, Eigen::Ref<Eigen::MatrixXd> out) const override {
    out.setZero();
  }

 private:
  double c_;
};

class SmallAutonomous final : public BaseHamiltonian {
 public:
  explicit SmallAutonomous(double eps) : eps_(eps) {}
  int dim() const override { return 2; }
  bool autonomous() const override { return true; }
  bool identically_zero() const override { return eps_ == 0.0; }
  std::string describe() const override { return "small-autonomous[" + join({eps_}) + "]"; }
  double value(double, const Eigen::Ref<const Eigen::VectorXd>& p) const override {
    return eps_ * std::cos(kTwoPi * p[0]);
  }
  void gradient(double, const Eigen::Ref<const Eigen::VectorXd>& p, Eigen::Ref<Eigen::VectorXd> out) const override {
    out[0] = -kTwoPi * eps_ * std::sin(kTwoPi * p[0]);
    out[1] = 0.0;
  }
  void hessian(double, const Eigen::Ref<const Eigen::VectorXd>& p, Eigen::Ref<Eigen::MatrixXd> out) const override {
    out.setZero();
    out(0, 0) = -kTwoPi * kTwoPi * eps_ * std::cos(kTwoPi * p[0]);
  }

 private:
  double eps_;
};

class KickedRotorSmooth final : public BaseHamiltonian {
 public:
  KickedRotorSmooth(double k, double kappa)
      : k_(k), kappa_(kappa), norm_(kappa == 0.0 ? 1.0 : std::cyl_bessel_i(0.0, kappa) * std::exp(-kappa)) {}
  int dim() const override { return 2; }
  bool autonomous() const override { return false; }
  std::string describe() const override { return "kicked-rotor-smooth[" + join({k_, kappa_}) + "]"; }
  double value(double t, const Eigen::Ref<const Eigen::VectorXd>& p) const override {
    return std::cos(kTwoPi * p[1]) / kTwoPi + k_ / (4.0 * kPi * kPi) * std::cos(kTwoPi * p[0]) * bump(t);
  }
  void gradient(double t, const Eigen::Ref<const Eigen::VectorXd>& p, Eigen::Ref<Eigen::VectorXd> out) const override {
    out[0] = -k_ / kTwoPi * std::sin(kTwoPi * p[0]) * bump(t);
    out[1] = -std::sin(kTwoPi * p[1]);
  }
  void hessian(double t, const Eigen::Ref<const Eigen::VectorXd>& p, Eigen::Ref<Eigen::MatrixXd> out) const override {
    out(0, 0) = -k_ * std::cos(kTwoPi * p[0]) * bump(t);
    out(0, 1) = 0.0;
    out(1, 0) = 0.0;
    out(1, 1) = -kTwoPi * std::cos(kTwoPi * p[1]);
  }

 private:
  double bump(double t) const {
    if (kappa_ == 0.0) return 1.0;
    return std::exp(kappa_ * (std::cos(kTwoPi * (t - 0.5)) - 1.0)) / norm_;
  }

  double k_;
  double kappa_;
  double norm_;
};

struct TrigMode {
  double c;
  double kx, ky, kt;
  double phase;
};

class TrigSeries final : public BaseHamiltonian {
 public:
  explicit TrigSeries(std::vector<TrigMode> modes, std::vector<double> params)
      : modes_(std::move(modes)), params_(std::move(params)) {
    autonomous_ = true;
    zero_ = true;
    for (const auto& m : modes_) {
      if (m.kt != 0.0) autonomous_ = false;
      if (m.c != 0.0) zero_ = false;
    }
  }
  int dim() const override { return 2; }
  bool autonomous() const override { return autonomous_; }
  bool identically_zero() const override { return zero_; }
  std::string describe() const override { return "trig-series[" + join(params_) + "]"; }
  double value(double t, const Eigen::Ref<const Eigen::VectorXd>& p) const override {
    double s = 0.0;
    for (const auto& m : modes_) s += m.c * std::cos(phase(m, t, p));
    return s;
  }
  void gradient(double t, const Eigen::Ref<const Eigen::VectorXd>& p, Eigen::Ref<Eigen::VectorXd> out) const override {
    out.setZero();
    for (const auto& m : modes_) {
      const double s = -kTwoPi * m.c * std::sin(phase(m, t, p));
      out[0] += s * m.kx;
      out[1] += s * m.ky;
    }
  }
  void hessian(double t, const Eigen::Ref<const Eigen::VectorXd>& p, Eigen::Ref<Eigen::MatrixXd> out) const override {
    out.setZero();
    for (const auto& m : modes_) {
      const double c = -kTwoPi * kTwoPi * m.c * std::cos(phase(m, t, p));
      out(0, 0) += c * m.kx * m.kx;
      out(0, 1) += c * m.kx * m.ky;
      out(1, 0) += c * m.kx * m.ky;
      out(1, 1) += c * m.ky * m.ky;
    }
  }

 private:
  static double phase(const TrigMode& m, double t, const Eigen::Ref<const Eigen::VectorXd>& p) {
    return kTwoPi * (m.kx * p[0] + m.ky * p[1] + m.kt * t) + m.phase;
  }
  std::vector<TrigMode> modes_;
  std::vector<double> params_;
  bool autonomous_ = true;
  bool zero_ = true;
};

void expect_count(const std::string& id, const std::vector<double>& params, std::size_t lo, std::size_t hi) {
  if (params.size() < lo || params.size() > hi) {
    throw std::invalid_argument("base system '" + id + "' expects " + std::to_string(lo) +
                                (lo == hi ? "" : ".." + std::to_string(hi)) + " parameters, got " +
                                std::to_string(params.size()));
  }
}

}  // namespace

double kick_profile(double t, double kappa) {
  if (kappa == 0.0) return 1.0;
  // exp(kappa cos) / I0(kappa), written with the exponential scaling folded in
  const double scaled_i0 = std::cyl_bessel_i(0.0, kappa) * std::exp(-kappa);
  return std::exp(kappa * (std::cos(kTwoPi * (t - 0.5)) - 1.0)) / scaled_i0;
}

std::vector<std::string> catalog_ids() {
  return {"constant", "small-autonomous", "kicked-rotor-smooth", "trig-series"};
}

BaseHamiltonianPtr catalog_get(const std::string& id, const std::vector<double>& params) {
  for (double v : params) {
    if (!std::isfinite(v)) throw std::invalid_argument("base system '" + id + "' has a non-finite parameter");
  }
  if (id == "constant") {
    expect_count(id, params, 1, 1);
    return std::make_shared<ConstantHamiltonian>(params[0]);
  }
  if (id == "small-autonomous") {
    expect_count(id, params, 1, 1);
    if (std::fabs(params[0]) > 1e-3) {
      throw std::invalid_argument("small-autonomous needs |eps| <= 1e-3 (C^2-small regime)");
    }
    return std::make_shared<SmallAutonomous>(params[0]);
  }
  if (id == "kicked-rotor-smooth") {
    expect_count(id, params, 1, 2);
    const double kappa = params.size() > 1 ? params[1] : 8.0;
    if (kappa < 0.0 || kappa > 200.0) throw std::invalid_argument("kick sharpness kappa must lie in [0, 200]");
    return std::make_shared<KickedRotorSmooth>(params[0], kappa);
  }
  if (id == "trig-series") {
    if (params.empty() || params.size() % 5 != 0) {
      throw std::invalid_argument("trig-series expects groups of 5 parameters (c, kx, ky, kt, phase)");
    }
    std::vector<TrigMode> modes;
    for (std::size_t i = 0; i < params.size(); i += 5) {
      TrigMode m{params[i], params[i + 1], params[i + 2], params[i + 3], params[i + 4]};
      for (double k : {m.kx, m.ky, m.kt}) {
        if (k != std::round(k)) throw std::invalid_argument("trig-series mode numbers must be integers");
      }
      modes.push_back(m);
    }
    return std::make_shared<TrigSeries>(std::move(modes), params);
  }
  throw std::invalid_argument("unknown base system id '" + id + "'");
}

BaseFlow::BaseFlow(BaseHamiltonianPtr h) : h_(std::move(h)) {
  if (!h_) throw std::invalid_argument("base flow needs a Hamiltonian");
  form_inverse_ = standard_form_matrix(h_->dim()).inverse();
}

void BaseFlow::vector_field(double t, const Eigen::Ref<const Eigen::VectorXd>& p,
                            Eigen::Ref<Eigen::VectorXd> out) const {
  hamiltonian_field(*h_, form_inverse_, t, p, out);
}

Eigen::VectorXd BaseFlow::flow(const Eigen::Ref<const Eigen::VectorXd>& p, double t0, double duration,
                               const ode::Options& options) const {
  ode::Rhs rhs = [this](double t, const ode::Vector& y, ode::Vector& dy) { vector_field(t, y, dy); };
  return ode::integrate(rhs, t0, t0 + duration, p, options);
}

BaseFlowResult BaseFlow::flow_with_jacobian(const Eigen::Ref<const Eigen::VectorXd>& p, double t0, double duration,
                                            const ode::Options& options) const {
  const int d = h_->dim();
  ode::Rhs rhs = [this, d](double t, const ode::Vector& y, ode::Vector& dy) {
    const auto q = y.head(d);
    vector_field(t, q, dy.head(d));
    const Eigen::MatrixXd a = form_inverse_ * h_->hessian(t, q);
    Eigen::Map<const Eigen::MatrixXd> m(y.data() + d, d, d);
    Eigen::Map<Eigen::MatrixXd> dm(dy.data() + d, d, d);
    dm.noalias() = a * m;
  };
  ode::Vector y0(d + d * d);
  y0.head(d) = p;
  Eigen::Map<Eigen::MatrixXd>(y0.data() + d, d, d).setIdentity();
  ode::Vector y = ode::integrate(rhs, t0, t0 + duration, y0, options);
  return {y.head(d), Eigen::Map<const Eigen::MatrixXd>(y.data() + d, d, d)};
}

Eigen::VectorXd base_time_one_map(BaseHamiltonianPtr h, const Eigen::Ref<const Eigen::VectorXd>& p, double tol) {
  ode::Options opt;
  opt.tol = tol;
  return wrap_unit(BaseFlow(std::move(h)).flow(p, 0.0, 1.0, opt));
}

}  // namespace pseudorot
