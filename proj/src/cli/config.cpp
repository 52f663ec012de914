#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "pseudorot/base_systems.hpp"
#include "pseudorot/cli.hpp"
#include "pseudorot/profiles.hpp"
#include "pseudorot/torus_symplectic.hpp"

namespace pseudorot::cli {

ConfigError::ConfigError(int line, const std::string& message)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message : message), line_(line) {}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  if (trim(s).empty()) return out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

double to_double(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("expected a number, got '" + s + "'");
  }
  if (used != s.size() || !std::isfinite(v)) throw std::invalid_argument("expected a finite number, got '" + s + "'");
  return v;
}

long long to_integer(const std::string& s) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(s, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("expected an integer, got '" + s + "'");
  }
  if (used != s.size()) throw std::invalid_argument("expected an integer, got '" + s + "'");
  return v;
}

int to_int(const std::string& s) {
  const long long v = to_integer(s);
  if (v < -2147483647LL || v > 2147483647LL) throw std::invalid_argument("integer out of range: " + s);
  return static_cast<int>(v);
}

std::uint64_t to_u64(const std::string& s) {
  if (s.empty() || s[0] == '-') throw std::invalid_argument("expected an unsigned integer, got '" + s + "'");
  std::size_t used = 0;
  std::uint64_t v = 0;
  try {
    v = std::stoull(s, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("expected an unsigned integer, got '" + s + "'");
  }
  if (used != s.size()) throw std::invalid_argument("expected an unsigned integer, got '" + s + "'");
  return v;
}

bool to_bool(const std::string& s) {
  if (s == "true" || s == "yes" || s == "1") return true;
  if (s == "false" || s == "no" || s == "0") return false;
  throw std::invalid_argument("expected true or false, got '" + s + "'");
}

std::vector<double> to_doubles(const std::string& s) {
  std::vector<double> out;
  for (const auto& item : split_list(s)) out.push_back(to_double(item));
  return out;
}

std::string fmt(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + fmt(v[i]);
  return out;
}

std::string join(const std::vector<int>& v) {
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
  return os.str();
}

using Setter = std::function<void(ExperimentConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"torus.n", [](ExperimentConfig& c, const std::string& v) { c.n = to_int(v); }},
      {"torus.irrationality",
       [](ExperimentConfig& c, const std::string& v) {
         c.irrationality = (v == "sqrt-primes") ? std::vector<double>{} : to_doubles(v);
       }},
      {"profiles.id", [](ExperimentConfig& c, const std::string& v) { c.profile_id = v; }},
      {"profiles.params", [](ExperimentConfig& c, const std::string& v) { c.profile_params = to_doubles(v); }},
      {"base.id", [](ExperimentConfig& c, const std::string& v) { c.base_id = v; }},
      {"base.params", [](ExperimentConfig& c, const std::string& v) { c.base_params = to_doubles(v); }},
      {"integrator.method", [](ExperimentConfig& c, const std::string& v) { c.method = ode::parse_method(v); }},
      {"integrator.tol", [](ExperimentConfig& c, const std::string& v) { c.tol = to_double(v); }},
      {"verify.k", [](ExperimentConfig& c, const std::string& v) { c.ks = parse_int_list(v); }},
      {"verify.theta_grid", [](ExperimentConfig& c, const std::string& v) { c.theta_grid = to_int(v); }},
      {"verify.samples_per_theta",
       [](ExperimentConfig& c, const std::string& v) { c.samples_per_theta = to_int(v); }},
      {"verify.morse_bott_points",
       [](ExperimentConfig& c, const std::string& v) { c.morse_bott_points = to_int(v); }},
      {"verify.semiconjugacy_points",
       [](ExperimentConfig& c, const std::string& v) { c.semiconjugacy_points = to_int(v); }},
      {"verify.iteration_samples",
       [](ExperimentConfig& c, const std::string& v) { c.iteration_samples = to_int(v); }},
      {"verify.barcode_grid", [](ExperimentConfig& c, const std::string& v) { c.barcode_grid = to_int(v); }},
      {"verify.barcode_iterates",
       [](ExperimentConfig& c, const std::string& v) { c.barcode_iterates = to_int(v); }},
      {"verify.barcode_epsilons",
       [](ExperimentConfig& c, const std::string& v) { c.barcode_epsilons = to_doubles(v); }},
      {"flow.t0", [](ExperimentConfig& c, const std::string& v) { c.flow_t0 = to_double(v); }},
      {"flow.t1", [](ExperimentConfig& c, const std::string& v) { c.flow_t1 = to_double(v); }},
      {"flow.samples", [](ExperimentConfig& c, const std::string& v) { c.flow_samples = to_int(v); }},
      {"flow.point",
       [](ExperimentConfig& c, const std::string& v) {
         c.flow_point = (v == "default") ? std::vector<double>{} : to_doubles(v);
       }},
      {"entropy.method", [](ExperimentConfig& c, const std::string& v) { c.entropy_method = v; }},
      {"entropy.tol", [](ExperimentConfig& c, const std::string& v) { c.entropy_tol = to_double(v); }},
      {"entropy.lyapunov_steps", [](ExperimentConfig& c, const std::string& v) { c.lyapunov_steps = to_int(v); }},
      {"entropy.seeds", [](ExperimentConfig& c, const std::string& v) { c.entropy_seeds = to_int(v); }},
      {"entropy.epsilon", [](ExperimentConfig& c, const std::string& v) { c.separated_epsilon = to_double(v); }},
      {"entropy.grid", [](ExperimentConfig& c, const std::string& v) { c.separated_grid = to_int(v); }},
      {"entropy.n_max", [](ExperimentConfig& c, const std::string& v) { c.separated_n_max = to_int(v); }},
      {"entropy.slice", [](ExperimentConfig& c, const std::string& v) { c.entropy_slice = to_bool(v); }},
      {"run.seed", [](ExperimentConfig& c, const std::string& v) { c.seed = to_u64(v); }},
      {"run.out", [](ExperimentConfig& c, const std::string& v) { c.out = v; }},
  };
  return table;
}

}  // namespace

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  for (const auto& item : split_list(text)) {
    const auto dash = item.find('-', 1);
    if (dash != std::string::npos) {
      const int a = to_int(trim(item.substr(0, dash)));
      const int b = to_int(trim(item.substr(dash + 1)));
      if (b < a) throw std::invalid_argument("empty range '" + item + "'");
      if (b - a > 100000) throw std::invalid_argument("range too long '" + item + "'");
      for (int k = a; k <= b; ++k) out.push_back(k);
    } else {
      out.push_back(to_int(item));
    }
  }
  if (out.empty()) throw std::invalid_argument("empty integer list");
  return out;
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig config;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  std::map<std::string, int> seen;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(line_no, "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      bool known = false;
      for (const auto& [key, setter] : setters()) known = known || key.rfind(section + ".", 0) == 0;
      if (!known) throw ConfigError(line_no, "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(line_no, "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    const auto hash = value.find(" #");
    if (hash != std::string::npos) value = trim(value.substr(0, hash));
    if (key.empty()) throw ConfigError(line_no, "missing key");
    if (section.empty()) throw ConfigError(line_no, "key '" + key + "' outside of a section");
    const std::string full = section + "." + key;
    auto it = setters().find(full);
    if (it == setters().end()) throw ConfigError(line_no, "unknown key '" + key + "' in [" + section + "]");
    auto [prev, inserted] = seen.emplace(full, line_no);
    if (!inserted) {
      throw ConfigError(line_no, "duplicate key '" + key + "' (first set on line " + std::to_string(prev->second) +
                                     ")");
    }
    try {
      it->second(config, value);
    } catch (const std::exception& e) {
      throw ConfigError(line_no, key + ": " + e.what());
    }
  }
  return config;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(0, "cannot read config file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::string default_config_text() {
  const ExperimentConfig c;
  std::ostringstream os;
  os << "# experiment configuration (all values shown are the defaults)\n"
     << "[torus]\n"
     << "n = " << c.n << "                      # half-dimension of the irrational torus, >= 2\n"
     << "irrationality = sqrt-primes  # or 2n-2 reals a_1, b_1, ..., a_{n-1}, b_{n-1}\n\n"
     << "[profiles]\n"
     << "id = " << c.profile_id << "\n"
     << "params =\n\n"
     << "[base]\n"
     << "id = " << c.base_id << "               # constant | small-autonomous | kicked-rotor-smooth | trig-series\n"
     << "params = " << join(c.base_params) << "\n\n"
     << "[integrator]\n"
     << "method = " << ode::to_string(c.method) << "            # dop853 | midpoint\n"
     << "tol = " << fmt(c.tol) << "                # in [1e-13, 1e-3]\n\n"
     << "[verify]\n"
     << "k = " << join(c.ks) << "\n"
     << "theta_grid = " << c.theta_grid << "\n"
     << "samples_per_theta = " << c.samples_per_theta << "\n"
     << "morse_bott_points = " << c.morse_bott_points << "\n"
     << "semiconjugacy_points = " << c.semiconjugacy_points << "\n"
     << "iteration_samples = " << c.iteration_samples << "\n"
     << "barcode_grid = " << c.barcode_grid << "\n"
     << "barcode_iterates = " << c.barcode_iterates << "\n"
     << "barcode_epsilons = " << join(c.barcode_epsilons) << "\n\n"
     << "[flow]\n"
     << "t0 = " << fmt(c.flow_t0) << "\n"
     << "t1 = " << fmt(c.flow_t1) << "\n"
     << "samples = " << c.flow_samples << "\n"
     << "point = default            # or p..., z..., theta\n\n"
     << "[entropy]\n"
     << "method = " << c.entropy_method << "              # lyapunov | separated | both\n"
     << "tol = " << fmt(c.entropy_tol) << "\n"
     << "lyapunov_steps = " << c.lyapunov_steps << "\n"
     << "seeds = " << c.entropy_seeds << "\n"
     << "epsilon = " << fmt(c.separated_epsilon) << "\n"
     << "grid = " << c.separated_grid << "\n"
     << "n_max = " << c.separated_n_max << "\n"
     << "slice = " << (c.entropy_slice ? "true" : "false") << "\n\n"
     << "[run]\n"
     << "seed = " << c.seed << "\n"
     << "out = " << c.out << "\n";
  return os.str();
}

void validate_config(const ExperimentConfig& c) {
  auto fail = [](const std::string& m) { throw ConfigError(0, m); };
  if (c.n < 2) fail("torus.n must be >= 2");
  if (c.n > 8) fail("torus.n above 8 is not supported");
  if (!c.irrationality.empty() && c.irrationality.size() != static_cast<std::size_t>(2 * c.n - 2)) {
    fail("torus.irrationality needs 2n-2 = " + std::to_string(2 * c.n - 2) + " entries");
  }
  if (!(c.tol >= 1e-13 && c.tol <= 1e-3)) fail("integrator.tol must lie in [1e-13, 1e-3]");
  if (!(c.entropy_tol >= 1e-13 && c.entropy_tol <= 1e-3)) fail("entropy.tol must lie in [1e-13, 1e-3]");
  for (int k : c.ks) {
    if (k < 1) fail("verify.k entries must be >= 1");
  }
  if (c.theta_grid < 1 || c.samples_per_theta < 1) fail("verify grid sizes must be >= 1");
  if (c.morse_bott_points < 1 || c.semiconjugacy_points < 1 || c.iteration_samples < 1) {
    fail("verify sample counts must be >= 1");
  }
  if (c.barcode_grid < 16) fail("verify.barcode_grid must be >= 16");
  if (c.barcode_iterates < 1) fail("verify.barcode_iterates must be >= 1");
  if (c.barcode_epsilons.empty()) fail("verify.barcode_epsilons must not be empty");
  for (double e : c.barcode_epsilons) {
    if (!(e > 0.0)) fail("verify.barcode_epsilons must be positive");
  }
  if (!(c.flow_t1 > c.flow_t0)) fail("flow.t1 must exceed flow.t0");
  if (c.flow_samples < 1) fail("flow.samples must be >= 1");
  if (c.entropy_method != "lyapunov" && c.entropy_method != "separated" && c.entropy_method != "both") {
    fail("entropy.method must be lyapunov, separated or both");
  }
  if (c.lyapunov_steps < 100) fail("entropy.lyapunov_steps must be >= 100");
  if (c.entropy_seeds < 1) fail("entropy.seeds must be >= 1");
  if (!(c.separated_epsilon > 0.0 && c.separated_epsilon < 0.25)) fail("entropy.epsilon must lie in (0, 0.25)");
  if (c.separated_grid < 1 || static_cast<long long>(c.separated_grid) * c.separated_grid > 1000000) {
    fail("entropy.grid must be in [1, 1000]");
  }
  if (c.separated_n_max < 1) fail("entropy.n_max must be >= 1");
  try {
    catalog_get(c.base_id, c.base_params);
  } catch (const std::exception& e) {
    fail(std::string("base: ") + e.what());
  }
  try {
    make_profiles(c.profile_id, c.profile_params);
  } catch (const std::exception& e) {
    fail(std::string("profiles: ") + e.what());
  }
  if (!c.irrationality.empty()) {
    try {
      TorusSymplecticStructure s(IrrationalityVector(c.n, c.irrationality));
    } catch (const std::exception& e) {
      fail(std::string("torus: ") + e.what());
    }
  }
}

nlohmann::json config_to_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["torus"] = {{"n", c.n},
                {"irrationality", c.irrationality.empty() ? nlohmann::json("sqrt-primes")
                                                          : nlohmann::json(c.irrationality)}};
  j["profiles"] = {{"id", c.profile_id}, {"params", c.profile_params}};
  j["base"] = {{"id", c.base_id}, {"params", c.base_params}};
  j["integrator"] = {{"method", ode::to_string(c.method)}, {"tol", c.tol}};
  j["verify"] = {{"k", c.ks},
                 {"theta_grid", c.theta_grid},
                 {"samples_per_theta", c.samples_per_theta},
                 {"morse_bott_points", c.morse_bott_points},
                 {"semiconjugacy_points", c.semiconjugacy_points},
                 {"iteration_samples", c.iteration_samples},
                 {"barcode_grid", c.barcode_grid},
                 {"barcode_iterates", c.barcode_iterates},
                 {"barcode_epsilons", c.barcode_epsilons}};
  j["flow"] = {{"t0", c.flow_t0},
               {"t1", c.flow_t1},
               {"samples", c.flow_samples},
               {"point", c.flow_point.empty() ? nlohmann::json("default") : nlohmann::json(c.flow_point)}};
  j["entropy"] = {{"method", c.entropy_method},     {"tol", c.entropy_tol},
                  {"lyapunov_steps", c.lyapunov_steps}, {"seeds", c.entropy_seeds},
                  {"epsilon", c.separated_epsilon}, {"grid", c.separated_grid},
                  {"n_max", c.separated_n_max},     {"slice", c.entropy_slice}};
  j["run"] = {{"seed", c.seed}};
  return j;
}

DressedHamiltonian build_dressed(const ExperimentConfig& c) {
  IrrationalityVector vec = c.irrationality.empty() ? IrrationalityVector::sqrt_primes(c.n)
                                                    : IrrationalityVector(c.n, c.irrationality);
  auto torus = std::make_shared<const TorusSymplecticStructure>(std::move(vec));
  return DressedHamiltonian(catalog_get(c.base_id, c.base_params), make_profiles(c.profile_id, c.profile_params),
                            torus);
}

ode::Options integrator_options(const ExperimentConfig& c) {
  ode::Options o;
  o.method = c.method;
  o.tol = c.tol;
  return o;
}

}  // namespace pseudorot::cli
