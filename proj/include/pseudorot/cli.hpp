#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "pseudorot/construction.hpp"
#include "pseudorot/ode.hpp"

namespace pseudorot::cli {

/// Configuration problem; line() is 0 when the error is not tied to a line.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(int line, const std::string& message);
  int line() const { return line_; }

 private:
  int line_;
};

/// Everything an experiment needs. The text grammar is
///
///   file    := { line }
///   line    := blank | comment | section | entry
///   comment := ('#' | ';') text
///   section := '[' name ']'
///   entry   := key '=' value
///
/// Lists are comma separated; integer lists also accept ranges "a-b".
/// default_config_text() prints every key with its default value.
struct ExperimentConfig {
  // [torus]
  int n = 2;
  std::vector<double> irrationality;  // empty: square roots of primes
  // [profiles]
  std::string profile_id = "sin";
  std::vector<double> profile_params;
  // [base]
  std::string base_id = "constant";
  std::vector<double> base_params{1.0};
  // [integrator]
  ode::Method method = ode::Method::Dop853;
  double tol = 1e-10;
  // [verify]
  std::vector<int> ks{1, 2, 3};
  int theta_grid = 20;
  int samples_per_theta = 5;
  int morse_bott_points = 10;
  int semiconjugacy_points = 20;
  int iteration_samples = 1000;
  int barcode_grid = 4096;
  int barcode_iterates = 20;
  std::vector<double> barcode_epsilons{1e-3, 1e-1, 1.0};
  // [flow]
  double flow_t0 = 0.0;
  double flow_t1 = 1.0;
  int flow_samples = 100;
  std::vector<double> flow_point;  // empty: p = 0.3.., z = 0.1.., theta = eta
  // [entropy]
  std::string entropy_method = "both";  // lyapunov | separated | both
  double entropy_tol = 1e-8;
  int lyapunov_steps = 300;
  int entropy_seeds = 10;
  double separated_epsilon = 0.2;
  int separated_grid = 120;
  int separated_n_max = 6;
  bool entropy_slice = true;
  // [run]
  std::uint64_t seed = 1;
  std::string out = ".";
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
std::string default_config_text();
/// Range and id checks; throws ConfigError (line 0).
void validate_config(const ExperimentConfig& config);
nlohmann::json config_to_json(const ExperimentConfig& config);

/// "1,2,5" or "1-8" or a mix; throws std::invalid_argument.
std::vector<int> parse_int_list(const std::string& text);

DressedHamiltonian build_dressed(const ExperimentConfig& config);
ode::Options integrator_options(const ExperimentConfig& config);

/// One checked property. `tag` is a stable machine-readable label of the
/// property under test.
struct CheckRow {
  std::string tag;
  std::string name;
  bool pass = false;
  bool skipped = false;
  std::string note;
  nlohmann::json measured = nlohmann::json::object();
};

struct Report {
  std::string command;
  nlohmann::json config;
  std::vector<CheckRow> checks;
  nlohmann::json data = nlohmann::json::object();
  bool pass() const;
};

nlohmann::json to_json(const Report& report);

enum class Format { Json, Csv, Svg };
Format parse_format(const std::string& text);

Report run_verify(const ExperimentConfig& config);
Report run_flow(const ExperimentConfig& config);
Report run_barcode(const ExperimentConfig& config);
Report run_entropy(const ExperimentConfig& config);
Report run_spectrum(const ExperimentConfig& config);

/// Writes the canonical JSON record plus format-specific tables or
/// diagrams into `dir`; returns the written paths. Throws
/// std::runtime_error when a file cannot be written.
std::vector<std::string> emit_report(const Report& report, Format format, const std::string& dir);

/// Full command line entry point. Exit codes: 0 all checks pass, 1 a check
/// failed, 2 configuration or usage error.
int run_main(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace pseudorot::cli
