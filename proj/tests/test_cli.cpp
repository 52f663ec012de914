#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "pseudorot/cli.hpp"

using namespace pseudorot;
namespace fs = std::filesystem;

namespace {

int run(std::vector<std::string> args, std::string* out_text = nullptr, std::string* err_text = nullptr) {
  args.insert(args.begin(), "pseudorot");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run_main(static_cast<int>(argv.size()), argv.data(), out, err);
  if (out_text) *out_text = out.str();
  if (err_text) *err_text = err.str();
  return code;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("pseudorot_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

int line_of(const std::string& text) {
  try {
    cli::parse_config(text);
  } catch (const cli::ConfigError& e) {
    return e.line();
  }
  return -1;
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_CASE("config parse errors carry line numbers") {
  CHECK(line_of("[torus]\nn = 2\nbogus = 1\n") == 3);
  CHECK(line_of("[nowhere]\n") == 1);
  CHECK(line_of("n = 2\n") == 1);
  CHECK(line_of("[torus]\n\nn = 2\nn = 3\n") == 4);
  CHECK(line_of("[torus]\nn 2\n") == 2);
  CHECK(line_of("[integrator]\ntol = abc\n") == 2);
  CHECK(line_of("# comment\n[run]\nseed = 5 # inline\n") == -1);
  try {
    cli::parse_config("[torus]\nbogus = 1\n");
  } catch (const cli::ConfigError& e) {
    CHECK(std::string(e.what()).rfind("line 2: ", 0) == 0);
  }
}

TEST_CASE("default config text round-trips") {
  const std::string text = cli::default_config_text();
  const cli::ExperimentConfig parsed = cli::parse_config(text);
  CHECK(cli::config_to_json(parsed) == cli::config_to_json(cli::ExperimentConfig{}));
  CHECK_NOTHROW(cli::validate_config(parsed));
}

TEST_CASE("integer lists accept ranges") {
  CHECK(cli::parse_int_list("1-4,7") == std::vector<int>{1, 2, 3, 4, 7});
  CHECK(cli::parse_int_list("3") == std::vector<int>{3});
  CHECK_THROWS(cli::parse_int_list("a"));
}

TEST_CASE("config validation rejects out-of-range values") {
  cli::ExperimentConfig c;
  c.n = 1;
  CHECK_THROWS_AS(cli::validate_config(c), cli::ConfigError);
  c = {};
  c.tol = 1.0;
  CHECK_THROWS_AS(cli::validate_config(c), cli::ConfigError);
  c = {};
  c.base_id = "nope";
  CHECK_THROWS_AS(cli::validate_config(c), cli::ConfigError);
}

TEST_CASE("verify passes on the default configuration and is deterministic") {
  const fs::path a = scratch("det_a");
  const fs::path b = scratch("det_b");
  CHECK(run({"verify", "--out", a.string()}) == 0);
  CHECK(run({"verify", "--out", b.string()}) == 0);
  CHECK(slurp(a / "verify.json") == slurp(b / "verify.json"));
  CHECK(slurp(a / "verify.json").size() > 100);
}

TEST_CASE("H = 0 runs in degenerate mode") {
  cli::ExperimentConfig c;
  c.base_params = {0.0};
  c.ks = {1, 2};
  const cli::Report r = cli::run_verify(c);
  CHECK(r.pass());
  bool any_skipped = false;
  for (const auto& row : r.checks) any_skipped = any_skipped || row.skipped;
  CHECK(any_skipped);
  const fs::path dir = scratch("degenerate");
  const auto files = cli::emit_report(r, cli::Format::Svg, dir.string());
  CHECK(fs::exists(dir / "barcode.svg"));
  CHECK(!files.empty());
}

TEST_CASE("verdicts agree across integrator tolerances") {
  cli::ExperimentConfig c;
  c.base_id = "kicked-rotor-smooth";
  c.base_params = {6.0};
  c.ks = {1, 2};
  c.theta_grid = 8;
  c.samples_per_theta = 2;
  c.morse_bott_points = 3;
  c.semiconjugacy_points = 4;
  c.iteration_samples = 100;
  c.barcode_iterates = 4;
  std::vector<std::pair<std::string, bool>> reference;
  for (double tol : {1e-10, 1e-6}) {
    c.tol = tol;
    const cli::Report r = cli::run_verify(c);
    std::vector<std::pair<std::string, bool>> verdicts;
    for (const auto& row : r.checks) verdicts.emplace_back(row.tag + "/" + row.name, row.pass);
    if (reference.empty()) {
      reference = verdicts;
      CHECK(r.pass());
    } else {
      CHECK(verdicts == reference);
    }
  }
}

TEST_CASE("exit codes") {
  const fs::path dir = scratch("exit");
  const fs::path bad = dir / "bad.ini";
  std::ofstream(bad) << "[torus]\nn = 2\nunknown_key = 3\n";
  std::string err;
  CHECK(run({"verify", "--config", bad.string(), "--out", dir.string()}, nullptr, &err) == 2);
  CHECK(err.find("line 3") != std::string::npos);
  CHECK(run({"frobnicate"}) == 2);
  CHECK(run({"verify", "--config", (dir / "missing.ini").string()}) == 2);
  CHECK(run({"flow", "--format", "svg", "--out", dir.string()}) == 2);
  std::string defaults;
  CHECK(run({"--print-defaults"}, &defaults) == 0);
  CHECK(defaults == cli::default_config_text());
}

TEST_CASE("CSV and SVG outputs") {
  const fs::path dir = scratch("formats");
  CHECK(run({"verify", "--format", "csv", "--out", dir.string()}) == 0);
  CHECK(fs::exists(dir / "verify.json"));
  const std::string scan = slurp(dir / "fixed_scan.csv");
  CHECK(count_lines(scan) == 1 + 20 * 5);
  CHECK(run({"flow", "--format", "csv", "--out", dir.string()}) == 0);
  CHECK(count_lines(slurp(dir / "trajectory.csv")) == 1 + 101);
  CHECK(fs::exists(dir / "monodromy.json"));
  CHECK(run({"barcode", "--format", "svg", "--out", dir.string()}) == 0);
  const std::string svg = slurp(dir / "barcode.svg");
  std::size_t lines = 0;
  for (auto pos = svg.find("<line class=\"bar"); pos != std::string::npos; pos = svg.find("<line class=\"bar", pos + 1))
    ++lines;
  CHECK(lines == 64);
  CHECK(run({"spectrum", "--format", "csv", "--out", dir.string()}) == 0);
  CHECK(fs::exists(dir / "spectrum.csv"));
}
