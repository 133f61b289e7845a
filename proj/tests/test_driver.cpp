#include <doctest.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sddemc/config.hpp"
#include "sddemc/driver.hpp"
#include "sddemc/errors.hpp"
#include "sddemc/version.hpp"

using namespace sddemc;
using nlohmann::json;

namespace {

std::filesystem::path fresh_dir(const std::string& tag) {
  const auto dir = std::filesystem::temp_directory_path() / ("sddemc-drv-" + tag);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& file) {
  std::ifstream is(file, std::ios::binary);
  REQUIRE_MESSAGE(static_cast<bool>(is), "missing file: " << file.string());
  std::ostringstream buffer;
  buffer << is.rdbuf();
  return buffer.str();
}

json manifest_of(const std::filesystem::path& dir) {
  return json::parse(slurp(dir / "manifest.json"));
}

// Byte-compares every regular file of two directories (same names, same
// contents).
void check_dirs_identical(const std::filesystem::path& a,
                          const std::filesystem::path& b) {
  std::vector<std::string> names_a, names_b;
  for (const auto& entry : std::filesystem::directory_iterator(a)) {
    names_a.push_back(entry.path().filename().string());
  }
  for (const auto& entry : std::filesystem::directory_iterator(b)) {
    names_b.push_back(entry.path().filename().string());
  }
  std::sort(names_a.begin(), names_a.end());
  std::sort(names_b.begin(), names_b.end());
  REQUIRE(names_a == names_b);
  for (const std::string& name : names_a) {
    CHECK_MESSAGE(slurp(a / name) == slurp(b / name), "differs: " << name);
  }
}

const char* kSimulateCfg = R"({
  "model": {"alpha_m1": 0.2, "alpha0": 0.3, "alpha1": 0.2, "alpha2": 0.5, "alpha3": 1.0, "lambda": 1.0},
  "initial": {"constant": 0.2},
  "grid": {"tau": 1.0, "horizon": 1.0, "steps_per_delay": 16},
  "run": {"seed": 7, "n_paths": 3}
})";

const char* kConvergeCfg = R"({
  "model": {"alpha_m1": 0.2, "alpha0": 0.3, "alpha1": 0.2, "alpha2": 0.5, "alpha3": 1.0, "lambda": 1.0},
  "initial": {"constant": 0.2},
  "grid": {"tau": 1.0, "horizon": 2.0, "ladder": [16, 32, 64], "reference": 128},
  "run": {"seed": 5, "n_paths": 150}
})";

const char* kMomentsCfg = R"({
  "model": {"alpha_m1": 0.2, "alpha0": 0.3, "alpha1": 0.2, "alpha2": 0.5, "alpha3": 1.0, "lambda": 1.0},
  "initial": {"constant": 0.2},
  "grid": {"tau": 1.0, "horizon": 1.0, "steps_per_delay": 64},
  "run": {"seed": 11, "n_paths": 120, "p": 2.0}
})";

const char* kPriceCfg = R"({
  "model": {"alpha_m1": 0.2, "alpha0": 0.3, "alpha1": 0.2, "alpha2": 0.5, "alpha3": 1.0, "lambda": 1.0},
  "initial": {"constant": 0.2},
  "grid": {"tau": 1.0, "horizon": 1.0, "ladder": [32, 64], "reference": 128},
  "run": {"seed": 13, "n_paths": 120},
  "pricing": {"bond": {"maturity": 1.0},
              "barrier": {"expiry": 1.0, "strike": 0.05, "barrier": 1.5}}
})";

}  // namespace

TEST_CASE("simulate writes one file per path plus a faithful manifest") {
  const ExperimentConfig cfg = parse_config(kSimulateCfg);
  const auto dir = fresh_dir("sim");
  DriverOptions opt;
  opt.out_dir = dir;
  opt.threads = 1;
  cmd_simulate(cfg, opt);

  for (const char* name :
       {"tem_path_00000.csv", "tem_path_00001.csv", "tem_path_00002.csv"}) {
    CHECK(std::filesystem::exists(dir / name));
  }
  const json m = manifest_of(dir);
  CHECK(m.at("command") == "simulate");
  CHECK(m.at("config_hash") == config_hash(cfg.canonical_text));
  CHECK(m.at("seed") == 7);
  CHECK(m.at("seed_overridden") == false);
  CHECK(m.at("library_version") == kLibraryVersion);
  CHECK(m.at("n_paths") == 3);
  CHECK(m.at("schemes") == json::array({"TEM"}));
  CHECK(m.at("delta_star") == 0.1);
  CHECK(m.at("failures") == json::array());
  CHECK(m.at("outputs").size() == 3u);

  // Default pi exponent 2/3 violates the step-admissibility bound, and the
  // manifest must say so rather than hide it.
  CHECK(m.at("pi_admissibility").at("all_admissible") == false);
  REQUIRE(m.at("warnings").size() == 1u);
  const std::string warning = m.at("warnings").at(0).get<std::string>();
  CHECK(warning.find("admissibility") != std::string::npos);
  CHECK(warning.find("convergence-rate guarantees do not apply") !=
        std::string::npos);

  // The per-path files carry one row per node: header + (M + n + 1) lines.
  std::istringstream rows(slurp(dir / "tem_path_00000.csv"));
  std::string line;
  int n_lines = 0;
  while (std::getline(rows, line)) {
    ++n_lines;
  }
  CHECK(n_lines == 1 + 16 + 16 + 1);
}

TEST_CASE("an admissible pi exponent produces a warning-free manifest") {
  std::string text = kSimulateCfg;
  text.replace(text.find("\"run\""), 5,
               "\"truncation\": {\"pi_exponent\": 0.25}, \"run\"");
  // The gentler threshold map shrinks the largest admissible step below
  // 1/16, so this variant needs the finer grid.
  text.replace(text.find("\"steps_per_delay\": 16"), 21,
               "\"steps_per_delay\": 32");
  const ExperimentConfig cfg = parse_config(text);
  const auto dir = fresh_dir("sim-adm");
  DriverOptions opt;
  opt.out_dir = dir;
  cmd_simulate(cfg, opt);
  const json m = manifest_of(dir);
  CHECK(m.at("pi_admissibility").at("all_admissible") == true);
  CHECK(m.at("warnings") == json::array());
}

TEST_CASE("reruns and thread counts never change a single output byte") {
  const ExperimentConfig cfg = parse_config(kSimulateCfg);
  const auto d1 = fresh_dir("rep1");
  const auto d2 = fresh_dir("rep2");
  const auto d4 = fresh_dir("rep4");
  DriverOptions opt;
  opt.out_dir = d1;
  opt.threads = 1;
  cmd_simulate(cfg, opt);
  opt.out_dir = d2;
  cmd_simulate(cfg, opt);
  opt.out_dir = d4;
  opt.threads = 4;
  cmd_simulate(cfg, opt);
  check_dirs_identical(d1, d2);
  check_dirs_identical(d1, d4);
}

TEST_CASE("a seed override is applied and recorded") {
  const ExperimentConfig cfg = parse_config(kSimulateCfg);
  const auto dir = fresh_dir("seed");
  DriverOptions opt;
  opt.out_dir = dir;
  opt.seed_override = 999;
  cmd_simulate(cfg, opt);
  const json m = manifest_of(dir);
  CHECK(m.at("seed") == 999);
  CHECK(m.at("seed_overridden") == true);
}

TEST_CASE("converge writes the ladder CSV and the fitted slope") {
  const ExperimentConfig cfg = parse_config(kConvergeCfg);
  const auto dir = fresh_dir("conv");
  DriverOptions opt;
  opt.out_dir = dir;
  opt.threads = 1;
  cmd_converge(cfg, opt);

  const std::string csv = slurp(dir / "convergence.csv");
  std::istringstream rows(csv);
  std::string line;
  std::getline(rows, line);
  CHECK(line == "delta,error,ci_lo,ci_hi");
  int n_rows = 0;
  while (std::getline(rows, line)) {
    ++n_rows;
  }
  CHECK(n_rows == 3);

  const json m = manifest_of(dir);
  CHECK(m.at("command") == "converge");
  CHECK(m.at("error_order_p") == 2.0);
  REQUIRE(m.contains("slope"));
  CHECK(m.at("slope").is_number());
  CHECK(m.at("slope").get<double>() > 0.0);
  REQUIRE(m.contains("errors_decreasing"));
  CHECK(m.at("errors_decreasing").is_boolean());
  CHECK(m.at("outputs") == json::array({"convergence.csv"}));
}

TEST_CASE("converge demands a proper ladder") {
  const ExperimentConfig single = parse_config(kSimulateCfg);
  DriverOptions opt;
  opt.out_dir = fresh_dir("conv-bad1");
  CHECK_THROWS_AS(cmd_converge(single, opt), config_error);

  std::string two = kConvergeCfg;
  two.replace(two.find("[16, 32, 64]"), 12, "[32, 64]");
  opt.out_dir = fresh_dir("conv-bad2");
  CHECK_THROWS_AS(cmd_converge(parse_config(two), opt), config_error);

  std::string self = kConvergeCfg;
  self.replace(self.find("[16, 32, 64]"), 12, "[16, 64, 128]");
  opt.out_dir = fresh_dir("conv-bad3");
  CHECK_THROWS_AS(cmd_converge(parse_config(self), opt), config_error);
}

TEST_CASE("moments writes one row per grid time plus the sup estimate") {
  const ExperimentConfig cfg = parse_config(kMomentsCfg);
  const auto dir = fresh_dir("mom");
  DriverOptions opt;
  opt.out_dir = dir;
  opt.threads = 1;
  cmd_moments(cfg, opt);

  std::istringstream rows(slurp(dir / "moments.csv"));
  std::string line;
  std::getline(rows, line);
  CHECK(line == "t,estimate,ci_halfwidth");
  int n_rows = 0;
  while (std::getline(rows, line)) {
    ++n_rows;
  }
  CHECK(n_rows == 64 + 1);

  const json m = manifest_of(dir);
  CHECK(m.at("command") == "moments");
  CHECK(m.at("moment_order_p") == 2.0);
  CHECK(m.at("inverse") == false);
  CHECK(m.at("sup_estimate").get<double>() > 0.0);
  CHECK(m.at("n_paths_used") == 120);
  CHECK(m.at("n_paths_excluded") == 0);

  // The command re-validates fields that a hand-built config could corrupt.
  ExperimentConfig bad = cfg;
  bad.p = 1.0;
  opt.out_dir = fresh_dir("mom-bad");
  CHECK_THROWS_AS(cmd_moments(bad, opt), config_error);
  ExperimentConfig inv = cfg;
  inv.inverse_moments = true;  // p = 2 sits below the inverse floor
  opt.out_dir = fresh_dir("mom-bad2");
  CHECK_THROWS_AS(cmd_moments(inv, opt), config_error);
}

TEST_CASE("price writes instrument rows for every rung of the ladder") {
  const ExperimentConfig cfg = parse_config(kPriceCfg);
  const auto dir = fresh_dir("price");
  DriverOptions opt;
  opt.out_dir = dir;
  opt.threads = 1;
  cmd_price(cfg, opt);

  std::istringstream rows(slurp(dir / "prices.csv"));
  std::string line;
  std::getline(rows, line);
  CHECK(line == "instrument,delta,n_paths,value,ci_lo,ci_hi");
  std::vector<std::string> body;
  while (std::getline(rows, line)) {
    body.push_back(line);
  }
  REQUIRE(body.size() == 4u);  // 2 rungs x (bond, barrier)
  CHECK(body[0].rfind("bond,", 0) == 0);
  CHECK(body[1].rfind("barrier,", 0) == 0);
  CHECK(body[2].rfind("bond,", 0) == 0);
  CHECK(body[3].rfind("barrier,", 0) == 0);

  const json m = manifest_of(dir);
  CHECK(m.at("command") == "price");
  CHECK(m.at("prices").size() == 4u);
  for (const auto& row : m.at("prices")) {
    CHECK(row.at("value").get<double>() >= 0.0);
    CHECK(row.at("ci_lo").get<double>() <= row.at("value").get<double>());
    CHECK(row.at("ci_hi").get<double>() >= row.at("value").get<double>());
  }

  // Single-grid pricing degenerates to one rung.
  std::string single = kPriceCfg;
  single.replace(single.find("\"ladder\": [32, 64], \"reference\": 128"), 36,
                 "\"steps_per_delay\": 64");
  const auto dir1 = fresh_dir("price1");
  opt.out_dir = dir1;
  cmd_price(parse_config(single), opt);
  const json m1 = manifest_of(dir1);
  CHECK(m1.at("prices").size() == 2u);

  ExperimentConfig no_instruments = cfg;
  no_instruments.bond.reset();
  no_instruments.barrier.reset();
  opt.out_dir = fresh_dir("price-bad");
  CHECK_THROWS_AS(cmd_price(no_instruments, opt), config_error);
}

TEST_CASE("the command entry point maps outcomes to stable exit codes") {
  const auto dir = fresh_dir("cli");
  const auto write_file = [&](const char* name, const std::string& text) {
    const auto file = dir / name;
    std::ofstream os(file, std::ios::binary);
    os << text;
    os.flush();
    return file;
  };

  const auto good = write_file("good.json", kSimulateCfg);
  DriverOptions opt;
  opt.out_dir = dir / "out-good";
  opt.threads = 1;
  CHECK(run_command("simulate", good, opt) == 0);
  CHECK(std::filesystem::exists(dir / "out-good" / "manifest.json"));

  const auto bad_json = write_file("bad.json", "{ not json");
  opt.out_dir = dir / "out-bad";
  CHECK(run_command("simulate", bad_json, opt) == 2);
  CHECK(run_command("simulate", dir / "missing.json", opt) == 2);
  CHECK(run_command("frobnicate", good, opt) == 2);

  // A classical run on a strongly mean-reverting model fails numerically on
  // every path: exit code 3.
  std::string doomed = kSimulateCfg;
  doomed.replace(doomed.find("\"alpha0\": 0.3"), 13, "\"alpha0\": 10.0");
  doomed.replace(doomed.find("\"n_paths\": 3"), 12,
                 "\"n_paths\": 3, \"schemes\": [\"EM\"]");
  const auto doomed_file = write_file("doomed.json", doomed);
  opt.out_dir = dir / "out-doomed";
  CHECK(run_command("simulate", doomed_file, opt) == 3);
}
