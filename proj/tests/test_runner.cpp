#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "dnp/runner.hpp"
#include "dnp/spectrum.hpp"
#include "json.hpp"
#include "oracles.hpp"

using namespace dnp;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("dnp_runner_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("thermal scenario reports the Boltzmann statistics") {
  const auto report = run_scenario(parse_config("scenario.kind = thermal"), false);
  CHECK(report.polarization.nuclear_p == doctest::Approx(-5.5575e-4).epsilon(1e-4));
  CHECK(report.baseline == doctest::Approx(5.56e-4).epsilon(1e-3));
  CHECK(report.electron_fractions[0] == doctest::Approx(0.979).epsilon(1e-3));
  CHECK(report.electron_fractions[3] == doctest::Approx(1e-5).epsilon(0.1));
  CHECK(report.elapsed == 0.0);
}

TEST_CASE("relax scenario from 62% over 11.5 h lands on 40%") {
  const auto cfg = parse_config(
      "scenario.kind = relax\nrates.nuclear_t1_s = 9.45e4\nscenario.initial_polarization = 0.62\n"
      "system.temperature_kelvin = 4.2\n");
  const auto report = run_scenario(cfg, false);
  CHECK(report.elapsed == 41400.0);
  CHECK(std::fabs(report.polarization.nuclear_p - 0.40) <= 0.005);
  CHECK(report.trajectory.size() == cfg.scenario.samples);
}

TEST_CASE("CW scenario reaches the closed form once it has run to steady state") {
  const auto cfg = parse_config("rates.nuclear_t1_s = 1e15\nscenario.duration_s = 40000\n");
  const auto report = run_scenario(cfg, false);
  const double alpha = boltzmann_factor(cfg.system);
  CHECK(std::fabs(report.polarization.nuclear_p - ponsee_cw_prediction(alpha, TransitionLabel::RF2)) <= 1e-3);
  REQUIRE(report.polarization.enhancement.has_value());
  CHECK(*report.polarization.enhancement == doctest::Approx(1524).epsilon(2e-3));
}

TEST_CASE("default 20 minute CW run is still in its transient") {
  // Independent scipy evolution of the same model: P(1200 s) = 0.5861.
  const auto report = run_scenario(parse_config(""), false);
  CHECK(report.elapsed == 1200.0);
  CHECK(report.polarization.nuclear_p == doctest::Approx(0.5861).epsilon(1e-3));
}

TEST_CASE("report numbers equal direct library calls") {
  const auto cfg = parse_config("scenario.kind = overhauser\nrates.flipflop_rate_per_s = 4e-5\n");
  const auto report = run_scenario(cfg, false);
  const auto rates = cfg.relaxation_rates();
  const auto model = build_rate_matrix(cfg.system, rates, {{TransitionLabel::MW2, 1e6 * rates.max_rate()}});
  const auto levels = build_levels(cfg.system);
  const auto p = evolve(model, thermal_populations(levels, cfg.system.temperature), 9000.0);
  CHECK(report.final_populations == p);
  CHECK(report.polarization.nuclear_p == nuclear_polarization(p, levels));
  CHECK(report.polarization.electronic_p == electronic_polarization(p, levels));
  CHECK(report.baseline == thermal_baseline(levels, cfg.system.temperature));
  CHECK(report.enhancement_rounded_baseline == nuclear_polarization(p, levels) / rounded_thermal_baseline);

  const auto j = nlohmann::json::parse(report_to_json(report));
  CHECK(j["nuclear_p"].get<double>() == round_significant(report.polarization.nuclear_p));
  CHECK(j["scenario"]["scenario.kind"] == "overhauser");
}

TEST_CASE("pulsed scenario runs the cycle schedule") {
  const auto cfg = parse_config("scenario.kind = ponsee_pulsed\nscenario.rf = RF4\nscenario.cycles = 4\n");
  const auto report = run_scenario(cfg, false);
  CHECK(report.trajectory.size() == 13);
  CHECK(report.elapsed == doctest::Approx(4 * 1350.0));
}

TEST_CASE("files are written and byte-identical across runs") {
  const auto dir = scratch("determinism");
  auto cfg = parse_config("spectrum.noise_rms = 0.01\nspectrum.seed = 17\n");
  cfg.output.directory = (dir / "a").string();
  const auto first = run_scenario(cfg);
  cfg.output.directory = (dir / "b").string();
  run_scenario(cfg);
  REQUIRE(first.files.size() == 3);
  for (const auto& name : first.files) {
    const auto a = slurp(dir / "a" / name);
    CHECK(!a.empty());
    CHECK(a == slurp(dir / "b" / name));
  }
  const auto traj = slurp(dir / "a" / "trajectory.csv");
  CHECK(traj.find("time_s,p0,p1,p2,p3,p4,p5,p6,p7,nuclear_p\n") != std::string::npos);
  std::ifstream spec(dir / "a" / "spectrum.csv");
  const auto s = read_spectrum_csv(spec);
  CHECK(s.meta.noise_seed == std::optional<std::uint64_t>(17));
  fs::remove_all(dir);
}

TEST_CASE("format selection limits the written files") {
  const auto dir = scratch("formats");
  auto cfg = parse_config("scenario.kind = thermal\noutput.formats = json\n");
  cfg.output.directory = dir.string();
  const auto report = run_scenario(cfg);
  CHECK(report.files == std::vector<std::string>{"report.json"});
  CHECK(fs::exists(dir / "report.json"));
  CHECK_FALSE(fs::exists(dir / "trajectory.csv"));
  fs::remove_all(dir);
}

TEST_CASE("sweeps write one subdirectory per value") {
  const auto dir = scratch("sweep");
  auto cfg = parse_config("scenario.kind = ponsee_cw\nscenario.duration_s = 600\n");
  cfg.output.directory = dir.string();
  const auto reports = run_sweep(cfg, "scenario.rf", {"RF1", "RF2", "RF3", "RF4"});
  REQUIRE(reports.size() == 4);
  for (const auto& rf : {"RF1", "RF2", "RF3", "RF4"}) {
    CHECK(fs::exists(dir / (std::string("scenario.rf=") + rf) / "report.json"));
  }
  CHECK(reports[0].polarization.nuclear_p < reports[3].polarization.nuclear_p);
  auto single = cfg;
  apply_override(single, "scenario.rf", "RF3");
  CHECK(run_scenario(single, false).final_populations == reports[2].final_populations);
  fs::remove_all(dir);
}

TEST_CASE("predictions") {
  const auto cfg = parse_config("");
  const auto cf = nlohmann::json::parse(predict_json(cfg, PredictWhat::closed_form, {47.920e6, 0.0215, 0.0}));
  CHECK(cf["rf2"].get<double>() == doctest::Approx(0.845).epsilon(1e-3));
  CHECK(cf["rf4"].get<double>() >= 0.9999);
  CHECK(cf["inputs"]["alpha"].get<double>() == 0.0215);
  const auto gn = nlohmann::json::parse(predict_json(cfg, PredictWhat::gn, {}));
  CHECK(gn["g_n_abs"].get<double>() == doctest::Approx(0.5640).epsilon(1e-3));
  const auto fr = nlohmann::json::parse(predict_json(cfg, PredictWhat::frequencies, {}));
  CHECK(fr["rf1"]["hz"].get<double>() == doctest::Approx(69.82e6));
  CHECK(fr["rf4"]["hz"].get<double>() == doctest::Approx(4.12e6));
  const auto th = nlohmann::json::parse(predict_json(cfg, PredictWhat::thermal, {}));
  CHECK(th["bare_nuclear_polarization"].get<double>() == doctest::Approx(2.97e-4).epsilon(5e-3));
  CHECK(parse_predict_what("nope") == std::nullopt);
}

TEST_CASE("levels listings") {
  const auto j = nlohmann::json::parse(levels_json(SystemParams{}));
  CHECK(j["levels"].size() == 8);
  CHECK(j["transitions"].size() == 13);
  const auto csv = levels_csv(SystemParams{});
  CHECK(csv.find("RF1,nuclear") != std::string::npos);
}
