#pragma once

// Scenario execution and report serialization behind the dnpsim CLI.

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dnp/config.hpp"
#include "dnp/kinetics.hpp"
#include "dnp/observables.hpp"
#include "dnp/spin_system.hpp"

namespace dnp {

struct RunReport {
  ScenarioConfig config;
  PopulationVector final_populations = PopulationVector::uniform();
  PolarizationReport polarization;              // enhancement vs the exact baseline
  double baseline = 0.0;                        // |thermal nuclear P| at the system temperature
  double enhancement_rounded_baseline = 0.0;    // nuclear_p / 6e-4
  std::array<double, 4> electron_fractions{};   // m_s = -3/2 .. +3/2
  double elapsed = 0.0;                         // simulated seconds
  Trajectory trajectory;
  std::vector<std::string> files;               // relative to the output directory
};

/// Runs the configured scenario. When `write_files` is set, writes
/// trajectory.csv, spectrum.csv and report.json (per output.formats) into
/// output.directory.
RunReport run_scenario(const ScenarioConfig& cfg, bool write_files = true);

std::string report_to_json(const RunReport& report);
std::string trajectory_to_csv(const RunReport& report);

struct SweepPoint {
  std::string value;
  std::filesystem::path directory;
};

/// One run per value of `key`, concurrently, each writing into
/// <output.directory>/<key>=<value>/. Reports come back in input order.
std::vector<RunReport> run_sweep(const ScenarioConfig& cfg, const std::string& key,
                                 const std::vector<std::string>& values);

enum class PredictWhat { closed_form, frequencies, gn, thermal };

std::optional<PredictWhat> parse_predict_what(std::string_view text);

struct PredictInputs {
  double rf2 = 47.920e6;                  // Hz
  std::optional<double> alpha;            // overrides boltzmann_factor(system)
  double hyperfine_sigma = 0.0;           // Hz
};

/// JSON with the inputs echoed next to the observables-module outputs.
std::string predict_json(const ScenarioConfig& cfg, PredictWhat what, const PredictInputs& inputs = {});

/// Levels and transitions as JSON or CSV.
std::string levels_json(const SystemParams& params);
std::string levels_csv(const SystemParams& params);

/// Thermal populations and statistics as JSON.
std::string thermal_json(const SystemParams& params);

}  // namespace dnp
