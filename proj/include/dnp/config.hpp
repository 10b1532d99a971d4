#pragma once

// Flat `section.key = value` scenario configuration.
//
// Blank lines and lines starting with '#' are ignored; a '#' after whitespace
// starts a trailing comment. Every key is optional; unknown keys are rejected.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dnp/kinetics.hpp"
#include "dnp/spin_system.hpp"

namespace dnp {

enum class ScenarioKind { thermal, overhauser, ponsee_cw, ponsee_pulsed, relax };

std::string_view to_string(ScenarioKind kind);
std::string_view to_string(MwPiModel model);

struct RateSettings {
  double electron_t1 = 270.0;        // s
  double nuclear_t1 = 43200.0;       // s
  double flipflop_rate = 0.0;        // 1/s
  std::optional<double> lattice_temperature;  // K; system temperature when unset
};

struct ScenarioSettings {
  ScenarioKind kind = ScenarioKind::ponsee_cw;
  TransitionLabel mw = TransitionLabel::MW2;
  std::optional<TransitionLabel> rf = TransitionLabel::RF2;
  std::optional<double> duration;    // s; per-kind default when unset
  std::size_t cycles = 4;
  std::optional<double> wait;        // s; 5 T1e when unset
  double drive_factor = 1e6;
  MwPiModel pulse_model = MwPiModel::reverse;
  double initial_polarization = 0.62;
  std::size_t samples = 121;
};

struct SpectrumSettings {
  double linewidth = 3e-4;  // T
  std::size_t n_points = 1024;
  double span = 6e-3;       // T
  double noise_rms = 0.0;
  std::uint64_t seed = 1;
};

struct OutputSettings {
  std::string directory = ".";
  bool csv = true;
  bool json = true;
};

struct ScenarioConfig {
  SystemParams system;
  RateSettings rates;
  ScenarioSettings scenario;
  SpectrumSettings spectrum;
  OutputSettings output;

  double lattice_temperature() const;
  /// Configured duration or the per-kind default (9000 s Overhauser, 1200 s
  /// CW, 41400 s relax, cycles x wait pulsed, 0 thermal).
  double duration() const;
  double wait() const;
  RelaxationRates relaxation_rates() const;
};

/// Parses and validates. Throws ConfigError (config_syntax,
/// config_unknown_key or config_value) naming the line and key.
ScenarioConfig parse_config(std::string_view text);

/// Sets one key as if it appeared in a file, then revalidates.
void apply_override(ScenarioConfig& cfg, std::string_view key, std::string_view value);

/// All keys in canonical order, one `key = value` line each.
std::string to_text(const ScenarioConfig& cfg);

std::vector<std::string> config_keys();

}  // namespace dnp
