// dnpsim: command-line front end for the dnp library.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "dnp/config.hpp"
#include "dnp/errors.hpp"
#include "dnp/kinetics.hpp"
#include "dnp/runner.hpp"
#include "dnp/spectrum.hpp"
#include "json.hpp"

namespace {

using dnp::ErrorKind;

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw dnp::Error(ErrorKind::io, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

dnp::ScenarioConfig load_config(const std::string& path, const std::vector<std::string>& sets) {
  auto cfg = path.empty() ? dnp::parse_config("") : dnp::parse_config(read_text(path));
  for (const auto& kv : sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw dnp::Error(ErrorKind::usage, "--set expects key=value, got '" + kv + "'");
    dnp::apply_override(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  return cfg;
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty() || out_path == "-") {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
  if (!out) throw dnp::Error(ErrorKind::io, "cannot write " + out_path);
  out << text;
  if (!text.empty() && text.back() != '\n') out << '\n';
}

std::vector<std::string> split_commas(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dnpsim: DNP rate-equation simulator for the 15N@C60 eight-level system"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> sets;
  std::string format = "json";
  std::string out_path;
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "Scenario config file (section.key = value)");
    cmd->add_option("--set", sets, "Override a config key: key=value (repeatable)");
  };

  auto* levels = app.add_subcommand("levels", "Energy levels and transitions");
  add_common(levels);
  levels->add_option("--format", format, "csv|json")->check(CLI::IsMember({"csv", "json"}));

  auto* thermal = app.add_subcommand("thermal", "Thermal populations and baselines");
  add_common(thermal);

  auto* simulate = app.add_subcommand("simulate", "Run a scenario config");
  std::string sim_config;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::string sim_format;
  std::string sweep;
  simulate->add_option("config", sim_config, "Scenario config file")->required();
  simulate->add_option("--set", sets, "Override a config key: key=value (repeatable)");
  simulate->add_option("--seed", seed, "Spectrum noise seed");
  simulate->add_option("--out-dir", out_dir, "Output directory");
  simulate->add_option("--format", sim_format, "csv|json (default: both)")->check(CLI::IsMember({"csv", "json"}));
  simulate->add_option("--sweep", sweep, "key=a,b,c: one run per value in <out-dir>/<key>=<value>/");

  auto* predict = app.add_subcommand("predict", "Closed-form predictions");
  std::string what;
  dnp::PredictInputs pin;
  std::optional<double> alpha;
  predict->add_option("what", what, "eq4|frequencies|gn|thermal")
      ->required()
      ->check(CLI::IsMember({"eq4", "frequencies", "gn", "thermal"}));
  add_common(predict);
  predict->add_option("--rf2", pin.rf2, "Measured RF2 frequency (Hz)");
  predict->add_option("--alpha", alpha, "Boltzmann factor override");
  predict->add_option("--sigma-a", pin.hyperfine_sigma, "Uncertainty of |A| (Hz)");

  auto* spectrum = app.add_subcommand("spectrum", "Synthesize or fit ESR doublets");
  spectrum->require_subcommand(1);
  auto* synth = spectrum->add_subcommand("synth", "Synthesize a doublet spectrum CSV");
  add_common(synth);
  double polarization = 0.0;
  std::optional<double> snr;
  std::optional<std::uint64_t> synth_seed;
  synth->add_option("--polarization", polarization, "Nuclear polarization of the sample")
      ->check(CLI::Range(-1.0, 1.0));
  synth->add_option("--snr", snr, "Noiseless peak / noise rms (overrides spectrum.noise_rms)")
      ->check(CLI::PositiveNumber);
  synth->add_option("--seed", synth_seed, "Noise seed");
  synth->add_option("--out", out_path, "Output file (default stdout)");

  auto* fit = spectrum->add_subcommand("fit", "Fit a bi-Lorentzian to a spectrum CSV");
  std::string fit_input;
  bool unequal = false;
  fit->add_option("input", fit_input, "Spectrum CSV")->required();
  fit->add_flag("--unequal-widths", unequal, "Fit separate widths");
  fit->add_option("--out", out_path, "Output file (default stdout)");

  auto* calibrate = app.add_subcommand("calibrate-flipflop", "Flip-flop rate reproducing a polarization datum");
  add_common(calibrate);
  double target = 0.21;
  double duration = 9000.0;
  calibrate->add_option("--target", target, "Target nuclear polarization");
  calibrate->add_option("--duration", duration, "Irradiation time (s)")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : dnp::exit_code(ErrorKind::usage);
  }

  try {
    if (*levels) {
      const auto cfg = load_config(config_path, sets);
      emit(format == "csv" ? dnp::levels_csv(cfg.system) : dnp::levels_json(cfg.system), "");
    } else if (*thermal) {
      emit(dnp::thermal_json(load_config(config_path, sets).system), "");
    } else if (*simulate) {
      auto cfg = load_config(sim_config, sets);
      if (seed) dnp::apply_override(cfg, "spectrum.seed", std::to_string(*seed));
      if (!out_dir.empty()) dnp::apply_override(cfg, "output.directory", out_dir);
      if (!sim_format.empty()) dnp::apply_override(cfg, "output.formats", sim_format);
      if (sweep.empty()) {
        const auto report = dnp::run_scenario(cfg);
        emit(dnp::report_to_json(report), "");
      } else {
        const auto eq = sweep.find('=');
        if (eq == std::string::npos) throw dnp::Error(ErrorKind::usage, "--sweep expects key=a,b,c");
        const auto values = split_commas(sweep.substr(eq + 1));
        const auto reports = dnp::run_sweep(cfg, sweep.substr(0, eq), values);
        nlohmann::ordered_json summary = nlohmann::ordered_json::array();
        for (std::size_t i = 0; i < reports.size(); ++i) {
          summary.push_back({{"value", values[i]},
                             {"directory", reports[i].config.output.directory},
                             {"nuclear_p", dnp::round_significant(reports[i].polarization.nuclear_p)}});
        }
        emit(summary.dump(2), "");
      }
    } else if (*predict) {
      const auto cfg = load_config(config_path, sets);
      pin.alpha = alpha;
      emit(dnp::predict_json(cfg, *dnp::parse_predict_what(what), pin), "");
    } else if (*synth) {
      const auto cfg = load_config(config_path, sets);
      const auto lv = dnp::build_levels(cfg.system);
      const auto p = dnp::polarized_populations(lv, cfg.system.temperature, polarization);
      dnp::SynthesisOptions so;
      so.linewidth = cfg.spectrum.linewidth;
      so.n_points = cfg.spectrum.n_points;
      so.span = cfg.spectrum.span;
      so.noise_rms = cfg.spectrum.noise_rms;
      so.seed = synth_seed.value_or(cfg.spectrum.seed);
      if (snr) so.noise_rms = dnp::noiseless_peak(p, cfg.system, so) / *snr;
      std::ostringstream text;
      dnp::write_spectrum_csv(text, dnp::synthesize_spectrum(p, cfg.system, so));
      emit(text.str(), out_path);
    } else if (*fit) {
      std::ifstream in(fit_input, std::ios::binary);
      if (!in) throw dnp::Error(ErrorKind::io, "cannot read " + fit_input);
      const auto s = dnp::read_spectrum_csv(in);
      dnp::FitOptions fo;
      fo.equal_width = !unequal;
      const auto result = dnp::fit_bilorentzian(s, fo);
      emit(dnp::fit_to_json(result, dnp::polarization_from_fit(result)), out_path);
    } else if (*calibrate) {
      const auto cfg = load_config(config_path, sets);
      const auto rates = cfg.relaxation_rates();
      const auto cal = dnp::calibrate_flipflop(cfg.system, rates.electronic, cfg.scenario.mw, target, duration,
                                               cfg.scenario.drive_factor);
      nlohmann::ordered_json j;
      j["inputs"] = {{"target", target},
                     {"duration_s", duration},
                     {"temperature_kelvin", cfg.system.temperature},
                     {"b_field_tesla", cfg.system.b_field},
                     {"electron_t1_s", cfg.rates.electron_t1},
                     {"mw", std::string(dnp::to_string(cfg.scenario.mw))}};
      j["flipflop_rate_per_s"] = dnp::round_significant(cal.flipflop_rate);
      j["achieved_polarization"] = dnp::round_significant(cal.achieved_polarization);
      j["evaluations"] = cal.evaluations;
      emit(j.dump(2), "");
    }
  } catch (const dnp::CalibrationError& e) {
    std::fprintf(stderr, "error: %s (reachable bound %.6g)\n", e.what(), e.asymptotic_bound());
    return dnp::exit_code(e.kind());
  } catch (const dnp::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return dnp::exit_code(e.kind());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return dnp::exit_code(ErrorKind::io);
  }
  return 0;
}
