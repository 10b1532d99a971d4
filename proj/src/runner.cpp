#include "dnp/runner.hpp"

#include <cmath>
#include <fstream>
#include <future>
#include <sstream>

#include "dnp/errors.hpp"
#include "dnp/spectrum.hpp"
#include "json.hpp"

namespace dnp {

namespace {

using nlohmann::ordered_json;

double r12(double x) { return round_significant(x); }

// Config echo for output files. The output directory is left out so runs
// differing only in where they write produce identical bytes.
std::vector<std::string> echo_lines(const ScenarioConfig& cfg) {
  std::vector<std::string> out;
  std::istringstream in(to_text(cfg));
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("output.directory ", 0) != 0) out.push_back(line);
  }
  return out;
}

ordered_json populations_json(const PopulationVector& p) {
  ordered_json out = ordered_json::array();
  for (double v : p.values()) out.push_back(r12(v));
  return out;
}

ordered_json config_json(const ScenarioConfig& cfg) {
  ordered_json out = ordered_json::object();
  for (const auto& line : echo_lines(cfg)) {
    const auto eq = line.find(" = ");
    out[line.substr(0, eq)] = line.substr(eq + 3);
  }
  return out;
}

Trajectory sampled_evolution(const RateModel& model, const PopulationVector& p0, double duration,
                             std::size_t samples) {
  Trajectory out;
  if (duration == 0.0) {
    out.push_back({0.0, p0});
    return out;
  }
  for (std::size_t k = 0; k < samples; ++k) {
    const double t = k + 1 == samples ? duration : duration * static_cast<double>(k) / (samples - 1);
    out.push_back({t, k == 0 ? p0 : evolve(model, p0, t)});
  }
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorKind::io, "write failed: " + path.string());
}

}  // namespace

RunReport run_scenario(const ScenarioConfig& cfg, bool write_files) {
  const auto& params = cfg.system;
  const auto levels = build_levels(params);
  const auto rates = cfg.relaxation_rates();
  const double drive = cfg.scenario.drive_factor * rates.max_rate();
  const auto thermal = thermal_populations(levels, params.temperature);

  RunReport report;
  report.config = cfg;
  report.baseline = thermal_baseline(levels, params.temperature);

  switch (cfg.scenario.kind) {
    case ScenarioKind::thermal:
      report.trajectory.push_back({0.0, thermal});
      break;
    case ScenarioKind::overhauser: {
      const auto model = build_rate_matrix(params, rates, {DriveSpec{cfg.scenario.mw, drive}});
      report.trajectory = sampled_evolution(model, thermal, cfg.duration(), cfg.scenario.samples);
      break;
    }
    case ScenarioKind::ponsee_cw: {
      const auto model = build_rate_matrix(
          params, rates, {DriveSpec{cfg.scenario.mw, drive}, DriveSpec{*cfg.scenario.rf, drive}});
      report.trajectory = sampled_evolution(model, thermal, cfg.duration(), cfg.scenario.samples);
      break;
    }
    case ScenarioKind::ponsee_pulsed: {
      const auto steps = ponsee_pulse_cycle(cfg.scenario.mw, *cfg.scenario.rf, cfg.wait(), cfg.scenario.cycles);
      report.trajectory = run_schedule(params, rates, steps, thermal,
                                       ScheduleOptions{cfg.scenario.drive_factor, cfg.scenario.pulse_model});
      break;
    }
    case ScenarioKind::relax: {
      const auto p0 = polarized_populations(levels, params.temperature, cfg.scenario.initial_polarization);
      const auto model = build_rate_matrix(params, rates, {});
      report.trajectory = sampled_evolution(model, p0, cfg.duration(), cfg.scenario.samples);
      break;
    }
  }

  report.final_populations = report.trajectory.back().populations;
  report.elapsed = report.trajectory.back().time;
  report.polarization = polarization_report(report.final_populations, levels, report.baseline);
  report.enhancement_rounded_baseline = enhancement(report.polarization.nuclear_p, rounded_thermal_baseline);
  for (std::size_t k = 0; k < 4; ++k) {
    report.electron_fractions[k] =
        electron_manifold_population(report.final_populations, levels, electron_projections[k]);
  }

  std::vector<std::pair<std::string, std::string>> outputs;
  if (cfg.output.csv) {
    outputs.emplace_back("trajectory.csv", trajectory_to_csv(report));
    SynthesisOptions so;
    so.linewidth = cfg.spectrum.linewidth;
    so.n_points = cfg.spectrum.n_points;
    so.span = cfg.spectrum.span;
    so.noise_rms = cfg.spectrum.noise_rms;
    so.seed = cfg.spectrum.seed;
    std::ostringstream spectrum;
    write_spectrum_csv(spectrum, synthesize_spectrum(report.final_populations, params, so));
    outputs.emplace_back("spectrum.csv", spectrum.str());
  }
  if (cfg.output.json) outputs.emplace_back("report.json", "");
  for (const auto& [name, text] : outputs) report.files.push_back(name);

  if (write_files) {
    const std::filesystem::path dir(cfg.output.directory);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(ErrorKind::io, "cannot create " + dir.string() + ": " + ec.message());
    for (const auto& [name, text] : outputs) {
      write_file(dir / name, name == "report.json" ? report_to_json(report) + "\n" : text);
    }
  }
  return report;
}

std::string report_to_json(const RunReport& report) {
  ordered_json j;
  j["scenario"] = config_json(report.config);
  j["elapsed_s"] = r12(report.elapsed);
  j["final_populations"] = populations_json(report.final_populations);
  j["nuclear_p"] = r12(report.polarization.nuclear_p);
  j["electronic_p"] = r12(report.polarization.electronic_p);
  j["baseline_polarization"] = r12(report.baseline);
  j["enhancement"] = report.polarization.enhancement ? ordered_json(r12(*report.polarization.enhancement))
                                                      : ordered_json(nullptr);
  j["rounded_baseline"] = rounded_thermal_baseline;
  j["enhancement_rounded_baseline"] = r12(report.enhancement_rounded_baseline);
  ordered_json fractions = ordered_json::object();
  const char* names[4] = {"-3/2", "-1/2", "+1/2", "+3/2"};
  for (std::size_t k = 0; k < 4; ++k) fractions[names[k]] = r12(report.electron_fractions[k]);
  j["electron_manifold_fractions"] = fractions;
  j["files"] = report.files;
  return j.dump(2);
}

std::string trajectory_to_csv(const RunReport& report) {
  const auto levels = build_levels(report.config.system);
  std::ostringstream out;
  for (const auto& line : echo_lines(report.config)) out << "# " << line << '\n';
  out << "time_s";
  for (std::size_t i = 0; i < level_count; ++i) out << ",p" << i;
  out << ",nuclear_p\n";
  for (const auto& point : report.trajectory) {
    out << format_number(point.time);
    for (double v : point.populations.values()) out << ',' << format_number(v);
    out << ',' << format_number(nuclear_polarization(point.populations, levels)) << '\n';
  }
  return out.str();
}

std::vector<RunReport> run_sweep(const ScenarioConfig& cfg, const std::string& key,
                                 const std::vector<std::string>& values) {
  std::vector<ScenarioConfig> configs;
  for (const auto& value : values) {
    ScenarioConfig c = cfg;
    apply_override(c, key, value);
    c.output.directory = (std::filesystem::path(cfg.output.directory) / (key + "=" + value)).string();
    configs.push_back(std::move(c));
  }
  std::vector<std::future<RunReport>> jobs;
  for (const auto& c : configs) {
    jobs.push_back(std::async(std::launch::async, [&c] { return run_scenario(c, true); }));
  }
  std::vector<RunReport> out;
  for (auto& job : jobs) out.push_back(job.get());
  return out;
}

std::optional<PredictWhat> parse_predict_what(std::string_view text) {
  if (text == "eq4") return PredictWhat::closed_form;
  if (text == "frequencies") return PredictWhat::frequencies;
  if (text == "gn") return PredictWhat::gn;
  if (text == "thermal") return PredictWhat::thermal;
  return std::nullopt;
}

std::string predict_json(const ScenarioConfig& cfg, PredictWhat what, const PredictInputs& inputs) {
  const auto& params = cfg.system;
  const double a_abs = std::fabs(params.hyperfine_a);
  ordered_json j;
  switch (what) {
    case PredictWhat::closed_form: {
      const double alpha = inputs.alpha.value_or(boltzmann_factor(params));
      if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must be in (0, 1)");
      j["inputs"] = {{"alpha", r12(alpha)},
                     {"b_field_tesla", r12(params.b_field)},
                     {"temperature_kelvin", r12(params.temperature)},
                     {"alpha_source", inputs.alpha ? "--alpha" : "system"}};
      for (auto rf : {TransitionLabel::RF1, TransitionLabel::RF2, TransitionLabel::RF3, TransitionLabel::RF4}) {
        std::string name(to_string(rf));
        for (auto& c : name) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        j[name] = r12(ponsee_cw_prediction(alpha, rf));
      }
      break;
    }
    case PredictWhat::frequencies: {
      const auto table = predict_rf_table(inputs.rf2, a_abs, inputs.hyperfine_sigma);
      j["inputs"] = {{"rf2_hz", r12(inputs.rf2)},
                     {"hyperfine_abs_hz", r12(a_abs)},
                     {"hyperfine_sigma_hz", r12(inputs.hyperfine_sigma)}};
      auto entry = [](const FrequencyEstimate& f) {
        return ordered_json{{"hz", r12(f.value)}, {"sigma_hz", r12(f.sigma)}};
      };
      j["rf1"] = entry(table.rf1);
      j["rf2"] = entry(table.rf2);
      j["rf3"] = entry(table.rf3);
      j["rf4"] = entry(table.rf4);
      break;
    }
    case PredictWhat::gn: {
      j["inputs"] = {{"rf2_hz", r12(inputs.rf2)},
                     {"hyperfine_abs_hz", r12(a_abs)},
                     {"b_field_tesla", r12(params.b_field)}};
      j["g_n_abs"] = r12(gn_from_rf2(inputs.rf2, a_abs, params.b_field));
      break;
    }
    case PredictWhat::thermal:
      return thermal_json(params);
  }
  return j.dump(2);
}

std::string levels_json(const SystemParams& params) {
  const auto levels = build_levels(params);
  const auto catalog = catalog_transitions(levels);
  ordered_json j;
  ordered_json lv = ordered_json::array();
  for (std::size_t i = 0; i < level_count; ++i) {
    const auto& l = levels[i];
    lv.push_back({{"index", l.index}, {"m_s", l.m_s}, {"m_i", l.m_i}, {"energy_j", r12(l.energy)}});
  }
  j["levels"] = lv;
  ordered_json tr = ordered_json::array();
  for (const auto& t : catalog.all()) {
    tr.push_back({{"label", std::string(to_string(t.label))},
                  {"kind", std::string(to_string(t.kind))},
                  {"lower", t.lower_level},
                  {"upper", t.upper_level},
                  {"frequency_hz", r12(t.frequency)}});
  }
  j["transitions"] = tr;
  return j.dump(2);
}

std::string levels_csv(const SystemParams& params) {
  const auto levels = build_levels(params);
  const auto catalog = catalog_transitions(levels);
  std::ostringstream out;
  out << "# levels\nindex,m_s,m_i,energy_j\n";
  for (std::size_t i = 0; i < level_count; ++i) {
    const auto& l = levels[i];
    out << l.index << ',' << format_number(l.m_s) << ',' << format_number(l.m_i) << ','
        << format_number(l.energy) << '\n';
  }
  out << "# transitions\nlabel,kind,lower,upper,frequency_hz\n";
  for (const auto& t : catalog.all()) {
    out << to_string(t.label) << ',' << to_string(t.kind) << ',' << t.lower_level << ',' << t.upper_level << ','
        << format_number(t.frequency) << '\n';
  }
  return out.str();
}

std::string thermal_json(const SystemParams& params) {
  const auto levels = build_levels(params);
  const auto p = thermal_populations(levels, params.temperature);
  ordered_json j;
  j["inputs"] = {{"b_field_tesla", r12(params.b_field)}, {"temperature_kelvin", r12(params.temperature)}};
  j["alpha"] = r12(boltzmann_factor(params));
  j["populations"] = populations_json(p);
  ordered_json fractions = ordered_json::object();
  const char* names[4] = {"-3/2", "-1/2", "+1/2", "+3/2"};
  for (std::size_t k = 0; k < 4; ++k) {
    fractions[names[k]] = r12(electron_manifold_population(p, levels, electron_projections[k]));
  }
  j["electron_manifold_fractions"] = fractions;
  j["nuclear_p"] = r12(nuclear_polarization(p, levels));
  j["baseline_polarization"] = r12(thermal_baseline(levels, params.temperature));
  j["bare_nuclear_polarization"] =
      r12(thermal_bare_polarization(std::fabs(params.g_nuclear), params.b_field, params.temperature));
  j["electronic_p"] = r12(electronic_polarization(p, levels));
  return j.dump(2);
}

}  // namespace dnp
