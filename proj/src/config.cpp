#include "dnp/config.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "dnp/errors.hpp"
#include "dnp/spectrum.hpp"

namespace dnp {

std::string_view to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::thermal: return "thermal";
    case ScenarioKind::overhauser: return "overhauser";
    case ScenarioKind::ponsee_cw: return "ponsee_cw";
    case ScenarioKind::ponsee_pulsed: return "ponsee_pulsed";
    case ScenarioKind::relax: return "relax";
  }
  return "?";
}

std::string_view to_string(MwPiModel model) {
  return model == MwPiModel::reverse ? "reverse" : "equalize";
}

double ScenarioConfig::lattice_temperature() const {
  return rates.lattice_temperature.value_or(system.temperature);
}

double ScenarioConfig::wait() const { return scenario.wait.value_or(5.0 * rates.electron_t1); }

double ScenarioConfig::duration() const {
  if (scenario.duration) return *scenario.duration;
  switch (scenario.kind) {
    case ScenarioKind::thermal: return 0.0;
    case ScenarioKind::overhauser: return 9000.0;
    case ScenarioKind::ponsee_cw: return 1200.0;
    case ScenarioKind::ponsee_pulsed: return static_cast<double>(scenario.cycles) * wait();
    case ScenarioKind::relax: return 41400.0;
  }
  return 0.0;
}

RelaxationRates ScenarioConfig::relaxation_rates() const {
  const double t = lattice_temperature();
  RelaxationRates r;
  r.electronic = electronic_rate_from_t1(system, rates.electron_t1, t);
  r.nuclear = nuclear_rate_from_t1(system, rates.nuclear_t1, t);
  r.flipflop = rates.flipflop_rate;
  r.lattice_temperature = t;
  return r;
}

namespace {

struct Where {
  std::size_t line = 0;  // 0 for command-line overrides
  std::string key;

  std::string prefix() const {
    if (line == 0) return key + ": ";
    return "line " + std::to_string(line) + ": " + key + ": ";
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError(ErrorKind::config_value, prefix() + msg);
  }
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double to_double(const std::string& v, const Where& w) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size() || !std::isfinite(out)) w.fail("not a finite number: '" + v + "'");
  return out;
}

double positive(const std::string& v, const Where& w) {
  const double x = to_double(v, w);
  if (!(x > 0.0)) w.fail("must be > 0 (got " + v + ")");
  return x;
}

double non_negative(const std::string& v, const Where& w) {
  const double x = to_double(v, w);
  if (x < 0.0) w.fail("must be >= 0 (got " + v + ")");
  return x;
}

std::uint64_t to_count(const std::string& v, const Where& w, std::uint64_t lo, std::uint64_t hi) {
  if (v.empty() || !std::all_of(v.begin(), v.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    w.fail("not a non-negative integer: '" + v + "'");
  }
  std::uint64_t x = 0;
  try {
    x = std::stoull(v);
  } catch (const std::exception&) {
    w.fail("integer out of range: '" + v + "'");
  }
  if (x < lo || x > hi) {
    w.fail("must be in [" + std::to_string(lo) + ", " + std::to_string(hi) + "] (got " + v + ")");
  }
  return x;
}

TransitionLabel label_of(const std::string& v, const Where& w, bool microwave) {
  const auto label = parse_transition_label(v);
  const bool ok = label && (microwave ? is_microwave(*label) : is_radio_frequency(*label));
  if (!ok) {
    w.fail("unknown label '" + v + "'; valid labels: " +
           (microwave ? std::string("MW1, MW2") : std::string("RF1, RF2, RF3, RF4, none")));
  }
  return *label;
}

std::string number(double x) { return format_number(x); }

struct KeySpec {
  std::string name;
  std::function<void(ScenarioConfig&, const std::string&, const Where&)> set;
  std::function<std::string(const ScenarioConfig&)> get;
};

const std::vector<KeySpec>& key_table() {
  static const std::vector<KeySpec> table = {
      {"system.b_field_tesla",
       [](auto& c, const auto& v, const auto& w) { c.system.b_field = positive(v, w); },
       [](const auto& c) { return number(c.system.b_field); }},
      {"system.temperature_kelvin",
       [](auto& c, const auto& v, const auto& w) { c.system.temperature = positive(v, w); },
       [](const auto& c) { return number(c.system.temperature); }},
      {"system.g_electron",
       [](auto& c, const auto& v, const auto& w) { c.system.g_electron = positive(v, w); },
       [](const auto& c) { return number(c.system.g_electron); }},
      {"system.g_nuclear",
       [](auto& c, const auto& v, const auto& w) { c.system.g_nuclear = to_double(v, w); },
       [](const auto& c) { return number(c.system.g_nuclear); }},
      {"system.hyperfine_hz",
       [](auto& c, const auto& v, const auto& w) { c.system.hyperfine_a = to_double(v, w); },
       [](const auto& c) { return number(c.system.hyperfine_a); }},
      {"system.mw_frequency_hz",
       [](auto& c, const auto& v, const auto& w) { c.system.mw_frequency = positive(v, w); },
       [](const auto& c) { return number(c.system.mw_frequency); }},
      {"rates.electron_t1_s",
       [](auto& c, const auto& v, const auto& w) { c.rates.electron_t1 = positive(v, w); },
       [](const auto& c) { return number(c.rates.electron_t1); }},
      {"rates.nuclear_t1_s",
       [](auto& c, const auto& v, const auto& w) { c.rates.nuclear_t1 = positive(v, w); },
       [](const auto& c) { return number(c.rates.nuclear_t1); }},
      {"rates.flipflop_rate_per_s",
       [](auto& c, const auto& v, const auto& w) { c.rates.flipflop_rate = non_negative(v, w); },
       [](const auto& c) { return number(c.rates.flipflop_rate); }},
      {"rates.lattice_temperature_kelvin",
       [](auto& c, const auto& v, const auto& w) {
         if (v == "system") {
           c.rates.lattice_temperature.reset();
         } else {
           c.rates.lattice_temperature = positive(v, w);
         }
       },
       [](const auto& c) {
         return c.rates.lattice_temperature ? number(*c.rates.lattice_temperature) : std::string("system");
       }},
      {"scenario.kind",
       [](auto& c, const auto& v, const auto& w) {
         for (auto k : {ScenarioKind::thermal, ScenarioKind::overhauser, ScenarioKind::ponsee_cw,
                        ScenarioKind::ponsee_pulsed, ScenarioKind::relax}) {
           if (v == to_string(k)) {
             c.scenario.kind = k;
             return;
           }
         }
         w.fail("unknown scenario '" + v + "'; valid: thermal, overhauser, ponsee_cw, ponsee_pulsed, relax");
       },
       [](const auto& c) { return std::string(to_string(c.scenario.kind)); }},
      {"scenario.mw",
       [](auto& c, const auto& v, const auto& w) { c.scenario.mw = label_of(v, w, true); },
       [](const auto& c) { return std::string(to_string(c.scenario.mw)); }},
      {"scenario.rf",
       [](auto& c, const auto& v, const auto& w) {
         if (v == "none") {
           c.scenario.rf.reset();
         } else {
           c.scenario.rf = label_of(v, w, false);
         }
       },
       [](const auto& c) { return c.scenario.rf ? std::string(to_string(*c.scenario.rf)) : std::string("none"); }},
      {"scenario.duration_s",
       [](auto& c, const auto& v, const auto& w) {
         if (v == "default") {
           c.scenario.duration.reset();
         } else {
           c.scenario.duration = non_negative(v, w);
         }
       },
       [](const auto& c) { return c.scenario.duration ? number(*c.scenario.duration) : std::string("default"); }},
      {"scenario.cycles",
       [](auto& c, const auto& v, const auto& w) { c.scenario.cycles = to_count(v, w, 1, 100000); },
       [](const auto& c) { return std::to_string(c.scenario.cycles); }},
      {"scenario.wait_s",
       [](auto& c, const auto& v, const auto& w) {
         if (v == "default") {
           c.scenario.wait.reset();
         } else {
           c.scenario.wait = positive(v, w);
         }
       },
       [](const auto& c) { return c.scenario.wait ? number(*c.scenario.wait) : std::string("default"); }},
      {"scenario.drive_factor",
       [](auto& c, const auto& v, const auto& w) { c.scenario.drive_factor = positive(v, w); },
       [](const auto& c) { return number(c.scenario.drive_factor); }},
      {"scenario.pulse_model",
       [](auto& c, const auto& v, const auto& w) {
         if (v == "reverse") {
           c.scenario.pulse_model = MwPiModel::reverse;
         } else if (v == "equalize") {
           c.scenario.pulse_model = MwPiModel::equalize;
         } else {
           w.fail("unknown pulse model '" + v + "'; valid: reverse, equalize");
         }
       },
       [](const auto& c) { return std::string(to_string(c.scenario.pulse_model)); }},
      {"scenario.initial_polarization",
       [](auto& c, const auto& v, const auto& w) {
         const double x = to_double(v, w);
         if (x <= -1.0 || x >= 1.0) w.fail("must be in (-1, 1) (got " + v + ")");
         c.scenario.initial_polarization = x;
       },
       [](const auto& c) { return number(c.scenario.initial_polarization); }},
      {"scenario.samples",
       [](auto& c, const auto& v, const auto& w) { c.scenario.samples = to_count(v, w, 2, 100000); },
       [](const auto& c) { return std::to_string(c.scenario.samples); }},
      {"spectrum.linewidth_t",
       [](auto& c, const auto& v, const auto& w) { c.spectrum.linewidth = positive(v, w); },
       [](const auto& c) { return number(c.spectrum.linewidth); }},
      {"spectrum.n_points",
       [](auto& c, const auto& v, const auto& w) {
         c.spectrum.n_points = to_count(v, w, min_spectrum_points, 1u << 22);
       },
       [](const auto& c) { return std::to_string(c.spectrum.n_points); }},
      {"spectrum.span_t",
       [](auto& c, const auto& v, const auto& w) { c.spectrum.span = positive(v, w); },
       [](const auto& c) { return number(c.spectrum.span); }},
      {"spectrum.noise_rms",
       [](auto& c, const auto& v, const auto& w) { c.spectrum.noise_rms = non_negative(v, w); },
       [](const auto& c) { return number(c.spectrum.noise_rms); }},
      {"spectrum.seed",
       [](auto& c, const auto& v, const auto& w) {
         c.spectrum.seed = to_count(v, w, 0, std::numeric_limits<std::uint64_t>::max());
       },
       [](const auto& c) { return std::to_string(c.spectrum.seed); }},
      {"output.directory",
       [](auto& c, const auto& v, const auto& w) {
         if (v.empty()) w.fail("must not be empty");
         c.output.directory = v;
       },
       [](const auto& c) { return c.output.directory; }},
      {"output.formats",
       [](auto& c, const auto& v, const auto& w) {
         bool csv = false, json = false;
         std::stringstream ss(v);
         std::string item;
         while (std::getline(ss, item, ',')) {
           item = trim(item);
           if (item == "csv") {
             csv = true;
           } else if (item == "json") {
             json = true;
           } else {
             w.fail("unknown format '" + item + "'; valid: csv, json");
           }
         }
         if (!csv && !json) w.fail("at least one of csv, json required");
         c.output.csv = csv;
         c.output.json = json;
       },
       [](const auto& c) {
         if (c.output.csv && c.output.json) return std::string("csv,json");
         return std::string(c.output.csv ? "csv" : "json");
       }},
  };
  return table;
}

const KeySpec* find_key(std::string_view key) {
  for (const auto& spec : key_table()) {
    if (spec.name == key) return &spec;
  }
  return nullptr;
}

void check_consistency(const ScenarioConfig& cfg) {
  try {
    cfg.system.validate();
  } catch (const DomainError& e) {
    throw ConfigError(ErrorKind::config_value, e.what());
  }
  const auto kind = cfg.scenario.kind;
  if ((kind == ScenarioKind::ponsee_cw || kind == ScenarioKind::ponsee_pulsed) && !cfg.scenario.rf) {
    throw ConfigError(ErrorKind::config_value,
                      std::string("scenario.rf: required for ") + std::string(to_string(kind)));
  }
}

void set_key(ScenarioConfig& cfg, const std::string& key, const std::string& value, std::size_t line) {
  const auto* spec = find_key(key);
  if (!spec) {
    const std::string where = line ? "line " + std::to_string(line) + ": " : std::string();
    throw ConfigError(ErrorKind::config_unknown_key, where + "unknown key '" + key + "'");
  }
  spec->set(cfg, value, Where{line, key});
}

}  // namespace

ScenarioConfig parse_config(std::string_view text) {
  ScenarioConfig cfg;
  std::vector<std::string> seen;
  std::size_t number = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string line(text.substr(pos, end - pos));
    pos = end + 1;
    ++number;

    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '#' && (i == 0 || line[i - 1] == ' ' || line[i - 1] == '\t')) {
        line.resize(i);
        break;
      }
    }
    line = trim(line);
    if (line.empty()) continue;

    const std::string at = "line " + std::to_string(number) + ": ";
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(ErrorKind::config_syntax, at + "expected 'section.key = value', got '" + line + "'");
    }
    const auto key = trim(std::string_view(line).substr(0, eq));
    const auto value = trim(std::string_view(line).substr(eq + 1));
    const auto dot = key.find('.');
    const bool key_ok = dot != std::string::npos && dot > 0 && dot + 1 < key.size() &&
                        std::all_of(key.begin(), key.end(), [](char c) {
                          return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_' || c == '.';
                        });
    if (!key_ok) throw ConfigError(ErrorKind::config_syntax, at + "malformed key '" + key + "'");
    if (value.empty()) throw ConfigError(ErrorKind::config_syntax, at + key + ": missing value");
    if (std::find(seen.begin(), seen.end(), key) != seen.end()) {
      throw ConfigError(ErrorKind::config_syntax, at + key + ": duplicate key");
    }
    seen.push_back(key);
    set_key(cfg, key, value, number);
  }
  check_consistency(cfg);
  return cfg;
}

void apply_override(ScenarioConfig& cfg, std::string_view key, std::string_view value) {
  set_key(cfg, trim(key), trim(value), 0);
  check_consistency(cfg);
}

std::string to_text(const ScenarioConfig& cfg) {
  std::string out;
  for (const auto& spec : key_table()) out += spec.name + " = " + spec.get(cfg) + "\n";
  return out;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const auto& spec : key_table()) out.push_back(spec.name);
  return out;
}

}  // namespace dnp
