#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "dnp/spectrum.hpp"
#include "json.hpp"

namespace dnp {

double round_significant(double value) {
  if (!std::isfinite(value) || value == 0.0) return value;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", value);
  return std::strtod(buf, nullptr);
}

std::string format_number(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", value);
  return buf;
}

std::string params_hash(const SystemParams& params) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%.17g|%.17g|%.17g|%.17g|%.17g|%.17g", params.b_field, params.temperature,
                params.g_electron, params.g_nuclear, params.hyperfine_a, params.mw_frequency);
  std::uint64_t h = 14695981039346656037ull;
  for (const char* c = buf; *c; ++c) {
    h ^= static_cast<unsigned char>(*c);
    h *= 1099511628211ull;
  }
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_spectrum_csv(std::ostream& out, const Spectrum& spectrum) {
  const auto& m = spectrum.meta;
  out << "# mw_frequency_hz = " << format_number(m.mw_frequency) << '\n';
  out << "# seed = " << (m.noise_seed ? std::to_string(*m.noise_seed) : std::string("none")) << '\n';
  out << "# params_hash = " << m.params_hash << '\n';
  out << "# b_field_tesla = " << format_number(m.params.b_field) << '\n';
  out << "# temperature_kelvin = " << format_number(m.params.temperature) << '\n';
  out << "# g_electron = " << format_number(m.params.g_electron) << '\n';
  out << "# g_nuclear = " << format_number(m.params.g_nuclear) << '\n';
  out << "# hyperfine_hz = " << format_number(m.params.hyperfine_a) << '\n';
  out << "field_tesla,amplitude\n";
  for (std::size_t i = 0; i < spectrum.field.size(); ++i) {
    out << format_number(spectrum.field[i]) << ',' << format_number(spectrum.amplitude[i]) << '\n';
  }
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& text, std::size_t line) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || trim(text.substr(used)) != "") {
    throw Error(ErrorKind::io, "line " + std::to_string(line) + ": not a number: '" + text + "'");
  }
  return v;
}

}  // namespace

Spectrum read_spectrum_csv(std::istream& in, const SystemParams& defaults) {
  Spectrum s;
  s.meta.params = defaults;
  s.meta.mw_frequency = defaults.mw_frequency;
  bool mw_seen = false;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto text = trim(line);
    if (text.empty()) continue;
    if (text[0] == '#') {
      const auto eq = text.find('=');
      if (eq == std::string::npos) continue;
      const auto key = trim(text.substr(1, eq - 1));
      const auto value = trim(text.substr(eq + 1));
      if (key == "mw_frequency_hz") {
        s.meta.mw_frequency = parse_double(value, number);
        mw_seen = true;
      } else if (key == "seed") {
        if (value != "none") s.meta.noise_seed = std::stoull(value);
      } else if (key == "params_hash") {
        s.meta.params_hash = value;
      } else if (key == "b_field_tesla") {
        s.meta.params.b_field = parse_double(value, number);
      } else if (key == "temperature_kelvin") {
        s.meta.params.temperature = parse_double(value, number);
      } else if (key == "g_electron") {
        s.meta.params.g_electron = parse_double(value, number);
      } else if (key == "g_nuclear") {
        s.meta.params.g_nuclear = parse_double(value, number);
      } else if (key == "hyperfine_hz") {
        s.meta.params.hyperfine_a = parse_double(value, number);
      }
      continue;
    }
    if (text.rfind("field_tesla", 0) == 0) continue;
    const auto comma = text.find(',');
    if (comma == std::string::npos) {
      throw Error(ErrorKind::io, "line " + std::to_string(number) + ": expected 'field,amplitude'");
    }
    s.field.push_back(parse_double(trim(text.substr(0, comma)), number));
    s.amplitude.push_back(parse_double(trim(text.substr(comma + 1)), number));
  }
  if (mw_seen) s.meta.params.mw_frequency = s.meta.mw_frequency;
  s.validate();
  return s;
}

std::string fit_to_json(const DoubletFit& fit, std::optional<PolarizationEstimate> polarization) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["center_1"] = round_significant(fit.center_1);
  j["center_2"] = round_significant(fit.center_2);
  if (fit.equal_width) {
    j["width"] = round_significant(fit.width_1);
  } else {
    j["width_1"] = round_significant(fit.width_1);
    j["width_2"] = round_significant(fit.width_2);
  }
  j["equal_width"] = fit.equal_width;
  j["area_1"] = round_significant(fit.area_1);
  j["area_2"] = round_significant(fit.area_2);
  j["baseline"] = round_significant(fit.baseline);
  j["parameter_names"] = fit.parameter_names();
  ordered_json cov = ordered_json::array();
  for (Eigen::Index r = 0; r < fit.covariance.rows(); ++r) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index c = 0; c < fit.covariance.cols(); ++c) row.push_back(round_significant(fit.covariance(r, c)));
    cov.push_back(row);
  }
  j["covariance"] = cov;
  j["residual_norm"] = round_significant(fit.residual_norm);
  j["iterations"] = fit.iterations;
  if (polarization) {
    j["polarization"] = round_significant(polarization->value);
    j["polarization_sigma"] = round_significant(polarization->sigma);
  }
  return j.dump(2);
}

}  // namespace dnp
