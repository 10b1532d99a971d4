#include "dnp/spin_system.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "dnp/constants.hpp"
#include "dnp/errors.hpp"

namespace dnp {

namespace c = constants;

void SystemParams::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw DomainError(std::string("invalid system parameter: ") + what);
  };
  require(std::isfinite(b_field) && b_field > 0.0, "b_field must be positive");
  require(!std::isnan(temperature) && temperature > 0.0, "temperature must be positive");
  require(std::isfinite(g_electron) && g_electron > 0.0, "g_electron must be positive");
  require(std::isfinite(g_nuclear), "g_nuclear must be finite");
  require(std::isfinite(hyperfine_a), "hyperfine_a must be finite");
  require(std::isfinite(mw_frequency) && mw_frequency > 0.0, "mw_frequency must be positive");
}

double level_energy(const SystemParams& params, double m_s, double m_i) {
  return params.b_field * (params.g_electron * c::bohr_magneton * m_s -
                           params.g_nuclear * c::nuclear_magneton * m_i) +
         c::planck_h * params.hyperfine_a * m_s * m_i;
}

LevelSet::LevelSet(const SystemParams& params, const std::array<Level, level_count>& levels)
    : params_(params), levels_(levels) {}

std::size_t LevelSet::index_of(double m_s, double m_i) const {
  for (const auto& level : levels_) {
    if (level.m_s == m_s && level.m_i == m_i) return level.index;
  }
  std::ostringstream msg;
  msg << "no level with m_s = " << m_s << ", m_i = " << m_i;
  throw DomainError(msg.str());
}

std::array<std::size_t, 4> LevelSet::manifold(double m_i) const {
  std::array<std::size_t, 4> out{};
  for (std::size_t k = 0; k < 4; ++k) out[k] = index_of(electron_projections[k], m_i);
  return out;
}

LevelSet build_levels(const SystemParams& params) {
  params.validate();
  std::array<Level, level_count> levels{};
  std::size_t n = 0;
  for (double m_s : electron_projections) {
    for (double m_i : nuclear_projections) {
      levels[n++] = Level{0, m_s, m_i, level_energy(params, m_s, m_i)};
    }
  }
  // Generated in lexicographic (m_s, m_i) order, so a stable sort gives the tie-break.
  std::stable_sort(levels.begin(), levels.end(),
                   [](const Level& a, const Level& b) { return a.energy < b.energy; });
  for (std::size_t i = 0; i < level_count; ++i) levels[i].index = i;
  return LevelSet(params, levels);
}

std::string_view to_string(TransitionLabel label) {
  switch (label) {
    case TransitionLabel::MW1: return "MW1";
    case TransitionLabel::MW2: return "MW2";
    case TransitionLabel::RF1: return "RF1";
    case TransitionLabel::RF2: return "RF2";
    case TransitionLabel::RF3: return "RF3";
    case TransitionLabel::RF4: return "RF4";
    case TransitionLabel::FF1: return "FF1";
    case TransitionLabel::FF2: return "FF2";
    case TransitionLabel::FF3: return "FF3";
  }
  return "?";
}

std::string_view to_string(TransitionKind kind) {
  switch (kind) {
    case TransitionKind::electronic: return "electronic";
    case TransitionKind::nuclear: return "nuclear";
    case TransitionKind::flipflop: return "flipflop";
  }
  return "?";
}

std::optional<TransitionLabel> parse_transition_label(std::string_view text) {
  static constexpr std::array all = {TransitionLabel::MW1, TransitionLabel::MW2, TransitionLabel::RF1,
                                     TransitionLabel::RF2, TransitionLabel::RF3, TransitionLabel::RF4,
                                     TransitionLabel::FF1, TransitionLabel::FF2, TransitionLabel::FF3};
  for (auto label : all) {
    if (to_string(label) == text) return label;
  }
  return std::nullopt;
}

TransitionKind kind_of(TransitionLabel label) {
  switch (label) {
    case TransitionLabel::MW1:
    case TransitionLabel::MW2: return TransitionKind::electronic;
    case TransitionLabel::RF1:
    case TransitionLabel::RF2:
    case TransitionLabel::RF3:
    case TransitionLabel::RF4: return TransitionKind::nuclear;
    default: return TransitionKind::flipflop;
  }
}

bool is_microwave(TransitionLabel label) { return kind_of(label) == TransitionKind::electronic; }
bool is_radio_frequency(TransitionLabel label) { return kind_of(label) == TransitionKind::nuclear; }

double microwave_manifold(TransitionLabel mw_label) {
  if (mw_label == TransitionLabel::MW1) return 0.5;
  if (mw_label == TransitionLabel::MW2) return -0.5;
  throw DomainError("not a microwave label: " + std::string(to_string(mw_label)));
}

namespace {

Transition make_transition(const LevelSet& levels, TransitionKind kind, TransitionLabel label,
                           std::size_t a, std::size_t b) {
  const auto lo = levels[a].energy <= levels[b].energy ? a : b;
  const auto hi = lo == a ? b : a;
  return Transition{kind, label, lo, hi,
                    std::abs(levels[hi].energy - levels[lo].energy) / c::planck_h};
}

}  // namespace

TransitionCatalog::TransitionCatalog(LevelSet levels, std::vector<Transition> transitions)
    : levels_(std::move(levels)), transitions_(std::move(transitions)) {}

std::vector<Transition> TransitionCatalog::of_kind(TransitionKind kind) const {
  std::vector<Transition> out;
  std::copy_if(transitions_.begin(), transitions_.end(), std::back_inserter(out),
               [kind](const Transition& t) { return t.kind == kind; });
  return out;
}

std::vector<Transition> TransitionCatalog::pairs(TransitionLabel label) const {
  std::vector<Transition> out;
  std::copy_if(transitions_.begin(), transitions_.end(), std::back_inserter(out),
               [label](const Transition& t) { return t.label == label; });
  return out;
}

const Transition& TransitionCatalog::nuclear(TransitionLabel rf_label) const {
  if (!is_radio_frequency(rf_label)) {
    throw DomainError("not a radio-frequency label: " + std::string(to_string(rf_label)));
  }
  for (const auto& t : transitions_) {
    if (t.label == rf_label) return t;
  }
  throw DomainError("catalog has no " + std::string(to_string(rf_label)));
}

double TransitionCatalog::rf_manifold(TransitionLabel rf_label) const {
  return levels_[nuclear(rf_label).lower_level].m_s;
}

TransitionCatalog catalog_transitions(const LevelSet& levels) {
  std::vector<Transition> out;
  out.reserve(13);

  for (double m_i : nuclear_projections) {
    const auto label = m_i > 0 ? TransitionLabel::MW1 : TransitionLabel::MW2;
    const auto idx = levels.manifold(m_i);
    for (std::size_t k = 0; k + 1 < idx.size(); ++k) {
      out.push_back(make_transition(levels, TransitionKind::electronic, label, idx[k], idx[k + 1]));
    }
  }

  std::vector<Transition> nuclear;
  for (double m_s : electron_projections) {
    nuclear.push_back(make_transition(levels, TransitionKind::nuclear, TransitionLabel::RF1,
                                      levels.index_of(m_s, -0.5), levels.index_of(m_s, 0.5)));
  }
  // Descending frequency; equal frequencies keep ascending m_s.
  std::stable_sort(nuclear.begin(), nuclear.end(),
                   [](const Transition& a, const Transition& b) { return a.frequency > b.frequency; });
  constexpr std::array rf = {TransitionLabel::RF1, TransitionLabel::RF2, TransitionLabel::RF3,
                             TransitionLabel::RF4};
  for (std::size_t k = 0; k < nuclear.size(); ++k) {
    nuclear[k].label = rf[k];
    out.push_back(nuclear[k]);
  }

  constexpr std::array ff = {TransitionLabel::FF1, TransitionLabel::FF2, TransitionLabel::FF3};
  for (std::size_t k = 0; k + 1 < electron_projections.size(); ++k) {
    out.push_back(make_transition(levels, TransitionKind::flipflop, ff[k],
                                  levels.index_of(electron_projections[k], 0.5),
                                  levels.index_of(electron_projections[k + 1], -0.5)));
  }
  return TransitionCatalog(levels, std::move(out));
}

double boltzmann_factor(const SystemParams& params) {
  if (!(params.temperature > 0.0)) throw DomainError("temperature must be positive");
  return std::exp(-params.g_electron * c::bohr_magneton * params.b_field /
                  (c::boltzmann_k * params.temperature));
}

double resonance_field(const SystemParams& params, double m_i) {
  return (c::planck_h * params.mw_frequency - c::planck_h * params.hyperfine_a * m_i) /
         (params.g_electron * c::bohr_magneton);
}

PopulationVector::PopulationVector(const std::array<double, level_count>& values) : p_(values) {
  for (double v : p_) {
    if (!(v >= 0.0)) throw DomainError("population entries must be nonnegative");
  }
  if (std::abs(sum() - 1.0) > sum_tolerance) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "populations must sum to 1 (sum = " << sum() << ")";
    throw DomainError(msg.str());
  }
}

PopulationVector PopulationVector::uniform() {
  std::array<double, level_count> v{};
  v.fill(1.0 / level_count);
  return PopulationVector(v);
}

PopulationVector PopulationVector::normalized(std::array<double, level_count> values) {
  double total = 0.0;
  for (double v : values) {
    if (!(v >= 0.0)) throw DomainError("population entries must be nonnegative");
    total += v;
  }
  if (!(total > 0.0) || !std::isfinite(total)) throw DomainError("population sum must be positive");
  for (double& v : values) v /= total;
  return PopulationVector(values);
}

double PopulationVector::sum() const { return std::accumulate(p_.begin(), p_.end(), 0.0); }

PopulationVector thermal_populations(const LevelSet& levels, double temperature) {
  if (!(temperature > 0.0)) throw DomainError("temperature must be positive");
  // Energies relative to the ground level keep every exponent <= 0.
  const double ground = levels[0].energy;
  std::array<double, level_count> w{};
  for (std::size_t i = 0; i < level_count; ++i) {
    w[i] = std::exp(-(levels[i].energy - ground) / (c::boltzmann_k * temperature));
  }
  return PopulationVector::normalized(w);
}

PopulationVector polarized_populations(const LevelSet& levels, double temperature,
                                       double nuclear_polarization) {
  if (!(nuclear_polarization >= -1.0 && nuclear_polarization <= 1.0)) {
    throw DomainError("nuclear polarization must lie in [-1, 1]");
  }
  const auto thermal = thermal_populations(levels, temperature);
  std::array<double, level_count> out{};
  for (double m_i : nuclear_projections) {
    const double weight = m_i > 0 ? 0.5 * (1.0 + nuclear_polarization) : 0.5 * (1.0 - nuclear_polarization);
    const double manifold_total = nuclear_manifold_population(thermal, levels, m_i);
    for (auto i : levels.manifold(m_i)) out[i] = weight * thermal[i] / manifold_total;
  }
  return PopulationVector::normalized(out);
}

double electron_manifold_population(const PopulationVector& p, const LevelSet& levels, double m_s) {
  double total = 0.0;
  for (const auto& level : levels) {
    if (level.m_s == m_s) total += p[level.index];
  }
  return total;
}

double nuclear_manifold_population(const PopulationVector& p, const LevelSet& levels, double m_i) {
  double total = 0.0;
  for (const auto& level : levels) {
    if (level.m_i == m_i) total += p[level.index];
  }
  return total;
}

}  // namespace dnp
