#pragma once

// Eight-level S = 3/2, I = 1/2 electron-nuclear spin system in a strong field.
//
//   H = B (g_e mu_B S_z - g_n mu_N I_z) + h A S_z I_z
//
// S_z and I_z are good quantum numbers, so every level is labeled by (m_s, m_i)
// and the energies are exact.

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dnp {

inline constexpr std::size_t level_count = 8;
inline constexpr std::array<double, 4> electron_projections = {-1.5, -0.5, 0.5, 1.5};
inline constexpr std::array<double, 2> nuclear_projections = {-0.5, 0.5};

struct SystemParams {
  double b_field = 8.6;          // T
  double temperature = 3.0;      // K
  double g_electron = 2.00232;
  double g_nuclear = -0.566;
  double hyperfine_a = -21.9e6;  // Hz, signed
  double mw_frequency = 240e9;   // Hz

  /// Throws DomainError unless b_field, temperature and g_electron are positive
  /// and everything is finite (temperature may be +inf).
  void validate() const;
};

struct Level {
  std::size_t index = 0;
  double m_s = 0.0;
  double m_i = 0.0;
  double energy = 0.0;  // J
};

/// Energy of the (m_s, m_i) eigenstate [J].
double level_energy(const SystemParams& params, double m_s, double m_i);

/// The eight levels sorted by ascending energy. Degenerate energies keep
/// lexicographic (m_s, m_i) order.
class LevelSet {
 public:
  LevelSet(const SystemParams& params, const std::array<Level, level_count>& levels);

  const Level& operator[](std::size_t i) const { return levels_[i]; }
  std::size_t size() const { return level_count; }
  auto begin() const { return levels_.begin(); }
  auto end() const { return levels_.end(); }

  /// Index of the (m_s, m_i) level. Throws DomainError for projections outside the multiplets.
  std::size_t index_of(double m_s, double m_i) const;

  /// Level indices of one nuclear manifold ordered by ascending m_s.
  std::array<std::size_t, 4> manifold(double m_i) const;

  const SystemParams& params() const { return params_; }

 private:
  SystemParams params_;
  std::array<Level, level_count> levels_;
};

LevelSet build_levels(const SystemParams& params);

enum class TransitionKind { electronic, nuclear, flipflop };

enum class TransitionLabel { MW1, MW2, RF1, RF2, RF3, RF4, FF1, FF2, FF3 };

std::string_view to_string(TransitionLabel label);
std::string_view to_string(TransitionKind kind);
std::optional<TransitionLabel> parse_transition_label(std::string_view text);
TransitionKind kind_of(TransitionLabel label);
bool is_microwave(TransitionLabel label);
bool is_radio_frequency(TransitionLabel label);

/// Nuclear manifold addressed by a microwave label: MW1 -> m_i = +1/2, MW2 -> m_i = -1/2.
double microwave_manifold(TransitionLabel mw_label);

struct Transition {
  TransitionKind kind = TransitionKind::electronic;
  TransitionLabel label = TransitionLabel::MW1;
  std::size_t lower_level = 0;
  std::size_t upper_level = 0;
  double frequency = 0.0;  // Hz, |dE|/h
};

class TransitionCatalog {
 public:
  TransitionCatalog(LevelSet levels, std::vector<Transition> transitions);

  const std::vector<Transition>& all() const { return transitions_; }
  std::vector<Transition> of_kind(TransitionKind kind) const;
  /// Every pair carrying `label` (three for MW and FF labels' kind, one for RF).
  std::vector<Transition> pairs(TransitionLabel label) const;
  /// The single nuclear pair of an RF label.
  const Transition& nuclear(TransitionLabel rf_label) const;
  /// m_s manifold of an RF label.
  double rf_manifold(TransitionLabel rf_label) const;
  const LevelSet& levels() const { return levels_; }

 private:
  LevelSet levels_;
  std::vector<Transition> transitions_;
};

/// Six electronic pairs under MW1/MW2, four nuclear pairs labeled RF1..RF4 by
/// descending frequency, three flip-flop pairs (m_s, +1/2) <-> (m_s + 1, -1/2).
TransitionCatalog catalog_transitions(const LevelSet& levels);

/// Population ratio of adjacent electronic Zeeman levels, exp(-g_e mu_B B / k_B T).
double boltzmann_factor(const SystemParams& params);

/// Field at which the m_i line is resonant with the microwave quantum:
/// (h nu - h A m_i) / (g_e mu_B).
double resonance_field(const SystemParams& params, double m_i);

/// Occupation probabilities of the eight levels. Always nonnegative and normalized.
class PopulationVector {
 public:
  static constexpr double sum_tolerance = 1e-12;

  /// Validates nonnegativity and sum == 1 (within sum_tolerance); throws DomainError otherwise.
  explicit PopulationVector(const std::array<double, level_count>& values);

  static PopulationVector uniform();
  /// Divides by the sum. Entries must be nonnegative with a positive sum.
  static PopulationVector normalized(std::array<double, level_count> values);

  double operator[](std::size_t i) const { return p_[i]; }
  std::span<const double, level_count> values() const { return p_; }
  const std::array<double, level_count>& array() const { return p_; }
  double sum() const;

  friend bool operator==(const PopulationVector&, const PopulationVector&) = default;

 private:
  std::array<double, level_count> p_{};
};

/// Boltzmann distribution over the levels at `temperature` (K, may be +inf).
PopulationVector thermal_populations(const LevelSet& levels, double temperature);

/// Electron-thermal populations inside each nuclear manifold with the manifolds
/// weighted (1 + P)/2 for m_i = +1/2 and (1 - P)/2 for m_i = -1/2.
PopulationVector polarized_populations(const LevelSet& levels, double temperature,
                                       double nuclear_polarization);

/// Total population of one m_s (resp. m_i) value.
double electron_manifold_population(const PopulationVector& p, const LevelSet& levels, double m_s);
double nuclear_manifold_population(const PopulationVector& p, const LevelSet& levels, double m_i);

}  // namespace dnp
