#pragma once

#include <optional>

#include "dnp/spin_system.hpp"

namespace dnp {

/// (N+ - N-) / (N+ + N-) over the m_i = +1/2 and m_i = -1/2 manifolds, i.e.
/// <I_z>/I. Positive means the m_i = +1/2 manifold is enriched, which is the
/// state pumped by MW2 + RF_k and by flip-flop relaxation.
double nuclear_polarization(const PopulationVector& p, const LevelSet& levels);

/// <S_z>/S, in [-1, 1]. Thermal equilibrium is negative.
double electronic_polarization(const PopulationVector& p, const LevelSet& levels);

/// P_after / P_before. Throws DomainError for a zero baseline.
double enhancement(double p_after, double p_before);

/// Magnitude of the thermal nuclear polarization of the full eight-level system.
double thermal_baseline(const LevelSet& levels, double temperature);

/// Two-significant-figure thermal baseline at 3 K and 8.6 T, kept for comparing
/// enhancements against the rounded value.
inline constexpr double rounded_thermal_baseline = 6.0e-4;

struct PolarizationReport {
  double nuclear_p = 0.0;
  double electronic_p = 0.0;
  std::optional<double> enhancement;
};

PolarizationReport polarization_report(const PopulationVector& p, const LevelSet& levels,
                                       std::optional<double> baseline = std::nullopt);

/// Steady-state nuclear polarization with the MW2 manifold and RF_k saturated
/// and only electronic relaxation:
///   P = (Z - 4 alpha^n) / (Z + 4 alpha^n),  Z = 1 + alpha + alpha^2 + alpha^3,
/// n = 0..3 for RF1..RF4 (the m_s level of the RF pair counted from -3/2).
double ponsee_cw_prediction(double alpha, TransitionLabel rf_label);

/// |g_N| = h (RF2 - |A|/2) / (mu_N B).
double gn_from_rf2(double rf2, double hyperfine_abs, double b_field);

struct FrequencyEstimate {
  double value = 0.0;  // Hz
  double sigma = 0.0;  // Hz
};

struct FrequencyTable {
  FrequencyEstimate rf1, rf2, rf3, rf4;
};

/// Other nuclear lines from a measured RF2 and |A|: RF1 = RF2 + |A|,
/// RF3 = RF2 - |A|, RF4 = |RF2 - 2|A||, with first-order sigma from sigma_A.
FrequencyTable predict_rf_table(double rf2, double hyperfine_abs, double hyperfine_sigma = 0.0);

/// Equilibrium polarization of a bare spin-1/2 nucleus: tanh(|g_N| mu_N B / 2 k_B T).
double thermal_bare_polarization(double g_n_abs, double b_field, double temperature);

/// Single-exponential decay constant tau = elapsed / ln(p_start / p_end).
double estimate_decay_constant(double p_start, double p_end, double elapsed);

}  // namespace dnp
