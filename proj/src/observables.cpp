#include "dnp/observables.hpp"

#include <cmath>
#include <string>

#include "dnp/constants.hpp"
#include "dnp/errors.hpp"

namespace dnp {

namespace c = constants;

double nuclear_polarization(const PopulationVector& p, const LevelSet& levels) {
  const double up = nuclear_manifold_population(p, levels, 0.5);
  const double down = nuclear_manifold_population(p, levels, -0.5);
  return (up - down) / (up + down);
}

double electronic_polarization(const PopulationVector& p, const LevelSet& levels) {
  double mean = 0.0;
  for (const auto& level : levels) mean += level.m_s * p[level.index];
  return mean / 1.5;
}

double enhancement(double p_after, double p_before) {
  if (p_before == 0.0) {
    throw DomainError("enhancement needs a nonzero baseline; supply the thermal baseline polarization");
  }
  return p_after / p_before;
}

double thermal_baseline(const LevelSet& levels, double temperature) {
  return std::abs(nuclear_polarization(thermal_populations(levels, temperature), levels));
}

PolarizationReport polarization_report(const PopulationVector& p, const LevelSet& levels,
                                       std::optional<double> baseline) {
  PolarizationReport report;
  report.nuclear_p = nuclear_polarization(p, levels);
  report.electronic_p = electronic_polarization(p, levels);
  if (baseline) report.enhancement = enhancement(report.nuclear_p, *baseline);
  return report;
}

double ponsee_cw_prediction(double alpha, TransitionLabel rf_label) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("alpha must lie in (0, 1]");
  int n = 0;
  switch (rf_label) {
    case TransitionLabel::RF1: n = 0; break;
    case TransitionLabel::RF2: n = 1; break;
    case TransitionLabel::RF3: n = 2; break;
    case TransitionLabel::RF4: n = 3; break;
    default: throw DomainError("not a radio-frequency label: " + std::string(to_string(rf_label)));
  }
  const double z = 1.0 + alpha + alpha * alpha + alpha * alpha * alpha;
  const double pumped = 4.0 * std::pow(alpha, n);
  return (z - pumped) / (z + pumped);
}

double gn_from_rf2(double rf2, double hyperfine_abs, double b_field) {
  if (!(b_field > 0.0)) throw DomainError("b_field must be positive");
  const double numerator = rf2 - 0.5 * std::abs(hyperfine_abs);
  if (!(numerator > 0.0)) throw DomainError("RF2 must exceed |A|/2");
  return c::planck_h * numerator / (c::nuclear_magneton * b_field);
}

FrequencyTable predict_rf_table(double rf2, double hyperfine_abs, double hyperfine_sigma) {
  if (!(rf2 > 0.0) || !(hyperfine_abs > 0.0) || !(hyperfine_sigma >= 0.0)) {
    throw DomainError("RF2 and |A| must be positive, sigma nonnegative");
  }
  const double a = std::abs(hyperfine_abs);
  FrequencyTable t;
  t.rf1 = {rf2 + a, hyperfine_sigma};
  t.rf2 = {rf2, 0.0};
  t.rf3 = {rf2 - a, hyperfine_sigma};
  t.rf4 = {std::abs(rf2 - 2.0 * a), 2.0 * hyperfine_sigma};
  return t;
}

double thermal_bare_polarization(double g_n_abs, double b_field, double temperature) {
  if (!(temperature > 0.0)) throw DomainError("temperature must be positive");
  return std::tanh(std::abs(g_n_abs) * c::nuclear_magneton * b_field /
                   (2.0 * c::boltzmann_k * temperature));
}

double estimate_decay_constant(double p_start, double p_end, double elapsed) {
  if (!(p_end > 0.0) || !(p_start > p_end)) throw DomainError("need p_start > p_end > 0");
  if (!(elapsed > 0.0)) throw DomainError("elapsed time must be positive");
  return elapsed / std::log(p_start / p_end);
}

}  // namespace dnp
