#pragma once

// Independent reference computations for the tests. Nothing here calls the
// library; constants and formulas are written out from scratch.

#include <array>
#include <cmath>
#include <utility>
#include <vector>

namespace oracle {

inline constexpr double h = 6.62607015e-34;
inline constexpr double k = 1.380649e-23;
inline constexpr double mu_b = 9.2740100783e-24;
inline constexpr double mu_n = 5.0507837461e-27;

struct State {
  double m_s, m_i, energy;
};

inline std::vector<State> states(double b, double g_e, double g_n, double a_hz) {
  std::vector<State> out;
  for (double m_s : {-1.5, -0.5, 0.5, 1.5}) {
    for (double m_i : {-0.5, 0.5}) {
      out.push_back({m_s, m_i, g_e * mu_b * b * m_s - g_n * mu_n * b * m_i + h * a_hz * m_s * m_i});
    }
  }
  return out;
}

/// Boltzmann weights by direct enumeration, same order as states().
inline std::vector<double> boltzmann(const std::vector<State>& s, double t) {
  double e_min = s[0].energy;
  for (const auto& x : s) e_min = std::min(e_min, x.energy);
  std::vector<double> w;
  double z = 0.0;
  for (const auto& x : s) {
    w.push_back(std::exp(-(x.energy - e_min) / (k * t)));
    z += w.back();
  }
  for (auto& x : w) x /= z;
  return w;
}

/// Closed-form RF2 polarization exactly as published.
inline double printed_rf2_form(double alpha) {
  return (1.0 / alpha - 3.0 + alpha + alpha * alpha) / (1.0 / alpha + 5.0 + alpha + alpha * alpha);
}

/// Temperature giving the electron Boltzmann factor alpha at field b.
inline double temperature_for_alpha(double alpha, double b, double g_e) {
  return g_e * mu_b * b / (k * std::log(1.0 / alpha));
}

/// Two-level relaxation: upper-level population at time t.
inline double two_level_upper(double upper0, double upper_eq, double t1, double t) {
  return upper_eq + (upper0 - upper_eq) * std::exp(-t / t1);
}

/// Area of a Lorentzian (area a, center c, hwhm g) between x0 and x1.
inline double lorentzian_area(double a, double c, double g, double x0, double x1) {
  return a / M_PI * (std::atan((x1 - c) / g) - std::atan((x0 - c) / g));
}

}  // namespace oracle
