#pragma once

// CODATA-2018 values, SI units.

namespace dnp::constants {

/// Planck constant h [J s] (exact).
inline constexpr double planck_h = 6.62607015e-34;

/// Boltzmann constant k_B [J/K] (exact).
inline constexpr double boltzmann_k = 1.380649e-23;

/// Bohr magneton mu_B [J/T].
inline constexpr double bohr_magneton = 9.2740100783e-24;

/// Nuclear magneton mu_N [J/T].
inline constexpr double nuclear_magneton = 5.0507837461e-27;

static_assert(planck_h > 0 && boltzmann_k > 0 && bohr_magneton > 0 && nuclear_magneton > 0);

}  // namespace dnp::constants
