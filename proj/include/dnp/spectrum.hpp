#pragma once

// Field-swept ESR absorption doublets: synthesis from level populations and
// bi-Lorentzian least-squares fitting.
//
// Each nuclear manifold contributes one absorption line centered at its
// resonance field with area equal to the manifold's total population, so the
// area ratio of the fitted peaks reads out the nuclear polarization.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "dnp/errors.hpp"
#include "dnp/simd/lineshape_kernels.hpp"
#include "dnp/spin_system.hpp"

namespace dnp {

inline constexpr std::size_t min_spectrum_points = 16;

struct SpectrumMeta {
  double mw_frequency = 0.0;  // Hz
  SystemParams params;
  std::optional<std::uint64_t> noise_seed;
  std::string params_hash;
};

struct Spectrum {
  std::vector<double> field;      // T, strictly increasing
  std::vector<double> amplitude;  // a.u.
  SpectrumMeta meta;

  void validate() const;
};

struct SynthesisOptions {
  double linewidth = 3e-4;  // T, full width at half maximum
  std::size_t n_points = 1024;
  double span = 6e-3;       // T, centered on the doublet midpoint
  double noise_rms = 0.0;   // a.u.
  std::uint64_t seed = 0;
  simd::Backend backend = simd::Backend::automatic;
};

/// Synthesizes the doublet for populations `p`. Throws ConfigError when the
/// span cannot hold both lines plus ten linewidths.
Spectrum synthesize_spectrum(const PopulationVector& p, const SystemParams& params,
                             const SynthesisOptions& options = {});

/// Peak separation h|A| / (g_e mu_B) [T].
double doublet_separation(const SystemParams& params);

/// Amplitude maximum of the noiseless doublet; noise_rms = peak / SNR.
double noiseless_peak(const PopulationVector& p, const SystemParams& params,
                      const SynthesisOptions& options = {});

/// Peak 1 is always the m_i = +1/2 line, peak 2 the m_i = -1/2 line.
struct DoubletFit {
  double center_1 = 0.0;  // T
  double center_2 = 0.0;
  double width_1 = 0.0;   // T, FWHM
  double width_2 = 0.0;
  bool equal_width = true;
  double area_1 = 0.0;
  double area_2 = 0.0;
  double baseline = 0.0;
  /// Parameter order: center_1, center_2, width (or width_1, width_2), area_1, area_2, baseline.
  Eigen::MatrixXd covariance;
  double residual_norm = 0.0;  // sqrt of the residual sum of squares
  int iterations = 0;

  std::vector<std::string> parameter_names() const;
  Eigen::Index area_1_index() const { return equal_width ? 3 : 4; }
  Eigen::Index area_2_index() const { return equal_width ? 4 : 5; }
};

struct FitOptions {
  bool equal_width = true;
  /// Starting centers (T, any order) when peak picking cannot resolve the lines.
  std::optional<std::pair<double, double>> initial_centers;
  int max_iterations = 200;
  double step_tolerance = 1e-8;
  simd::Backend backend = simd::Backend::automatic;
};

class FitError : public Error {
 public:
  FitError(const std::string& what, DoubletFit last_iterate)
      : Error(ErrorKind::fit_failure, what), last_(std::move(last_iterate)) {}
  const DoubletFit& last_iterate() const noexcept { return last_; }

 private:
  DoubletFit last_;
};

/// Damped least squares (Levenberg-Marquardt with a monotone residual
/// safeguard). Throws FitError on non-convergence or when only one peak can be
/// found and no initial centers were given.
DoubletFit fit_bilorentzian(const Spectrum& spectrum, const FitOptions& options = {});

struct PolarizationEstimate {
  double value = 0.0;
  double sigma = 0.0;
};

/// P = (A1 - A2) / (A1 + A2) with first-order uncertainty from the fit covariance.
PolarizationEstimate polarization_from_fit(const DoubletFit& fit);

// Serialization: CSV with '#' metadata header lines, and JSON for fits.

/// FNV-1a hash (hex) of the parameter values, recorded in spectrum metadata.
std::string params_hash(const SystemParams& params);

void write_spectrum_csv(std::ostream& out, const Spectrum& spectrum);
/// Reads what write_spectrum_csv writes. Missing metadata falls back to `defaults`.
Spectrum read_spectrum_csv(std::istream& in, const SystemParams& defaults = {});
std::string fit_to_json(const DoubletFit& fit, std::optional<PolarizationEstimate> polarization = std::nullopt);

/// Round to 12 significant digits, the precision of every serialized number.
double round_significant(double value);
std::string format_number(double value);

}  // namespace dnp
