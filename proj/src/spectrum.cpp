#include "dnp/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include "dnp/constants.hpp"

namespace dnp {

void Spectrum::validate() const {
  if (field.size() != amplitude.size()) throw DomainError("spectrum field and amplitude lengths differ");
  if (field.size() < min_spectrum_points) throw DomainError("spectrum needs at least 16 points");
  for (std::size_t i = 0; i < field.size(); ++i) {
    if (!std::isfinite(field[i]) || !std::isfinite(amplitude[i])) {
      throw DomainError("spectrum contains non-finite values");
    }
    if (i > 0 && !(field[i] > field[i - 1])) throw DomainError("spectrum field axis must be strictly increasing");
  }
}

double doublet_separation(const SystemParams& params) {
  return constants::planck_h * std::abs(params.hyperfine_a) / (params.g_electron * constants::bohr_magneton);
}

namespace {

simd::DoubletShape manifold_shape(const PopulationVector& p, const SystemParams& params, double linewidth) {
  const auto levels = build_levels(params);
  simd::DoubletShape shape;
  shape.center_1 = resonance_field(params, 0.5);
  shape.center_2 = resonance_field(params, -0.5);
  shape.hwhm_1 = shape.hwhm_2 = 0.5 * linewidth;
  shape.area_1 = nuclear_manifold_population(p, levels, 0.5);
  shape.area_2 = nuclear_manifold_population(p, levels, -0.5);
  return shape;
}

void check_synthesis(const SystemParams& params, const SynthesisOptions& o) {
  params.validate();
  if (!(o.linewidth > 0.0)) throw ConfigError(ErrorKind::config_value, "spectrum linewidth must be positive");
  if (o.n_points < min_spectrum_points) {
    throw ConfigError(ErrorKind::config_value, "spectrum needs at least 16 points");
  }
  if (!(o.noise_rms >= 0.0)) throw ConfigError(ErrorKind::config_value, "noise rms must be nonnegative");
  const double needed = doublet_separation(params) + 10.0 * o.linewidth;
  if (!(o.span > needed)) {
    std::ostringstream msg;
    msg << "spectrum span " << o.span << " T must exceed peak separation + 10 linewidths (" << needed << " T)";
    throw ConfigError(ErrorKind::config_value, msg.str());
  }
}

}  // namespace

Spectrum synthesize_spectrum(const PopulationVector& p, const SystemParams& params,
                             const SynthesisOptions& options) {
  check_synthesis(params, options);
  const auto shape = manifold_shape(p, params, options.linewidth);
  const double mid = 0.5 * (shape.center_1 + shape.center_2);
  const double start = mid - 0.5 * options.span;
  const double step = options.span / static_cast<double>(options.n_points - 1);

  Spectrum out;
  out.field.resize(options.n_points);
  for (std::size_t i = 0; i < options.n_points; ++i) out.field[i] = start + step * static_cast<double>(i);
  out.amplitude.resize(options.n_points);
  simd::kernels(options.backend).evaluate(out.field, shape, out.amplitude);

  if (options.noise_rms > 0.0) {
    std::mt19937_64 rng(options.seed);
    std::normal_distribution<double> noise(0.0, options.noise_rms);
    for (double& a : out.amplitude) a += noise(rng);
    out.meta.noise_seed = options.seed;
  }
  out.meta.mw_frequency = params.mw_frequency;
  out.meta.params = params;
  out.meta.params_hash = params_hash(params);
  return out;
}

double noiseless_peak(const PopulationVector& p, const SystemParams& params, const SynthesisOptions& options) {
  auto quiet = options;
  quiet.noise_rms = 0.0;
  const auto s = synthesize_spectrum(p, params, quiet);
  return *std::max_element(s.amplitude.begin(), s.amplitude.end());
}

std::vector<std::string> DoubletFit::parameter_names() const {
  if (equal_width) return {"center_1", "center_2", "width", "area_1", "area_2", "baseline"};
  return {"center_1", "center_2", "width_1", "width_2", "area_1", "area_2", "baseline"};
}

namespace {

using Vec = Eigen::VectorXd;

// Parameters in scaled units: x = (B - origin) / scale, y / y_scale, widths as HWHM.
struct Layout {
  bool equal_width;
  Eigen::Index size() const { return equal_width ? 6 : 7; }
  Eigen::Index c1() const { return 0; }
  Eigen::Index c2() const { return 1; }
  Eigen::Index g1() const { return 2; }
  Eigen::Index g2() const { return equal_width ? 2 : 3; }
  Eigen::Index a1() const { return equal_width ? 3 : 4; }
  Eigen::Index a2() const { return equal_width ? 4 : 5; }
  Eigen::Index b() const { return equal_width ? 5 : 6; }

  simd::DoubletShape shape(const Vec& t) const {
    return {t(c1()), t(c2()), t(g1()), t(g2()), t(a1()), t(a2()), t(b())};
  }
};

struct Problem {
  std::vector<double> x;
  std::vector<double> y;
  double origin = 0.0;
  double scale = 1.0;
  double y_scale = 1.0;
};

Problem scale_problem(const Spectrum& s) {
  Problem p;
  p.origin = 0.5 * (s.field.front() + s.field.back());
  p.scale = s.field.back() - s.field.front();
  p.y_scale = 0.0;
  for (double a : s.amplitude) p.y_scale = std::max(p.y_scale, std::abs(a));
  if (!(p.y_scale > 0.0)) throw FitError("spectrum is identically zero", DoubletFit{});
  p.x.resize(s.field.size());
  p.y.resize(s.field.size());
  for (std::size_t i = 0; i < s.field.size(); ++i) {
    p.x[i] = (s.field[i] - p.origin) / p.scale;
    p.y[i] = s.amplitude[i] / p.y_scale;
  }
  return p;
}

double median(std::vector<double> v) {
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  return *mid;
}

struct PeakGuess {
  std::size_t first = 0;
  std::optional<std::size_t> second;
  double baseline = 0.0;
  std::vector<double> smooth;  // baseline-subtracted
};

PeakGuess pick_peaks(const Problem& p) {
  const std::size_t n = p.y.size();
  const std::size_t half = std::max<std::size_t>(1, n / 256);
  PeakGuess g;

  const std::size_t edge = std::max<std::size_t>(2, n / 20);
  double edge_sum = 0.0;
  for (std::size_t i = 0; i < edge; ++i) edge_sum += p.y[i] + p.y[n - 1 - i];
  g.baseline = edge_sum / static_cast<double>(2 * edge);

  g.smooth.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= half ? i - half : 0;
    const std::size_t hi = std::min(n - 1, i + half);
    double sum = 0.0;
    for (std::size_t k = lo; k <= hi; ++k) sum += p.y[k];
    g.smooth[i] = sum / static_cast<double>(hi - lo + 1) - g.baseline;
  }

  std::vector<double> diffs(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) diffs[i] = p.y[i + 1] - p.y[i];
  const double centre = median(diffs);
  for (double& d : diffs) d = std::abs(d - centre);
  const double noise = 1.4826 * median(diffs) / std::sqrt(2.0);
  const double smooth_noise = noise / std::sqrt(static_cast<double>(2 * half + 1));

  g.first = static_cast<std::size_t>(std::max_element(g.smooth.begin(), g.smooth.end()) - g.smooth.begin());
  const double top = g.smooth[g.first];
  const double threshold = std::max(4.0 * smooth_noise, 1e-3 * top);

  double best = -1.0;
  for (std::size_t j = 1; j + 1 < n; ++j) {
    if (j == g.first) continue;
    if (!(g.smooth[j] >= g.smooth[j - 1] && g.smooth[j] > g.smooth[j + 1])) continue;
    const auto [lo, hi] = std::minmax(j, g.first);
    const double valley = *std::min_element(g.smooth.begin() + static_cast<std::ptrdiff_t>(lo),
                                            g.smooth.begin() + static_cast<std::ptrdiff_t>(hi) + 1);
    if (g.smooth[j] - valley > threshold && g.smooth[j] > best) {
      best = g.smooth[j];
      g.second = j;
    }
  }
  return g;
}

std::size_t nearest_index(const std::vector<double>& x, double value) {
  const auto it = std::lower_bound(x.begin(), x.end(), value);
  if (it == x.begin()) return 0;
  if (it == x.end()) return x.size() - 1;
  const auto i = static_cast<std::size_t>(it - x.begin());
  return std::abs(x[i] - value) < std::abs(x[i - 1] - value) ? i : i - 1;
}

Vec initial_guess(const Problem& p, const Layout& layout, const FitOptions& options) {
  auto peaks = pick_peaks(p);
  std::size_t i1 = peaks.first;
  std::size_t i2 = 0;
  if (options.initial_centers) {
    i1 = nearest_index(p.x, (options.initial_centers->first - p.origin) / p.scale);
    i2 = nearest_index(p.x, (options.initial_centers->second - p.origin) / p.scale);
    if (i1 == i2) throw FitError("initial centers fall on the same sample", DoubletFit{});
  } else if (peaks.second) {
    i2 = *peaks.second;
  } else {
    throw FitError("only one peak is resolvable; supply initial centers", DoubletFit{});
  }
  if (p.x[i1] > p.x[i2]) std::swap(i1, i2);

  // Half-maximum walk around the taller line.
  const std::size_t top = peaks.smooth[i1] >= peaks.smooth[i2] ? i1 : i2;
  const double half_height = 0.5 * peaks.smooth[top];
  std::size_t left = top, right = top;
  while (left > 0 && peaks.smooth[left] > half_height) --left;
  while (right + 1 < p.x.size() && peaks.smooth[right] > half_height) ++right;
  const double dx = p.x[1] - p.x[0];
  const double hwhm = std::max(0.5 * (p.x[right] - p.x[left]), 2.0 * dx);

  Vec t(layout.size());
  t(layout.c1()) = p.x[i1];
  t(layout.c2()) = p.x[i2];
  t(layout.g1()) = hwhm;
  t(layout.g2()) = hwhm;
  t(layout.a1()) = std::max(peaks.smooth[i1], 0.0) * std::numbers::pi * hwhm;
  t(layout.a2()) = std::max(peaks.smooth[i2], 0.0) * std::numbers::pi * hwhm;
  t(layout.b()) = peaks.baseline;
  return t;
}

struct Workspace {
  std::vector<double> model, resid;
  std::array<std::vector<double>, 7> cols;
  explicit Workspace(std::size_t n) : model(n), resid(n) {
    for (auto& c : cols) c.resize(n);
  }
};

double sum_squares(const Problem& p, const Layout& layout, const Vec& t, const simd::LineshapeKernels& k,
                   Workspace& w) {
  k.evaluate(p.x, layout.shape(t), w.model);
  return k.residual(p.y, w.model, w.resid);
}

Eigen::MatrixXd jacobian(const Problem& p, const Layout& layout, const Vec& t, const simd::LineshapeKernels& k,
                         Workspace& w) {
  auto& c = w.cols;
  k.jacobian(p.x, layout.shape(t), {c[0], c[1], c[2], c[3], c[4], c[5], c[6]});
  const auto n = static_cast<Eigen::Index>(p.x.size());
  Eigen::MatrixXd j(n, layout.size());
  const auto col = [&](std::size_t k_) { return Eigen::Map<const Vec>(c[k_].data(), n); };
  j.col(layout.c1()) = col(0);
  j.col(layout.c2()) = col(1);
  if (layout.equal_width) {
    j.col(layout.g1()) = col(2) + col(3);
  } else {
    j.col(layout.g1()) = col(2);
    j.col(layout.g2()) = col(3);
  }
  j.col(layout.a1()) = col(4);
  j.col(layout.a2()) = col(5);
  j.col(layout.b()) = col(6);
  return j;
}

DoubletFit to_physical(const Problem& p, const Layout& layout, const Vec& t, const Eigen::MatrixXd& cov_scaled,
                       double ss, int iterations, double hyperfine_a) {
  Vec d(layout.size());
  d(layout.c1()) = p.scale;
  d(layout.c2()) = p.scale;
  d(layout.g1()) = 2.0 * p.scale;
  d(layout.g2()) = 2.0 * p.scale;
  d(layout.a1()) = p.scale * p.y_scale;
  d(layout.a2()) = p.scale * p.y_scale;
  d(layout.b()) = p.y_scale;

  DoubletFit fit;
  fit.equal_width = layout.equal_width;
  fit.center_1 = p.origin + p.scale * t(layout.c1());
  fit.center_2 = p.origin + p.scale * t(layout.c2());
  fit.width_1 = 2.0 * p.scale * t(layout.g1());
  fit.width_2 = 2.0 * p.scale * t(layout.g2());
  fit.area_1 = d(layout.a1()) * t(layout.a1());
  fit.area_2 = d(layout.a2()) * t(layout.a2());
  fit.baseline = p.y_scale * t(layout.b());
  fit.covariance = d.asDiagonal() * cov_scaled * d.asDiagonal();
  fit.residual_norm = p.y_scale * std::sqrt(ss);
  fit.iterations = iterations;

  // Peak 1 is the m_i = +1/2 line: at higher field when A < 0, lower field when A > 0.
  const bool plus_is_high = hyperfine_a < 0.0;
  const bool first_is_high = fit.center_1 > fit.center_2;
  if (hyperfine_a != 0.0 && plus_is_high != first_is_high) {
    std::swap(fit.center_1, fit.center_2);
    std::swap(fit.width_1, fit.width_2);
    std::swap(fit.area_1, fit.area_2);
    Eigen::PermutationMatrix<Eigen::Dynamic> perm(layout.size());
    perm.setIdentity();
    auto& idx = perm.indices();
    std::swap(idx(layout.c1()), idx(layout.c2()));
    if (!layout.equal_width) std::swap(idx(layout.g1()), idx(layout.g2()));
    std::swap(idx(layout.a1()), idx(layout.a2()));
    fit.covariance = perm * fit.covariance * perm.transpose();
  }
  return fit;
}

}  // namespace

DoubletFit fit_bilorentzian(const Spectrum& spectrum, const FitOptions& options) {
  spectrum.validate();
  const auto& k = simd::kernels(options.backend);
  const Problem p = scale_problem(spectrum);
  const Layout layout{options.equal_width};
  const auto n = static_cast<Eigen::Index>(p.x.size());
  if (n <= layout.size()) throw FitError("too few points for the doublet model", DoubletFit{});

  Workspace w(p.x.size());
  Vec t = initial_guess(p, layout, options);
  double ss = sum_squares(p, layout, t, k, w);
  double lambda = 1e-3;
  int iter = 0;
  bool converged = false;

  const auto widths_ok = [&](const Vec& v) { return v(layout.g1()) > 0.0 && v(layout.g2()) > 0.0; };

  while (iter < options.max_iterations && !converged) {
    ++iter;
    const Eigen::MatrixXd j = jacobian(p, layout, t, k, w);
    const Eigen::MatrixXd jtj = j.transpose() * j;
    const Vec grad = j.transpose() * Eigen::Map<const Vec>(w.resid.data(), n);
    const Vec diag = jtj.diagonal().cwiseMax(1e-30);

    bool accepted = false;
    bool first_trial = true;
    bool first_small = false;
    while (!accepted) {
      Eigen::MatrixXd damped = jtj;
      damped.diagonal() += lambda * diag;
      const Vec step = damped.ldlt().solve(grad);
      const Vec trial = t + step;
      const bool small = step.norm() <= options.step_tolerance * (t.norm() + options.step_tolerance);
      if (first_trial) first_small = small;
      first_trial = false;
      if (step.allFinite() && widths_ok(trial)) {
        const double trial_ss = sum_squares(p, layout, trial, k, w);
        if (trial_ss <= ss) {
          t = trial;
          ss = trial_ss;
          lambda = std::max(lambda * 0.1, 1e-15);
          accepted = true;
          converged = small;
          continue;
        }
      }
      // The least-damped step was already below tolerance and still uphill:
      // t is the minimum to working precision.
      if (first_small) {
        converged = true;
        break;
      }
      lambda *= 10.0;
      if (lambda > 1e20) break;
    }
    if (!accepted && !converged) break;
  }
  // Leave the workspace consistent with t for the covariance.
  ss = sum_squares(p, layout, t, k, w);

  const Eigen::MatrixXd j = jacobian(p, layout, t, k, w);
  const Eigen::MatrixXd jtj = j.transpose() * j;
  const double dof = static_cast<double>(n - layout.size());
  const Eigen::MatrixXd cov = (ss / dof) * jtj.completeOrthogonalDecomposition().pseudoInverse();
  auto fit = to_physical(p, layout, t, cov, ss, iter, spectrum.meta.params.hyperfine_a);

  if (!converged) {
    std::ostringstream msg;
    msg << "bi-Lorentzian fit did not converge after " << iter << " iterations (residual norm "
        << fit.residual_norm << ")";
    throw FitError(msg.str(), fit);
  }
  return fit;
}

PolarizationEstimate polarization_from_fit(const DoubletFit& fit) {
  const double total = fit.area_1 + fit.area_2;
  if (total == 0.0 || !std::isfinite(total)) throw DomainError("total peak area is zero; polarization undefined");
  PolarizationEstimate out;
  out.value = (fit.area_1 - fit.area_2) / total;
  Eigen::Vector2d grad(2.0 * fit.area_2 / (total * total), -2.0 * fit.area_1 / (total * total));
  if (fit.covariance.rows() > fit.area_2_index()) {
    const auto i1 = fit.area_1_index();
    const auto i2 = fit.area_2_index();
    Eigen::Matrix2d c;
    c << fit.covariance(i1, i1), fit.covariance(i1, i2), fit.covariance(i2, i1), fit.covariance(i2, i2);
    out.sigma = std::sqrt(std::max(0.0, grad.dot(c * grad)));
  }
  return out;
}

}  // namespace dnp
