#include "dnp/kinetics.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>
#include <sstream>

#include <Eigen/LU>
#include <boost/math/tools/toms748_solve.hpp>
#include <unsupported/Eigen/MatrixFunctions>

#include "dnp/constants.hpp"
#include "dnp/errors.hpp"
#include "dnp/observables.hpp"

namespace dnp {

namespace c = constants;

void RelaxationRates::validate() const {
  if (!(electronic >= 0.0) || !(nuclear >= 0.0) || !(flipflop >= 0.0) ||
      !std::isfinite(electronic + nuclear + flipflop)) {
    throw DomainError("relaxation rates must be finite and nonnegative");
  }
  if (!(lattice_temperature > 0.0)) throw DomainError("lattice temperature must be positive");
}

double RelaxationRates::max_rate() const { return std::max({electronic, nuclear, flipflop}); }

double downward_rate_from_t1(double t1, double gap, double temperature) {
  if (!(t1 > 0.0)) throw DomainError("T1 must be positive");
  if (!(temperature > 0.0)) throw DomainError("temperature must be positive");
  return 1.0 / (t1 * (1.0 + std::exp(-std::abs(gap) / (c::boltzmann_k * temperature))));
}

double electronic_rate_from_t1(const SystemParams& params, double t1, double temperature) {
  return downward_rate_from_t1(t1, params.g_electron * c::bohr_magneton * params.b_field, temperature);
}

double nuclear_rate_from_t1(const SystemParams& params, double t1, double temperature) {
  const double gap = level_energy(params, -1.5, 0.5) - level_energy(params, -1.5, -0.5);
  return downward_rate_from_t1(t1, gap, temperature);
}

RateModel::RateModel(LevelSet levels) : levels_(std::move(levels)), generator_(RateMatrix::Zero()) {}

void RateModel::add_transfer(std::size_t from, std::size_t to, double rate) {
  generator_(to, from) += rate;
  generator_(from, from) -= rate;
}

void RateModel::add_relaxation(std::size_t a, std::size_t b, double down_rate, double temperature,
                               ChannelKind kind, std::optional<TransitionLabel> label) {
  if (a == b || a >= level_count || b >= level_count) throw DomainError("invalid level pair");
  if (!(down_rate >= 0.0)) throw DomainError("relaxation rate must be nonnegative");
  if (!(temperature > 0.0)) throw DomainError("temperature must be positive");
  const auto upper = levels_[a].energy >= levels_[b].energy ? a : b;
  const auto lower = upper == a ? b : a;
  const double gap = levels_[upper].energy - levels_[lower].energy;
  const double up_rate = down_rate * std::exp(-gap / (c::boltzmann_k * temperature));
  add_transfer(upper, lower, down_rate);
  add_transfer(lower, upper, up_rate);
  channels_.push_back({kind, label, upper, lower, down_rate, up_rate});
}

void RateModel::add_exchange(std::size_t a, std::size_t b, double rate,
                             std::optional<TransitionLabel> label) {
  if (a == b || a >= level_count || b >= level_count) throw DomainError("invalid level pair");
  if (!(rate >= 0.0)) throw DomainError("drive strength must be nonnegative");
  add_transfer(a, b, rate);
  add_transfer(b, a, rate);
  channels_.push_back({ChannelKind::drive, label, a, b, rate, rate});
}

RateModel build_rate_matrix(const SystemParams& params, const RelaxationRates& rates,
                            const std::vector<DriveSpec>& drives) {
  rates.validate();
  const auto levels = build_levels(params);
  const auto catalog = catalog_transitions(levels);
  RateModel model(levels);

  const auto relax = [&](TransitionKind kind, double rate, ChannelKind channel) {
    if (rate == 0.0) return;
    for (const auto& t : catalog.of_kind(kind)) {
      model.add_relaxation(t.upper_level, t.lower_level, rate, rates.lattice_temperature, channel, t.label);
    }
  };
  relax(TransitionKind::electronic, rates.electronic, ChannelKind::electronic_relaxation);
  relax(TransitionKind::nuclear, rates.nuclear, ChannelKind::nuclear_relaxation);
  relax(TransitionKind::flipflop, rates.flipflop, ChannelKind::flipflop_relaxation);

  for (const auto& drive : drives) {
    if (!is_microwave(drive.target) && !is_radio_frequency(drive.target)) {
      throw ConfigError(ErrorKind::config_value,
                        "cannot drive " + std::string(to_string(drive.target)) +
                            "; valid drive labels are MW1, MW2, RF1, RF2, RF3, RF4");
    }
    if (!(drive.strength >= 0.0) || !std::isfinite(drive.strength)) {
      throw ConfigError(ErrorKind::config_value, "drive strength must be finite and nonnegative");
    }
    if (drive.strength == 0.0) continue;
    for (const auto& t : catalog.pairs(drive.target)) {
      model.add_exchange(t.lower_level, t.upper_level, drive.strength, t.label);
    }
  }
  return model;
}

namespace {

using Reach = std::array<std::array<bool, level_count>, level_count>;

std::string describe_groups(const std::vector<std::vector<std::size_t>>& groups) {
  std::ostringstream out;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    out << (g ? " " : "") << '{';
    for (std::size_t k = 0; k < groups[g].size(); ++k) out << (k ? "," : "") << groups[g][k];
    out << '}';
  }
  return out.str();
}

// Groups of levels under an equivalence given as a symmetric relation.
std::vector<std::vector<std::size_t>> classes_of(const Reach& related) {
  std::vector<std::vector<std::size_t>> groups;
  std::array<bool, level_count> seen{};
  for (std::size_t i = 0; i < level_count; ++i) {
    if (seen[i]) continue;
    auto& g = groups.emplace_back();
    for (std::size_t j = 0; j < level_count; ++j) {
      if (related[i][j]) {
        g.push_back(j);
        seen[j] = true;
      }
    }
  }
  return groups;
}

Reach transitive_closure(Reach r) {
  for (std::size_t i = 0; i < level_count; ++i) r[i][i] = true;
  for (std::size_t k = 0; k < level_count; ++k)
    for (std::size_t i = 0; i < level_count; ++i)
      for (std::size_t j = 0; j < level_count; ++j)
        if (r[i][k] && r[k][j]) r[i][j] = true;
  return r;
}

void check_unique_stationary(const RateMatrix& m) {
  Reach edge{}, undirected{};
  for (std::size_t i = 0; i < level_count; ++i) {
    for (std::size_t j = 0; j < level_count; ++j) {
      if (i != j && m(j, i) > 0.0) {  // flow i -> j
        edge[i][j] = true;
        undirected[i][j] = undirected[j][i] = true;
      }
    }
  }
  const auto components = classes_of(transitive_closure(undirected));
  if (components.size() > 1) {
    throw DegeneracyError("rate graph is disconnected; components " + describe_groups(components));
  }

  const auto reach = transitive_closure(edge);
  Reach mutual{};
  for (std::size_t i = 0; i < level_count; ++i)
    for (std::size_t j = 0; j < level_count; ++j) mutual[i][j] = reach[i][j] && reach[j][i];
  std::vector<std::vector<std::size_t>> closed;
  for (const auto& cls : classes_of(mutual)) {
    const bool leaks = std::any_of(cls.begin(), cls.end(), [&](std::size_t i) {
      for (std::size_t j = 0; j < level_count; ++j)
        if (edge[i][j] && !mutual[i][j]) return true;
      return false;
    });
    if (!leaks) closed.push_back(cls);
  }
  if (closed.size() > 1) {
    throw DegeneracyError("rate graph has several closed classes " + describe_groups(closed));
  }
}

PopulationVector clamp_and_normalize(const Eigen::Matrix<double, 8, 1>& v, const char* where) {
  std::array<double, level_count> out{};
  double worst = 0.0;
  for (std::size_t i = 0; i < level_count; ++i) {
    double x = v(static_cast<Eigen::Index>(i));
    if (!std::isfinite(x)) throw DomainError(std::string(where) + " produced a non-finite population");
    if (x < 0.0) {
      if (x < -negativity_tolerance) {
        std::ostringstream msg;
        msg << where << " produced population " << x << " below the clamping tolerance";
        throw DomainError(msg.str());
      }
      worst = std::min(worst, x);
      x = 0.0;
    }
    out[i] = x;
  }
  if (worst < -1e-14) {
    std::clog << "warning: " << where << " clamped a negative population of " << worst << '\n';
  }
  return PopulationVector::normalized(out);
}

}  // namespace

PopulationVector steady_state(const RateModel& model) {
  const RateMatrix& m = model.generator();
  check_unique_stationary(m);

  // Column equilibration: solve (M D^-1) q = 0 with q = D p, which keeps the
  // system well scaled when drive rates dwarf relaxation rates.
  Eigen::Matrix<double, 8, 1> scale;
  for (Eigen::Index j = 0; j < 8; ++j) scale(j) = m(j, j) < 0.0 ? -m(j, j) : 1.0;
  RateMatrix a = m * scale.cwiseInverse().asDiagonal();
  a.row(7) = scale.cwiseInverse().transpose();  // normalization: sum_j q_j / d_j = 1
  Eigen::Matrix<double, 8, 1> rhs = Eigen::Matrix<double, 8, 1>::Zero();
  rhs(7) = 1.0;
  const Eigen::FullPivLU<RateMatrix> lu(a);
  if (!lu.isInvertible()) throw DegeneracyError("stationary system is singular");
  const Eigen::Matrix<double, 8, 1> q = lu.solve(rhs);
  return clamp_and_normalize(q.cwiseQuotient(scale), "steady_state");
}

PopulationVector evolve(const RateModel& model, const PopulationVector& p0, double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("evolution time must be finite and >= 0");
  if (t == 0.0) return p0;
  const RateMatrix propagator = (model.generator() * t).exp();
  const Eigen::Map<const Eigen::Matrix<double, 8, 1>> x(p0.array().data());
  return clamp_and_normalize(propagator * x, "evolve");
}

void PulseStep::validate() const {
  if (kind == PulseKind::wait) {
    if (!(duration > 0.0)) throw DomainError("wait duration must be positive");
    return;
  }
  if (!target) throw DomainError(std::string(to_string(kind)) + " needs a target transition");
  const bool mw = kind == PulseKind::mw_pi || kind == PulseKind::mw_saturate;
  if (mw && !is_microwave(*target)) {
    throw ConfigError(ErrorKind::config_value, std::string(to_string(kind)) + " target must be MW1 or MW2");
  }
  if (!mw && !is_radio_frequency(*target)) {
    throw ConfigError(ErrorKind::config_value, std::string(to_string(kind)) + " target must be RF1..RF4");
  }
  const bool timed = kind == PulseKind::mw_saturate || kind == PulseKind::rf_saturate;
  if (timed && !(duration > 0.0)) throw DomainError("saturation duration must be positive");
}

std::string_view to_string(PulseKind kind) {
  switch (kind) {
    case PulseKind::mw_pi: return "mw_pi";
    case PulseKind::rf_pi: return "rf_pi";
    case PulseKind::mw_saturate: return "mw_saturate";
    case PulseKind::rf_saturate: return "rf_saturate";
    case PulseKind::wait: return "wait";
  }
  return "?";
}

PopulationVector apply_pulse(const PopulationVector& p, const TransitionCatalog& catalog,
                             const PulseStep& step, MwPiModel model) {
  if (step.kind == PulseKind::wait) {
    throw Error(ErrorKind::usage, "wait is not an instantaneous pulse; evolve the populations instead");
  }
  step.validate();
  auto out = p.array();
  const auto equalize = [&out](auto indices) {
    double total = 0.0;
    for (auto i : indices) total += out[i];
    for (auto i : indices) out[i] = total / static_cast<double>(indices.size());
  };

  switch (step.kind) {
    case PulseKind::rf_pi: {
      const auto& t = catalog.nuclear(*step.target);
      std::swap(out[t.lower_level], out[t.upper_level]);
      break;
    }
    case PulseKind::rf_saturate: {
      const auto& t = catalog.nuclear(*step.target);
      equalize(std::array{t.lower_level, t.upper_level});
      break;
    }
    case PulseKind::mw_pi:
    case PulseKind::mw_saturate: {
      const auto idx = catalog.levels().manifold(microwave_manifold(*step.target));
      if (step.kind == PulseKind::mw_pi && model == MwPiModel::reverse) {
        for (std::size_t k = 0; k < idx.size(); ++k) out[idx[k]] = p[idx[idx.size() - 1 - k]];
      } else {
        equalize(idx);
      }
      break;
    }
    case PulseKind::wait: break;
  }
  return PopulationVector(out);
}

Trajectory run_schedule(const SystemParams& params, const RelaxationRates& rates,
                        const std::vector<PulseStep>& steps, const PopulationVector& p0,
                        const ScheduleOptions& options) {
  for (const auto& step : steps) step.validate();
  if (!(options.drive_factor > 0.0)) throw DomainError("drive factor must be positive");

  const auto catalog = catalog_transitions(build_levels(params));
  const RateModel relaxation = build_rate_matrix(params, rates, {});
  const double relax_scale = rates.max_rate() > 0.0 ? rates.max_rate() : 1.0;
  const double drive = options.drive_factor * relax_scale;

  Trajectory trajectory{{0.0, p0}};
  double time = 0.0;
  PopulationVector p = p0;
  for (const auto& step : steps) {
    switch (step.kind) {
      case PulseKind::wait:
        p = evolve(relaxation, p, step.duration);
        time += step.duration;
        break;
      case PulseKind::mw_saturate:
      case PulseKind::rf_saturate: {
        const auto driven = build_rate_matrix(params, rates, {{*step.target, drive}});
        p = evolve(driven, p, step.duration);
        time += step.duration;
        break;
      }
      default: p = apply_pulse(p, catalog, step, options.mw_pi_model);
    }
    trajectory.push_back({time, p});
  }
  return trajectory;
}

std::vector<PulseStep> ponsee_pulse_cycle(TransitionLabel mw, TransitionLabel rf, double wait_s,
                                          std::size_t cycles) {
  std::vector<PulseStep> steps;
  steps.reserve(3 * cycles);
  for (std::size_t k = 0; k < cycles; ++k) {
    steps.push_back(PulseStep::mw_pi(mw));
    steps.push_back(PulseStep::rf_pi(rf));
    steps.push_back(PulseStep::wait(wait_s));
  }
  return steps;
}

double overhauser_polarization(const SystemParams& params, double electronic_rate,
                               double flipflop_rate, TransitionLabel mw_label, double duration,
                               double drive_factor) {
  if (!is_microwave(mw_label)) throw DomainError("Overhauser pumping needs an MW label");
  RelaxationRates rates;
  rates.electronic = electronic_rate;
  rates.flipflop = flipflop_rate;
  rates.lattice_temperature = params.temperature;
  const auto model = build_rate_matrix(params, rates, {{mw_label, drive_factor * rates.max_rate()}});
  const auto p0 = thermal_populations(model.levels(), params.temperature);
  return nuclear_polarization(evolve(model, p0, duration), model.levels());
}

FlipflopCalibration calibrate_flipflop(const SystemParams& params, double electronic_rate,
                                       TransitionLabel mw_label, double target_p, double duration,
                                       double drive_factor) {
  if (!(electronic_rate > 0.0)) throw DomainError("electronic rate must be positive");
  if (!(duration > 0.0)) throw DomainError("calibration duration must be positive");
  if (!std::isfinite(target_p)) throw DomainError("target polarization must be finite");

  FlipflopCalibration result;
  const auto polarization_at = [&](double w) {
    ++result.evaluations;
    return overhauser_polarization(params, electronic_rate, w, mw_label, duration, drive_factor);
  };

  const double at_zero = polarization_at(0.0);
  if (std::abs(at_zero - target_p) <= calibration_tolerance) {
    result.achieved_polarization = at_zero;
    return result;
  }
  if (target_p < at_zero) {
    throw CalibrationError("target polarization is below the value reached without flip-flop relaxation",
                           at_zero);
  }

  double lo = 0.0;
  double hi = 1e-3 * electronic_rate;
  double p_hi = polarization_at(hi);
  while (p_hi < target_p) {
    lo = hi;
    hi *= 10.0;
    p_hi = polarization_at(hi);
    if (hi > 1e6 * electronic_rate && p_hi < target_p) {
      std::ostringstream msg;
      msg << "target polarization " << target_p << " is unreachable in " << duration
          << " s; asymptotic bound " << p_hi;
      throw CalibrationError(msg.str(), p_hi);
    }
  }

  std::uintmax_t max_iter = 200;
  const auto bracket = boost::math::tools::toms748_solve(
      [&](double w) { return polarization_at(w) - target_p; }, lo, hi,
      boost::math::tools::eps_tolerance<double>(40), max_iter);
  result.flipflop_rate = 0.5 * (bracket.first + bracket.second);
  result.achieved_polarization = polarization_at(result.flipflop_rate);
  if (std::abs(result.achieved_polarization - target_p) > calibration_tolerance) {
    throw CalibrationError("root search did not reach the calibration tolerance", p_hi);
  }
  return result;
}

}  // namespace dnp
