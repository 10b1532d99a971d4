#include <cmath>
#include <random>

#include "doctest.h"
#include "dnp/errors.hpp"
#include "dnp/kinetics.hpp"
#include "dnp/observables.hpp"
#include "oracles.hpp"

using namespace dnp;

namespace {

const TransitionLabel rf_labels[4] = {TransitionLabel::RF1, TransitionLabel::RF2, TransitionLabel::RF3,
                                      TransitionLabel::RF4};

RelaxationRates electronic_only(const SystemParams& params, double t1 = 270.0) {
  RelaxationRates r;
  r.electronic = electronic_rate_from_t1(params, t1, params.temperature);
  r.lattice_temperature = params.temperature;
  return r;
}

SystemParams at_alpha(double alpha) {
  SystemParams params;
  params.temperature = oracle::temperature_for_alpha(alpha, params.b_field, params.g_electron);
  return params;
}

double column_sum_error(const RateMatrix& m) {
  double worst = 0.0;
  for (int j = 0; j < 8; ++j) worst = std::max(worst, std::fabs(m.col(j).sum()));
  return worst;
}

}  // namespace

TEST_CASE("zero rates give the zero generator") {
  RelaxationRates r;
  const auto model = build_rate_matrix(SystemParams{}, r, {});
  CHECK(model.generator().isZero(0.0));
}

TEST_CASE("electronic relaxation alone fills exactly twelve off-diagonals") {
  const SystemParams params;
  const auto model = build_rate_matrix(params, electronic_only(params), {});
  int nonzero = 0;
  for (int i = 0; i < 8; ++i) {
    for (int j = 0; j < 8; ++j) {
      if (i != j && model.generator()(i, j) != 0.0) ++nonzero;
      if (i != j) CHECK(model.generator()(i, j) >= 0.0);
    }
  }
  CHECK(nonzero == 12);
}

TEST_CASE("columns sum to zero with drives on") {
  const SystemParams params;
  RelaxationRates r = electronic_only(params);
  r.nuclear = 1e-5;
  r.flipflop = 3e-5;
  const double w = 1e6 * r.max_rate();
  const auto model = build_rate_matrix(params, r, {{TransitionLabel::MW2, w}, {TransitionLabel::RF2, w}});
  const auto& m = model.generator();
  CHECK(column_sum_error(m) <= 1e-12 * m.cwiseAbs().maxCoeff());
}

TEST_CASE("drive-free generator satisfies detailed balance against Boltzmann") {
  const SystemParams params;
  RelaxationRates r = electronic_only(params);
  r.nuclear = 2e-5;
  r.flipflop = 7e-4;
  const auto model = build_rate_matrix(params, r, {});
  const auto pi = thermal_populations(model.levels(), params.temperature);
  const auto& m = model.generator();
  for (int i = 0; i < 8; ++i) {
    for (int j = 0; j < i; ++j) {
      const double fwd = m(i, j) * pi[j];
      const double bwd = m(j, i) * pi[i];
      if (fwd == 0.0 && bwd == 0.0) continue;
      CHECK(fwd == doctest::Approx(bwd).epsilon(1e-9));
    }
  }
}

TEST_CASE("drive-free steady state is thermal for random positive rates") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> logu(-6.0, -1.0);
  std::uniform_real_distribution<double> temp(1.0, 20.0);
  for (int trial = 0; trial < 50; ++trial) {
    SystemParams params;
    params.temperature = temp(rng);
    RelaxationRates r;
    r.electronic = std::pow(10.0, logu(rng));
    r.nuclear = std::pow(10.0, logu(rng));
    r.flipflop = trial % 2 ? std::pow(10.0, logu(rng)) : 0.0;
    r.lattice_temperature = params.temperature;
    const auto model = build_rate_matrix(params, r, {});
    const auto ss = steady_state(model);
    const auto th = thermal_populations(model.levels(), params.temperature);
    for (std::size_t i = 0; i < level_count; ++i) CHECK(ss[i] == doctest::Approx(th[i]).epsilon(1e-9));
  }
}

TEST_CASE("saturated MW2 + RF_k steady state matches the closed form") {
  for (double alpha : {0.0211, 0.1, 0.3}) {
    const auto params = at_alpha(alpha);
    const auto r = electronic_only(params);
    for (auto rf : rf_labels) {
      const double w = 1e6 * r.max_rate();
      const auto model = build_rate_matrix(params, r, {{TransitionLabel::MW2, w}, {rf, w}});
      const double p = nuclear_polarization(steady_state(model), model.levels());
      CHECK(std::fabs(p - ponsee_cw_prediction(alpha, rf)) <= 1e-4);
    }
  }
}

TEST_CASE("saturating drives equalize the driven pairs") {
  const SystemParams params;
  const auto r = electronic_only(params);
  const double w = 1e6 * r.max_rate();
  const auto model = build_rate_matrix(params, r, {{TransitionLabel::MW2, w}, {TransitionLabel::RF2, w}});
  const auto p = steady_state(model);
  const auto catalog = catalog_transitions(model.levels());
  for (const auto& t : catalog.pairs(TransitionLabel::MW2)) {
    CHECK(p[t.lower_level] / p[t.upper_level] == doctest::Approx(1.0).epsilon(1e-4));
  }
  const auto& rf = catalog.nuclear(TransitionLabel::RF2);
  CHECK(p[rf.lower_level] / p[rf.upper_level] == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("driving every MW and RF pair gives uniform populations") {
  const SystemParams params;
  const auto r = electronic_only(params);
  const double w = 1e6 * r.max_rate();
  std::vector<DriveSpec> drives = {{TransitionLabel::MW1, w}, {TransitionLabel::MW2, w}};
  for (auto rf : rf_labels) drives.push_back({rf, w});
  const auto p = steady_state(build_rate_matrix(params, r, drives));
  for (std::size_t i = 0; i < level_count; ++i) CHECK(std::fabs(p[i] - 0.125) <= 1e-6);
}

TEST_CASE("disconnected rate graphs are reported as degenerate") {
  const SystemParams params;
  CHECK_THROWS_AS(steady_state(build_rate_matrix(params, RelaxationRates{}, {})), DegeneracyError);
  // Electronic relaxation alone never mixes the two nuclear manifolds.
  CHECK_THROWS_AS(steady_state(build_rate_matrix(params, electronic_only(params), {})), DegeneracyError);
}

TEST_CASE("flip-flop labels cannot be driven") {
  const SystemParams params;
  CHECK_THROWS_AS(build_rate_matrix(params, electronic_only(params), {{TransitionLabel::FF1, 1.0}}), ConfigError);
}

TEST_CASE("evolve: identity at t = 0, thermal fixed point, conservation") {
  const SystemParams params;
  RelaxationRates r = electronic_only(params);
  r.nuclear = 1e-5;
  const auto model = build_rate_matrix(params, r, {});
  const auto th = thermal_populations(model.levels(), params.temperature);
  const auto p0 = polarized_populations(model.levels(), params.temperature, 0.62);
  CHECK(evolve(model, p0, 0.0) == p0);
  for (double t : {1.0, 1e3, 1e5, 1e7}) {
    const auto p = evolve(model, th, t);
    for (std::size_t i = 0; i < level_count; ++i) CHECK(p[i] == doctest::Approx(th[i]).epsilon(1e-9));
    const auto q = evolve(model, p0, t);
    CHECK(std::fabs(q.sum() - 1.0) <= 1e-12);
    for (double x : q.values()) CHECK(x >= 0.0);
  }
  CHECK_THROWS_AS(evolve(model, p0, -1.0), DomainError);
}

TEST_CASE("an isolated electronic pair relaxes with time constant T1e") {
  const SystemParams params;
  const double t1 = 270.0;
  const auto levels = build_levels(params);
  const auto lo = levels.index_of(-1.5, -0.5);
  const auto hi = levels.index_of(-0.5, -0.5);
  const double gap = levels[hi].energy - levels[lo].energy;
  RateModel model(levels);
  model.add_relaxation(lo, hi, downward_rate_from_t1(t1, gap, params.temperature), params.temperature,
                       ChannelKind::electronic_relaxation);
  std::array<double, level_count> v{};
  v[hi] = 1.0;
  const PopulationVector p0(v);
  const double boltz = std::exp(-gap / (oracle::k * params.temperature));
  const double upper_eq = boltz / (1.0 + boltz);
  for (double t : {10.0, 270.0, 1000.0}) {
    const double got = evolve(model, p0, t)[hi];
    CHECK(got == doctest::Approx(oracle::two_level_upper(1.0, upper_eq, t1, t)).epsilon(1e-9));
  }
  // Time constant recovered from the decay of the excess population.
  const double t = 500.0;
  const double excess = evolve(model, p0, t)[hi] - upper_eq;
  const double tau = -t / std::log(excess / (1.0 - upper_eq));
  CHECK(tau == doctest::Approx(t1).epsilon(1e-3));
}

TEST_CASE("pulses: rf_pi involution, mw_pi reversal, saturation") {
  const auto levels = build_levels(SystemParams{});
  const auto catalog = catalog_transitions(levels);
  const auto p = polarized_populations(levels, 3.0, 0.3);
  const auto rf = PulseStep::rf_pi(TransitionLabel::RF2);
  CHECK(apply_pulse(apply_pulse(p, catalog, rf), catalog, rf) == p);

  const auto m = levels.manifold(-0.5);
  const auto rev = apply_pulse(p, catalog, PulseStep::mw_pi(TransitionLabel::MW2));
  for (int k = 0; k < 4; ++k) CHECK(rev[m[k]] == p[m[3 - k]]);
  for (auto i : levels.manifold(0.5)) CHECK(rev[i] == p[i]);

  std::array<double, level_count> v{};
  v[m[0]] = 0.4;
  v[m[1]] = 0.1;
  const auto other = levels.manifold(0.5);
  v[other[0]] = 0.5;
  const auto sat = apply_pulse(PopulationVector(v), catalog, PulseStep::mw_saturate(TransitionLabel::MW2, 1.0));
  for (auto i : m) CHECK(sat[i] == doctest::Approx(0.125));
  CHECK(sat[other[0]] == 0.5);

  CHECK_THROWS_AS(apply_pulse(p, catalog, PulseStep::wait(1.0)), Error);
  try {
    apply_pulse(p, catalog, PulseStep::wait(1.0));
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::usage);
  }
}

TEST_CASE("empty schedule returns the initial point") {
  const SystemParams params;
  const auto p0 = thermal_populations(build_levels(params), params.temperature);
  const auto traj = run_schedule(params, electronic_only(params), {}, p0);
  REQUIRE(traj.size() == 1);
  CHECK(traj[0].time == 0.0);
  CHECK(traj[0].populations == p0);
}

TEST_CASE("pulsed RF4 cycle converges monotonically to the CW value") {
  const double alpha = 0.0215;
  const auto params = at_alpha(alpha);
  const auto r = electronic_only(params);
  const auto levels = build_levels(params);
  const auto p0 = thermal_populations(levels, params.temperature);
  const auto steps = ponsee_pulse_cycle(TransitionLabel::MW2, TransitionLabel::RF4, 5 * 270.0, 4);
  const auto traj = run_schedule(params, r, steps, p0);
  REQUIRE(traj.size() == 13);
  double prev = -1.0;
  for (std::size_t c = 1; c <= 4; ++c) {
    const double p = nuclear_polarization(traj[3 * c].populations, levels);
    CHECK(p >= prev);
    prev = p;
  }
  CHECK(std::fabs(prev - ponsee_cw_prediction(alpha, TransitionLabel::RF4)) <= 0.01);
  for (std::size_t i = 1; i < traj.size(); ++i) CHECK(traj[i].time >= traj[i - 1].time);
}

TEST_CASE("pulsed RF2 cycle with equalizing MW pulses approaches the CW value") {
  const double alpha = 0.0211;
  const auto params = at_alpha(alpha);
  const auto levels = build_levels(params);
  const auto p0 = thermal_populations(levels, params.temperature);
  const auto steps = ponsee_pulse_cycle(TransitionLabel::MW2, TransitionLabel::RF2, 5 * 270.0, 40);
  const auto traj = run_schedule(params, electronic_only(params), steps, p0, {1e6, MwPiModel::equalize});
  const double p = nuclear_polarization(traj.back().populations, levels);
  CHECK(std::fabs(p - ponsee_cw_prediction(alpha, TransitionLabel::RF2)) <= 0.01);
}

TEST_CASE("Overhauser pumping is positive for either microwave line") {
  SystemParams params;
  params.temperature = 4.2;
  for (auto mw : {TransitionLabel::MW1, TransitionLabel::MW2}) {
    RelaxationRates r = electronic_only(params);
    r.flipflop = 1e-4;
    const auto model = build_rate_matrix(params, r, {{mw, 1e6 * r.max_rate()}});
    CHECK(nuclear_polarization(steady_state(model), model.levels()) > 0.0);
  }
}

TEST_CASE("flip-flop calibration is self-consistent and monotone") {
  SystemParams params;
  params.temperature = 4.2;
  const double we = electronic_rate_from_t1(params, 270.0, 4.2);
  const auto cal = calibrate_flipflop(params, we, TransitionLabel::MW2, 0.21, 9000.0);
  CHECK(cal.flipflop_rate > 0.0);
  // scipy oracle: w* = 3.9161e-5 /s
  CHECK(cal.flipflop_rate == doctest::Approx(3.9161e-5).epsilon(1e-3));
  const double p = overhauser_polarization(params, we, cal.flipflop_rate, TransitionLabel::MW2, 9000.0);
  CHECK(std::fabs(p - 0.21) <= calibration_tolerance);
  CHECK(overhauser_polarization(params, we, cal.flipflop_rate, TransitionLabel::MW2, 18000.0) >= 0.21);
  double prev = -1.0;
  for (double wx : {0.0, 1e-6, 1e-5, 1e-4, 1e-3}) {
    const double q = overhauser_polarization(params, we, wx, TransitionLabel::MW2, 9000.0);
    CHECK(q > prev);
    prev = q;
  }
}

TEST_CASE("flip-flop calibration edge cases") {
  SystemParams params;
  params.temperature = 4.2;
  const double we = electronic_rate_from_t1(params, 270.0, 4.2);
  CHECK(calibrate_flipflop(params, we, TransitionLabel::MW2, 0.0, 9000.0).flipflop_rate == 0.0);
  CHECK_THROWS_AS(calibrate_flipflop(params, we, TransitionLabel::MW2, 0.99, 9000.0), CalibrationError);
  try {
    calibrate_flipflop(params, we, TransitionLabel::MW2, 0.99, 9000.0);
  } catch (const CalibrationError& e) {
    CHECK(e.asymptotic_bound() < 0.99);
    CHECK(e.asymptotic_bound() > 0.21);
  }
}
