#pragma once

// Rate-equation (population) dynamics on the eight levels.
//
// The generator M acts on column vectors of populations: dp/dt = M p. Off-diagonal
// M(i, j) is the transfer rate from level j into level i; each column sums to zero.
// Coherences are dropped; drives are symmetric exchange rates between the
// addressed levels.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "dnp/spin_system.hpp"

namespace dnp {

using RateMatrix = Eigen::Matrix<double, 8, 8>;

/// Downward rates of the three relaxation channels. The upward rate across a
/// gap dE is rate * exp(-dE / k_B T) at the lattice temperature.
struct RelaxationRates {
  double electronic = 0.0;  // w_e, 1/s
  double nuclear = 0.0;     // w_n, 1/s
  double flipflop = 0.0;    // w_x, 1/s
  double lattice_temperature = 3.0;

  void validate() const;
  double max_rate() const;
};

/// w such that a single pair with gap `gap` relaxes with time constant t1:
/// w (1 + exp(-gap / k_B T)) = 1 / t1.
double downward_rate_from_t1(double t1, double gap, double temperature);

/// w_e for the electron Zeeman gap g_e mu_B B.
double electronic_rate_from_t1(const SystemParams& params, double t1, double temperature);

/// w_n for the nuclear gap of the m_s = -3/2 manifold (the RF1 pair).
double nuclear_rate_from_t1(const SystemParams& params, double t1, double temperature);

struct DriveSpec {
  TransitionLabel target = TransitionLabel::MW2;
  double strength = 0.0;  // 1/s, applied in both directions
};

enum class ChannelKind { electronic_relaxation, nuclear_relaxation, flipflop_relaxation, drive };

struct ChannelRecord {
  ChannelKind kind;
  std::optional<TransitionLabel> label;
  std::size_t from = 0;  // upper level for relaxation
  std::size_t to = 0;
  double forward_rate = 0.0;
  double backward_rate = 0.0;
};

class RateModel {
 public:
  explicit RateModel(LevelSet levels);

  /// Relaxation between levels a and b: `down_rate` toward the lower level,
  /// the detailed-balance rate upward.
  void add_relaxation(std::size_t a, std::size_t b, double down_rate, double temperature,
                      ChannelKind kind, std::optional<TransitionLabel> label = std::nullopt);
  /// Symmetric exchange at `rate` in both directions.
  void add_exchange(std::size_t a, std::size_t b, double rate,
                    std::optional<TransitionLabel> label = std::nullopt);

  const RateMatrix& generator() const { return generator_; }
  const std::vector<ChannelRecord>& channels() const { return channels_; }
  const LevelSet& levels() const { return levels_; }

 private:
  void add_transfer(std::size_t from, std::size_t to, double rate);

  LevelSet levels_;
  RateMatrix generator_;
  std::vector<ChannelRecord> channels_;
};

/// Sum of relaxation channels on the catalog pairs plus drives. Drive targets
/// must be MW or RF labels; anything else is a configuration error.
RateModel build_rate_matrix(const SystemParams& params, const RelaxationRates& rates,
                            const std::vector<DriveSpec>& drives);

/// Unique normalized null vector of the generator. Throws DegeneracyError when
/// the nonzero-rate graph is disconnected or has more than one closed class.
PopulationVector steady_state(const RateModel& model);

/// Entries within this distance below zero are clamped after evolve.
inline constexpr double negativity_tolerance = 1e-12;

/// exp(M t) p0 via Pade scaling-and-squaring.
PopulationVector evolve(const RateModel& model, const PopulationVector& p0, double t);

enum class PulseKind { mw_pi, rf_pi, mw_saturate, rf_saturate, wait };

struct PulseStep {
  PulseKind kind = PulseKind::wait;
  std::optional<TransitionLabel> target;
  double duration = 0.0;  // s; wait and saturate only

  static PulseStep mw_pi(TransitionLabel mw) { return {PulseKind::mw_pi, mw, 0.0}; }
  static PulseStep rf_pi(TransitionLabel rf) { return {PulseKind::rf_pi, rf, 0.0}; }
  static PulseStep mw_saturate(TransitionLabel mw, double s) { return {PulseKind::mw_saturate, mw, s}; }
  static PulseStep rf_saturate(TransitionLabel rf, double s) { return {PulseKind::rf_saturate, rf, s}; }
  static PulseStep wait(double s) { return {PulseKind::wait, std::nullopt, s}; }

  void validate() const;
};

std::string_view to_string(PulseKind kind);

/// How a microwave pi pulse acts on the three degenerate pairs of one manifold.
enum class MwPiModel {
  reverse,   // m_s -> -m_s (global pi rotation of the spin-3/2 multiplet)
  equalize,  // all four levels of the manifold equalized
};

/// Instantaneous pulse. rf_pi swaps the RF pair; mw_pi acts per `model`;
/// *_saturate equalizes the addressed levels. `wait` is a usage error.
PopulationVector apply_pulse(const PopulationVector& p, const TransitionCatalog& catalog,
                             const PulseStep& step, MwPiModel model = MwPiModel::reverse);

struct TrajectoryPoint {
  double time = 0.0;
  PopulationVector populations;
};

using Trajectory = std::vector<TrajectoryPoint>;

struct ScheduleOptions {
  double drive_factor = 1e6;  // saturating drive = drive_factor * max relaxation rate
  MwPiModel mw_pi_model = MwPiModel::reverse;
};

/// Runs the steps in order. Pulses are instantaneous; wait and saturate steps
/// are evolved exactly under their segment's generator. One trajectory point
/// is appended after each step, after the initial (0, p0).
Trajectory run_schedule(const SystemParams& params, const RelaxationRates& rates,
                        const std::vector<PulseStep>& steps, const PopulationVector& p0,
                        const ScheduleOptions& options = {});

/// Repeats {mw_pi(mw), rf_pi(rf), wait(wait_s)} `cycles` times.
std::vector<PulseStep> ponsee_pulse_cycle(TransitionLabel mw, TransitionLabel rf, double wait_s,
                                          std::size_t cycles);

struct FlipflopCalibration {
  double flipflop_rate = 0.0;       // w_x, 1/s
  double achieved_polarization = 0.0;
  std::size_t evaluations = 0;
};

inline constexpr double calibration_tolerance = 1e-3;

/// Flip-flop rate for which thermal populations evolved for `duration` under a
/// saturated `mw_label` (electronic relaxation w_e, no nuclear relaxation) reach
/// `target_p`. Throws CalibrationError if the target exceeds the reachable bound.
FlipflopCalibration calibrate_flipflop(const SystemParams& params, double electronic_rate,
                                       TransitionLabel mw_label, double target_p, double duration,
                                       double drive_factor = 1e6);

/// Nuclear polarization after `duration` at flip-flop rate `flipflop_rate`
/// (the monotone map the calibration inverts).
double overhauser_polarization(const SystemParams& params, double electronic_rate,
                               double flipflop_rate, TransitionLabel mw_label, double duration,
                               double drive_factor = 1e6);

}  // namespace dnp
