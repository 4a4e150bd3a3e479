#pragma once

#include "atomcav/trajectory.hpp"

#include <optional>
#include <vector>

namespace atomcav {

enum class PeriodKind { light, dark };

const char* to_string(PeriodKind k);

struct Period {
  PeriodKind kind = PeriodKind::dark;
  double start = 0.0;
  double end = 0.0;
  std::size_t trajectory_index = 0;
  /// First or last period of its record, whose true extent is unknown.
  bool censored = false;
};

/// Splits [0, t_end] into light and dark periods from the detected records.
/// Clicks separated by gaps <= threshold form one light period, which ends
/// `threshold` after its last click; the dark period runs from there to the
/// next click. No clicks gives a single dark period.
std::vector<Period> segment_periods(const std::vector<PhotonRecord>& records, double threshold, double t_end);

struct TelegraphAnalysis {
  std::vector<Period> periods;
  double t_cav_est = 0.0;    // mean click gap inside light periods
  double t_dark_est = 0.0;   // mean duration of uncensored dark periods
  double t_light_est = 0.0;  // mean duration of uncensored light periods
  double threshold_used = 0.0;
  std::size_t n_light = 0;   // uncensored periods entering the estimates
  std::size_t n_dark = 0;
  bool low_confidence = false;  // fewer than 10 periods of either kind
  bool no_clicks = false;
  /// Mean fidelity against |a01> over snapshots inside dark periods longer
  /// than 5 thresholds, and the floor it is checked against.
  std::optional<double> dark_fidelity;
  std::size_t dark_samples = 0;
  double dark_fidelity_floor = 0.9;
};

struct TelegraphOptions {
  /// Dark-period threshold; defaults to default_dark_threshold(p).
  std::optional<double> threshold;
  double max_dt = 0.05;
  /// Spacing of state snapshots used for the dark-period fidelity; 0 means the threshold.
  double snapshot_interval = 0.0;
  unsigned threads = 0;
};

/// max(5, ln(100 T_light / T_cav)) * T_cav from the analytic timescales: long
/// enough that false dark periods inside a light period are rare compared with
/// real ones.
double default_dark_threshold(const SystemParams& p);

struct TelegraphRun {
  Ensemble ensemble;  // snapshots are dropped after analysis
  /// Records per trajectory after thinning with p.eta.
  std::vector<std::vector<PhotonRecord>> detected;
  TelegraphAnalysis analysis;
  double t_end = 0.0;
};

/// Runs n_traj trajectories from |00, 0> and analyses the thinned click records.
TelegraphRun telegraph_experiment(const SystemParams& p, double t_end, std::size_t n_traj, std::uint64_t master_seed,
                                  const TelegraphOptions& options = {});

/// Estimates from already segmented periods and click records.
TelegraphAnalysis analyse_periods(std::vector<Period> periods, const std::vector<std::vector<PhotonRecord>>& detected,
                                  double threshold);

}  // namespace atomcav
