#include "atomcav/protocols/telegraph.hpp"

#include "atomcav/errors.hpp"
#include "atomcav/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace atomcav {

namespace {

constexpr std::size_t kMinPeriods = 10;

std::vector<double> click_times(const std::vector<PhotonRecord>& records) {
  std::vector<double> t;
  for (const auto& r : records)
    if (r.detected) t.push_back(r.time);
  std::sort(t.begin(), t.end());
  return t;
}

}  // namespace

const char* to_string(PeriodKind k) { return k == PeriodKind::light ? "light" : "dark"; }

std::vector<Period> segment_periods(const std::vector<PhotonRecord>& records, double threshold, double t_end) {
  if (!(threshold > 0.0)) throw std::invalid_argument("segment_periods: threshold must be positive");
  if (!(t_end >= 0.0)) throw std::invalid_argument("segment_periods: t_end must be non-negative");
  const std::vector<double> clicks = click_times(records);
  std::vector<Period> out;
  if (clicks.empty()) {
    out.push_back({PeriodKind::dark, 0.0, t_end});
    return out;
  }
  if (clicks.front() > t_end) throw std::invalid_argument("segment_periods: click after t_end");

  std::size_t i = 0;
  double cursor = 0.0;
  while (i < clicks.size()) {
    const double first = clicks[i];
    std::size_t j = i;
    while (j + 1 < clicks.size() && clicks[j + 1] - clicks[j] <= threshold) ++j;
    const double last = clicks[j];
    // A light period absorbs a leading gap no longer than the threshold.
    if (first - cursor > threshold || (cursor > 0.0 && first > cursor)) {
      out.push_back({PeriodKind::dark, cursor, first});
      cursor = first;
    }
    const double end = std::min(last + threshold, t_end);
    out.push_back({PeriodKind::light, cursor, end});
    cursor = end;
    i = j + 1;
  }
  if (cursor < t_end) out.push_back({PeriodKind::dark, cursor, t_end});
  out.front().censored = true;
  out.back().censored = true;
  return out;
}

double default_dark_threshold(const SystemParams& p) {
  const TelegraphTimescales ts = telegraph_timescales(p);
  return std::max(5.0, std::log(100.0 * ts.t_light / ts.t_cav)) * ts.t_cav;
}

TelegraphAnalysis analyse_periods(std::vector<Period> periods, const std::vector<std::vector<PhotonRecord>>& detected,
                                  double threshold) {
  TelegraphAnalysis a;
  a.threshold_used = threshold;
  double light_sum = 0.0;
  double dark_sum = 0.0;
  for (const auto& p : periods) {
    if (p.censored) continue;
    if (p.kind == PeriodKind::light) {
      light_sum += p.end - p.start;
      ++a.n_light;
    } else {
      dark_sum += p.end - p.start;
      ++a.n_dark;
    }
  }
  if (a.n_light > 0) a.t_light_est = light_sum / static_cast<double>(a.n_light);
  if (a.n_dark > 0) a.t_dark_est = dark_sum / static_cast<double>(a.n_dark);

  double gap_sum = 0.0;
  std::size_t n_gaps = 0;
  std::size_t n_clicks = 0;
  for (const auto& recs : detected) {
    const std::vector<double> t = click_times(recs);
    n_clicks += t.size();
    for (std::size_t i = 1; i < t.size(); ++i) {
      const double gap = t[i] - t[i - 1];
      if (gap <= threshold) {
        gap_sum += gap;
        ++n_gaps;
      }
    }
  }
  if (n_gaps > 0) a.t_cav_est = gap_sum / static_cast<double>(n_gaps);
  a.no_clicks = n_clicks == 0;
  a.low_confidence = a.n_light < kMinPeriods || a.n_dark < kMinPeriods;
  a.periods = std::move(periods);
  return a;
}

TelegraphRun telegraph_experiment(const SystemParams& p, double t_end, std::size_t n_traj, std::uint64_t master_seed,
                                  const TelegraphOptions& options) {
  if (n_traj == 0) throw std::invalid_argument("telegraph_experiment: n_traj must be >= 1");
  if (!(t_end > 0.0)) throw std::invalid_argument("telegraph_experiment: t_end must be positive");
  const SystemModel model = build_telegraph_system(p);

  double threshold = 0.0;
  if (options.threshold) {
    threshold = *options.threshold;
  } else if (p.omega_l != 0.0) {
    threshold = default_dark_threshold(p);
  } else {
    threshold = t_end;  // no drive: nothing to segment
  }
  if (!(threshold > 0.0)) throw std::invalid_argument("telegraph_experiment: threshold must be positive");

  const double interval = options.snapshot_interval > 0.0 ? options.snapshot_interval : threshold;
  TrajectoryOptions topt;
  for (double t = interval; t < t_end; t += interval) topt.snapshot_times.push_back(t);

  const PureState psi0 = with_cavity_vacuum(two_atom_state(0, 0), p.n_max);
  TelegraphRun run;
  run.t_end = t_end;
  run.ensemble = run_ensemble(model, psi0, n_traj, t_end, stable_step(model, options.max_dt), master_seed, topt,
                              options.threads);

  std::vector<Period> periods;
  const PureState target = singlet_a01();
  const std::size_t atoms[] = {0, 1};
  double fid_sum = 0.0;
  std::size_t fid_n = 0;
  for (std::size_t i = 0; i < n_traj; ++i) {
    auto& tr = run.ensemble.trajectories[i];
    run.detected.push_back(thin_records(tr.records, p.eta, splitmix64(tr.seed ^ 0x7468696eULL)));
    auto segs = segment_periods(run.detected.back(), threshold, t_end);
    std::size_t s = 0;
    for (auto& seg : segs) {
      seg.trajectory_index = i;
      if (seg.kind != PeriodKind::dark || seg.end - seg.start <= 5.0 * threshold) continue;
      while (s < tr.snapshots.size() && tr.snapshots[s].time <= seg.start) ++s;
      for (std::size_t k = s; k < tr.snapshots.size() && tr.snapshots[k].time < seg.end; ++k) {
        fid_sum += fidelity(partial_trace(tr.snapshots[k].state, atoms), target);
        ++fid_n;
      }
    }
    periods.insert(periods.end(), segs.begin(), segs.end());
    tr.snapshots.clear();
    tr.snapshots.shrink_to_fit();
  }
  run.analysis = analyse_periods(std::move(periods), run.detected, threshold);
  if (fid_n > 0) run.analysis.dark_fidelity = fid_sum / static_cast<double>(fid_n);
  run.analysis.dark_samples = fid_n;
  if (run.analysis.low_confidence) {
    warn("telegraph: only " + std::to_string(run.analysis.n_light) + " light and " +
         std::to_string(run.analysis.n_dark) + " dark periods; estimates are low confidence");
  }
  return run;
}

}  // namespace atomcav
