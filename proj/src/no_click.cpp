#include "atomcav/errors.hpp"
#include "atomcav/parallel.hpp"
#include "atomcav/rng.hpp"
#include "atomcav/trajectory.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace atomcav {

std::vector<NoClickPoint> conditional_no_click_fidelity(const SystemModel& model, const InitialState& psi0,
                                                        const std::vector<double>& etas,
                                                        const std::vector<double>& t_grid, std::size_t n_traj,
                                                        std::uint64_t master_seed, const PureState& target,
                                                        const NoClickOptions& options) {
  const double t_obs = options.t_obs;
  if (!(t_obs > 0.0)) throw std::invalid_argument("no-click fidelity: t_obs must be positive");
  for (double e : etas) {
    if (!(e >= 0.0 && e <= 1.0)) throw RangeError("no-click fidelity: eta must lie in [0, 1]");
  }
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    if (t_grid[i] < 0.0 || t_grid[i] > t_obs) throw std::invalid_argument("no-click fidelity: window outside [0, t_obs]");
    if (i > 0 && !(t_grid[i] > t_grid[i - 1])) throw std::invalid_argument("no-click fidelity: windows must increase");
  }

  std::vector<std::size_t> keep = options.keep;
  if (keep.empty()) {
    keep.resize(model.dims.size());
    std::iota(keep.begin(), keep.end(), std::size_t{0});
  }
  Dims kept_dims;
  for (std::size_t k : keep) {
    if (k >= model.dims.size()) throw DimensionError("no-click fidelity: keep index out of range");
    kept_dims.push_back(model.dims[k]);
  }
  if (target.dims() != kept_dims) throw DimensionError("no-click fidelity: target dims do not match kept subsystems");

  const double dt = options.dt > 0.0 ? options.dt : stable_step(model, 0.1);
  const TrajectorySimulator sim(model, dt, t_obs);

  struct Sample {
    Matrix reduced;
    std::vector<double> last_click;  // per eta; -inf when no detected click
  };
  std::vector<Sample> samples(n_traj);
  parallel_for(n_traj, options.threads, [&](std::size_t i) {
    const std::uint64_t seed = trajectory_seed(master_seed, i);
    TrajectoryResult res;
    try {
      res = sim.run(sample_initial_state(psi0, seed), t_obs, seed);
    } catch (const NumericalFailure& e) {
      throw NumericalFailure(e.what(), i, seed);
    }
    Sample s;
    s.reduced = partial_trace(res.final_state, keep).matrix();
    for (std::size_t e = 0; e < etas.size(); ++e) {
      const auto thinned = thin_records(res.records, etas[e], splitmix64(seed + 0x9e37 * (e + 1)));
      double last = -std::numeric_limits<double>::infinity();
      for (const auto& r : thinned)
        if (r.detected) last = r.time;
      s.last_click.push_back(last);
    }
    samples[i] = std::move(s);
  });

  const auto d = static_cast<Eigen::Index>(target.dim());
  std::vector<NoClickPoint> out;
  for (std::size_t e = 0; e < etas.size(); ++e) {
    for (double w : t_grid) {
      Matrix sum = Matrix::Zero(d, d);
      std::size_t n_sel = 0;
      for (const auto& s : samples) {
        if (s.last_click[e] >= t_obs - w && w > 0.0) continue;
        sum += s.reduced;
        ++n_sel;
      }
      NoClickPoint p{w, etas[e], std::nullopt, n_sel};
      if (n_sel > 0) p.fidelity = fidelity(MixedState(kept_dims, sum / static_cast<double>(n_sel)), target);
      out.push_back(p);
    }
  }
  return out;
}

}  // namespace atomcav
