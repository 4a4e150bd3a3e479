#include "atomcav/trajectory.hpp"

#include "atomcav/errors.hpp"
#include "atomcav/parallel.hpp"
#include "atomcav/rng.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace atomcav {

namespace {

// Norm below which a no-jump state is considered lost.
constexpr double kNormFloor = 1e-14;
constexpr int kBisections = 7;  // locate a jump to dt / 128

// Tolerance when comparing times that were built from sums of steps.
double time_slack(double dt) { return 1e-9 * dt; }

void check_finite(const Vector& x, const char* where) {
  if (!x.allFinite()) throw NumericalFailure(std::string(where) + ": non-finite state");
}

}  // namespace

std::uint64_t trajectory_seed(std::uint64_t master_seed, std::uint64_t index) {
  return splitmix64(splitmix64(master_seed) ^ (index + 0x632be59bd9b4e019ULL));
}

TrajectorySimulator::TrajectorySimulator(const SystemModel& model, double dt, double horizon)
    : model_(std::make_shared<const SystemModel>(model)), dt_(dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("TrajectorySimulator: dt must be positive");
  if (!(horizon >= 0.0)) throw std::invalid_argument("TrajectorySimulator: horizon must be non-negative");
  if (model.channels.empty() && total_dim(model.dims) == 0) throw DimensionError("TrajectorySimulator: empty model");
  const double bound = model.generator_norm_bound();
  if (bound * dt > kRk4StepBound * (1.0 + 1e-12)) {
    throw std::invalid_argument("TrajectorySimulator: dt = " + std::to_string(dt) +
                                " violates the RK4 step bound; largest allowed is " +
                                std::to_string(kRk4StepBound / bound));
  }
  static_generator_ = -kI * (model.h_static.matrix() + model.decay_term());
  for (const auto& d : model.drives) drive_generators_.push_back(-kI * d.op.matrix());
  if (model.time_independent()) powers_.emplace(static_generator_, dt, std::max(horizon, dt));
}

void TrajectorySimulator::step(Vector& x, double t, double h) const {
  if (drive_generators_.empty()) {
    rk4_linear_step(static_generator_, x, h);
    return;
  }
  const auto& drives = model_->drives;
  auto deriv = [&](double s, const Vector& v) {
    Vector out = static_generator_ * v;
    for (std::size_t k = 0; k < drives.size(); ++k) {
      const double f = drives[k].envelope(s);
      if (f != 0.0) out.noalias() += f * (drive_generators_[k] * v);
    }
    return out;
  };
  const Vector k1 = deriv(t, x);
  const Vector k2 = deriv(t + h / 2, x + (h / 2) * k1);
  const Vector k3 = deriv(t + h / 2, x + (h / 2) * k2);
  const Vector k4 = deriv(t + h, x + h * k3);
  x += (h / 6) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

void TrajectorySimulator::bisect(Vector& x, double t, double h, double threshold, Crossing& out) const {
  // ||x||^2 > threshold at t and <= threshold at t + h.
  double lo = 0.0;
  double hi = h;
  for (int i = 0; i < kBisections; ++i) {
    const double mid = 0.5 * (lo + hi);
    Vector y = x;
    step(y, t, mid);
    if (y.squaredNorm() > threshold) lo = mid;
    else hi = mid;
  }
  step(x, t, hi);
  out.jumped = true;
  out.time = t + hi;
}

TrajectorySimulator::Crossing TrajectorySimulator::advance(Vector& x, double t, double t_stop,
                                                           double threshold) const {
  Crossing out;
  const double span = t_stop - t;
  if (span <= time_slack(dt_)) {
    out.time = t_stop;
    return out;
  }
  auto n_full = static_cast<std::uint64_t>(std::floor(span / dt_ + 1e-9));
  double rest = span - static_cast<double>(n_full) * dt_;
  if (rest < time_slack(dt_)) rest = 0.0;

  if (powers_) {
    // Largest m <= n_full with ||P^m x||^2 > threshold, by binary lifting
    // (the no-jump norm only decreases).
    if (powers_->levels() < 64 && n_full >> powers_->levels() != 0) {
      throw std::out_of_range("TrajectorySimulator: evolution beyond the precomputed horizon");
    }
    std::uint64_t m = 0;
    Vector y(x.size());
    for (std::size_t k = powers_->levels(); k-- > 0;) {
      const std::uint64_t jump = std::uint64_t{1} << k;
      if (m + jump > n_full) continue;
      y.noalias() = powers_->power(k) * x;
      if (y.squaredNorm() > threshold) {
        x.swap(y);
        m += jump;
      }
    }
    check_finite(x, "trajectory");
    const double t_m = t + static_cast<double>(m) * dt_;
    if (m < n_full) {
      bisect(x, t_m, dt_, threshold, out);
      return out;
    }
    if (rest > 0.0) {
      y = x;
      powers_->partial(y, rest);
      if (y.squaredNorm() > threshold) {
        x.swap(y);
      } else {
        bisect(x, t_m, rest, threshold, out);
        return out;
      }
    }
    out.time = t_stop;
    return out;
  }

  const std::uint64_t n_steps = n_full + (rest > 0.0 ? 1 : 0);
  Vector y(x.size());
  for (std::uint64_t i = 0; i < n_steps; ++i) {
    const double ti = t + static_cast<double>(i) * dt_;
    const double h = i < n_full ? dt_ : rest;
    y = x;
    step(y, ti, h);
    if (y.squaredNorm() > threshold) {
      x.swap(y);
    } else {
      bisect(x, ti, h, threshold, out);
      return out;
    }
  }
  check_finite(x, "trajectory");
  out.time = t_stop;
  return out;
}

PureState TrajectorySimulator::evolve_no_jump(const PureState& psi, double t0, double duration) const {
  if (psi.dims() != model_->dims) throw DimensionError("evolve_no_jump: state dims do not match the model");
  if (duration < 0.0) throw std::invalid_argument("evolve_no_jump: negative duration");
  Vector x = psi.amplitudes();
  advance(x, t0, t0 + duration, -1.0);
  check_finite(x, "evolve_no_jump");
  return PureState(model_->dims, x);
}

TrajectoryResult TrajectorySimulator::run(const PureState& psi0, double t_end, std::uint64_t seed,
                                          const TrajectoryOptions& options) const {
  const SystemModel& model = *model_;
  if (psi0.dims() != model.dims) throw DimensionError("run_trajectory: state dims do not match the model");
  if (!psi0.is_normalized(1e-8)) throw std::invalid_argument("run_trajectory: initial state is not normalized");
  if (!(t_end >= 0.0)) throw std::invalid_argument("run_trajectory: t_end must be non-negative");

  std::vector<double> stops = options.snapshot_times;
  for (double s : stops) {
    if (s < 0.0 || s > t_end) throw std::invalid_argument("run_trajectory: snapshot time outside [0, t_end]");
  }
  std::sort(stops.begin(), stops.end());
  const std::size_t n_snap = stops.size();
  stops.push_back(t_end);

  std::vector<Matrix> jump_ops;
  jump_ops.reserve(model.channels.size());
  for (const auto& c : model.channels) jump_ops.push_back(c.op.matrix());

  TrajectoryResult result;
  result.seed = seed;
  result.snapshots.reserve(n_snap);
  Rng rng(seed);
  double threshold = rng.uniform_open();
  Vector x = psi0.amplitudes();
  double t = 0.0;
  std::vector<double> weights(jump_ops.size());

  for (std::size_t s = 0; s < stops.size(); ++s) {
    const double stop = stops[s];
    for (;;) {
      const Crossing c = advance(x, t, stop, threshold);
      if (!c.jumped) {
        t = stop;
        break;
      }
      t = c.time;
      double total = 0.0;
      for (std::size_t k = 0; k < jump_ops.size(); ++k) {
        weights[k] = (jump_ops[k] * x).squaredNorm();
        total += weights[k];
      }
      if (!(total > 0.0) || !std::isfinite(total)) {
        throw NumericalFailure("run_trajectory: jump with vanishing channel rates at t = " + std::to_string(t));
      }
      const double r = rng.uniform() * total;
      std::size_t k = 0;
      double acc = 0.0;
      for (std::size_t j = 0; j < weights.size(); ++j) {
        if (weights[j] == 0.0) continue;
        k = j;
        acc += weights[j];
        if (r < acc) break;
      }
      Vector y = jump_ops[k] * x;
      x = y / std::sqrt(y.squaredNorm());
      const auto& ch = model.channels[k];
      result.records.push_back({t, k, ch.detectability, ch.detectability == Detectability::cavity_output});
      threshold = rng.uniform_open();
    }
    const double n2 = x.squaredNorm();
    if (n2 < kNormFloor) {
      throw NumericalFailure("run_trajectory: no-jump norm underflow at t = " + std::to_string(t));
    }
    if (s < n_snap) result.snapshots.push_back({stop, PureState(model.dims, x / std::sqrt(n2))});
  }
  result.final_state = PureState(model.dims, x / std::sqrt(x.squaredNorm()));
  return result;
}

double stable_step(const SystemModel& model, double max_dt) {
  return bounded_step(model.generator_norm_bound(), max_dt);
}

TrajectoryResult run_trajectory(const SystemModel& model, const PureState& psi0, double t_end, double dt,
                                std::uint64_t seed, const TrajectoryOptions& options) {
  const TrajectorySimulator sim(model, dt, t_end);
  return sim.run(psi0, t_end, seed, options);
}

namespace {

// Eigen-decomposition of a mixed initial state, computed once per ensemble.
class InitialSampler {
 public:
  explicit InitialSampler(const InitialState& psi0) {
    if (const auto* pure = std::get_if<PureState>(&psi0)) {
      pure_ = *pure;
      return;
    }
    const auto& rho = std::get<MixedState>(psi0);
    if (!rho.is_valid()) throw std::invalid_argument("initial density matrix is not a valid state");
    dims_ = rho.dims();
    Eigen::SelfAdjointEigenSolver<Matrix> es(rho.matrix());
    double total = 0.0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
      const double w = es.eigenvalues()(i);
      if (w <= 1e-12) continue;
      weights_.push_back(w);
      vectors_.push_back(es.eigenvectors().col(i));
      total += w;
    }
    for (double& w : weights_) w /= total;
  }

  PureState sample(std::uint64_t seed) const {
    if (weights_.empty()) return pure_;
    Rng rng(seed ^ 0x5bd1e9955bd1e995ULL);
    double r = rng.uniform();
    std::size_t k = 0;
    while (k + 1 < weights_.size() && r >= weights_[k]) r -= weights_[k++];
    return PureState(dims_, vectors_[k].normalized());
  }

 private:
  PureState pure_;
  Dims dims_;
  std::vector<double> weights_;
  std::vector<Vector> vectors_;
};

}  // namespace

PureState sample_initial_state(const InitialState& psi0, std::uint64_t seed) {
  return InitialSampler(psi0).sample(seed);
}

Ensemble run_ensemble(const SystemModel& model, const InitialState& psi0, std::size_t n_traj, double t_end,
                      double dt, std::uint64_t master_seed, const TrajectoryOptions& options, unsigned threads) {
  const TrajectorySimulator sim(model, dt, t_end);
  const InitialSampler sampler(psi0);
  Ensemble ens;
  ens.params = model.params;
  ens.master_seed = master_seed;
  ens.trajectories.resize(n_traj);
  parallel_for(n_traj, threads, [&](std::size_t i) {
    const std::uint64_t seed = trajectory_seed(master_seed, i);
    try {
      ens.trajectories[i] = sim.run(sampler.sample(seed), t_end, seed, options);
    } catch (const NumericalFailure& e) {
      throw NumericalFailure(e.what(), i, seed);
    }
  });
  return ens;
}

std::vector<PhotonRecord> thin_records(const std::vector<PhotonRecord>& records, double eta, std::uint64_t seed) {
  if (!(eta >= 0.0 && eta <= 1.0)) throw RangeError("thin_records: eta must lie in [0, 1]");
  Rng rng(seed);
  std::vector<PhotonRecord> out = records;
  for (auto& r : out) {
    // One draw per record keeps the stream aligned regardless of channel.
    const bool keep = rng.bernoulli(eta);
    r.detected = r.detectability == Detectability::cavity_output && keep;
  }
  return out;
}

MixedState ensemble_average(const Ensemble& ensemble, std::size_t snapshot) {
  if (ensemble.trajectories.empty()) throw std::invalid_argument("ensemble_average: empty ensemble");
  const auto& first = ensemble.trajectories.front();
  if (snapshot >= first.snapshots.size()) throw std::out_of_range("ensemble_average: no such snapshot");
  const auto n = static_cast<Eigen::Index>(first.snapshots[snapshot].state.dim());
  Matrix sum = Matrix::Zero(n, n);
  for (const auto& tr : ensemble.trajectories) {
    const Vector& v = tr.snapshots.at(snapshot).state.amplitudes();
    sum.noalias() += v * v.adjoint();
  }
  sum /= static_cast<double>(ensemble.trajectories.size());
  return MixedState(first.snapshots[snapshot].state.dims(), sum);
}

}  // namespace atomcav
