#pragma once

// Quantum-jump unraveling of a SystemModel, detector thinning, and the
// direct Lindblad integrator used as its oracle.

#include "atomcav/linalg.hpp"
#include "atomcav/models.hpp"
#include "atomcav/propagator.hpp"

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

namespace atomcav {

struct PhotonRecord {
  double time = 0.0;
  std::size_t channel = 0;  // index into SystemModel::channels
  Detectability detectability = Detectability::free_space;
  bool detected = false;
};

struct Snapshot {
  double time = 0.0;
  PureState state;  // normalized
};

struct TrajectoryResult {
  std::vector<PhotonRecord> records;
  PureState final_state;
  std::vector<Snapshot> snapshots;
  std::uint64_t seed = 0;
};

struct TrajectoryOptions {
  /// Times in [0, t_end] at which the normalized state is stored.
  std::vector<double> snapshot_times;
};

/// Initial condition of an ensemble: a pure state, or a density matrix whose
/// eigenvectors are sampled per trajectory with their eigenvalue weights.
using InitialState = std::variant<PureState, MixedState>;

struct Ensemble {
  std::vector<TrajectoryResult> trajectories;
  SystemParams params;
  std::uint64_t master_seed = 0;
};

/// Per-trajectory seed: a splitmix64 hash of (master_seed, index).
std::uint64_t trajectory_seed(std::uint64_t master_seed, std::uint64_t index);

/// Conditional no-jump evolution of one model at a fixed RK4 step. Immutable
/// after construction and safe to share between threads.
class TrajectorySimulator {
 public:
  /// dt must satisfy generator_norm_bound() * dt <= kRk4StepBound; horizon is
  /// the longest time any single evolution will need (time-independent models
  /// precompute propagator powers up to it).
  TrajectorySimulator(const SystemModel& model, double dt, double horizon);

  const SystemModel& model() const { return *model_; }
  double dt() const { return dt_; }

  TrajectoryResult run(const PureState& psi0, double t_end, std::uint64_t seed,
                       const TrajectoryOptions& options = {}) const;

  /// Unnormalized no-jump state exp(-i H_nh t) psi after `duration`, starting at t0.
  PureState evolve_no_jump(const PureState& psi, double t0, double duration) const;

 private:
  struct Crossing {
    bool jumped = false;
    double time = 0.0;
  };

  // Advances x from t to t_stop unless ||x||^2 falls to `threshold`; on a
  // crossing x holds the state at the located jump time.
  Crossing advance(Vector& x, double t, double t_stop, double threshold) const;
  void step(Vector& x, double t, double h) const;
  void bisect(Vector& x, double t, double h, double threshold, Crossing& out) const;

  std::shared_ptr<const SystemModel> model_;
  double dt_ = 0.0;
  Matrix static_generator_;                  // -i H_nh when time independent
  std::vector<Matrix> drive_generators_;     // -i H_k for each drive
  std::optional<PowerPropagator> powers_;
};

/// Largest dt (<= max_dt) meeting the RK4 step bound for this model.
double stable_step(const SystemModel& model, double max_dt);

TrajectoryResult run_trajectory(const SystemModel& model, const PureState& psi0, double t_end, double dt,
                                std::uint64_t seed, const TrajectoryOptions& options = {});

/// Runs n_traj trajectories with seeds trajectory_seed(master_seed, i) on up
/// to `threads` workers (0 = hardware concurrency). Results are ordered by index.
Ensemble run_ensemble(const SystemModel& model, const InitialState& psi0, std::size_t n_traj, double t_end,
                      double dt, std::uint64_t master_seed, const TrajectoryOptions& options = {},
                      unsigned threads = 0);

/// Pure initial state for trajectory `seed`; draws from the trajectory's own stream.
PureState sample_initial_state(const InitialState& psi0, std::uint64_t seed);

/// Keeps each cavity-output record as detected with probability eta;
/// free-space records are never detected.
std::vector<PhotonRecord> thin_records(const std::vector<PhotonRecord>& records, double eta, std::uint64_t seed);

/// (1/N) sum |psi_i><psi_i| over the snapshot at position `snapshot` of every trajectory.
MixedState ensemble_average(const Ensemble& ensemble, std::size_t snapshot);

struct MasterEquationOptions {
  /// Output times; empty means every step.
  std::vector<double> output_times;
};

/// Integrates d rho/dt = -i[H, rho] + sum_k (L rho L^dag - {L^dag L, rho}/2)
/// with fixed RK4 steps (dt is reduced to meet the step bound).
std::vector<std::pair<double, MixedState>> master_equation_solve(const SystemModel& model, const MixedState& rho0,
                                                                 double t_end, double dt,
                                                                 const MasterEquationOptions& options = {});

struct NoClickPoint {
  double window = 0.0;
  double eta = 0.0;
  std::optional<double> fidelity;  // empty when no trajectory was selected
  std::size_t n_selected = 0;
};

struct NoClickOptions {
  /// Common observation time; windows end here.
  double t_obs = 0.0;
  double dt = 0.0;
  /// Subsystems the target lives on; empty means all.
  std::vector<std::size_t> keep;
  unsigned threads = 0;
};

/// Fidelity against `target` of the ensemble state conditioned on no detected
/// click in [t_obs - t, t_obs], for every (eta, t) pair. Each trajectory is
/// thinned independently per eta.
std::vector<NoClickPoint> conditional_no_click_fidelity(const SystemModel& model, const InitialState& psi0,
                                                        const std::vector<double>& etas,
                                                        const std::vector<double>& t_grid, std::size_t n_traj,
                                                        std::uint64_t master_seed, const PureState& target,
                                                        const NoClickOptions& options);

}  // namespace atomcav
