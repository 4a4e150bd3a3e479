#pragma once

#include "atomcav/models.hpp"

#include <optional>
#include <string>
#include <vector>

namespace atomcav {

struct GateOutcome {
  double conditional_fidelity = 0.0;
  double success_prob = 0.0;
  SystemParams params_used;
  double gate_time = 0.0;
  /// Largest change of fidelity or success probability when the cavity
  /// truncation is raised by one; set only when the check was requested.
  std::optional<double> truncation_shift;
};

struct ZenoGateOptions {
  double max_dt = 0.05;
  bool check_truncation = false;
  bool warn_regime = true;
};

/// Departures from g^2/kappa, kappa > |Delta| >> |Omega|, Gamma ("<<" meaning a
/// factor 5). Throws RegimeError when |Omega| >= |Delta|.
std::vector<std::string> zeno_regime_issues(const SystemParams& p);

/// Evolves the no-jump dynamics of the full model for T = pi/|Delta_eff|
/// from input ⊗ vacuum. success_prob is the no-jump norm^2; the fidelity is
/// taken between the renormalized atomic state and the ideal gate output.
GateOutcome zeno_gate_experiment(const SystemParams& p, const PureState& input, const ZenoGateOptions& options = {});

struct GateInput {
  std::string label;
  PureState state;  // on [2, 2]
};

/// |01> and (|00> + |11>)/sqrt2, labelled "01" and "bell".
std::vector<GateInput> default_gate_inputs();

struct SweepRow {
  double omega = 0.0;
  double delta = 0.0;
  std::string input_label;
  GateOutcome outcome;
};

struct SweepBest {
  double omega = 0.0;
  double delta = 0.0;
  /// Minimum over inputs of conditional_fidelity * success_prob.
  double score = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;  // omega-major, then delta, then input order
  std::optional<SweepBest> best;
  std::size_t skipped = 0;     // grid points with |Omega| >= |Delta|
};

/// Runs every (omega, delta, input) combination; points outside the Zeno
/// regime are skipped and counted.
SweepResult sweep_gate(const SystemParams& p_base, const std::vector<double>& omega_grid,
                       const std::vector<double>& delta_grid, const std::vector<GateInput>& inputs,
                       const ZenoGateOptions& options = {}, unsigned threads = 0);

}  // namespace atomcav
