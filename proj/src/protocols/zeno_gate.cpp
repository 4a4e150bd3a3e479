#include "atomcav/protocols/zeno_gate.hpp"

#include "atomcav/errors.hpp"
#include "atomcav/parallel.hpp"
#include "atomcav/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

namespace atomcav {

namespace {

constexpr double kMargin = 5.0;

std::string num(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

struct RawOutcome {
  double fidelity = 0.0;
  double success = 0.0;
};

RawOutcome run_gate(const SystemParams& p, const PureState& input, const PhaseGate& gate, double max_dt) {
  const SystemModel model = build_zeno_system(p);
  const double dt = stable_step(model, max_dt);
  const TrajectorySimulator sim(model, dt, gate.gate_time);
  const PureState psi0 = with_cavity_vacuum(embed_qubits(input), p.n_max);
  const PureState out = sim.evolve_no_jump(psi0, 0.0, gate.gate_time);

  RawOutcome r;
  r.success = std::clamp(out.norm_squared(), 0.0, 1.0);
  if (r.success < 1e-14) throw NumericalFailure("zeno gate: no-jump state vanished");
  const std::size_t atoms[] = {0, 1};
  const MixedState reduced = partial_trace(out.normalized(), atoms);
  const PureState target = embed_qubits(apply(gate.unitary, input));
  r.fidelity = fidelity(reduced, target);
  return r;
}

}  // namespace

std::vector<std::string> zeno_regime_issues(const SystemParams& p) {
  const double om = std::abs(p.omega);
  const double dl = std::abs(p.delta);
  if (om >= dl) {
    throw RegimeError("zeno gate: needs |Delta| >> |Omega|, got Omega = " + num(p.omega) + ", Delta = " +
                      num(p.delta));
  }
  std::vector<std::string> issues;
  if (om * kMargin > dl) issues.push_back("|Omega| = " + num(om) + " is not << |Delta| = " + num(dl));
  if (p.gamma * kMargin > dl) issues.push_back("Gamma = " + num(p.gamma) + " is not << |Delta| = " + num(dl));
  if (!(p.kappa > dl)) issues.push_back("kappa = " + num(p.kappa) + " is not above |Delta| = " + num(dl));
  if (!(p.g * p.g / p.kappa > dl)) issues.push_back("g^2/kappa = " + num(p.g * p.g / p.kappa) + " is not above |Delta|");
  return issues;
}

GateOutcome zeno_gate_experiment(const SystemParams& p, const PureState& input, const ZenoGateOptions& options) {
  p.validate();
  if (input.dims() != Dims{2, 2}) throw DimensionError("zeno_gate_experiment: input must live on [2, 2]");
  if (!input.is_normalized(1e-8)) throw std::invalid_argument("zeno_gate_experiment: input is not normalized");
  const auto issues = zeno_regime_issues(p);
  if (options.warn_regime) {
    for (const auto& s : issues) warn("zeno regime: " + s);
  }
  const PhaseGate gate = ideal_phase_gate(p.omega, p.delta);
  const RawOutcome r = run_gate(p, input, gate, options.max_dt);

  GateOutcome out;
  out.conditional_fidelity = r.fidelity;
  out.success_prob = r.success;
  out.params_used = p;
  out.gate_time = gate.gate_time;
  if (options.check_truncation) {
    SystemParams q = p;
    q.n_max = p.n_max + 1;
    const RawOutcome r2 = run_gate(q, input, gate, options.max_dt);
    const double shift = std::max(std::abs(r2.fidelity - r.fidelity) / std::max(r.fidelity, 1e-300),
                                  std::abs(r2.success - r.success) / std::max(r.success, 1e-300));
    out.truncation_shift = shift;
    if (shift > 0.01) warn("zeno gate: cavity truncation n_max = " + std::to_string(p.n_max) +
                           " changes results by " + num(100 * shift) + "%");
  }
  return out;
}

std::vector<GateInput> default_gate_inputs() {
  const PureState s01 = PureState::basis({2, 2}, {0, 1});
  const PureState bell =
      (1.0 / std::sqrt(2.0)) * (PureState::basis({2, 2}, {0, 0}) + PureState::basis({2, 2}, {1, 1}));
  return {{"01", s01}, {"bell", bell}};
}

SweepResult sweep_gate(const SystemParams& p_base, const std::vector<double>& omega_grid,
                       const std::vector<double>& delta_grid, const std::vector<GateInput>& inputs,
                       const ZenoGateOptions& options, unsigned threads) {
  if (omega_grid.empty() || delta_grid.empty() || inputs.empty()) {
    throw std::invalid_argument("sweep_gate: grids and inputs must be non-empty");
  }
  struct Point {
    double omega;
    double delta;
    bool valid;
  };
  std::vector<Point> points;
  std::set<std::string> issues;
  SweepResult result;
  for (double om : omega_grid) {
    for (double dl : delta_grid) {
      SystemParams p = p_base;
      p.omega = om;
      p.delta = dl;
      try {
        for (auto& s : zeno_regime_issues(p)) issues.insert(s.substr(0, s.find(" = ")) + " not satisfied");
        points.push_back({om, dl, true});
      } catch (const RegimeError&) {
        points.push_back({om, dl, false});
        ++result.skipped;
      }
    }
  }
  if (options.warn_regime) {
    for (const auto& s : issues) warn("zeno sweep regime: " + s + " at some grid points");
    if (result.skipped > 0) {
      warn("zeno sweep: skipped " + std::to_string(result.skipped) + " grid points with |Omega| >= |Delta|");
    }
  }

  ZenoGateOptions inner = options;
  inner.warn_regime = false;
  std::vector<std::vector<GateOutcome>> outcomes(points.size());
  parallel_for(points.size(), threads, [&](std::size_t i) {
    if (!points[i].valid) return;
    SystemParams p = p_base;
    p.omega = points[i].omega;
    p.delta = points[i].delta;
    for (const auto& in : inputs) outcomes[i].push_back(zeno_gate_experiment(p, in.state, inner));
  });

  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!points[i].valid) continue;
    double score = 1.0;
    for (std::size_t k = 0; k < inputs.size(); ++k) {
      const auto& o = outcomes[i][k];
      result.rows.push_back({points[i].omega, points[i].delta, inputs[k].label, o});
      score = std::min(score, o.conditional_fidelity * o.success_prob);
    }
    if (!result.best || score > result.best->score) result.best = SweepBest{points[i].omega, points[i].delta, score};
  }
  return result;
}

}  // namespace atomcav
