#pragma once

// Cavity-design formulas and the system models for the three protocols.
//
// Dynamics use hbar = 1 with rates and frequencies in units of g. The cavity
// formulas (coupling_g, kappa_from_*) work in SI units.

#include "atomcav/linalg.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace atomcav {

namespace si {
inline constexpr double kSpeedOfLight = 299792458.0;       // m/s
inline constexpr double kHbar = 1.054571817e-34;           // J s
inline constexpr double kEpsilon0 = 8.8541878128e-12;      // F/m
}  // namespace si

struct CavityGeometry {
  std::optional<double> length;        // m
  std::optional<double> reflectivity;  // mirror intensity reflectivity
  std::optional<double> finesse;
  std::optional<double> wavelength;    // m
  std::optional<double> mode_volume;   // m^3
  std::optional<double> dipole;        // C m
  std::optional<double> frequency;     // rad/s; derived from wavelength when absent

  /// Positive fields; finesse and reflectivity consistent to 1% when R > 0.99.
  void validate() const;
};

/// g = sqrt(|mu|^2 omega / (2 hbar eps0 V)) in rad/s.
double coupling_g(const CavityGeometry& geom);
/// pi c / (2 l F) in rad/s.
double kappa_from_finesse(double length, double finesse);
/// pi / (1 - R); throws RangeError unless 0.99 <= R < 1.
double finesse_from_reflectivity(double reflectivity);
/// pi c / (Q lambda) in rad/s.
double kappa_from_q(double q, double wavelength);
/// Q = 2 l F / lambda, the quality factor for which both kappa formulas agree.
double quality_factor(double length, double finesse, double wavelength);
/// C = g^2 / (kappa Gamma).
double cooperativity(double g, double kappa, double gamma);
/// M = S^2 / (eta C^3), scattering events during single-atom detection.
/// Warns when C < 10 (formula assumes C >> 1).
double scattering_count(double signal_to_noise, double eta, double c);

struct SystemParams {
  double g = 1.0;
  double kappa = 0.05;
  double gamma = 0.08;
  double omega = 0.1;    // Zeno drive / photon-source peak Rabi frequency
  double delta = 1.25;
  double omega_m = 0.0;  // 0-1 drive (telegraph)
  double omega_l = 0.0;  // 0-e drive (telegraph)
  double eta = 1.0;
  std::size_t n_max = 2;
  /// Fraction of spontaneous decay from the excited level into the lower
  /// ground state (|0>, or |g> for the photon source); the rest goes to the
  /// other ground state.
  double branching = 0.5;

  void validate() const;

  static SystemParams zeno_defaults();
  static SystemParams telegraph_defaults();
  static SystemParams photon_source_defaults();
};

enum class Detectability { cavity_output, free_space };

const char* to_string(Detectability d);

struct JumpChannel {
  Operator op;
  std::string label;
  Detectability detectability = Detectability::free_space;
};

/// envelope(t) * op added to the static Hamiltonian. `peak` bounds |envelope|.
struct DriveTerm {
  std::function<double(double)> envelope;
  Operator op;
  double peak = 1.0;
};

struct SystemModel {
  Dims dims;
  std::vector<std::vector<std::string>> basis_labels;
  Operator h_static;
  std::vector<DriveTerm> drives;
  std::vector<JumpChannel> channels;
  SystemParams params;
  std::string frame;

  bool time_independent() const { return drives.empty(); }
  Operator hamiltonian(double t) const;
  /// H(t) - (i/2) sum_k L_k^dag L_k.
  Operator effective_hamiltonian(double t) const;
  /// Upper bound on ||H_nh(t)|| over all t.
  double generator_norm_bound() const;
  /// -(i/2) sum_k L_k^dag L_k.
  Matrix decay_term() const;
};

/// Two-atom states |ij> on a [3, 3] atom space and their cavity-vacuum embedding.
PureState two_atom_state(std::size_t level1, std::size_t level2);
/// (|12> - |21>)/sqrt2 on [3, 3].
PureState dark_state_a12();
/// (|01> - |10>)/sqrt2 on [3, 3].
PureState singlet_a01();
/// Qubit state on [2, 2] lifted to levels {0, 1} of two three-level atoms.
PureState embed_qubits(const PureState& qubits);
/// psi ⊗ |n = 0> for a cavity truncated at n_max.
PureState with_cavity_vacuum(const PureState& atoms, std::size_t n_max);
/// I/4 over the qubit levels {0, 1} of both atoms, cavity in vacuum.
MixedState qubit_mixture_with_vacuum(std::size_t n_max);

/// Two three-level atoms (0, 1, 2) and one cavity mode, in the frame rotating
/// with the drive on 1-2. The cavity mode is Raman resonant with the drive,
/// so only the excited level carries a static shift Delta:
///   H = (Omega/2)(|1><2|_1 - |1><2|_2 + h.c.) + Delta sum_i |2><2|_i
///       + g sum_i (a^dag |1><2|_i + h.c.)
/// Jumps: sqrt(kappa) a (cavity output) and sqrt(Gamma b) |0><2|_i,
/// sqrt(Gamma (1-b)) |1><2|_i (free space).
SystemModel build_zeno_system(const SystemParams& p);

/// Projector onto span{|00>, |01>, |10>, |11>, |a12>} on [3, 3].
Operator dark_projector();

/// Atom-only part of the Zeno Hamiltonian on [3, 3].
Operator zeno_interaction(const SystemParams& p);

/// The dark-subspace Hamiltonian on [3, 3]:
///   c (|11><a12| + h.c.) + Delta |a12><a12|,  c = <11|H_int|a12> = -sqrt2 Omega/2,
/// identical to P_DS H_int P_DS.
Operator effective_zeno_hamiltonian(const SystemParams& p);

struct PhaseGate {
  Operator unitary;  // on [2, 2]
  double gate_time = 0.0;
  double delta_eff = 0.0;
};

/// Delta_eff = -Omega^2/(2 Delta), T = pi/|Delta_eff| and
/// U = diag(1, 1, 1, exp(-i Delta_eff T)) = diag(1, 1, 1, -1).
PhaseGate ideal_phase_gate(double omega, double delta);

/// Two atoms with levels (0, 1, e) and one cavity mode. Frame: the 0-e laser
/// and the cavity are Raman resonant, e sits at +Delta, 0 and 1 are degenerate:
///   H = sum_i [Delta |e><e| + (Omega_L/2)(|e><0| + h.c.)
///              + (Omega_M/2)(|1><0| + h.c.) + g (a^dag |1><e| + h.c.)]
/// Jumps: sqrt(kappa) a and sqrt(Gamma b)|0><e|_i, sqrt(Gamma (1-b))|1><e|_i.
/// Warns when |Omega_M| < g, kappa, Gamma, |Omega_L| << Delta is violated
/// (<< meaning a factor 5).
SystemModel build_telegraph_system(const SystemParams& p);

struct TelegraphTimescales {
  double t_cav = 0.0;
  double t_dark = 0.0;
  double t_light = 0.0;
  /// Omega_L^2 / (4 Delta Omega_M); the formulas assume this is << 1.
  double validity_ratio = 0.0;
};

TelegraphTimescales telegraph_timescales(const SystemParams& p);

struct RampSpec {
  enum class Shape { linear, sin2 };
  Shape shape = Shape::sin2;
  double duration = 50.0;
  double omega_max = 2.0;

  /// Rabi frequency at time t; holds omega_max after the ramp.
  double rabi(double t) const;
};

/// One atom (g, u, e) and one cavity mode, resonant frame with e at +Delta:
///   H(t) = Delta |e><e| + (Omega(t)/2)(|e><g| + h.c.) + g (a^dag |u><e| + h.c.)
/// Jumps: sqrt(kappa) a, sqrt(Gamma b)|g><e|, sqrt(Gamma (1-b))|u><e|.
SystemModel build_photon_source(const SystemParams& p, const RampSpec& pulse);

}  // namespace atomcav
