#pragma once

// Photon-pair repeat-until-success gate at the level of state maps. Photonic
// time bins use E = 0 and L = 1; joint states are ordered atom 1, atom 2,
// photon 1, photon 2.

#include "atomcav/linalg.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

namespace atomcav {

enum class RusClass { entangling, local, failure };

const char* to_string(RusClass c);

/// Four photon-pair states, each given by its amplitudes on |EE>, |EL>, |LE>, |LL>.
using PhotonBasis = std::array<Vector, 4>;

/// (|EE> + |LL>)/sqrt2, (|EE> - |LL>)/sqrt2, |EL>, |LE>.
PhotonBasis default_photon_basis();
/// Four orthonormal states with all amplitudes of modulus 1/2; every outcome
/// is a phase gate.
PhotonBasis equal_superposition_basis();
/// Throws std::invalid_argument unless the basis is orthonormal to 1e-10.
void validate_photon_basis(const PhotonBasis& basis);

/// a|0> + b|1> -> a|0, E> + b|1, L> for one qubit ([2] -> [2, 2]); a two-qubit
/// state on [2, 2] is encoded qubit by qubit into [2, 2, 2, 2].
PureState rus_encode(const PureState& atoms);

/// Phases applied after an outcome: exp(i global) diag(1, e^{ib}, e^{ia}, e^{i(a+b)})
/// with a acting on atom 1 and b on atom 2.
struct LocalCorrection {
  double a = 0.0;
  double b = 0.0;
  double global = 0.0;

  PureState apply(const PureState& atoms) const;
};

struct RusAttempt {
  std::optional<std::size_t> outcome_index;  // empty when a photon was lost
  RusClass outcome_class = RusClass::failure;
  PureState post_state;  // two atoms, normalized
  bool herald = false;
  bool false_herald = false;  // herald produced by a dark count after a loss
  int photons_lost = 0;
  /// Diagonal of the induced atomic map for the outcome.
  Vector induced_map;
  /// Whether the induced map is proportional to a unitary.
  bool trace_preserving = false;
  LocalCorrection correction;
};

/// Born weights of the four outcomes (before loss) for a joint state.
std::array<double, 4> rus_outcome_probabilities(const PureState& joint, const PhotonBasis& basis);

/// One photon-pair measurement. Each photon is lost with loss_prob; any loss
/// fails the attempt, leaves the atoms dephased (post_state is drawn from the
/// dephased state) and is reported as a herald with probability dark_count_prob.
/// Otherwise an outcome is drawn from the Born weights and classified from
/// the concurrence of its photon-pair state: 1 entangling, 0 local.
RusAttempt rus_measure(const PureState& joint, const PhotonBasis& basis, double loss_prob, double dark_count_prob,
                       std::uint64_t seed);

struct RusGateResult {
  PureState final_state;
  std::size_t attempts_used = 0;
  bool success = false;
  std::vector<RusClass> class_history;
};

/// Encode and measure until an entangling outcome (success) or a failure;
/// local outcomes are corrected and retried.
RusGateResult rus_gate(const PureState& atoms, double loss_prob, std::size_t max_attempts, std::uint64_t seed,
                       const PhotonBasis& basis = default_photon_basis(), double dark_count_prob = 0.0);

}  // namespace atomcav
