#include "atomcav/protocols/rus.hpp"

#include "atomcav/errors.hpp"
#include "atomcav/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace atomcav {

namespace {

constexpr double kSupport = 1e-12;
constexpr double kClassTol = 1e-9;

Vector vec4(cplx a, cplx b, cplx c, cplx d) {
  Vector v(4);
  v << a, b, c, d;
  return v;
}

// Coefficients c_ij of a joint state of the encoded shape sum c_ij |ij, ij>.
Vector encoded_amplitudes(const PureState& joint) {
  if (joint.dims() != Dims{2, 2, 2, 2}) throw DimensionError("rus: joint state must live on [2, 2, 2, 2]");
  Vector c(4);
  double off = 0.0;
  for (std::size_t atoms = 0; atoms < 4; ++atoms) {
    for (std::size_t photons = 0; photons < 4; ++photons) {
      const cplx v = joint[atoms * 4 + photons];
      if (atoms == photons) c(static_cast<Eigen::Index>(atoms)) = v;
      else off += std::norm(v);
    }
  }
  if (off > 1e-20) throw std::invalid_argument("rus: joint state is not of the encoded form");
  return c;
}

double concurrence(const Vector& b) { return 2.0 * std::abs(b(0) * b(3) - b(1) * b(2)); }

LocalCorrection correction_for(const Vector& map) {
  // Phases of the induced map relative to the first supported entry.
  std::size_t ref = 0;
  while (ref < 4 && std::abs(map(static_cast<Eigen::Index>(ref))) <= kSupport) ++ref;
  LocalCorrection c;
  if (ref == 4) return c;
  const double base = std::arg(map(static_cast<Eigen::Index>(ref)));
  auto phase = [&](Eigen::Index i) -> std::optional<double> {
    if (std::abs(map(i)) <= kSupport) return std::nullopt;
    return std::arg(map(i)) - base;
  };
  c.global = -base;
  const auto p01 = phase(1);
  const auto p10 = phase(2);
  const auto p11 = phase(3);
  if (p01) c.b = -*p01;
  if (p10) c.a = -*p10;
  if (!p01 && !p10 && p11) c.a = -*p11;
  return c;
}

}  // namespace

const char* to_string(RusClass c) {
  switch (c) {
    case RusClass::entangling: return "entangling";
    case RusClass::local: return "local";
    case RusClass::failure: return "failure";
  }
  return "failure";
}

PhotonBasis default_photon_basis() {
  const double s = 1.0 / std::sqrt(2.0);
  return {vec4(s, 0, 0, s), vec4(s, 0, 0, -s), vec4(0, 1, 0, 0), vec4(0, 0, 1, 0)};
}

PhotonBasis equal_superposition_basis() {
  return {vec4(0.5, 0.5, 0.5, -0.5), vec4(0.5, -0.5, -0.5, -0.5), vec4(0.5, 0.5, -0.5, 0.5),
          vec4(0.5, -0.5, 0.5, 0.5)};
}

void validate_photon_basis(const PhotonBasis& basis) {
  for (std::size_t i = 0; i < 4; ++i) {
    if (basis[i].size() != 4) throw DimensionError("photon basis: states must have four amplitudes");
    for (std::size_t j = 0; j < 4; ++j) {
      const cplx ip = basis[i].dot(basis[j]);
      if (std::abs(ip - (i == j ? 1.0 : 0.0)) > 1e-10) throw std::invalid_argument("photon basis is not orthonormal");
    }
  }
}

PureState rus_encode(const PureState& atoms) {
  if (!atoms.is_normalized(1e-8)) throw std::invalid_argument("rus_encode: input is not normalized");
  if (atoms.dims() == Dims{2}) {
    Vector v = Vector::Zero(4);
    v(0) = atoms[0];  // |0, E>
    v(3) = atoms[1];  // |1, L>
    return PureState({2, 2}, v);
  }
  if (atoms.dims() != Dims{2, 2}) throw DimensionError("rus_encode: expected one or two qubits");
  Vector v = Vector::Zero(16);
  for (std::size_t k = 0; k < 4; ++k) v(static_cast<Eigen::Index>(k * 4 + k)) = atoms[k];
  return PureState({2, 2, 2, 2}, v);
}

PureState LocalCorrection::apply(const PureState& atoms) const {
  if (atoms.dims() != Dims{2, 2}) throw DimensionError("LocalCorrection: expected two qubits");
  const Vector phases = vec4(1.0, std::polar(1.0, b), std::polar(1.0, a), std::polar(1.0, a + b));
  return PureState({2, 2}, std::polar(1.0, global) * atoms.amplitudes().cwiseProduct(phases));
}

std::array<double, 4> rus_outcome_probabilities(const PureState& joint, const PhotonBasis& basis) {
  validate_photon_basis(basis);
  const Vector c = encoded_amplitudes(joint);
  std::array<double, 4> w{};
  for (std::size_t k = 0; k < 4; ++k) w[k] = basis[k].conjugate().cwiseProduct(c).squaredNorm();
  return w;
}

RusAttempt rus_measure(const PureState& joint, const PhotonBasis& basis, double loss_prob, double dark_count_prob,
                       std::uint64_t seed) {
  if (!(loss_prob >= 0.0 && loss_prob <= 1.0)) throw RangeError("rus_measure: loss_prob must lie in [0, 1]");
  if (!(dark_count_prob >= 0.0 && dark_count_prob <= 1.0)) {
    throw RangeError("rus_measure: dark_count_prob must lie in [0, 1]");
  }
  const std::array<double, 4> weights = rus_outcome_probabilities(joint, basis);
  const Vector c = encoded_amplitudes(joint);
  Rng rng(seed);
  RusAttempt att;
  att.photons_lost = static_cast<int>(rng.bernoulli(loss_prob)) + static_cast<int>(rng.bernoulli(loss_prob));

  if (att.photons_lost > 0) {
    // The lost time bin leaves the atoms dephased in the computational basis.
    const double r = rng.uniform() * c.squaredNorm();
    std::size_t k = 0;
    double acc = 0.0;
    for (std::size_t j = 0; j < 4; ++j) {
      const double w = std::norm(c(static_cast<Eigen::Index>(j)));
      if (w == 0.0) continue;
      k = j;
      acc += w;
      if (r < acc) break;
    }
    att.post_state = PureState::basis({2, 2}, {k / 2, k % 2});
    att.outcome_class = RusClass::failure;
    att.false_herald = rng.bernoulli(dark_count_prob);
    att.herald = att.false_herald;
    return att;
  }

  double r = rng.uniform();
  std::size_t k = 0;
  double acc = 0.0;
  for (std::size_t j = 0; j < 4; ++j) {
    if (weights[j] == 0.0) continue;
    k = j;
    acc += weights[j];
    if (r < acc) break;
  }
  att.outcome_index = k;
  att.herald = true;
  att.induced_map = basis[k].conjugate();
  const Vector phi = att.induced_map.cwiseProduct(c);
  const double n2 = phi.squaredNorm();
  if (!(n2 > 0.0)) throw NumericalFailure("rus_measure: sampled an outcome with zero weight");
  att.post_state = PureState({2, 2}, phi / std::sqrt(n2));

  const double mod0 = std::abs(att.induced_map(0));
  att.trace_preserving = true;
  for (Eigen::Index i = 1; i < 4; ++i)
    if (std::abs(std::abs(att.induced_map(i)) - mod0) > kClassTol) att.trace_preserving = false;

  const double conc = concurrence(basis[k]);
  if (std::abs(conc - 1.0) < kClassTol) att.outcome_class = RusClass::entangling;
  else if (conc < kClassTol) att.outcome_class = RusClass::local;
  else att.outcome_class = RusClass::failure;
  att.correction = correction_for(att.induced_map);
  return att;
}

RusGateResult rus_gate(const PureState& atoms, double loss_prob, std::size_t max_attempts, std::uint64_t seed,
                       const PhotonBasis& basis, double dark_count_prob) {
  if (max_attempts < 1) throw std::invalid_argument("rus_gate: max_attempts must be >= 1");
  if (atoms.dims() != Dims{2, 2}) throw DimensionError("rus_gate: expected two qubits");
  validate_photon_basis(basis);
  RusGateResult res;
  PureState state = atoms;
  for (std::size_t attempt = 0; attempt < max_attempts; ++attempt) {
    const RusAttempt att = rus_measure(rus_encode(state), basis, loss_prob, dark_count_prob,
                                       splitmix64(seed + 0x9e3779b97f4a7c15ULL * (attempt + 1)));
    res.attempts_used = attempt + 1;
    res.class_history.push_back(att.outcome_class);
    if (att.outcome_class == RusClass::failure) {
      res.final_state = att.post_state;
      return res;
    }
    state = att.correction.apply(att.post_state);
    if (att.outcome_class == RusClass::entangling) {
      res.success = true;
      res.final_state = state;
      return res;
    }
  }
  res.final_state = state;
  return res;
}

}  // namespace atomcav
