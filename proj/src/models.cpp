#include "atomcav/models.hpp"

#include "atomcav/errors.hpp"
#include "atomcav/propagator.hpp"

#include <cmath>
#include <limits>
#include <utility>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace atomcav {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kRegimeMargin = 5.0;

double require(const std::optional<double>& v, const char* name) {
  if (!v) throw std::invalid_argument(std::string("CavityGeometry: missing ") + name);
  if (!(*v > 0.0)) throw std::invalid_argument(std::string("CavityGeometry: ") + name + " must be positive");
  return *v;
}

Operator sigma(std::size_t d, std::size_t i, std::size_t j) { return Operator::transition(d, i, j); }

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

// ------------------------------------------------------------ formulas

void CavityGeometry::validate() const {
  auto positive = [](const std::optional<double>& v, const char* name) {
    if (v && !(*v > 0.0)) throw std::invalid_argument(std::string("CavityGeometry: ") + name + " must be positive");
  };
  positive(length, "length");
  positive(reflectivity, "reflectivity");
  positive(finesse, "finesse");
  positive(wavelength, "wavelength");
  positive(mode_volume, "mode_volume");
  positive(dipole, "dipole");
  positive(frequency, "frequency");
  if (reflectivity && *reflectivity >= 1.0) throw std::invalid_argument("CavityGeometry: reflectivity must be < 1");
  if (reflectivity && finesse && *reflectivity > 0.99) {
    const double approx = kPi / (1.0 - *reflectivity);
    if (std::abs(*finesse - approx) / *finesse >= 0.01) {
      throw std::invalid_argument("CavityGeometry: finesse " + fmt(*finesse) + " inconsistent with reflectivity " +
                                  fmt(*reflectivity));
    }
  }
}

double coupling_g(const CavityGeometry& geom) {
  geom.validate();
  const double mu = require(geom.dipole, "dipole");
  const double v = require(geom.mode_volume, "mode_volume");
  double omega = 0.0;
  if (geom.frequency) {
    omega = *geom.frequency;
  } else {
    omega = 2.0 * kPi * si::kSpeedOfLight / require(geom.wavelength, "wavelength or frequency");
  }
  return std::sqrt(mu * mu * omega / (2.0 * si::kHbar * si::kEpsilon0 * v));
}

double kappa_from_finesse(double length, double finesse) {
  if (!(length > 0.0) || !(finesse > 0.0)) throw std::invalid_argument("kappa_from_finesse: arguments must be positive");
  return kPi * si::kSpeedOfLight / (2.0 * length * finesse);
}

double finesse_from_reflectivity(double reflectivity) {
  if (!(reflectivity >= 0.99 && reflectivity < 1.0)) {
    throw RangeError("finesse_from_reflectivity: F ~ pi/(1-R) needs 0.99 <= R < 1, got R = " + fmt(reflectivity));
  }
  return kPi / (1.0 - reflectivity);
}

double kappa_from_q(double q, double wavelength) {
  if (!(q > 0.0) || !(wavelength > 0.0)) throw std::invalid_argument("kappa_from_q: arguments must be positive");
  return kPi * si::kSpeedOfLight / (q * wavelength);
}

double quality_factor(double length, double finesse, double wavelength) {
  if (!(length > 0.0) || !(finesse > 0.0) || !(wavelength > 0.0)) {
    throw std::invalid_argument("quality_factor: arguments must be positive");
  }
  return 2.0 * length * finesse / wavelength;
}

double cooperativity(double g, double kappa, double gamma) {
  if (!(g > 0.0) || !(kappa > 0.0) || !(gamma > 0.0)) throw std::invalid_argument("cooperativity: rates must be positive");
  return g * g / (kappa * gamma);
}

double scattering_count(double signal_to_noise, double eta, double c) {
  if (!(eta > 0.0) || eta > 1.0) throw std::invalid_argument("scattering_count: eta must lie in (0, 1]");
  if (!(signal_to_noise > 0.0) || !(c > 0.0)) throw std::invalid_argument("scattering_count: S and C must be positive");
  if (c < 10.0) warn("scattering_count: C = " + fmt(c) + " < 10, formula assumes C >> 1");
  return signal_to_noise * signal_to_noise / (eta * c * c * c);
}

// -------------------------------------------------------------- params

void SystemParams::validate() const {
  if (!(g > 0.0) || !(kappa > 0.0) || !(gamma > 0.0)) {
    throw std::invalid_argument("SystemParams: g, kappa, gamma must be positive");
  }
  if (!(eta >= 0.0 && eta <= 1.0)) throw std::invalid_argument("SystemParams: eta must lie in [0, 1]");
  if (n_max < 1) throw std::invalid_argument("SystemParams: n_max must be >= 1");
  if (!(branching >= 0.0 && branching <= 1.0)) throw std::invalid_argument("SystemParams: branching must lie in [0, 1]");
  for (double v : {omega, delta, omega_m, omega_l}) {
    if (!std::isfinite(v)) throw std::invalid_argument("SystemParams: non-finite drive parameter");
  }
}

SystemParams SystemParams::zeno_defaults() {
  SystemParams p;
  p.g = 1.0;
  p.kappa = 0.05;
  p.gamma = 0.08;
  p.omega = 0.1;
  p.delta = 1.25;
  return p;
}

SystemParams SystemParams::telegraph_defaults() {
  SystemParams p;
  p.g = 1.0;
  p.kappa = 1.0;
  p.gamma = 0.025;
  p.omega = 0.0;
  p.delta = 20.0;
  p.omega_l = 0.4;
  p.omega_m = 0.02;
  return p;
}

SystemParams SystemParams::photon_source_defaults() {
  SystemParams p;
  p.g = 1.0;
  p.kappa = 0.05;
  p.gamma = 0.08;
  p.omega = 2.0;
  p.delta = 0.0;
  return p;
}

const char* to_string(Detectability d) {
  return d == Detectability::cavity_output ? "cavity-output" : "free-space";
}

// --------------------------------------------------------------- model

Operator SystemModel::hamiltonian(double t) const {
  Matrix h = h_static.matrix();
  for (const auto& d : drives) h += d.envelope(t) * d.op.matrix();
  return Operator(dims, std::move(h));
}

Matrix SystemModel::decay_term() const {
  const auto n = static_cast<Eigen::Index>(total_dim(dims));
  Matrix sum = Matrix::Zero(n, n);
  for (const auto& c : channels) sum += c.op.matrix().adjoint() * c.op.matrix();
  return -0.5 * kI * sum;
}

Operator SystemModel::effective_hamiltonian(double t) const {
  return Operator(dims, hamiltonian(t).matrix() + decay_term());
}

double SystemModel::generator_norm_bound() const {
  double n = norm_bound(h_static.matrix() + decay_term());
  for (const auto& d : drives) n += std::abs(d.peak) * norm_bound(d.op.matrix());
  return n;
}

// ------------------------------------------------------------- states

PureState two_atom_state(std::size_t level1, std::size_t level2) { return PureState::basis({3, 3}, {level1, level2}); }

PureState dark_state_a12() {
  return (1.0 / std::sqrt(2.0)) * (two_atom_state(1, 2) - two_atom_state(2, 1));
}

PureState singlet_a01() {
  return (1.0 / std::sqrt(2.0)) * (two_atom_state(0, 1) - two_atom_state(1, 0));
}

PureState embed_qubits(const PureState& qubits) {
  if (qubits.dims() != Dims{2, 2}) throw DimensionError("embed_qubits: expected dims [2,2]");
  Vector v = Vector::Zero(9);
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t j = 0; j < 2; ++j) v(static_cast<Eigen::Index>(3 * i + j)) = qubits[2 * i + j];
  }
  return PureState({3, 3}, std::move(v));
}

PureState with_cavity_vacuum(const PureState& atoms, std::size_t n_max) {
  return kron(atoms, PureState::basis({n_max + 1}, {0}));
}

MixedState qubit_mixture_with_vacuum(std::size_t n_max) {
  const Dims dims{3, 3, n_max + 1};
  const auto d = static_cast<Eigen::Index>(total_dim(dims));
  Matrix rho = Matrix::Zero(d, d);
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t j = 0; j < 2; ++j) {
      const auto k = static_cast<Eigen::Index>(flat_index(dims, {i, j, 0}));
      rho(k, k) = 0.25;
    }
  }
  return MixedState(dims, rho);
}

// ---------------------------------------------------------------- Zeno

Operator zeno_interaction(const SystemParams& p) {
  const Dims atoms{3, 3};
  const Operator lower12 = sigma(3, 1, 2);
  const Operator drive = embed(atoms, 0, lower12) - embed(atoms, 1, lower12);
  const Operator excited = embed(atoms, 0, sigma(3, 2, 2)) + embed(atoms, 1, sigma(3, 2, 2));
  return cplx(0.5 * p.omega) * (drive + drive.adjoint()) + cplx(p.delta) * excited;
}

SystemModel build_zeno_system(const SystemParams& p) {
  p.validate();
  const std::size_t nc = p.n_max + 1;
  const Dims dims{3, 3, nc};
  const Operator a = embed(dims, 2, Operator::annihilation(p.n_max));
  const Operator id_c = Operator::identity({nc});

  const Operator h_atoms = kron(zeno_interaction(p), id_c);
  Operator h_cav = Operator::zero(dims);
  for (std::size_t i = 0; i < 2; ++i) {
    const Operator lower = embed(dims, i, sigma(3, 1, 2));
    h_cav = h_cav + a.adjoint() * lower;
  }
  h_cav = cplx(p.g) * (h_cav + h_cav.adjoint());

  SystemModel m;
  m.dims = dims;
  m.basis_labels = {{"0", "1", "2"}, {"0", "1", "2"}, {}};
  for (std::size_t n = 0; n < nc; ++n) m.basis_labels[2].push_back("n" + std::to_string(n));
  m.h_static = Operator::hermitian(dims, (h_atoms + h_cav).matrix());
  m.params = p;
  m.frame = "rotating with the 1-2 drive; cavity Raman resonant with the drive";

  m.channels.push_back({std::sqrt(p.kappa) * a, "cavity", Detectability::cavity_output});
  for (std::size_t i = 0; i < 2; ++i) {
    const std::string atom = "atom" + std::to_string(i + 1);
    if (p.branching > 0.0) {
      m.channels.push_back({std::sqrt(p.gamma * p.branching) * embed(dims, i, sigma(3, 0, 2)),
                            atom + ":2->0", Detectability::free_space});
    }
    if (p.branching < 1.0) {
      m.channels.push_back({std::sqrt(p.gamma * (1.0 - p.branching)) * embed(dims, i, sigma(3, 1, 2)),
                            atom + ":2->1", Detectability::free_space});
    }
  }
  return m;
}

Operator dark_projector() {
  const Dims atoms{3, 3};
  Matrix pds = Matrix::Zero(9, 9);
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t j = 0; j < 2; ++j) {
      const auto k = static_cast<Eigen::Index>(flat_index(atoms, {i, j}));
      pds(k, k) = 1.0;
    }
  }
  const Vector a = dark_state_a12().amplitudes();
  pds += a * a.adjoint();
  return Operator::hermitian(atoms, std::move(pds));
}

Operator effective_zeno_hamiltonian(const SystemParams& p) {
  const Vector s11 = two_atom_state(1, 1).amplitudes();
  const Vector a12 = dark_state_a12().amplitudes();
  const cplx c = -std::sqrt(2.0) * p.omega / 2.0;
  Matrix h = c * (s11 * a12.adjoint()) + std::conj(c) * (a12 * s11.adjoint()) + p.delta * (a12 * a12.adjoint());
  return Operator::hermitian({3, 3}, std::move(h));
}

PhaseGate ideal_phase_gate(double omega, double delta) {
  if (delta == 0.0) throw std::invalid_argument("ideal_phase_gate: delta must be nonzero");
  if (omega == 0.0) throw std::invalid_argument("ideal_phase_gate: omega must be nonzero");
  PhaseGate gate;
  gate.delta_eff = -omega * omega / (2.0 * delta);
  gate.gate_time = kPi / std::abs(gate.delta_eff);
  Matrix u = Matrix::Identity(4, 4);
  u(3, 3) = std::exp(-kI * gate.delta_eff * gate.gate_time);
  gate.unitary = Operator({2, 2}, std::move(u));
  return gate;
}

// ----------------------------------------------------------- telegraph

SystemModel build_telegraph_system(const SystemParams& p) {
  p.validate();
  constexpr std::size_t kE = 2;
  const double om = std::abs(p.omega_m);
  const double ol = std::abs(p.omega_l);
  const double dl = std::abs(p.delta);
  const std::initializer_list<std::pair<double, const char*>> rates = {
      {p.g, "g"}, {p.kappa, "kappa"}, {p.gamma, "Gamma"}, {ol, "|Omega_L|"}};
  for (const auto& [v, name] : rates) {
    if (om > 0.0 && !(om < v)) warn("telegraph regime: |Omega_M| = " + fmt(om) + " is not below " + name + " = " + fmt(v));
    if (v * kRegimeMargin > dl) {
      warn(std::string("telegraph regime: ") + name + " = " + fmt(v) + " is not << |Delta| = " + fmt(dl));
    }
  }
  if (om > 0.0 && dl > 0.0) {
    const double ratio = ol * ol / (4.0 * dl * om);
    if (ratio * kRegimeMargin > 1.0) warn("telegraph regime: Omega_L^2/(4 Delta Omega_M) = " + fmt(ratio) + " is not << 1");
  }

  const std::size_t nc = p.n_max + 1;
  const Dims dims{3, 3, nc};
  const Operator a = embed(dims, 2, Operator::annihilation(p.n_max));

  Operator h = Operator::zero(dims);
  for (std::size_t i = 0; i < 2; ++i) {
    const Operator laser = embed(dims, i, sigma(3, kE, 0));
    const Operator micro = embed(dims, i, sigma(3, 1, 0));
    const Operator cav = a.adjoint() * embed(dims, i, sigma(3, 1, kE));
    h = h + cplx(p.delta) * embed(dims, i, sigma(3, kE, kE)) + cplx(0.5 * p.omega_l) * (laser + laser.adjoint()) +
        cplx(0.5 * p.omega_m) * (micro + micro.adjoint()) + cplx(p.g) * (cav + cav.adjoint());
  }

  SystemModel m;
  m.dims = dims;
  m.basis_labels = {{"0", "1", "e"}, {"0", "1", "e"}, {}};
  for (std::size_t n = 0; n < nc; ++n) m.basis_labels[2].push_back("n" + std::to_string(n));
  m.h_static = Operator::hermitian(dims, h.matrix());
  m.params = p;
  m.frame = "0-e laser and cavity Raman resonant; e at +Delta; 0 and 1 degenerate";

  m.channels.push_back({std::sqrt(p.kappa) * a, "cavity", Detectability::cavity_output});
  for (std::size_t i = 0; i < 2; ++i) {
    const std::string atom = "atom" + std::to_string(i + 1);
    if (p.branching > 0.0) {
      m.channels.push_back({std::sqrt(p.gamma * p.branching) * embed(dims, i, sigma(3, 0, kE)), atom + ":e->0",
                            Detectability::free_space});
    }
    if (p.branching < 1.0) {
      m.channels.push_back({std::sqrt(p.gamma * (1.0 - p.branching)) * embed(dims, i, sigma(3, 1, kE)),
                            atom + ":e->1", Detectability::free_space});
    }
  }
  return m;
}

TelegraphTimescales telegraph_timescales(const SystemParams& p) {
  if (!(p.g > 0.0) || !(p.kappa > 0.0) || !(p.gamma > 0.0) || p.delta == 0.0 || p.omega_l == 0.0) {
    throw std::invalid_argument("telegraph_timescales: g, kappa, Gamma, Delta, Omega_L must be nonzero");
  }
  TelegraphTimescales ts;
  const double c = cooperativity(p.g, p.kappa, p.gamma);
  ts.t_cav = 3.0 * p.kappa * p.delta * p.delta / (4.0 * p.g * p.g * p.omega_l * p.omega_l);
  ts.t_dark = 64.0 / 9.0 * c * ts.t_cav;
  ts.t_light = 64.0 / 3.0 * c * ts.t_cav;
  ts.validity_ratio = p.omega_m != 0.0 ? p.omega_l * p.omega_l / (4.0 * std::abs(p.delta * p.omega_m))
                                       : std::numeric_limits<double>::infinity();
  return ts;
}

// --------------------------------------------------------- photon source

double RampSpec::rabi(double t) const {
  if (t <= 0.0) return 0.0;
  if (t >= duration) return omega_max;
  const double x = t / duration;
  if (shape == Shape::linear) return omega_max * x;
  const double s = std::sin(0.5 * kPi * x);
  return omega_max * s * s;
}

SystemModel build_photon_source(const SystemParams& p, const RampSpec& pulse) {
  p.validate();
  if (!(pulse.duration > 0.0)) throw std::invalid_argument("build_photon_source: ramp duration must be positive");
  constexpr std::size_t kG = 0;
  constexpr std::size_t kU = 1;
  constexpr std::size_t kE = 2;
  const std::size_t nc = p.n_max + 1;
  const Dims dims{3, nc};
  const Operator a = embed(dims, 1, Operator::annihilation(p.n_max));
  const Operator cav = a.adjoint() * embed(dims, 0, sigma(3, kU, kE));
  const Operator h0 = cplx(p.delta) * embed(dims, 0, sigma(3, kE, kE)) + cplx(p.g) * (cav + cav.adjoint());
  const Operator laser = embed(dims, 0, sigma(3, kE, kG));

  SystemModel m;
  m.dims = dims;
  m.basis_labels = {{"g", "u", "e"}, {}};
  for (std::size_t n = 0; n < nc; ++n) m.basis_labels[1].push_back("n" + std::to_string(n));
  m.h_static = Operator::hermitian(dims, h0.matrix());
  m.drives.push_back({[pulse](double t) { return pulse.rabi(t); }, cplx(0.5) * (laser + laser.adjoint()),
                      std::abs(pulse.omega_max)});
  m.params = p;
  m.frame = "resonant frame; laser on g-e, cavity on u-e, e at +Delta";

  m.channels.push_back({std::sqrt(p.kappa) * a, "cavity", Detectability::cavity_output});
  if (p.branching > 0.0) {
    m.channels.push_back({std::sqrt(p.gamma * p.branching) * embed(dims, 0, sigma(3, kG, kE)), "atom:e->g",
                          Detectability::free_space});
  }
  if (p.branching < 1.0) {
    m.channels.push_back({std::sqrt(p.gamma * (1.0 - p.branching)) * embed(dims, 0, sigma(3, kU, kE)), "atom:e->u",
                          Detectability::free_space});
  }
  return m;
}

}  // namespace atomcav
