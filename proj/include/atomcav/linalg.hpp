#pragma once

// Dense complex linear algebra for few-level composite systems.
//
// Every object carries the ordered list of subsystem dimensions it lives on.
// Composite indices are row-major over subsystems: for dims [d0, d1, d2] the
// basis state |i0 i1 i2> has flat index (i0*d1 + i1)*d2 + i2.

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace atomcav {

using cplx = std::complex<double>;
using Dims = std::vector<std::size_t>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr cplx kI{0.0, 1.0};

std::size_t total_dim(const Dims& dims);

/// Flat index of a product basis state.
std::size_t flat_index(const Dims& dims, std::span<const std::size_t> levels);
std::size_t flat_index(const Dims& dims, std::initializer_list<std::size_t> levels);

class Operator {
 public:
  Operator() = default;
  Operator(Dims dims, Matrix data);

  /// Construct and verify Hermiticity (max |A - A^dag| < 1e-12).
  static Operator hermitian(Dims dims, Matrix data);
  static Operator identity(Dims dims);
  static Operator zero(Dims dims);
  /// |i><j| on a single subsystem of dimension d.
  static Operator transition(std::size_t d, std::size_t i, std::size_t j);
  /// Annihilation operator truncated to Fock states 0..n_max.
  static Operator annihilation(std::size_t n_max);

  const Dims& dims() const { return dims_; }
  std::size_t dim() const { return static_cast<std::size_t>(data_.rows()); }
  const Matrix& matrix() const { return data_; }
  cplx operator()(std::size_t i, std::size_t j) const {
    return data_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }

  Operator adjoint() const;
  /// Largest entry of |A - A^dag|.
  double hermiticity_error() const;
  bool is_hermitian(double tol = 1e-12) const { return hermiticity_error() < tol; }

  friend Operator operator+(const Operator& a, const Operator& b);
  friend Operator operator-(const Operator& a, const Operator& b);
  friend Operator operator*(const Operator& a, const Operator& b);
  friend Operator operator*(cplx s, const Operator& a);
  friend Operator operator*(const Operator& a, cplx s) { return s * a; }

 private:
  Dims dims_;
  Matrix data_;
};

class PureState {
 public:
  PureState() = default;
  PureState(Dims dims, Vector amplitudes);

  static PureState basis(Dims dims, std::span<const std::size_t> levels);
  static PureState basis(Dims dims, std::initializer_list<std::size_t> levels);
  static PureState zero(Dims dims);

  const Dims& dims() const { return dims_; }
  std::size_t dim() const { return static_cast<std::size_t>(amps_.size()); }
  const Vector& amplitudes() const { return amps_; }
  cplx operator[](std::size_t i) const { return amps_(static_cast<Eigen::Index>(i)); }

  double norm_squared() const { return amps_.squaredNorm(); }
  bool is_normalized(double tol = 1e-10) const { return std::abs(norm_squared() - 1.0) < tol; }
  PureState normalized() const;

  friend PureState operator+(const PureState& a, const PureState& b);
  friend PureState operator-(const PureState& a, const PureState& b);
  friend PureState operator*(cplx s, const PureState& a);

 private:
  Dims dims_;
  Vector amps_;
};

class MixedState {
 public:
  MixedState() = default;
  MixedState(Dims dims, Matrix data);

  static MixedState from_pure(const PureState& psi);
  static MixedState maximally_mixed(Dims dims);

  const Dims& dims() const { return dims_; }
  std::size_t dim() const { return static_cast<std::size_t>(data_.rows()); }
  const Matrix& matrix() const { return data_; }
  cplx operator()(std::size_t i, std::size_t j) const {
    return data_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }

  cplx trace() const { return data_.trace(); }
  double hermiticity_error() const;
  double min_eigenvalue() const;
  /// Hermitian to 1e-10, unit trace to 1e-8, eigenvalues >= -1e-8.
  bool is_valid() const;

 private:
  Dims dims_;
  Matrix data_;
};

cplx inner(const PureState& a, const PureState& b);

Operator kron(const Operator& a, const Operator& b);
Operator kron(std::initializer_list<Operator> factors);
PureState kron(const PureState& a, const PureState& b);

/// Embed a single-subsystem operator at position `site` of `dims`.
Operator embed(const Dims& dims, std::size_t site, const Operator& local);

PureState apply(const Operator& a, const PureState& psi);

/// exp(-i H dt) |psi> for a possibly non-Hermitian H (hbar = 1), integrated
/// with fixed RK4 substeps obeying the step bound ||H|| h <= kRk4StepBound.
PureState expm_apply(const Operator& h_nonhermitian, const PureState& psi, double dt);

MixedState partial_trace(const MixedState& rho, std::span<const std::size_t> keep);
MixedState partial_trace(const MixedState& rho, std::initializer_list<std::size_t> keep);
/// Reduced state of a pure state; avoids forming the full density matrix.
MixedState partial_trace(const PureState& psi, std::span<const std::size_t> keep);

/// <target| rho |target>, clamped to [0, 1].
double fidelity(const MixedState& rho, const PureState& target);

/// (1/2) || a - b ||_1.
double trace_distance(const MixedState& a, const MixedState& b);

}  // namespace atomcav
