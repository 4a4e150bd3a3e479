#include "atomcav/linalg.hpp"

#include "atomcav/errors.hpp"
#include "atomcav/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace atomcav {
namespace {

std::string dims_str(const Dims& dims) {
  std::string s = "[";
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(dims[i]);
  }
  return s + "]";
}

void require_same_dims(const Dims& a, const Dims& b, const char* what) {
  if (a != b) {
    throw DimensionError(std::string(what) + ": dims " + dims_str(a) + " vs " + dims_str(b));
  }
}

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

// full[a * n_traced + t] = flat index of (kept multi-index a, traced multi-index t).
std::vector<std::size_t> split_table(const Dims& dims, std::span<const std::size_t> keep,
                                     std::size_t& n_kept, std::size_t& n_traced) {
  std::vector<bool> kept(dims.size(), false);
  for (auto k : keep) {
    if (k >= dims.size()) {
      throw DimensionError("partial_trace: subsystem index " + std::to_string(k) +
                           " out of range for dims " + dims_str(dims));
    }
    if (kept[k]) throw DimensionError("partial_trace: duplicate subsystem index " + std::to_string(k));
    kept[k] = true;
  }
  std::vector<std::size_t> traced;
  for (std::size_t s = 0; s < dims.size(); ++s) {
    if (!kept[s]) traced.push_back(s);
  }
  std::vector<std::size_t> strides(dims.size(), 1);
  for (std::size_t s = dims.size(); s-- > 1;) strides[s - 1] = strides[s] * dims[s];

  n_kept = 1;
  for (auto k : keep) n_kept *= dims[k];
  n_traced = 1;
  for (auto t : traced) n_traced *= dims[t];

  auto offsets = [&](std::span<const std::size_t> subsystems, std::size_t count) {
    std::vector<std::size_t> out(count, 0);
    for (std::size_t a = 0; a < count; ++a) {
      std::size_t rem = a;
      std::size_t off = 0;
      for (std::size_t p = subsystems.size(); p-- > 0;) {
        const auto s = subsystems[p];
        off += (rem % dims[s]) * strides[s];
        rem /= dims[s];
      }
      out[a] = off;
    }
    return out;
  };
  const auto kept_off = offsets(keep, n_kept);
  const auto traced_off = offsets(traced, n_traced);

  std::vector<std::size_t> table(n_kept * n_traced);
  for (std::size_t a = 0; a < n_kept; ++a) {
    for (std::size_t t = 0; t < n_traced; ++t) table[a * n_traced + t] = kept_off[a] + traced_off[t];
  }
  return table;
}

Dims kept_dims(const Dims& dims, std::span<const std::size_t> keep) {
  Dims out;
  for (auto k : keep) out.push_back(dims[k]);
  return out;
}

}  // namespace

std::size_t total_dim(const Dims& dims) {
  return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
}

std::size_t flat_index(const Dims& dims, std::span<const std::size_t> levels) {
  if (levels.size() != dims.size()) throw DimensionError("flat_index: wrong number of levels");
  std::size_t index = 0;
  for (std::size_t s = 0; s < dims.size(); ++s) {
    if (levels[s] >= dims[s]) throw DimensionError("flat_index: level out of range");
    index = index * dims[s] + levels[s];
  }
  return index;
}

std::size_t flat_index(const Dims& dims, std::initializer_list<std::size_t> levels) {
  return flat_index(dims, std::span<const std::size_t>(levels.begin(), levels.size()));
}

// ---------------------------------------------------------------- Operator

Operator::Operator(Dims dims, Matrix data) : dims_(std::move(dims)), data_(std::move(data)) {
  const auto d = total_dim(dims_);
  if (data_.rows() != data_.cols() || static_cast<std::size_t>(data_.rows()) != d) {
    throw DimensionError("Operator: matrix is " + std::to_string(data_.rows()) + "x" +
                         std::to_string(data_.cols()) + " but dims " + dims_str(dims_) +
                         " require " + std::to_string(d));
  }
}

Operator Operator::hermitian(Dims dims, Matrix data) {
  Operator op(std::move(dims), std::move(data));
  if (!op.is_hermitian()) {
    throw std::invalid_argument("Operator::hermitian: |A - A^dag| = " +
                                std::to_string(op.hermiticity_error()));
  }
  return op;
}

Operator Operator::identity(Dims dims) {
  const auto d = idx(total_dim(dims));
  return Operator(std::move(dims), Matrix::Identity(d, d));
}

Operator Operator::zero(Dims dims) {
  const auto d = idx(total_dim(dims));
  return Operator(std::move(dims), Matrix::Zero(d, d));
}

Operator Operator::transition(std::size_t d, std::size_t i, std::size_t j) {
  if (i >= d || j >= d) throw DimensionError("Operator::transition: level out of range");
  Matrix m = Matrix::Zero(idx(d), idx(d));
  m(idx(i), idx(j)) = 1.0;
  return Operator({d}, std::move(m));
}

Operator Operator::annihilation(std::size_t n_max) {
  const auto d = n_max + 1;
  Matrix m = Matrix::Zero(idx(d), idx(d));
  for (std::size_t n = 1; n < d; ++n) m(idx(n - 1), idx(n)) = std::sqrt(static_cast<double>(n));
  return Operator({d}, std::move(m));
}

Operator Operator::adjoint() const { return Operator(dims_, data_.adjoint()); }

double Operator::hermiticity_error() const {
  if (data_.size() == 0) return 0.0;
  return (data_ - data_.adjoint()).cwiseAbs().maxCoeff();
}

Operator operator+(const Operator& a, const Operator& b) {
  require_same_dims(a.dims_, b.dims_, "operator+");
  return Operator(a.dims_, a.data_ + b.data_);
}

Operator operator-(const Operator& a, const Operator& b) {
  require_same_dims(a.dims_, b.dims_, "operator-");
  return Operator(a.dims_, a.data_ - b.data_);
}

Operator operator*(const Operator& a, const Operator& b) {
  require_same_dims(a.dims_, b.dims_, "operator*");
  return Operator(a.dims_, a.data_ * b.data_);
}

Operator operator*(cplx s, const Operator& a) { return Operator(a.dims_, s * a.data_); }

// --------------------------------------------------------------- PureState

PureState::PureState(Dims dims, Vector amplitudes) : dims_(std::move(dims)), amps_(std::move(amplitudes)) {
  if (static_cast<std::size_t>(amps_.size()) != total_dim(dims_)) {
    throw DimensionError("PureState: " + std::to_string(amps_.size()) + " amplitudes for dims " +
                         dims_str(dims_));
  }
}

PureState PureState::basis(Dims dims, std::span<const std::size_t> levels) {
  const auto d = total_dim(dims);
  Vector v = Vector::Zero(idx(d));
  v(idx(flat_index(dims, levels))) = 1.0;
  return PureState(std::move(dims), std::move(v));
}

PureState PureState::basis(Dims dims, std::initializer_list<std::size_t> levels) {
  return basis(std::move(dims), std::span<const std::size_t>(levels.begin(), levels.size()));
}

PureState PureState::zero(Dims dims) {
  const auto d = total_dim(dims);
  return PureState(std::move(dims), Vector::Zero(idx(d)));
}

PureState PureState::normalized() const {
  const double n = std::sqrt(norm_squared());
  if (!(n > 0.0) || !std::isfinite(n)) throw NumericalFailure("PureState::normalized: zero or non-finite norm");
  return PureState(dims_, amps_ / n);
}

PureState operator+(const PureState& a, const PureState& b) {
  require_same_dims(a.dims_, b.dims_, "PureState+");
  return PureState(a.dims_, a.amps_ + b.amps_);
}

PureState operator-(const PureState& a, const PureState& b) {
  require_same_dims(a.dims_, b.dims_, "PureState-");
  return PureState(a.dims_, a.amps_ - b.amps_);
}

PureState operator*(cplx s, const PureState& a) { return PureState(a.dims_, s * a.amps_); }

cplx inner(const PureState& a, const PureState& b) {
  require_same_dims(a.dims(), b.dims(), "inner");
  return a.amplitudes().dot(b.amplitudes());
}

// -------------------------------------------------------------- MixedState

MixedState::MixedState(Dims dims, Matrix data) : dims_(std::move(dims)), data_(std::move(data)) {
  const auto d = total_dim(dims_);
  if (data_.rows() != data_.cols() || static_cast<std::size_t>(data_.rows()) != d) {
    throw DimensionError("MixedState: matrix size does not match dims " + dims_str(dims_));
  }
}

MixedState MixedState::from_pure(const PureState& psi) {
  return MixedState(psi.dims(), psi.amplitudes() * psi.amplitudes().adjoint());
}

MixedState MixedState::maximally_mixed(Dims dims) {
  const auto d = total_dim(dims);
  return MixedState(std::move(dims), Matrix::Identity(idx(d), idx(d)) / static_cast<double>(d));
}

double MixedState::hermiticity_error() const {
  if (data_.size() == 0) return 0.0;
  return (data_ - data_.adjoint()).cwiseAbs().maxCoeff();
}

double MixedState::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (data_ + data_.adjoint()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

bool MixedState::is_valid() const {
  return hermiticity_error() < 1e-10 && std::abs(trace() - cplx(1.0)) < 1e-8 && min_eigenvalue() >= -1e-8;
}

// ------------------------------------------------------------- operations

Operator kron(const Operator& a, const Operator& b) {
  const auto& A = a.matrix();
  const auto& B = b.matrix();
  const auto db = B.rows();
  Matrix out(A.rows() * db, A.cols() * db);
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    for (Eigen::Index j = 0; j < A.cols(); ++j) {
      out.block(i * db, j * db, db, db) = A(i, j) * B;
    }
  }
  Dims dims = a.dims();
  dims.insert(dims.end(), b.dims().begin(), b.dims().end());
  return Operator(std::move(dims), std::move(out));
}

Operator kron(std::initializer_list<Operator> factors) {
  if (factors.size() == 0) throw DimensionError("kron: no factors");
  auto it = factors.begin();
  Operator out = *it++;
  for (; it != factors.end(); ++it) out = kron(out, *it);
  return out;
}

PureState kron(const PureState& a, const PureState& b) {
  const auto& x = a.amplitudes();
  const auto& y = b.amplitudes();
  Vector out(x.size() * y.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) out.segment(i * y.size(), y.size()) = x(i) * y;
  Dims dims = a.dims();
  dims.insert(dims.end(), b.dims().begin(), b.dims().end());
  return PureState(std::move(dims), std::move(out));
}

Operator embed(const Dims& dims, std::size_t site, const Operator& local) {
  if (site >= dims.size() || local.dim() != dims[site]) {
    throw DimensionError("embed: local operator does not fit subsystem " + std::to_string(site) +
                         " of dims " + dims_str(dims));
  }
  std::size_t left = 1;
  for (std::size_t s = 0; s < site; ++s) left *= dims[s];
  std::size_t right = 1;
  for (std::size_t s = site + 1; s < dims.size(); ++s) right *= dims[s];
  Matrix m = kron(kron(Operator::identity({left}), Operator(local.dims(), local.matrix())),
                  Operator::identity({right}))
                 .matrix();
  return Operator(dims, std::move(m));
}

PureState apply(const Operator& a, const PureState& psi) {
  require_same_dims(a.dims(), psi.dims(), "apply");
  return PureState(psi.dims(), a.matrix() * psi.amplitudes());
}

PureState expm_apply(const Operator& h, const PureState& psi, double dt) {
  require_same_dims(h.dims(), psi.dims(), "expm_apply");
  if (!(dt > 0.0)) throw std::invalid_argument("expm_apply: dt must be positive");
  if (!h.matrix().allFinite() || !psi.amplitudes().allFinite()) {
    throw NumericalFailure("expm_apply: non-finite entries");
  }
  const Matrix gen = -kI * h.matrix();
  const double step = bounded_step(norm_bound(gen), dt);
  const auto n = static_cast<std::uint64_t>(std::llround(dt / step));
  Vector x = psi.amplitudes();
  for (std::uint64_t k = 0; k < n; ++k) rk4_linear_step(gen, x, step);
  return PureState(psi.dims(), std::move(x));
}

MixedState partial_trace(const MixedState& rho, std::span<const std::size_t> keep) {
  std::size_t nk = 0;
  std::size_t nt = 0;
  const auto table = split_table(rho.dims(), keep, nk, nt);
  Matrix out = Matrix::Zero(idx(nk), idx(nk));
  const auto& m = rho.matrix();
  for (std::size_t a = 0; a < nk; ++a) {
    for (std::size_t b = 0; b < nk; ++b) {
      cplx s = 0.0;
      for (std::size_t t = 0; t < nt; ++t) s += m(idx(table[a * nt + t]), idx(table[b * nt + t]));
      out(idx(a), idx(b)) = s;
    }
  }
  return MixedState(kept_dims(rho.dims(), keep), std::move(out));
}

MixedState partial_trace(const MixedState& rho, std::initializer_list<std::size_t> keep) {
  return partial_trace(rho, std::span<const std::size_t>(keep.begin(), keep.size()));
}

MixedState partial_trace(const PureState& psi, std::span<const std::size_t> keep) {
  std::size_t nk = 0;
  std::size_t nt = 0;
  const auto table = split_table(psi.dims(), keep, nk, nt);
  Matrix m(idx(nk), idx(nt));
  for (std::size_t a = 0; a < nk; ++a) {
    for (std::size_t t = 0; t < nt; ++t) m(idx(a), idx(t)) = psi[table[a * nt + t]];
  }
  return MixedState(kept_dims(psi.dims(), keep), m * m.adjoint());
}

double fidelity(const MixedState& rho, const PureState& target) {
  require_same_dims(rho.dims(), target.dims(), "fidelity");
  const auto& t = target.amplitudes();
  const double f = t.dot(rho.matrix() * t).real();
  return std::clamp(f, 0.0, 1.0);
}

double trace_distance(const MixedState& a, const MixedState& b) {
  require_same_dims(a.dims(), b.dims(), "trace_distance");
  const Matrix d = a.matrix() - b.matrix();
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (d + d.adjoint()), Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

}  // namespace atomcav
