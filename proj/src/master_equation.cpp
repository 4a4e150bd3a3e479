#include "atomcav/errors.hpp"
#include "atomcav/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace atomcav {

namespace {

// Superoperators are formed only while D^2 stays small enough for dense powers.
constexpr std::size_t kMaxSuperDim = 1024;

Matrix kron_matrix(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

// Column-major vec: vec(A rho B) = (B^T ⊗ A) vec(rho).
Matrix liouvillian(const Matrix& h_nh, const std::vector<Matrix>& jumps) {
  const auto d = h_nh.rows();
  const Matrix id = Matrix::Identity(d, d);
  Matrix l = -kI * kron_matrix(id, h_nh) + kI * kron_matrix(h_nh.conjugate(), id);
  for (const auto& j : jumps) l += kron_matrix(j.conjugate(), j);
  return l;
}

Matrix symmetrized(const Matrix& rho) { return 0.5 * (rho + rho.adjoint()); }

std::vector<double> output_grid(const MasterEquationOptions& options, double t_end, double dt) {
  std::vector<double> out = options.output_times;
  if (out.empty()) {
    const auto n = static_cast<std::size_t>(std::ceil(t_end / dt - 1e-9));
    for (std::size_t i = 1; i <= n; ++i) out.push_back(std::min(t_end, static_cast<double>(i) * dt));
    return out;
  }
  for (double t : out) {
    if (t < 0.0 || t > t_end) throw std::invalid_argument("master_equation_solve: output time outside [0, t_end]");
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

std::vector<std::pair<double, MixedState>> master_equation_solve(const SystemModel& model, const MixedState& rho0,
                                                                 double t_end, double dt,
                                                                 const MasterEquationOptions& options) {
  if (rho0.dims() != model.dims) throw DimensionError("master_equation_solve: state dims do not match the model");
  if (!rho0.is_valid()) throw std::invalid_argument("master_equation_solve: initial state is not a density matrix");
  if (!(t_end >= 0.0)) throw std::invalid_argument("master_equation_solve: t_end must be non-negative");
  if (!(dt > 0.0)) throw std::invalid_argument("master_equation_solve: dt must be positive");

  std::vector<Matrix> jumps;
  double jump_norm = 0.0;
  for (const auto& c : model.channels) {
    jumps.push_back(c.op.matrix());
    const double n = norm_bound(jumps.back());
    jump_norm += n * n;
  }
  const double h = bounded_step(2.0 * model.generator_norm_bound() + jump_norm, dt);
  const std::vector<double> outputs = output_grid(options, t_end, h);
  const auto d = static_cast<Eigen::Index>(rho0.dim());
  const Dims& dims = model.dims;

  std::vector<std::pair<double, MixedState>> result;
  result.reserve(outputs.size());
  const double slack = 1e-9 * h;

  if (model.time_independent() && rho0.dim() * rho0.dim() <= kMaxSuperDim) {
    const Matrix h_nh = model.h_static.matrix() + model.decay_term();
    const PowerPropagator prop(liouvillian(h_nh, jumps), h, std::max(t_end, h));
    Vector v = Eigen::Map<const Vector>(rho0.matrix().data(), d * d);
    double t = 0.0;
    for (double target : outputs) {
      const double span = target - t;
      if (span > slack) {
        auto n = static_cast<std::uint64_t>(std::floor(span / h + 1e-9));
        double rest = span - static_cast<double>(n) * h;
        prop.advance(v, n);
        if (rest > slack) prop.partial(v, rest);
        t = target;
      }
      if (!v.allFinite()) throw NumericalFailure("master_equation_solve: non-finite density matrix");
      Matrix rho = Eigen::Map<const Matrix>(v.data(), d, d);
      rho = symmetrized(rho);
      v = Eigen::Map<const Vector>(rho.data(), d * d);
      result.emplace_back(target, MixedState(dims, rho));
    }
    return result;
  }

  Matrix decay = Matrix::Zero(d, d);
  for (const auto& j : jumps) decay += j.adjoint() * j;
  auto rhs = [&](double t, const Matrix& rho) {
    const Matrix h_nh = model.hamiltonian(t).matrix() - 0.5 * kI * decay;
    Matrix out = -kI * (h_nh * rho) + kI * (rho * h_nh.adjoint());
    for (const auto& j : jumps) out.noalias() += j * rho * j.adjoint();
    return out;
  };
  auto rk4 = [&](Matrix& rho, double t, double step) {
    const Matrix k1 = rhs(t, rho);
    const Matrix k2 = rhs(t + step / 2, rho + (step / 2) * k1);
    const Matrix k3 = rhs(t + step / 2, rho + (step / 2) * k2);
    const Matrix k4 = rhs(t + step, rho + step * k3);
    rho += (step / 6) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    rho = symmetrized(rho);
  };

  Matrix rho = rho0.matrix();
  double t = 0.0;
  for (double target : outputs) {
    const double span = target - t;
    if (span > slack) {
      const auto n = static_cast<std::uint64_t>(std::floor(span / h + 1e-9));
      for (std::uint64_t i = 0; i < n; ++i) rk4(rho, t + static_cast<double>(i) * h, h);
      const double rest = span - static_cast<double>(n) * h;
      if (rest > slack) rk4(rho, t + static_cast<double>(n) * h, rest);
      t = target;
    }
    if (!rho.allFinite()) throw NumericalFailure("master_equation_solve: non-finite density matrix");
    result.emplace_back(target, MixedState(dims, rho));
  }
  return result;
}

}  // namespace atomcav
