#include "atomcav/propagator.hpp"

#include "atomcav/errors.hpp"

#include <cmath>
#include <stdexcept>

namespace atomcav {

double norm_bound(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  const double one = a.cwiseAbs().colwise().sum().maxCoeff();
  const double inf = a.cwiseAbs().rowwise().sum().maxCoeff();
  return std::sqrt(one * inf);
}

double bounded_step(double generator_norm, double max_step) {
  if (!(max_step > 0.0)) throw std::invalid_argument("bounded_step: step must be positive");
  if (!std::isfinite(generator_norm)) throw NumericalFailure("bounded_step: non-finite generator");
  if (generator_norm * max_step <= kRk4StepBound) return max_step;
  const double n = std::ceil(generator_norm * max_step / kRk4StepBound);
  return max_step / n;
}

void rk4_linear_step(const Matrix& a, Vector& x, double h) {
  // Horner form of the Taylor polynomial: x + h a (x + h/2 a (x + h/3 a (x + h/4 a x))).
  Vector y = (h / 4.0) * (a * x);
  y += x;
  Vector z = (h / 3.0) * (a * y);
  z += x;
  y.noalias() = (h / 2.0) * (a * z);
  y += x;
  z.noalias() = h * (a * y);
  x += z;
}

Matrix rk4_step_matrix(const Matrix& a, double h) {
  const auto n = a.rows();
  const Matrix id = Matrix::Identity(n, n);
  const Matrix x = a * h;
  Matrix p = id + x / 4.0;
  p = id + (x * p) / 3.0;
  p = id + (x * p) / 2.0;
  p = id + x * p;
  return p;
}

PowerPropagator::PowerPropagator(Matrix generator, double step, double horizon)
    : generator_(std::move(generator)), step_(step) {
  if (!(step > 0.0)) throw std::invalid_argument("PowerPropagator: step must be positive");
  if (!generator_.allFinite()) throw NumericalFailure("PowerPropagator: non-finite generator");
  powers_.push_back(rk4_step_matrix(generator_, step_));
  double span = step_;
  while (2.0 * span <= horizon) {
    powers_.push_back(powers_.back() * powers_.back());
    span *= 2.0;
  }
}

void PowerPropagator::advance(Vector& x, std::uint64_t n) const {
  Vector tmp(x.size());
  for (std::size_t k = 0; n != 0; ++k, n >>= 1) {
    if (!(n & 1u)) continue;
    if (k >= powers_.size()) throw std::out_of_range("PowerPropagator::advance: beyond horizon");
    tmp.noalias() = powers_[k] * x;
    x.swap(tmp);
  }
}

}  // namespace atomcav
