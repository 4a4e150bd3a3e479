#pragma once

// Fixed-step fourth-order propagation of linear equations dx/dt = A x.
//
// For a constant generator A a classical RK4 step of length h is exactly the
// degree-4 Taylor polynomial of exp(A h), so the one-step map is a matrix
// P(h). Long evolutions under a constant generator apply P^n through the
// binary powers P^(2^k), which is the same discretization as stepping n
// times but costs O(log n) matrix-vector products.

#include "atomcav/linalg.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace atomcav {

/// ||A|| h bound for every RK4 step: local truncation (x^5/120) below 1e-9.
inline constexpr double kRk4StepBound = 0.04;

/// sqrt(||A||_1 ||A||_inf), an upper bound on the spectral norm.
double norm_bound(const Matrix& a);

/// Largest step h <= max_step with generator_norm * h <= kRk4StepBound,
/// chosen so that max_step is an integer multiple of h.
double bounded_step(double generator_norm, double max_step);

/// x <- P(h) x for the generator `a`, via four matrix-vector products.
void rk4_linear_step(const Matrix& a, Vector& x, double h);

/// The one-step matrix I + X + X^2/2 + X^3/6 + X^4/24 with X = a h.
Matrix rk4_step_matrix(const Matrix& a, double h);

class PowerPropagator {
 public:
  PowerPropagator() = default;
  /// Precomputes P^(2^k) for all k with 2^k * step <= horizon.
  PowerPropagator(Matrix generator, double step, double horizon);

  double step() const { return step_; }
  const Matrix& generator() const { return generator_; }
  std::size_t levels() const { return powers_.size(); }
  /// P^(2^k).
  const Matrix& power(std::size_t k) const { return powers_.at(k); }

  /// x <- P^n x. n must not exceed 2^levels() - 1.
  void advance(Vector& x, std::uint64_t n) const;
  /// x <- P(h) x for a partial step 0 < h <= step().
  void partial(Vector& x, double h) const { rk4_linear_step(generator_, x, h); }

 private:
  Matrix generator_;
  double step_ = 0.0;
  std::vector<Matrix> powers_;
};

}  // namespace atomcav
