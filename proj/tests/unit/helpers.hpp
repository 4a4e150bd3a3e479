#pragma once

#include "atomcav/errors.hpp"
#include "atomcav/linalg.hpp"

#include <random>
#include <string>
#include <vector>

namespace testing {

inline atomcav::Matrix random_matrix(std::mt19937_64& rng, Eigen::Index n, Eigen::Index m) {
  std::normal_distribution<double> nd;
  atomcav::Matrix a(n, m);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < m; ++j) a(i, j) = {nd(rng), nd(rng)};
  return a;
}

inline atomcav::Matrix random_hermitian(std::mt19937_64& rng, Eigen::Index n) {
  const atomcav::Matrix a = random_matrix(rng, n, n);
  return 0.5 * (a + a.adjoint());
}

inline atomcav::PureState random_state(std::mt19937_64& rng, const atomcav::Dims& dims) {
  const auto n = static_cast<Eigen::Index>(atomcav::total_dim(dims));
  atomcav::Vector v = random_matrix(rng, n, 1).col(0);
  return atomcav::PureState(dims, v / v.norm());
}

inline atomcav::MixedState random_density(std::mt19937_64& rng, const atomcav::Dims& dims) {
  const auto n = static_cast<Eigen::Index>(atomcav::total_dim(dims));
  const atomcav::Matrix a = random_matrix(rng, n, n);
  atomcav::Matrix rho = a * a.adjoint();
  rho /= rho.trace().real();
  return atomcav::MixedState(dims, rho);
}

// Collects warnings for the lifetime of the object.
class WarningCapture {
 public:
  WarningCapture() {
    atomcav::set_warning_handler([this](const std::string& m) { messages.push_back(m); });
  }
  ~WarningCapture() { atomcav::set_warning_handler(nullptr); }
  std::vector<std::string> messages;
};

}  // namespace testing
