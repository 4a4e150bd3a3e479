#pragma once

#include "atomcav/models.hpp"

#include <utility>
#include <vector>

namespace atomcav {

struct PhotonSourceResult {
  double emission_prob = 0.0;     // integral of kappa <a^dag a>
  double free_space_prob = 0.0;   // integral of Gamma <P_e>
  double residual_excitation = 0.0;  // <P_e> + <a^dag a> at the end
  /// (t, kappa <a^dag a>(t)).
  std::vector<std::pair<double, double>> waveform;
  double t_end = 0.0;
};

struct PhotonSourceOptions {
  /// End of integration; 0 means ramp duration + 20 / kappa.
  double t_end = 0.0;
  double max_dt = 0.05;
  /// Waveform sample spacing.
  double output_step = 0.25;
};

/// Master-equation run from |g, 0> with trapezoidal flux integration.
PhotonSourceResult photon_source_experiment(const SystemParams& p, const RampSpec& pulse,
                                            const PhotonSourceOptions& options = {});

}  // namespace atomcav
