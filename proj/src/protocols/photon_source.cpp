#include "atomcav/protocols/photon_source.hpp"

#include "atomcav/trajectory.hpp"

#include <cmath>
#include <stdexcept>

namespace atomcav {

PhotonSourceResult photon_source_experiment(const SystemParams& p, const RampSpec& pulse,
                                            const PhotonSourceOptions& options) {
  const SystemModel model = build_photon_source(p, pulse);
  const double t_end = options.t_end > 0.0 ? options.t_end : pulse.duration + 20.0 / p.kappa;
  if (!(options.output_step > 0.0)) throw std::invalid_argument("photon_source_experiment: output_step must be positive");

  MasterEquationOptions me;
  const auto n_out = static_cast<std::size_t>(std::ceil(t_end / options.output_step - 1e-9));
  for (std::size_t i = 1; i <= n_out; ++i) me.output_times.push_back(std::min(t_end, options.output_step * i));

  const Dims& dims = model.dims;
  const PureState ground = PureState::basis(dims, {0, 0});
  const auto states = master_equation_solve(model, MixedState::from_pure(ground), t_end, options.max_dt, me);

  const Operator a = embed(dims, 1, Operator::annihilation(p.n_max));
  const Matrix n_op = (a.adjoint() * a).matrix();
  const Matrix pe = embed(dims, 0, Operator::transition(3, 2, 2)).matrix();
  auto expect = [](const Matrix& op, const Matrix& rho) { return (op * rho).trace().real(); };

  PhotonSourceResult r;
  r.t_end = t_end;
  r.waveform.emplace_back(0.0, 0.0);
  double prev_t = 0.0;
  double prev_cav = 0.0;
  double prev_free = 0.0;
  for (const auto& [t, rho] : states) {
    const double cav = p.kappa * expect(n_op, rho.matrix());
    const double free = p.gamma * expect(pe, rho.matrix());
    r.emission_prob += 0.5 * (t - prev_t) * (cav + prev_cav);
    r.free_space_prob += 0.5 * (t - prev_t) * (free + prev_free);
    r.waveform.emplace_back(t, cav);
    prev_t = t;
    prev_cav = cav;
    prev_free = free;
  }
  const Matrix& last = states.back().second.matrix();
  r.residual_excitation = expect(n_op, last) + expect(pe, last);
  return r;
}

}  // namespace atomcav
