#include "atomcav/errors.hpp"
#include "atomcav/protocols/photon_source.hpp"
#include "atomcav/protocols/rus.hpp"
#include "atomcav/protocols/telegraph.hpp"
#include "atomcav/protocols/zeno_gate.hpp"
#include "atomcav/rng.hpp"
#include "helpers.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>

using namespace atomcav;

namespace {

PureState qubits(cplx a, cplx b, cplx c, cplx d) {
  Vector v(4);
  v << a, b, c, d;
  return PureState({2, 2}, v / v.norm());
}

PureState plus_plus() { return qubits(1, 1, 1, 1); }

std::vector<PhotonRecord> clicks_at(const std::vector<double>& times) {
  std::vector<PhotonRecord> out;
  for (double t : times) out.push_back({t, 0, Detectability::cavity_output, true});
  return out;
}

double overlap2(const PureState& a, const PureState& b) { return std::norm(inner(a, b)); }

// First seed whose attempt lands on outcome k without loss.
RusAttempt attempt_with_outcome(const PureState& joint, const PhotonBasis& basis, std::size_t k) {
  for (std::uint64_t s = 0; s < 10000; ++s) {
    RusAttempt a = rus_measure(joint, basis, 0.0, 0.0, s);
    if (a.outcome_index == k) return a;
  }
  FAIL("outcome never sampled");
  return {};
}

}  // namespace

// ------------------------------------------------------------------ zeno

TEST_CASE("zeno gate leaves |00> untouched") {
  testing::WarningCapture cap;
  const GateOutcome out = zeno_gate_experiment(SystemParams::zeno_defaults(), qubits(1, 0, 0, 0));
  CHECK(out.conditional_fidelity == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(out.success_prob == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("zeno gate at the default operating point") {
  testing::WarningCapture cap;
  const SystemParams p = SystemParams::zeno_defaults();
  const GateOutcome s01 = zeno_gate_experiment(p, qubits(0, 1, 0, 0));
  const GateOutcome bell = zeno_gate_experiment(p, qubits(1, 0, 0, 1));
  CHECK(s01.conditional_fidelity > 0.99);
  CHECK(bell.success_prob > 0.90);
  CHECK(s01.gate_time == doctest::Approx(785.398).epsilon(1e-6));
}

TEST_CASE("halving the drive quadruples the gate time") {
  testing::WarningCapture cap;
  SystemParams p = SystemParams::zeno_defaults();
  const PureState in = qubits(0, 1, 0, 0);
  const GateOutcome full = zeno_gate_experiment(p, in);
  p.omega /= 2;
  const GateOutcome half = zeno_gate_experiment(p, in);
  CHECK(half.gate_time / full.gate_time == doctest::Approx(4.0).epsilon(0.01));
  CHECK(half.conditional_fidelity > full.conditional_fidelity - 0.01);
}

TEST_CASE("success probability falls as the loss rates grow") {
  testing::WarningCapture cap;
  const PureState in = qubits(1, 0, 0, 1);
  for (double SystemParams::*rate : {&SystemParams::gamma, &SystemParams::kappa}) {
    double prev = 2.0;
    for (double scale : {1.0, 3.0, 10.0}) {
      SystemParams p = SystemParams::zeno_defaults();
      p.*rate *= scale;
      ZenoGateOptions opt;
      opt.warn_regime = false;
      const GateOutcome g = zeno_gate_experiment(p, in, opt);
      CHECK(g.success_prob < prev);
      CHECK(g.success_prob >= 0.0);
      CHECK(g.conditional_fidelity <= 1.0);
      prev = g.success_prob;
    }
  }
}

TEST_CASE("zeno regime checks") {
  SystemParams p = SystemParams::zeno_defaults();
  // The default operating point has kappa below Delta; nothing else is flagged.
  const auto issues = zeno_regime_issues(p);
  REQUIRE(issues.size() == 1);
  CHECK(issues[0].find("kappa") == 0);
  p.omega = 2.0;
  CHECK_THROWS_AS(zeno_regime_issues(p), RegimeError);
  CHECK_THROWS_AS(zeno_gate_experiment(p, qubits(0, 1, 0, 0)), RegimeError);
  p.omega = 0.5;
  CHECK_FALSE(zeno_regime_issues(p).empty());
}

TEST_CASE("truncation check reports a small shift") {
  testing::WarningCapture cap;
  ZenoGateOptions opt;
  opt.check_truncation = true;
  const GateOutcome g = zeno_gate_experiment(SystemParams::zeno_defaults(), qubits(1, 0, 0, 1), opt);
  REQUIRE(g.truncation_shift.has_value());
  CHECK(*g.truncation_shift < 0.01);
}

TEST_CASE("a single-point sweep reduces to the gate experiment") {
  testing::WarningCapture cap;
  const SystemParams p = SystemParams::zeno_defaults();
  const auto inputs = default_gate_inputs();
  const SweepResult r = sweep_gate(p, {p.omega}, {p.delta}, inputs);
  REQUIRE(r.rows.size() == inputs.size());
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const GateOutcome direct = zeno_gate_experiment(p, inputs[i].state);
    CHECK(r.rows[i].input_label == inputs[i].label);
    CHECK(r.rows[i].outcome.conditional_fidelity == direct.conditional_fidelity);
    CHECK(r.rows[i].outcome.success_prob == direct.success_prob);
  }
  REQUIRE(r.best.has_value());
  CHECK(r.best->omega == p.omega);
}

TEST_CASE("sweep skips points outside the zeno regime") {
  testing::WarningCapture cap;
  const SweepResult r = sweep_gate(SystemParams::zeno_defaults(), {0.1, 0.5}, {0.25, 1.25}, default_gate_inputs());
  CHECK(r.skipped == 1);
  CHECK(r.rows.size() == 3 * 2);
  for (const auto& row : r.rows) {
    CHECK(row.outcome.success_prob >= 0.0);
    CHECK(row.outcome.success_prob <= 1.0);
    CHECK(row.outcome.conditional_fidelity >= 0.0);
    CHECK(row.outcome.conditional_fidelity <= 1.0);
  }
}

// ------------------------------------------------------------- telegraph

TEST_CASE("segmentation of an empty record") {
  const auto p = segment_periods({}, 10.0, 500.0);
  REQUIRE(p.size() == 1);
  CHECK(p[0].kind == PeriodKind::dark);
  CHECK(p[0].start == 0.0);
  CHECK(p[0].end == 500.0);
}

TEST_CASE("segmentation of two click bursts") {
  const auto p = segment_periods(clicks_at({1, 2, 3, 103, 104}), 10.0, 200.0);
  REQUIRE(p.size() == 4);
  CHECK(p[0].kind == PeriodKind::light);
  CHECK(p[0].end == 13.0);
  CHECK(p[1].kind == PeriodKind::dark);
  CHECK(p[1].start == 13.0);
  CHECK(p[1].end == 103.0);
  CHECK_FALSE(p[1].censored);
  CHECK(p[2].kind == PeriodKind::light);
  CHECK(p[2].start == 103.0);
  CHECK(p[2].end == 114.0);
  CHECK(p[3].kind == PeriodKind::dark);
  CHECK(p[0].censored);
  CHECK(p[3].censored);
}

TEST_CASE("undetected records do not count as clicks") {
  auto recs = clicks_at({50, 60});
  recs[1].detected = false;
  const auto p = segment_periods(recs, 5.0, 100.0);
  REQUIRE(p.size() == 3);
  CHECK(p[1].start == 50.0);
  CHECK(p[1].end == 55.0);
}

TEST_CASE("segmentation is a partition of [0, t_end]") {
  std::mt19937_64 rng(51);
  std::uniform_real_distribution<double> u(0.0, 1000.0);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> t(std::size_t(rep % 17));
    for (auto& x : t) x = u(rng);
    std::sort(t.begin(), t.end());
    const auto p = segment_periods(clicks_at(t), 25.0, 1000.0);
    double total = 0.0;
    double cursor = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      CHECK(p[i].start == cursor);
      CHECK(p[i].end >= p[i].start);
      if (i > 0) CHECK(p[i].kind != p[i - 1].kind);
      total += p[i].end - p[i].start;
      cursor = p[i].end;
    }
    CHECK(total == doctest::Approx(1000.0));
  }
}

TEST_CASE("Poisson clicks open a false dark period with probability e^-5 per gap") {
  Rng rng(52);
  const double t_cav = 1.0;
  std::vector<double> t;
  double now = 0.0;
  for (;;) {
    now += -std::log(rng.uniform_open()) * t_cav;
    if (now > 1e6) break;
    t.push_back(now);
  }
  const auto p = segment_periods(clicks_at(t), 5 * t_cav, 1e6);
  const double darks = double(std::count_if(p.begin(), p.end(), [](const Period& x) { return x.kind == PeriodKind::dark; }));
  const double rate = darks / double(t.size());
  const double expect = std::exp(-5.0);
  CHECK(expect == doctest::Approx(0.0067).epsilon(0.01));
  CHECK(std::abs(rate - expect) < 3 * std::sqrt(expect / double(t.size())));
}

TEST_CASE("period statistics") {
  const std::vector<std::vector<PhotonRecord>> det = {clicks_at({10, 12, 14, 500, 503, 900})};
  auto periods = segment_periods(det[0], 20.0, 1000.0);
  const TelegraphAnalysis a = analyse_periods(periods, det, 20.0);
  CHECK(a.n_light == 2);
  CHECK(a.n_dark == 2);
  CHECK(a.t_light_est == doctest::Approx((23.0 + 20.0) / 2));
  CHECK(a.t_dark_est == doctest::Approx((500 - 34 + 900 - 523) / 2.0));
  CHECK(a.t_cav_est == doctest::Approx((2 + 2 + 3) / 3.0));
  CHECK(a.low_confidence);
  CHECK_FALSE(a.no_clicks);
}

TEST_CASE("telegraph without the laser never clicks") {
  testing::WarningCapture cap;
  SystemParams p = SystemParams::telegraph_defaults();
  p.omega_l = 0.0;
  const TelegraphRun run = telegraph_experiment(p, 20000.0, 2, 3);
  CHECK(run.analysis.no_clicks);
  CHECK(run.analysis.low_confidence);
  REQUIRE(run.analysis.periods.size() == 2);
  for (const auto& per : run.analysis.periods) {
    CHECK(per.kind == PeriodKind::dark);
    CHECK(per.end - per.start == 20000.0);
  }
}

TEST_CASE("default dark threshold") {
  const SystemParams p = SystemParams::telegraph_defaults();
  const TelegraphTimescales ts = telegraph_timescales(p);
  const double th = default_dark_threshold(p);
  CHECK(th >= 5 * ts.t_cav);
  CHECK(th == doctest::Approx(std::max(5.0, std::log(100 * ts.t_light / ts.t_cav)) * ts.t_cav));
}

TEST_CASE("short telegraph run is reproducible and consistent") {
  testing::WarningCapture cap;
  const SystemParams p = SystemParams::telegraph_defaults();
  const TelegraphRun a = telegraph_experiment(p, 3e5, 2, 11);
  const TelegraphRun b = telegraph_experiment(p, 3e5, 2, 11);
  CHECK(a.analysis.t_cav_est == b.analysis.t_cav_est);
  CHECK(a.analysis.periods.size() == b.analysis.periods.size());
  CHECK(a.detected.size() == 2);
  CHECK(a.analysis.t_cav_est > 0.0);
}

// --------------------------------------------------------- photon source

TEST_CASE("photon source without drive emits nothing") {
  SystemParams p = SystemParams::photon_source_defaults();
  RampSpec pulse;
  pulse.omega_max = 0.0;
  PhotonSourceOptions opt;
  opt.t_end = 100.0;
  const PhotonSourceResult r = photon_source_experiment(p, pulse, opt);
  CHECK(r.emission_prob == 0.0);
  CHECK(r.free_space_prob == 0.0);
}

TEST_CASE("photon source bookkeeping without repumping") {
  SystemParams p = SystemParams::photon_source_defaults();
  p.branching = 0.0;
  const PhotonSourceResult r = photon_source_experiment(p, RampSpec{});
  CHECK(r.emission_prob + r.free_space_prob + r.residual_excitation <= 1.0 + 1e-6);
  CHECK(r.emission_prob + r.free_space_prob + r.residual_excitation >= 1.0 - 1e-3);
}

TEST_CASE("photon source bookkeeping and efficiency") {
  // Decay back to |g> restarts the cycle, so only decays into |u> end it.
  const SystemParams p = SystemParams::photon_source_defaults();
  const PhotonSourceResult r = photon_source_experiment(p, RampSpec{});
  CHECK(r.emission_prob + (1 - p.branching) * r.free_space_prob + r.residual_excitation <= 1.0 + 1e-6);
  CHECK(r.emission_prob > 0.9);
  CHECK(r.free_space_prob < 0.1);
  CHECK(r.residual_excitation < 1e-3);
  CHECK(r.waveform.front().first == 0.0);
  CHECK(r.waveform.back().first == doctest::Approx(r.t_end));
}

// ------------------------------------------------------------------- rus

TEST_CASE("time-bin encoding") {
  const PureState zero = rus_encode(PureState::basis({2}, {0}));
  CHECK(std::abs(zero[flat_index({2, 2}, {0, 0})] - 1.0) < 1e-15);
  const PureState plus = rus_encode(PureState({2}, Vector::Constant(2, 1 / std::sqrt(2.0))));
  CHECK(std::abs(plus[0] - 1 / std::sqrt(2.0)) < 1e-15);
  CHECK(std::abs(plus[3] - 1 / std::sqrt(2.0)) < 1e-15);
  const PureState two = rus_encode(qubits(1, 2, 3, 4));
  CHECK(two.dims() == Dims{2, 2, 2, 2});
  for (std::size_t k = 0; k < 4; ++k) CHECK(two[k * 4 + k] == qubits(1, 2, 3, 4)[k]);
}

TEST_CASE("encoding is an isometry") {
  std::mt19937_64 rng(61);
  for (int i = 0; i < 20; ++i) {
    const PureState a = testing::random_state(rng, {2, 2});
    const PureState b = testing::random_state(rng, {2, 2});
    CHECK(std::abs(inner(rus_encode(a), rus_encode(b)) - inner(a, b)) < 1e-10);
  }
}

TEST_CASE("Born weights sum to one") {
  std::mt19937_64 rng(62);
  for (const PhotonBasis& basis : {default_photon_basis(), equal_superposition_basis()}) {
    for (int i = 0; i < 20; ++i) {
      const auto w = rus_outcome_probabilities(rus_encode(testing::random_state(rng, {2, 2})), basis);
      CHECK(std::abs(std::accumulate(w.begin(), w.end(), 0.0) - 1.0) < 1e-10);
    }
  }
}

TEST_CASE("hand projections with the default basis") {
  const PureState joint = rus_encode(plus_plus());
  const RusAttempt ent = attempt_with_outcome(joint, default_photon_basis(), 0);
  CHECK(ent.outcome_class == RusClass::entangling);
  CHECK(overlap2(ent.post_state, qubits(1, 0, 0, 1)) == doctest::Approx(1.0).epsilon(1e-12));
  const RusAttempt loc = attempt_with_outcome(joint, default_photon_basis(), 2);
  CHECK(loc.outcome_class == RusClass::local);
  CHECK(overlap2(loc.post_state, qubits(0, 1, 0, 0)) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(ent.herald);
  CHECK_FALSE(ent.trace_preserving);
}

TEST_CASE("a non-orthonormal basis is rejected") {
  PhotonBasis bad = default_photon_basis();
  bad[3] = bad[2];
  CHECK_THROWS_AS(validate_photon_basis(bad), std::invalid_argument);
  CHECK_THROWS_AS(rus_measure(rus_encode(plus_plus()), bad, 0.0, 0.0, 1), std::invalid_argument);
}

TEST_CASE("total loss never heralds without dark counts") {
  const PureState joint = rus_encode(plus_plus());
  for (std::uint64_t s = 0; s < 200; ++s) {
    const RusAttempt a = rus_measure(joint, default_photon_basis(), 1.0, 0.0, s);
    CHECK_FALSE(a.herald);
    CHECK(a.photons_lost == 2);
    CHECK(a.outcome_class == RusClass::failure);
    CHECK_FALSE(a.outcome_index.has_value());
  }
  std::size_t false_heralds = 0;
  for (std::uint64_t s = 0; s < 4000; ++s) false_heralds += rus_measure(joint, default_photon_basis(), 1.0, 0.25, s).false_herald;
  CHECK(std::abs(double(false_heralds) / 4000 - 0.25) < 3 * std::sqrt(0.25 * 0.75 / 4000));
}

TEST_CASE("herald rate at 50% loss matches the Born and loss product") {
  const PureState input = qubits(1, 2, 0.5, 1);
  const PureState joint = rus_encode(input);
  const auto w = rus_outcome_probabilities(joint, default_photon_basis());
  const std::size_t n = 10000;
  std::size_t heralds = 0;
  std::size_t entangling = 0;
  for (std::uint64_t s = 0; s < n; ++s) {
    const RusAttempt a = rus_measure(joint, default_photon_basis(), 0.5, 0.0, splitmix64(s));
    heralds += a.herald;
    entangling += a.outcome_class == RusClass::entangling;
  }
  auto within = [n](std::size_t count, double p) {
    return std::abs(double(count) / double(n) - p) < 3 * std::sqrt(p * (1 - p) / double(n));
  };
  CHECK(within(heralds, 0.25));
  CHECK(within(entangling, 0.25 * (w[0] + w[1])));
}

TEST_CASE("equal-superposition outcomes give a controlled-Z after correction") {
  std::mt19937_64 rng(63);
  Matrix cz = Matrix::Identity(4, 4);
  cz(3, 3) = -1;
  for (int i = 0; i < 20; ++i) {
    const PureState in = testing::random_state(rng, {2, 2});
    const RusGateResult r = rus_gate(in, 0.0, 3, 1000 + i, equal_superposition_basis());
    CHECK(r.success);
    CHECK(r.attempts_used == 1);
    const PureState ideal({2, 2}, cz * in.amplitudes());
    CHECK(overlap2(r.final_state, ideal) > 1 - 1e-10);
  }
  for (std::size_t k = 0; k < 4; ++k) {
    const RusAttempt a = attempt_with_outcome(rus_encode(plus_plus()), equal_superposition_basis(), k);
    CHECK(a.trace_preserving);
    CHECK(a.outcome_class == RusClass::entangling);
  }
}

TEST_CASE("repeat-until-success bookkeeping") {
  const RusGateResult lost = rus_gate(plus_plus(), 1.0, 1, 5);
  CHECK(lost.attempts_used == 1);
  CHECK_FALSE(lost.success);
  CHECK(lost.class_history == std::vector<RusClass>{RusClass::failure});
  CHECK_THROWS_AS(rus_gate(plus_plus(), 0.0, 0, 5), std::invalid_argument);
  std::size_t total = 0;
  for (std::uint64_t s = 0; s < 500; ++s) {
    const RusGateResult r = rus_gate(plus_plus(), 0.0, 4, s);
    CHECK(r.attempts_used <= 4);
    CHECK(r.class_history.size() == r.attempts_used);
    CHECK(r.final_state.is_normalized(1e-9));
    if (r.success) CHECK(r.class_history.back() == RusClass::entangling);
    total += r.attempts_used;
  }
  CHECK(total > 500);
}

TEST_CASE("local correction phases") {
  LocalCorrection c;
  c.a = 0.3;
  c.b = -1.1;
  const PureState out = c.apply(qubits(1, 1, 1, 1));
  CHECK(std::arg(out[1] / out[0]) == doctest::Approx(-1.1));
  CHECK(std::arg(out[2] / out[0]) == doctest::Approx(0.3));
  CHECK(std::arg(out[3] / out[0]) == doctest::Approx(-0.8));
}
