#include "atomcav/cli/run.hpp"

#include "atomcav/errors.hpp"
#include "atomcav/protocols/photon_source.hpp"
#include "atomcav/protocols/rus.hpp"
#include "atomcav/protocols/telegraph.hpp"
#include "atomcav/protocols/zeno_gate.hpp"
#include "atomcav/rng.hpp"
#include "atomcav/trajectory.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace atomcav::cli {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

class Csv {
 public:
  Csv(const fs::path& path, const std::string& header) : path_(path), out_(path, std::ios::binary) {
    if (!out_) throw std::runtime_error("cannot write " + path.string());
    out_ << header << '\n';
  }

  template <class... Cells>
  void row(const Cells&... cells) {
    std::string line;
    ((line += cell(cells), line += ','), ...);
    line.pop_back();
    out_ << line << '\n';
  }

  const fs::path& path() const { return path_; }

 private:
  static std::string cell(double v) { return format_number(v); }
  static std::string cell(const std::string& s) { return s; }
  static std::string cell(const char* s) { return s; }
  static std::string cell(std::size_t v) { return std::to_string(v); }
  static std::string cell(bool v) { return v ? "1" : "0"; }

  fs::path path_;
  std::ofstream out_;
};

// Collects results, files and summary lines for one experiment.
class Report {
 public:
  explicit Report(const RunConfig& c) : config_(c) {
    fs::create_directories(c.out_dir);
    const std::string name = to_string(c.experiment);
    json_["experiment"] = name;
    json_["master_seed"] = c.master_seed;
    json_["config_file"] = c.config_source;
    json cfg = json::object();
    for (const auto& [k, v] : c.resolved) cfg[k] = v;
    json_["config"] = cfg;
    json_["results"] = json::object();
    line("experiment: " + name);
    line("master_seed: " + std::to_string(c.master_seed));
    line("config (" + c.config_source + "):");
    for (const auto& [k, v] : c.resolved) line("  " + k + " = " + v);
    line("results:");
  }

  fs::path file(const std::string& name) {
    const fs::path p = config_.out_dir / name;
    files_.push_back(p);
    return p;
  }

  json& results() { return json_["results"]; }
  void line(const std::string& s) { summary_ += s + '\n'; }
  void result(const std::string& label, double v) { line("  " + label + " = " + format_number(v)); }

  RunOutput finish() {
    const std::string base = std::string(to_string(config_.experiment));
    const fs::path json_path = file(base + ".json");
    const fs::path summary_path = file(base + "_summary.txt");
    json names = json::array();
    for (const auto& f : files_) names.push_back(f.filename().string());
    json_["files"] = names;
    std::ofstream(json_path, std::ios::binary) << json_.dump(2) << '\n';
    std::ofstream(summary_path, std::ios::binary) << summary_;
    return {files_, summary_};
  }

 private:
  const RunConfig& config_;
  json json_;
  std::string summary_;
  std::vector<fs::path> files_;
};

json gate_json(const std::string& label, const GateOutcome& o) {
  json j;
  j["input_label"] = label;
  j["conditional_fidelity"] = o.conditional_fidelity;
  j["success_prob"] = o.success_prob;
  j["gate_time"] = o.gate_time;
  if (o.truncation_shift) j["truncation_shift"] = *o.truncation_shift;
  return j;
}

constexpr const char* kGateHeader = "omega_over_g,delta_over_g,input_label,conditional_fidelity,success_prob,gate_time";

std::vector<GateInput> gate_inputs(const RunConfig& c) {
  std::vector<GateInput> out;
  for (const auto& label : c.gate_inputs) out.push_back({label, parse_qubit_label(label)});
  return out;
}

void run_cavity_calc(const RunConfig& c, Report& rep) {
  const CavityGeometry& g = c.cavity;
  const double l = *g.length;
  const double lambda = *g.wavelength;
  const double finesse = g.finesse ? *g.finesse : finesse_from_reflectivity(*g.reflectivity);
  const double kappa = kappa_from_finesse(l, finesse);
  const double q = quality_factor(l, finesse, lambda);
  const double kappa_q = kappa_from_q(q, lambda);
  const double rel = std::abs(kappa - kappa_q) / kappa;
  std::optional<double> coupling;
  std::optional<double> coop;
  if (g.mode_volume && g.dipole) coupling = coupling_g(g);
  if (coupling && c.cavity_gamma) coop = cooperativity(*coupling, kappa, *c.cavity_gamma);

  auto opt = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string(); };
  Csv csv(rep.file("cavity_calc.csv"), "length,wavelength,finesse,kappa,quality_factor,kappa_from_q,g,cooperativity");
  csv.row(std::string("m"), std::string("m"), std::string("1"), std::string("rad/s"), std::string("1"),
          std::string("rad/s"), std::string("rad/s"), std::string("1"));
  csv.row(l, lambda, finesse, kappa, q, kappa_q, opt(coupling), opt(coop));

  json& r = rep.results();
  r["finesse"] = finesse;
  r["kappa"] = kappa;
  r["quality_factor"] = q;
  r["kappa_from_q"] = kappa_q;
  r["cross_identity_relative_error"] = rel;
  if (coupling) r["g"] = *coupling;
  if (coop) r["cooperativity"] = *coop;
  rep.result("finesse", finesse);
  rep.result("kappa [rad/s]", kappa);
  rep.result("Q", q);
  rep.result("kappa from Q [rad/s]", kappa_q);
  rep.result("relative mismatch", rel);
  if (coupling) rep.result("g [rad/s]", *coupling);
  if (coop) rep.result("C", *coop);
}

void run_scatter(const RunConfig& c, Report& rep) {
  Csv csv(rep.file("scatter.csv"), "signal_to_noise,eta,cooperativity,scattering_count");
  json rows = json::array();
  for (double s : c.signal_to_noise) {
    for (double co : c.cooperativities) {
      for (double e : c.eta_values) {
        const double m = scattering_count(s, e, co);
        csv.row(s, e, co, m);
        rows.push_back({{"signal_to_noise", s}, {"eta", e}, {"cooperativity", co}, {"scattering_count", m}});
        rep.line("  M(S=" + format_number(s) + ", eta=" + format_number(e) + ", C=" + format_number(co) +
                 ") = " + format_number(m));
      }
    }
  }
  rep.results()["table"] = rows;
}

void run_source(const RunConfig& c, Report& rep) {
  PhotonSourceOptions opt;
  opt.t_end = c.t_end;
  opt.max_dt = c.dt;
  opt.output_step = c.output_step;
  const PhotonSourceResult r = photon_source_experiment(c.params, c.pulse, opt);
  Csv csv(rep.file("source_waveform.csv"), "time,cavity_flux");
  for (const auto& [t, f] : r.waveform) csv.row(t, f);
  json& j = rep.results();
  j["emission_prob"] = r.emission_prob;
  j["free_space_prob"] = r.free_space_prob;
  j["residual_excitation"] = r.residual_excitation;
  j["t_end"] = r.t_end;
  j["cooperativity"] = cooperativity(c.params.g, c.params.kappa, c.params.gamma);
  rep.result("emission_prob", r.emission_prob);
  rep.result("free_space_prob", r.free_space_prob);
  rep.result("residual_excitation", r.residual_excitation);
}

void run_zeno_gate(const RunConfig& c, Report& rep) {
  ZenoGateOptions opt;
  opt.max_dt = c.dt;
  opt.check_truncation = c.check_truncation;
  const PhaseGate ideal = ideal_phase_gate(c.params.omega, c.params.delta);
  Csv csv(rep.file("zeno_gate.csv"), kGateHeader);
  json outs = json::array();
  for (const auto& in : gate_inputs(c)) {
    const GateOutcome o = zeno_gate_experiment(c.params, in.state, opt);
    csv.row(c.params.omega, c.params.delta, in.label, o.conditional_fidelity, o.success_prob, o.gate_time);
    outs.push_back(gate_json(in.label, o));
    rep.line("  " + in.label + ": conditional_fidelity = " + format_number(o.conditional_fidelity) +
             ", success_prob = " + format_number(o.success_prob));
    if (o.truncation_shift) rep.line("    truncation shift = " + format_number(*o.truncation_shift));
  }
  json& j = rep.results();
  j["gate_time"] = ideal.gate_time;
  j["delta_eff"] = ideal.delta_eff;
  j["outcomes"] = outs;
  rep.result("gate_time", ideal.gate_time);
}

void run_zeno_sweep(const RunConfig& c, Report& rep) {
  ZenoGateOptions opt;
  opt.max_dt = c.dt;
  const SweepResult s = sweep_gate(c.params, c.omega_grid, c.delta_grid, gate_inputs(c), opt, c.threads);
  Csv csv(rep.file("zeno_sweep.csv"), kGateHeader);
  for (const auto& r : s.rows) {
    csv.row(r.omega, r.delta, r.input_label, r.outcome.conditional_fidelity, r.outcome.success_prob,
            r.outcome.gate_time);
  }
  json& j = rep.results();
  j["grid_points"] = c.omega_grid.size() * c.delta_grid.size();
  j["skipped_points"] = s.skipped;
  rep.result("skipped grid points (|Omega| >= |Delta|)", static_cast<double>(s.skipped));
  if (s.best) {
    json best;
    best["omega_over_g"] = s.best->omega;
    best["delta_over_g"] = s.best->delta;
    best["score"] = s.best->score;
    json at = json::array();
    for (const auto& r : s.rows) {
      if (r.omega == s.best->omega && r.delta == s.best->delta) at.push_back(gate_json(r.input_label, r.outcome));
    }
    best["outcomes"] = at;
    j["best"] = best;
    rep.line("  best point: Omega/g = " + format_number(s.best->omega) + ", Delta/g = " +
             format_number(s.best->delta) + ", min_input(F*P) = " + format_number(s.best->score));
  }
}

void run_telegraph(const RunConfig& c, Report& rep) {
  TelegraphOptions opt;
  opt.threshold = c.threshold;
  opt.max_dt = c.dt;
  opt.snapshot_interval = c.snapshot_interval;
  opt.threads = c.threads;
  const TelegraphRun tr = telegraph_experiment(c.params, c.t_end, c.n_traj, c.master_seed, opt);
  const SystemModel model = build_telegraph_system(c.params);

  Csv clicks(rep.file("telegraph_clicks.csv"), "trajectory_index,time,channel,detected");
  for (std::size_t i = 0; i < tr.detected.size(); ++i) {
    for (const auto& r : tr.detected[i]) clicks.row(i, r.time, model.channels[r.channel].label, r.detected);
  }
  Csv periods(rep.file("telegraph_periods.csv"), "trajectory_index,kind,start,end");
  for (const auto& p : tr.analysis.periods) periods.row(p.trajectory_index, std::string(to_string(p.kind)), p.start, p.end);

  const TelegraphAnalysis& a = tr.analysis;
  json& j = rep.results();
  j["threshold"] = a.threshold_used;
  j["t_cav_est"] = a.t_cav_est;
  j["t_dark_est"] = a.t_dark_est;
  j["t_light_est"] = a.t_light_est;
  j["n_light"] = a.n_light;
  j["n_dark"] = a.n_dark;
  j["low_confidence"] = a.low_confidence;
  j["no_clicks"] = a.no_clicks;
  if (a.dark_fidelity) j["dark_fidelity"] = *a.dark_fidelity;
  j["dark_fidelity_samples"] = a.dark_samples;
  j["dark_fidelity_floor"] = a.dark_fidelity_floor;
  rep.result("threshold", a.threshold_used);
  rep.result("T_cav estimate", a.t_cav_est);
  rep.result("T_dark estimate", a.t_dark_est);
  rep.result("T_light estimate", a.t_light_est);
  rep.line("  periods used: " + std::to_string(a.n_light) + " light, " + std::to_string(a.n_dark) + " dark" +
           (a.low_confidence ? " (low confidence)" : ""));
  if (a.dark_fidelity) rep.result("mean |a01> fidelity in long dark periods", *a.dark_fidelity);
  if (c.params.omega_l != 0.0) {
    const TelegraphTimescales ts = telegraph_timescales(c.params);
    j["analytic"] = {{"t_cav", ts.t_cav}, {"t_dark", ts.t_dark}, {"t_light", ts.t_light}};
    rep.result("analytic T_cav", ts.t_cav);
    rep.result("analytic T_dark", ts.t_dark);
    rep.result("analytic T_light", ts.t_light);
  }

  if (c.no_click) {
    const TelegraphTimescales ts = telegraph_timescales(c.params);
    std::vector<double> windows;
    for (double w : c.no_click_windows) windows.push_back(w * ts.t_cav);
    NoClickOptions nc;
    nc.t_obs = c.no_click_t_obs * ts.t_cav;
    nc.dt = stable_step(model, c.dt);
    nc.keep = {0, 1};
    nc.threads = c.threads;
    const MixedState rho0 = qubit_mixture_with_vacuum(c.params.n_max);
    const auto points = conditional_no_click_fidelity(model, rho0, c.no_click_etas, windows, c.no_click_n_traj,
                                                      splitmix64(c.master_seed ^ 0x6e6f636c69636bULL),
                                                      singlet_a01(), nc);
    Csv csv(rep.file("no_click_fidelity.csv"), "window_t,eta,fidelity,n_selected");
    json pts = json::array();
    for (const auto& p : points) {
      csv.row(p.window, p.eta, p.fidelity ? format_number(*p.fidelity) : std::string(), p.n_selected);
      json q{{"window_t", p.window}, {"eta", p.eta}, {"n_selected", p.n_selected}};
      q["fidelity"] = p.fidelity ? json(*p.fidelity) : json(nullptr);
      pts.push_back(q);
    }
    j["no_click"] = {{"t_obs", nc.t_obs}, {"n_traj", c.no_click_n_traj}, {"points", pts}};
    for (double eta : c.no_click_etas) {
      double best = -1.0;
      for (const auto& p : points)
        if (p.eta == eta && p.fidelity) best = std::max(best, *p.fidelity);
      if (best >= 0.0) rep.result("max no-click fidelity at eta=" + format_number(eta), best);
    }
  }
}

void run_rus(const RunConfig& c, Report& rep) {
  const PhotonBasis basis = parse_basis(c.basis);
  const PureState input = parse_qubit_label(c.rus_input);
  const PureState joint = rus_encode(input);
  const auto born = rus_outcome_probabilities(joint, basis);

  std::array<std::size_t, 4> counts{};
  std::size_t lost = 0;
  std::size_t heralds = 0;
  std::size_t successes = 0;
  std::size_t attempts_total = 0;
  Csv runs(rep.file("rus_runs.csv"), "run,attempts_used,success,history");
  for (std::size_t i = 0; i < c.n_traj; ++i) {
    const std::uint64_t seed = trajectory_seed(c.master_seed, i);
    const RusAttempt first = rus_measure(joint, basis, c.loss_prob, c.dark_count_prob, seed);
    if (first.outcome_index) ++counts[*first.outcome_index];
    else ++lost;
    if (first.herald) ++heralds;
    const RusGateResult g = rus_gate(input, c.loss_prob, c.max_attempts, splitmix64(seed), basis, c.dark_count_prob);
    attempts_total += g.attempts_used;
    if (g.success) ++successes;
    std::string hist;
    for (auto cls : g.class_history) hist += std::string(hist.empty() ? "" : ";") + to_string(cls);
    runs.row(i, g.attempts_used, g.success, hist);
  }
  const double n = static_cast<double>(c.n_traj);
  const double keep = (1.0 - c.loss_prob) * (1.0 - c.loss_prob);
  Csv out(rep.file("rus_outcomes.csv"), "outcome_index,born_weight,expected_frequency,count,frequency");
  json outcomes = json::array();
  for (std::size_t k = 0; k < 4; ++k) {
    out.row(k, born[k], keep * born[k], counts[k], static_cast<double>(counts[k]) / n);
    outcomes.push_back({{"outcome_index", k}, {"born_weight", born[k]}, {"count", counts[k]}});
    rep.line("  outcome " + std::to_string(k) + ": Born weight " + format_number(born[k]) + ", observed " +
             format_number(static_cast<double>(counts[k]) / n));
  }
  json& j = rep.results();
  j["outcomes"] = outcomes;
  j["lost"] = lost;
  j["herald_rate"] = static_cast<double>(heralds) / n;
  j["success_rate"] = static_cast<double>(successes) / n;
  j["mean_attempts"] = static_cast<double>(attempts_total) / n;
  rep.result("herald rate (first attempt)", static_cast<double>(heralds) / n);
  rep.result("gate success rate", static_cast<double>(successes) / n);
  rep.result("mean attempts", static_cast<double>(attempts_total) / n);
}

}  // namespace

RunOutput run(const RunConfig& config) {
  Report rep(config);
  switch (config.experiment) {
    case Experiment::cavity_calc: run_cavity_calc(config, rep); break;
    case Experiment::scatter: run_scatter(config, rep); break;
    case Experiment::source: run_source(config, rep); break;
    case Experiment::zeno_gate: run_zeno_gate(config, rep); break;
    case Experiment::zeno_sweep: run_zeno_sweep(config, rep); break;
    case Experiment::telegraph: run_telegraph(config, rep); break;
    case Experiment::rus_gate: run_rus(config, rep); break;
  }
  return rep.finish();
}

}  // namespace atomcav::cli
