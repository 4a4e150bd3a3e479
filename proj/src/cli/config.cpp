#include "atomcav/cli/config.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace atomcav::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

enum class Kind { real, count, boolean, text, real_list, text_list };

struct KeySpec {
  std::string name;
  Kind kind;
  std::optional<std::string> fallback;  // empty: optional without default
  bool required = false;
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::vector<KeySpec> param_keys(const SystemParams& d) {
  return {{"params.g", Kind::real, fmt(d.g)},
          {"params.kappa", Kind::real, fmt(d.kappa)},
          {"params.gamma", Kind::real, fmt(d.gamma)},
          {"params.omega", Kind::real, fmt(d.omega)},
          {"params.delta", Kind::real, fmt(d.delta)},
          {"params.omega_m", Kind::real, fmt(d.omega_m)},
          {"params.omega_l", Kind::real, fmt(d.omega_l)},
          {"params.eta", Kind::real, fmt(d.eta)},
          {"params.n_max", Kind::count, std::to_string(d.n_max)},
          {"params.branching", Kind::real, fmt(d.branching)}};
}

std::vector<KeySpec> schema(Experiment e) {
  std::vector<KeySpec> keys = {{"run.seed", Kind::count, "1"}, {"run.threads", Kind::count, "0"}};
  auto add = [&](std::vector<KeySpec> more) { keys.insert(keys.end(), more.begin(), more.end()); };
  switch (e) {
    case Experiment::cavity_calc:
      add({{"cavity.length", Kind::real, std::nullopt, true},
           {"cavity.wavelength", Kind::real, std::nullopt, true},
           {"cavity.reflectivity", Kind::real, std::nullopt},
           {"cavity.finesse", Kind::real, std::nullopt},
           {"cavity.mode_volume", Kind::real, std::nullopt},
           {"cavity.dipole", Kind::real, std::nullopt},
           {"cavity.frequency", Kind::real, std::nullopt},
           {"cavity.gamma", Kind::real, std::nullopt}});
      break;
    case Experiment::scatter:
      add({{"scatter.signal_to_noise", Kind::real_list, "10"},
           {"scatter.eta", Kind::real_list, "1, 0.1, 0.01"},
           {"scatter.cooperativity", Kind::real_list, "10, 100"}});
      break;
    case Experiment::source: {
      add(param_keys(SystemParams::photon_source_defaults()));
      const RampSpec r;
      add({{"run.dt", Kind::real, "0.05"},
           {"pulse.shape", Kind::text, "sin2"},
           {"pulse.duration", Kind::real, fmt(r.duration)},
           {"pulse.omega_max", Kind::real, fmt(r.omega_max)},
           {"source.t_end", Kind::real, "0"},
           {"source.output_step", Kind::real, "0.25"}});
      break;
    }
    case Experiment::zeno_gate:
      add(param_keys(SystemParams::zeno_defaults()));
      add({{"run.dt", Kind::real, "0.05"},
           {"zeno.inputs", Kind::text_list, "01, bell"},
           {"zeno.check_truncation", Kind::boolean, "true"}});
      break;
    case Experiment::zeno_sweep:
      add(param_keys(SystemParams::zeno_defaults()));
      add({{"run.dt", Kind::real, "0.05"},
           {"zeno.inputs", Kind::text_list, "01, bell"},
           {"sweep.omega", Kind::real_list, std::nullopt},
           {"sweep.omega.min", Kind::real, "0.02"},
           {"sweep.omega.max", Kind::real, "0.3"},
           {"sweep.omega.count", Kind::count, "15"},
           {"sweep.delta", Kind::real_list, std::nullopt},
           {"sweep.delta.min", Kind::real, "0.25"},
           {"sweep.delta.max", Kind::real, "3"},
           {"sweep.delta.count", Kind::count, "12"}});
      break;
    case Experiment::telegraph:
      add(param_keys(SystemParams::telegraph_defaults()));
      add({{"run.dt", Kind::real, "0.05"},
           {"run.n_traj", Kind::count, "4"},
           {"run.t_end", Kind::real, "2e7"},
           {"telegraph.threshold", Kind::real, std::nullopt},
           {"telegraph.snapshot_interval", Kind::real, "0"},
           {"no_click.enabled", Kind::boolean, "false"},
           {"no_click.eta", Kind::real_list, "0.1, 0.5, 1"},
           {"no_click.windows", Kind::real_list, "0, 1, 2, 5, 10, 20, 50, 100, 150"},
           {"no_click.t_obs", Kind::real, "200"},
           {"no_click.n_traj", Kind::count, "1000"}});
      break;
    case Experiment::rus_gate:
      add({{"run.n_traj", Kind::count, "10000"},
           {"rus.loss_prob", Kind::real, "0"},
           {"rus.dark_count_prob", Kind::real, "0"},
           {"rus.max_attempts", Kind::count, "10"},
           {"rus.basis", Kind::text, "default"},
           {"rus.input", Kind::text, "++"}});
      break;
  }
  std::sort(keys.begin(), keys.end(), [](const KeySpec& a, const KeySpec& b) { return a.name < b.name; });
  return keys;
}

class Resolver {
 public:
  Resolver(const IniFile& ini, Experiment e) : ini_(ini), specs_(schema(e)) {
    for (const auto& [key, entry] : ini.entries) {
      const bool known = std::any_of(specs_.begin(), specs_.end(), [&](const KeySpec& s) { return s.name == key; });
      if (!known) {
        throw ConfigError(ini.source, entry.line,
                          "unknown key '" + key + "' for experiment " + to_string(e));
      }
    }
    for (const auto& s : specs_) {
      const auto it = ini.entries.find(s.name);
      if (it != ini.entries.end()) {
        values_[s.name] = it->second;
        check(s, it->second);
      } else if (s.fallback) {
        values_[s.name] = IniEntry{*s.fallback, 0};
      } else if (s.required) {
        throw ConfigError(ini.source, 0, "missing required key '" + s.name + "'");
      }
    }
  }

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  bool given(const std::string& key) const { return ini_.entries.count(key) != 0; }
  int line(const std::string& key) const { return has(key) ? values_.at(key).line : 0; }

  void set(const std::string& key, const std::string& value) { values_[key] = IniEntry{value, 0}; }

  double real(const std::string& key) const { return parse_real(values_.at(key)); }
  std::optional<double> optional_real(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    return real(key);
  }
  std::uint64_t count(const std::string& key) const { return parse_count(values_.at(key)); }
  bool boolean(const std::string& key) const { return parse_bool(values_.at(key)); }
  std::string text(const std::string& key) const { return trim(values_.at(key).value); }
  std::vector<double> real_list(const std::string& key) const {
    std::vector<double> out;
    for (const auto& item : split_list(values_.at(key).value)) out.push_back(parse_real({item, line(key)}));
    return out;
  }
  std::vector<std::string> text_list(const std::string& key) const { return split_list(values_.at(key).value); }

  std::vector<std::pair<std::string, std::string>> resolved() const {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& [k, v] : values_) out.emplace_back(k, trim(v.value));
    return out;
  }

  [[noreturn]] void fail(const std::string& key, const std::string& message) const {
    throw ConfigError(ini_.source, line(key), key + ": " + message);
  }

 private:
  void check(const KeySpec& s, const IniEntry& e) const {
    switch (s.kind) {
      case Kind::real: parse_real(e); break;
      case Kind::count: parse_count(e); break;
      case Kind::boolean: parse_bool(e); break;
      case Kind::real_list:
        for (const auto& item : split_list(e.value)) parse_real({item, e.line});
        break;
      case Kind::text:
      case Kind::text_list:
        if (trim(e.value).empty()) throw ConfigError(ini_.source, e.line, s.name + ": empty value");
        break;
    }
  }

  double parse_real(const IniEntry& e) const {
    const std::string v = trim(e.value);
    char* end = nullptr;
    errno = 0;
    const double x = std::strtod(v.c_str(), &end);
    if (v.empty() || *end != '\0' || errno == ERANGE || !std::isfinite(x)) {
      throw ConfigError(ini_.source, e.line, "expected a number, got '" + v + "'");
    }
    return x;
  }

  std::uint64_t parse_count(const IniEntry& e) const {
    const std::string v = trim(e.value);
    if (v.empty() || !std::all_of(v.begin(), v.end(), [](unsigned char c) { return std::isdigit(c); })) {
      throw ConfigError(ini_.source, e.line, "expected a non-negative integer, got '" + v + "'");
    }
    errno = 0;
    const unsigned long long x = std::strtoull(v.c_str(), nullptr, 10);
    if (errno == ERANGE) throw ConfigError(ini_.source, e.line, "integer out of range: '" + v + "'");
    return x;
  }

  bool parse_bool(const IniEntry& e) const {
    const std::string v = trim(e.value);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError(ini_.source, e.line, "expected true or false, got '" + v + "'");
  }

  const IniFile& ini_;
  std::vector<KeySpec> specs_;
  std::map<std::string, IniEntry> values_;
};

std::vector<double> grid(const Resolver& r, const std::string& base) {
  if (r.given(base)) {
    for (const char* sub : {".min", ".max", ".count"}) {
      if (r.given(base + sub)) r.fail(base + sub, "cannot be combined with an explicit list '" + base + "'");
    }
    auto values = r.real_list(base);
    if (values.empty()) r.fail(base, "empty grid");
    return values;
  }
  const double lo = r.real(base + ".min");
  const double hi = r.real(base + ".max");
  const auto n = r.count(base + ".count");
  if (n == 0) r.fail(base + ".count", "must be at least 1");
  if (n == 1) return {lo};
  if (!(hi > lo)) r.fail(base + ".max", "must exceed " + base + ".min");
  std::vector<double> out;
  for (std::uint64_t i = 0; i < n; ++i) out.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1));
  return out;
}

SystemParams read_params(const Resolver& r) {
  SystemParams p;
  p.g = r.real("params.g");
  p.kappa = r.real("params.kappa");
  p.gamma = r.real("params.gamma");
  p.omega = r.real("params.omega");
  p.delta = r.real("params.delta");
  p.omega_m = r.real("params.omega_m");
  p.omega_l = r.real("params.omega_l");
  p.eta = r.real("params.eta");
  p.n_max = r.count("params.n_max");
  p.branching = r.real("params.branching");
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    r.fail("params", e.what());
  }
  return p;
}

void require_positive(const Resolver& r, const std::string& key) {
  if (!(r.real(key) > 0.0)) r.fail(key, "must be positive");
}

}  // namespace

ConfigError::ConfigError(const std::string& source, int line, const std::string& message)
    : std::runtime_error(source + (line > 0 ? ":" + std::to_string(line) : "") + ": " + message), line_(line) {}

IniFile parse_ini(const std::string& text, const std::string& source) {
  IniFile ini;
  ini.source = source;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string s = raw;
    const auto comment = s.find_first_of("#;");
    if (comment != std::string::npos) s.erase(comment);
    s = trim(s);
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigError(source, line, "unterminated section header");
      section = trim(s.substr(1, s.size() - 2));
      if (section.empty()) throw ConfigError(source, line, "empty section name");
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError(source, line, "expected 'key = value'");
    const std::string key = trim(s.substr(0, eq));
    if (key.empty()) throw ConfigError(source, line, "missing key");
    for (unsigned char c : key) {
      if (!(std::isalnum(c) || c == '_' || c == '.')) throw ConfigError(source, line, "invalid key '" + key + "'");
    }
    const std::string full = section.empty() ? key : section + "." + key;
    if (ini.entries.count(full)) {
      throw ConfigError(source, line,
                        "duplicate key '" + full + "' (first set on line " + std::to_string(ini.entries[full].line) + ")");
    }
    ini.entries[full] = IniEntry{trim(s.substr(eq + 1)), line};
  }
  return ini;
}

IniFile read_ini(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), 0, "cannot open config file");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_ini(text.str(), path.string());
}

const char* to_string(Experiment e) {
  switch (e) {
    case Experiment::cavity_calc: return "cavity-calc";
    case Experiment::scatter: return "scatter";
    case Experiment::source: return "source";
    case Experiment::zeno_gate: return "zeno-gate";
    case Experiment::zeno_sweep: return "zeno-sweep";
    case Experiment::telegraph: return "telegraph";
    case Experiment::rus_gate: return "rus-gate";
  }
  return "?";
}

std::vector<std::string> experiment_names() {
  return {"cavity-calc", "scatter", "source", "zeno-gate", "zeno-sweep", "telegraph", "rus-gate"};
}

Experiment parse_experiment(const std::string& name) {
  for (auto e : {Experiment::cavity_calc, Experiment::scatter, Experiment::source, Experiment::zeno_gate,
                 Experiment::zeno_sweep, Experiment::telegraph, Experiment::rus_gate}) {
    if (name == to_string(e)) return e;
  }
  throw ConfigError("<command line>", 0, "unknown experiment '" + name + "'");
}

PureState parse_qubit_label(const std::string& label) {
  const double s = 1.0 / std::sqrt(2.0);
  if (label == "bell") {
    return s * (PureState::basis({2, 2}, {0, 0}) + PureState::basis({2, 2}, {1, 1}));
  }
  if (label.size() != 2) throw std::invalid_argument("unknown qubit label '" + label + "'");
  auto one = [&](char c) {
    Vector v(2);
    switch (c) {
      case '0': v << 1, 0; break;
      case '1': v << 0, 1; break;
      case '+': v << s, s; break;
      case '-': v << s, -s; break;
      default: throw std::invalid_argument("unknown qubit label '" + label + "'");
    }
    return PureState({2}, v);
  };
  return kron(one(label[0]), one(label[1]));
}

PhotonBasis parse_basis(const std::string& name) {
  if (name == "default") return default_photon_basis();
  if (name == "equal") return equal_superposition_basis();
  throw std::invalid_argument("unknown photon basis '" + name + "' (use default or equal)");
}

RunConfig resolve_config(Experiment experiment, const IniFile& ini, const Overrides& overrides) {
  Resolver r(ini, experiment);
  if (overrides.seed) r.set("run.seed", std::to_string(*overrides.seed));
  if (overrides.n_traj) {
    if (!r.has("run.n_traj")) {
      throw ConfigError("<command line>", 0, std::string("--n-traj is not used by ") + to_string(experiment));
    }
    r.set("run.n_traj", std::to_string(*overrides.n_traj));
  }

  RunConfig c;
  c.experiment = experiment;
  c.config_source = ini.source;
  c.master_seed = r.count("run.seed");
  c.threads = static_cast<unsigned>(r.count("run.threads"));
  if (overrides.out_dir) c.out_dir = *overrides.out_dir;
  if (r.has("run.dt")) {
    require_positive(r, "run.dt");
    c.dt = r.real("run.dt");
  }
  if (r.has("run.n_traj")) {
    c.n_traj = r.count("run.n_traj");
    if (c.n_traj == 0) r.fail("run.n_traj", "must be at least 1");
  }
  if (r.has("run.t_end")) {
    require_positive(r, "run.t_end");
    c.t_end = r.real("run.t_end");
  }
  if (r.has("params.g")) c.params = read_params(r);

  switch (experiment) {
    case Experiment::cavity_calc: {
      for (const char* k : {"cavity.length", "cavity.wavelength"}) require_positive(r, k);
      c.cavity.length = r.real("cavity.length");
      c.cavity.wavelength = r.real("cavity.wavelength");
      c.cavity.reflectivity = r.optional_real("cavity.reflectivity");
      c.cavity.finesse = r.optional_real("cavity.finesse");
      c.cavity.mode_volume = r.optional_real("cavity.mode_volume");
      c.cavity.dipole = r.optional_real("cavity.dipole");
      c.cavity.frequency = r.optional_real("cavity.frequency");
      c.cavity_gamma = r.optional_real("cavity.gamma");
      if (!c.cavity.reflectivity && !c.cavity.finesse) {
        throw ConfigError(ini.source, 0, "cavity-calc needs cavity.reflectivity or cavity.finesse");
      }
      try {
        c.cavity.validate();
      } catch (const std::invalid_argument& e) {
        r.fail("cavity", e.what());
      }
      break;
    }
    case Experiment::scatter:
      c.signal_to_noise = r.real_list("scatter.signal_to_noise");
      c.eta_values = r.real_list("scatter.eta");
      c.cooperativities = r.real_list("scatter.cooperativity");
      for (double e : c.eta_values)
        if (!(e > 0.0 && e <= 1.0)) r.fail("scatter.eta", "values must lie in (0, 1]");
      for (double v : c.signal_to_noise)
        if (!(v > 0.0)) r.fail("scatter.signal_to_noise", "values must be positive");
      for (double v : c.cooperativities)
        if (!(v > 0.0)) r.fail("scatter.cooperativity", "values must be positive");
      break;
    case Experiment::source: {
      const std::string shape = r.text("pulse.shape");
      if (shape == "sin2") c.pulse.shape = RampSpec::Shape::sin2;
      else if (shape == "linear") c.pulse.shape = RampSpec::Shape::linear;
      else r.fail("pulse.shape", "expected sin2 or linear");
      require_positive(r, "pulse.duration");
      c.pulse.duration = r.real("pulse.duration");
      c.pulse.omega_max = r.real("pulse.omega_max");
      c.t_end = r.real("source.t_end");
      if (c.t_end < 0.0) r.fail("source.t_end", "must be non-negative");
      require_positive(r, "source.output_step");
      c.output_step = r.real("source.output_step");
      break;
    }
    case Experiment::zeno_gate:
    case Experiment::zeno_sweep:
      c.gate_inputs = r.text_list("zeno.inputs");
      for (const auto& label : c.gate_inputs) {
        try {
          parse_qubit_label(label);
        } catch (const std::invalid_argument& e) {
          r.fail("zeno.inputs", e.what());
        }
      }
      if (experiment == Experiment::zeno_gate) {
        c.check_truncation = r.boolean("zeno.check_truncation");
      } else {
        c.omega_grid = grid(r, "sweep.omega");
        c.delta_grid = grid(r, "sweep.delta");
      }
      break;
    case Experiment::telegraph:
      c.threshold = r.optional_real("telegraph.threshold");
      if (c.threshold && !(*c.threshold > 0.0)) r.fail("telegraph.threshold", "must be positive");
      c.snapshot_interval = r.real("telegraph.snapshot_interval");
      if (c.snapshot_interval < 0.0) r.fail("telegraph.snapshot_interval", "must be non-negative");
      c.no_click = r.boolean("no_click.enabled");
      c.no_click_etas = r.real_list("no_click.eta");
      for (double e : c.no_click_etas)
        if (!(e >= 0.0 && e <= 1.0)) r.fail("no_click.eta", "values must lie in [0, 1]");
      c.no_click_windows = r.real_list("no_click.windows");
      for (std::size_t i = 1; i < c.no_click_windows.size(); ++i)
        if (!(c.no_click_windows[i] > c.no_click_windows[i - 1])) r.fail("no_click.windows", "must increase");
      c.no_click_t_obs = r.real("no_click.t_obs");
      if (!c.no_click_windows.empty() && !(c.no_click_t_obs >= c.no_click_windows.back())) {
        r.fail("no_click.t_obs", "must be at least the largest window");
      }
      c.no_click_n_traj = r.count("no_click.n_traj");
      if (c.no_click && c.params.omega_l == 0.0) r.fail("params.omega_l", "no-click analysis needs a nonzero drive");
      break;
    case Experiment::rus_gate:
      c.loss_prob = r.real("rus.loss_prob");
      c.dark_count_prob = r.real("rus.dark_count_prob");
      if (!(c.loss_prob >= 0.0 && c.loss_prob <= 1.0)) r.fail("rus.loss_prob", "must lie in [0, 1]");
      if (!(c.dark_count_prob >= 0.0 && c.dark_count_prob <= 1.0)) r.fail("rus.dark_count_prob", "must lie in [0, 1]");
      c.max_attempts = r.count("rus.max_attempts");
      if (c.max_attempts == 0) r.fail("rus.max_attempts", "must be at least 1");
      c.basis = r.text("rus.basis");
      c.rus_input = r.text("rus.input");
      try {
        parse_basis(c.basis);
      } catch (const std::invalid_argument& e) {
        r.fail("rus.basis", e.what());
      }
      try {
        parse_qubit_label(c.rus_input);
      } catch (const std::invalid_argument& e) {
        r.fail("rus.input", e.what());
      }
      break;
  }
  c.resolved = r.resolved();
  return c;
}

}  // namespace atomcav::cli
