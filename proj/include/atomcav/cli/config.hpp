#pragma once

// INI-style run configuration: "[section]" headers, "key = value" lines,
// dotted keys for nesting, '#' or ';' comments. Keys are resolved against a
// per-experiment schema; anything else is rejected with its line number.

#include "atomcav/models.hpp"
#include "atomcav/protocols/rus.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace atomcav::cli {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& source, int line, const std::string& message);
  int line() const { return line_; }

 private:
  int line_;
};

struct IniEntry {
  std::string value;
  int line = 0;
};

/// Flat map from "section.key" to its value and source line.
struct IniFile {
  std::string source;
  std::map<std::string, IniEntry> entries;
};

IniFile parse_ini(const std::string& text, const std::string& source = "<config>");
IniFile read_ini(const std::filesystem::path& path);

enum class Experiment { cavity_calc, scatter, source, zeno_gate, zeno_sweep, telegraph, rus_gate };

const char* to_string(Experiment e);
/// Throws ConfigError for unknown names.
Experiment parse_experiment(const std::string& name);
std::vector<std::string> experiment_names();

struct RunConfig {
  Experiment experiment = Experiment::zeno_gate;
  std::string config_source;
  /// Every key the experiment understands with its final value, in key order.
  std::vector<std::pair<std::string, std::string>> resolved;

  std::uint64_t master_seed = 1;
  unsigned threads = 0;
  std::size_t n_traj = 0;
  double t_end = 0.0;
  double dt = 0.05;
  std::filesystem::path out_dir = ".";

  SystemParams params;
  CavityGeometry cavity;
  std::optional<double> cavity_gamma;  // rad/s

  std::vector<double> signal_to_noise;
  std::vector<double> eta_values;
  std::vector<double> cooperativities;

  RampSpec pulse;
  double output_step = 0.25;

  std::vector<std::string> gate_inputs;
  bool check_truncation = false;
  std::vector<double> omega_grid;
  std::vector<double> delta_grid;

  std::optional<double> threshold;
  double snapshot_interval = 0.0;
  bool no_click = false;
  std::vector<double> no_click_etas;
  std::vector<double> no_click_windows;  // units of T_cav
  double no_click_t_obs = 0.0;           // units of T_cav
  std::size_t no_click_n_traj = 0;

  double loss_prob = 0.0;
  double dark_count_prob = 0.0;
  std::size_t max_attempts = 1;
  std::string basis = "default";
  std::string rus_input = "++";
};

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> n_traj;
  std::optional<std::filesystem::path> out_dir;
};

/// Validates every key of `ini` against the experiment's schema, applies
/// command-line overrides and checks required fields.
RunConfig resolve_config(Experiment experiment, const IniFile& ini, const Overrides& overrides = {});

/// Two-qubit state from a label: "bell" or two characters from {0, 1, +, -}.
PureState parse_qubit_label(const std::string& label);
PhotonBasis parse_basis(const std::string& name);

}  // namespace atomcav::cli
