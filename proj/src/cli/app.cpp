#include "atomcav/cli/run.hpp"

#include "atomcav/errors.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

namespace atomcav::cli {

int main_entry(int argc, char** argv) {
  CLI::App app{"Cavity QED trajectory experiments"};
  app.name("atomcav");
  std::string experiment;
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> n_traj;
  std::optional<std::string> out;
  bool quiet = false;
  app.add_option("experiment", experiment, "Experiment to run")
      ->required()
      ->check(CLI::IsMember(experiment_names()));
  app.add_option("--config", config_path, "INI configuration file")->required();
  app.add_option("--seed", seed, "Master seed (overrides run.seed)");
  app.add_option("--out", out, "Output directory (default $ATOMCAV_OUT_DIR or .)");
  app.add_option("--n-traj", n_traj, "Number of trajectories or runs (overrides run.n_traj)");
  app.add_flag("--quiet", quiet, "Suppress warnings and the summary");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (quiet) set_warning_handler([](const std::string&) {});
  Overrides ov;
  ov.seed = seed;
  ov.n_traj = n_traj;
  if (out) ov.out_dir = *out;
  else if (const char* env = std::getenv("ATOMCAV_OUT_DIR"); env && *env) ov.out_dir = env;

  try {
    const RunConfig config = resolve_config(parse_experiment(experiment), read_ini(config_path), ov);
    const RunOutput result = run(config);
    if (!quiet) std::cout << result.summary;
    return kExitOk;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const RegimeError& e) {
    std::cerr << "config error: " << config_path << ": " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << config_path << ": " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::domain_error& e) {
    std::cerr << "config error: " << config_path << ": " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace atomcav::cli
