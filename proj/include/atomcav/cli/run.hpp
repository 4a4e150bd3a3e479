#pragma once

#include "atomcav/cli/config.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace atomcav::cli {

struct RunOutput {
  std::vector<std::filesystem::path> files;
  std::string summary;
};

/// Runs one experiment and writes <name>.json, <name>_summary.txt and the
/// experiment's CSV files into config.out_dir. Outputs depend only on the
/// resolved config, so identical configs give byte-identical files.
RunOutput run(const RunConfig& config);

/// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

/// `atomcav <experiment> --config <path> [--seed N] [--out DIR] [--n-traj N] [--quiet]`.
/// The output directory defaults to $ATOMCAV_OUT_DIR, then the working directory.
int main_entry(int argc, char** argv);

/// Decimal text that round-trips to the same double.
std::string format_number(double v);

}  // namespace atomcav::cli
