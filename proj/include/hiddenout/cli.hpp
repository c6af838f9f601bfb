#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace hiddenout::cli {

inline constexpr const char* kToolName = "hiddenout";
inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int {
  kExitOk = 0,
  kExitValidation = 1,
  kExitGeneration = 2,
  kExitTimeout = 3,
  kExitInternal = 4,
};

struct AdversaryConfig {
  std::string kind = "lof";
  /// 0 selects the detector default (20 for LOF, 5 for KNN).
  std::size_t k = 0;
  double contamination = 0.1;
};

struct SynthConfig {
  std::size_t clusters = 1;
  std::size_t d = 7;
  std::size_t n = 1000;
};

struct ForestConfig {
  std::size_t n_trees = 500;
  std::size_t mtry = 0;
  std::size_t min_leaf = 1;
};

struct RunConfig {
  std::string command;
  std::string input;
  /// sod only: pre-downsampled set; derived from `input` when empty.
  std::string small_input;
  double downsample_fraction = 0.02;
  std::string label_column = "outlier";
  std::string generator = "bisect";
  AdversaryConfig adversary;
  std::size_t budget = 2048;
  int n_cuts = 5;
  double err = 0.05;
  int max_restarts = 50;
  std::string origin_weighting = "increasing";
  double epsilon = 0.1;
  std::size_t n_samp = 500;
  std::size_t repeats = 7;
  std::uint64_t seed = 0;
  double timeout = 1800.0;
  std::string output = "out";
  /// 0 selects the number of logical cores.
  unsigned threads = 0;
  std::string grid = "desk";
  std::vector<std::string> generators = {"bisect", "hidden"};
  std::vector<double> epsilons = {0.1};
  SynthConfig synth;
  ForestConfig forest;
};

/// Overlays the keys present in `j` onto `cfg`. A manifest (object with a
/// "config" key) is unwrapped first. Unknown keys and wrongly typed values
/// throw ConfigError naming the field path.
void merge_json(RunConfig& cfg, const nlohmann::json& j);

nlohmann::json to_json(const RunConfig& cfg);

/// Range checks for every field relevant to cfg.command; the message of the
/// thrown ConfigError starts with the field path.
void validate(const RunConfig& cfg);

/// Runs the configured command, writing artifacts under cfg.output.
/// Diagnostics go to `log`. Returns an ExitCode.
int run(const RunConfig& cfg, std::ostream& log);

/// Parses argv (flags layered over an optional --config file) and runs.
int main(int argc, const char* const* argv);

}  // namespace hiddenout::cli
