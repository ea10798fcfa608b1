#pragma once

#include <string>

#include "tiltwalk/config.hpp"
#include "tiltwalk/harness.hpp"

namespace tiltwalk {

inline constexpr const char* kVersion = "1.0.0";

// Exit codes: 0 pass, 1 crash, 2 config error, 3 declared tolerance failed.
enum ExitCode : int {
  kExitOk = 0,
  kExitCrash = 1,
  kExitConfigError = 2,
  kExitToleranceFailure = 3,
};

// Builds the experiment named in the config, runs it and writes
// manifest.json, metrics.csv and the per-experiment tables under out_dir.
ExperimentReport run_from_config(const Config& cfg, const std::string& out_dir);

// CLI verbs. run_experiment resolves the output directory as
// <output_root>/<config "output">, creating it as needed.
int run_experiment(const std::string& config_path, const std::string& output_root);
int describe_experiment(const std::string& tag);
int list_experiments();

}  // namespace tiltwalk
