#pragma once

#include <string>
#include <vector>

#include "io.hpp"

namespace rg {

struct RunResult {
  std::string output_dir;
  std::string manifest_path;
  std::vector<std::string> files;
};

/// Parses and validates an experiment configuration (JSON). Unknown keys,
/// unknown catalog names and unknown stage names are errors.
Json load_config(const std::string& path);

/// Runs the configured stages in order and writes manifest.json. On a stage
/// failure the manifest records the failing stage, the artifacts written so
/// far are kept, and the error is rethrown with the stage name prepended.
RunResult run_config(const Json& config, const std::string& config_dir = ".");
RunResult run_config_file(const std::string& path);

/// Output directory for a configured path, honouring RG_OUTPUT_ROOT for
/// relative paths.
std::string resolve_output_dir(const std::string& configured);

}  // namespace rg
