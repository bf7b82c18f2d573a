#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include "jspace/heatmap.hpp"
#include "jspace/refine.hpp"
#include "jspace/types.hpp"

namespace jspace {

struct SsrConfig {
  bool enabled = true;
  double fraction = 0.033;
  std::uint64_t seed = 0;
  std::uint64_t budget = kDefaultCombinationBudget;
};

/// Run configuration loaded from a JSON file; command-line flags override
/// individual fields. Paths listed under "paths" must exist at load time.
struct RunConfig {
  DecodeConfig decode;
  ScaleConfig scale;
  SsrConfig ssr;
  std::map<std::string, std::filesystem::path> paths;
};

RunConfig load_run_config(const std::filesystem::path& path);

/// Entry point behind the jspace binary. Returns the process exit code;
/// failures print one machine-parsable line on stderr:
///   error: <code_name>: <message>
int run_cli(int argc, const char* const* argv);

}  // namespace jspace
