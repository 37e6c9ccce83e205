#pragma once

#include <optional>
#include <string>

#include "erg/infomap.hpp"
#include "erg/optimize.hpp"

namespace erg {

// Parsed run configuration: the full problem instance plus the pieces the
// CLI needs for artifacts. Unknown config keys are rejected.
struct RunConfig {
  ProblemSpec spec;
  std::optional<InfoMap> map;  // normalized; absent in surface mode
  int quadrature = 0;          // 0 = per-dimension default
  std::string canonical;       // canonical JSON dump used for hashing
};

RunConfig load_run_config(const std::string& path);
RunConfig parse_run_config(const std::string& json_text, const std::string& base_dir);

uint64_t fnv1a64(const std::string& text);

}  // namespace erg
