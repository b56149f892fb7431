#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace qconserve::cli {

enum ExitStatus : int { exit_ok = 0, exit_failure = 1, exit_config = 2, exit_numerical_guard = 3 };

struct RunRequest {
  std::string config_path;
  std::optional<std::string> output_dir;
  std::optional<std::vector<std::string>> formats;
};

/// Runs one config end to end. Failures print a single JSON line with the
/// status and reason on `err`; nothing is written unless the run succeeds.
int run_command(const RunRequest& request, std::ostream& out, std::ostream& err);

void list_scenarios(std::ostream& out);

}  // namespace qconserve::cli
