#ifndef ANDERSON_RUNNER_HPP
#define ANDERSON_RUNNER_HPP

#include <json.hpp>
#include <string>
#include <vector>

namespace anderson {

struct RunOutcome {
  // 0 success, 2 config error, 3 numerical failure, 4 partial results
  int exit_code = 0;
  std::string message;
  std::vector<std::string> outputs;
};

// Executes one experiment: parses/validates the config (the subcommand
// overrides the "experiment" field), runs it on the pool, writes CSVs, an
// optional SVG plot and the manifest into out_dir.
RunOutcome run_experiment(const std::string& subcommand,
                          const nlohmann::json& config,
                          const std::string& out_dir, bool plots = false);

} // namespace anderson

#endif
