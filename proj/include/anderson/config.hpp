#ifndef ANDERSON_CONFIG_HPP
#define ANDERSON_CONFIG_HPP

#include <json.hpp>
#include <string>
#include <vector>

#include "anderson/experiments.hpp"

namespace anderson {

struct ValidationReport {
  bool ok = true;
  std::vector<std::string> errors;   // schema violations, with field paths
  std::vector<std::string> warnings; // semantic advisories
};

// parse and check a config object; throws ConfigError on schema violations
// unless report is provided (then errors are collected there)
ExperimentConfig config_from_json(const nlohmann::json& j,
                                  ValidationReport* report = nullptr);

// canonical serialization: fixed key order, all effective values spelled out
nlohmann::json config_to_json(const ExperimentConfig& cfg);

ValidationReport validate_config_json(const nlohmann::json& j);

nlohmann::json load_json_file(const std::string& path);

} // namespace anderson

#endif
