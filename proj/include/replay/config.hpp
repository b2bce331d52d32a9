#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "replay/harness.hpp"

namespace replay {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string to_string(Strategy s);
std::string to_string(PivotMode m);
std::string to_string(FillMode m);
std::string to_string(ScheduleUnit u);
Strategy strategy_from_string(const std::string& s);
PivotMode pivot_mode_from_string(const std::string& s);
FillMode fill_mode_from_string(const std::string& s);
ScheduleUnit schedule_unit_from_string(const std::string& s);

// Applies one key=value pair; unknown keys and malformed values raise
// ConfigError. "env" may only confirm the active preset, never switch it.
void apply_override(ExperimentConfig& cfg, const std::string& key,
                    const std::string& value);

// Flat key=value format, one pair per line, '#' comments. The env key is
// pre-scanned to pick the preset; every other key overrides it in file
// order. Errors carry origin:line context. env_hint, when nonempty, wins
// over the file's env key (they must not contradict each other).
ExperimentConfig parse_config_text(const std::string& text, const std::string& origin,
                                   const std::string& env_hint = "");
ExperimentConfig parse_config_file(const std::string& path,
                                   const std::string& env_hint = "");

// Ordered echo of every effective field. Feeding it back through
// config_from_kv reproduces the config exactly (doubles round-trip).
std::vector<std::pair<std::string, std::string>> config_to_kv(const ExperimentConfig& cfg);
ExperimentConfig config_from_kv(const std::vector<std::pair<std::string, std::string>>& kv);

}  // namespace replay
