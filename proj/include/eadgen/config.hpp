#pragma once

#include <string>
#include <utility>
#include <vector>

#include "eadgen/generate.hpp"
#include "eadgen/model.hpp"
#include "eadgen/train.hpp"

namespace eadgen {

// Everything the CLI can set: model shape, training schedule, decoding.
// `seed` and `max_len` are single keys fanned out to the sub-configs.
struct AppConfig {
  ModelConfig model;
  TrainConfig train;
  BeamConfig beam;
};

// Flat key = value text, '#' comments, blank lines ignored. Unknown keys
// and unparsable values raise ConfigError naming the line.
AppConfig parse_config_text(const std::string& text, const std::string& source,
                            AppConfig base = AppConfig{});
AppConfig load_config_file(const std::string& path,
                           AppConfig base = AppConfig{});

// One "key=value" assignment, as given by a command-line override.
void apply_override(AppConfig& cfg, const std::string& assignment);

// Key/value view of a config, in file order; echoed into reports.
std::vector<std::pair<std::string, std::string>> config_items(
    const AppConfig& cfg);
std::string config_to_json(const AppConfig& cfg);

}  // namespace eadgen
