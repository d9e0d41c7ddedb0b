#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "graphdec/trainer.hpp"

namespace graphdec {

using Setting = std::pair<std::string, std::string>;  // key, value

/// Sets one key. Keys are "section.key" or a bare key; a bare key resolves to
/// [train] first, otherwise to the unique section defining it.
void apply_setting(TrainConfig& cfg, const std::string& key, const std::string& value);

/// Parses `key = value` lines under optional [section] headers. '#' and ';' start comments.
std::vector<Setting> parse_ini(const std::string& text, const std::string& source = "<config>");

/// Defaults, then the file, then the overrides. Every unknown key and
/// malformed value is reported in a single ConfigError.
TrainConfig load_config(const std::optional<std::filesystem::path>& path,
                        const std::vector<Setting>& overrides = {});

/// All keys as "section.key" with materialized values, in a fixed order.
std::vector<Setting> config_entries(const TrainConfig& cfg);

/// INI text that load_config reads back to an identical config.
std::string config_to_ini(const TrainConfig& cfg);

}  // namespace graphdec
