#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "json.hpp"

#include "fexp/sim.hpp"

namespace fexp {

inline constexpr int kEpisodeSchemaVersion = 1;

nlohmann::ordered_json to_json(const SimParams& params);
SimParams sim_params_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const EpisodeConfig& config);
EpisodeConfig episode_config_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const Snapshot& snapshot);
Snapshot snapshot_from_json(const nlohmann::json& j);

/// Header line, then one line per snapshot. `config_digest` is copied into the header.
void write_episode(std::ostream& out, const Episode& episode, const std::string& config_digest = {});
Episode read_episode(std::istream& in);

void save_episode(const std::filesystem::path& path, const Episode& episode, const std::string& config_digest = {});
Episode load_episode(const std::filesystem::path& path);

}  // namespace fexp
