#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "json.hpp"

#include "fexp/pipeline.hpp"

namespace fexp {

struct RunConfig {
  std::uint64_t seed = 7;
  DatasetSpec dataset;
  SimParams sim;
  ModelSpec model;
  TrainConfig train;
  std::size_t folds = 6;

  void validate() const;
  TrainSetup train_setup() const;
  /// Every setting that can change an output, in a fixed order.
  nlohmann::ordered_json to_json() const;
  /// Hex SHA-256 of to_json().dump().
  std::string digest() const;
};

/// Parses YAML text; unknown keys and malformed values are config errors.
RunConfig parse_config(std::string_view yaml_text);
RunConfig load_config(const std::filesystem::path& path);

std::string sha256_hex(std::string_view data);

}  // namespace fexp
