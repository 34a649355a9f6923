#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "dpc/apparatus.hpp"

namespace dpc {

inline constexpr const char* kConfigSchemaVersion = "dpsim-config/1";

enum class RunMode { Superposed, Control, Both };

const char* to_string(RunMode m);
RunMode run_mode_from_string(const std::string& s);

struct RunConfig {
  ApparatusConfig apparatus;
  std::size_t n_trials = 1000;
  std::uint64_t master_seed = 1;
  std::string output_dir = "dpsim_out";
  RunMode mode = RunMode::Both;

  void validate() const;
};

// Every key accepted in a config file or as a --set override.
std::vector<std::string> config_keys();

// Closest known key by edit distance, for error messages.
std::string nearest_config_key(const std::string& key);

// Assigns one key. Throws ConfigError for unknown keys (naming the nearest
// valid one) and for unparsable values.
void set_config_value(RunConfig& config, const std::string& key, const std::string& value);

// Sectioned key = value text:
//
//   # comment
//   [piezo]
//   piezo_tau = 1e-4
//
// Section headers group keys; a key under the wrong section is rejected.
void apply_config_text(RunConfig& config, const std::string& text,
                       const std::string& origin = "<config>");
void apply_config_file(RunConfig& config, const std::filesystem::path& path);

// "key=value" strings, applied after the file.
void apply_overrides(RunConfig& config, const std::vector<std::string>& overrides);

// Defaults <- file (optional) <- overrides, then validated.
RunConfig resolve_config(const std::filesystem::path* file,
                         const std::vector<std::string>& overrides);

nlohmann::ordered_json to_json(const RunConfig& config);
// Inverse of to_json; missing keys keep their defaults.
RunConfig run_config_from_json(const nlohmann::json& j);

}  // namespace dpc
