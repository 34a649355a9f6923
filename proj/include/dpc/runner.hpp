#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "dpc/analysis.hpp"
#include "dpc/config.hpp"

namespace dpc {

inline constexpr const char* kSuperposedLabel = "superposed";
inline constexpr const char* kControlLabel = "control";

// Same apparatus with the first laser off: only dark counts trigger.
ApparatusConfig control_config(const ApparatusConfig& config);

// Control campaigns draw from their own stream of the master seed.
std::uint64_t control_master_seed(std::uint64_t master_seed);

struct SimulationResult {
  std::vector<TrialRecord> superposed;
  std::vector<TrialRecord> control;
};

SimulationResult simulate(const RunConfig& config, unsigned parallelism);

// Writes resolved_config.json plus trace/metadata files for each campaign run.
void write_simulation(const std::filesystem::path& dir, const RunConfig& config,
                      const SimulationResult& result, bool debug);

struct EstimateOptions {
  std::optional<double> threshold;  // default: 1 Angstrom intensity step
  GammaSearch search;
  bool debug = false;
};

// Reads a simulate output directory (public files only unless debug) and
// returns the summary document.
nlohmann::ordered_json estimate_directory(const std::filesystem::path& dir,
                                          const EstimateOptions& options);

}  // namespace dpc
