#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "dpc/analysis.hpp"
#include "dpc/apparatus.hpp"

namespace dpc {

// Times in trace and metadata files are integer nanoseconds.
long long to_ns(double seconds);

// `trial_id,t_ns,intensity`, one row per sample.
void write_traces_csv(std::ostream& out, std::span<const TrialRecord> trials);

// One object per trial. Without `debug` the firing SPAD is hidden behind the
// summing junction (trigger_source "junction") and surviving_branch is
// omitted.
nlohmann::ordered_json trials_to_json(std::span<const TrialRecord> trials, bool debug);

// Rebuilds records from the two public files. Fields the files do not carry
// (branch, firing SPAD when not in debug) stay at their defaults.
std::vector<TrialRecord> read_campaign(std::istream& traces_csv, const nlohmann::json& trials,
                                       double sample_interval);

struct CampaignFiles {
  std::filesystem::path traces;
  std::filesystem::path trials;
};

CampaignFiles campaign_files(const std::filesystem::path& dir, const std::string& label);

void write_campaign(const std::filesystem::path& dir, const std::string& label,
                    std::span<const TrialRecord> trials, bool debug);

std::vector<TrialRecord> load_campaign(const std::filesystem::path& dir, const std::string& label,
                                       double sample_interval);

nlohmann::ordered_json summary_to_json(const CampaignSummary& s);

void write_benchmark_csv(std::ostream& out, std::span<const BenchmarkRow> rows);
std::string format_benchmark_text(std::span<const BenchmarkRow> rows);

}  // namespace dpc
