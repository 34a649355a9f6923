#include "dpc/runner.hpp"

#include <cmath>
#include <fstream>

#include "dpc/errors.hpp"
#include "dpc/io.hpp"
#include "dpc/random.hpp"

namespace dpc {

ApparatusConfig control_config(const ApparatusConfig& config) {
  ApparatusConfig c = config;
  c.photon_rate = 0.0;
  return c;
}

std::uint64_t control_master_seed(std::uint64_t master_seed) {
  return derive_seed(master_seed, 0xc0'47'0001ULL);
}

SimulationResult simulate(const RunConfig& config, unsigned parallelism) {
  config.validate();
  SimulationResult out;
  if (config.mode != RunMode::Control) {
    out.superposed =
        run_campaign(config.apparatus, config.n_trials, config.master_seed, parallelism);
  }
  if (config.mode != RunMode::Superposed) {
    out.control = run_campaign(control_config(config.apparatus), config.n_trials,
                               control_master_seed(config.master_seed), parallelism);
  }
  return out;
}

void write_simulation(const std::filesystem::path& dir, const RunConfig& config,
                      const SimulationResult& result, bool debug) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "resolved_config.json", std::ios::binary);
    if (!out) throw InputError("cannot write resolved_config.json in " + dir.string());
    out << to_json(config).dump(2) << '\n';
  }
  if (!result.superposed.empty()) write_campaign(dir, kSuperposedLabel, result.superposed, debug);
  if (!result.control.empty()) write_campaign(dir, kControlLabel, result.control, debug);
}

namespace {

nlohmann::ordered_json debug_block(const std::vector<TrialRecord>& superposed) {
  std::size_t b1 = 0, b2 = 0, none = 0, dark = 0;
  double sum_tc = 0.0;
  std::size_t n_tc = 0;
  for (const auto& t : superposed) {
    if (t.trigger_source != TriggerSource::Photon) ++dark;
    if (t.surviving_branch == Branch::Branch1) ++b1;
    else if (t.surviving_branch == Branch::Branch2) ++b2;
    if (!std::isfinite(t.collapse_time)) ++none;
    if (t.trigger_source == TriggerSource::Photon && std::isfinite(t.collapse_time)) {
      sum_tc += t.collapse_time;
      ++n_tc;
    }
  }
  nlohmann::ordered_json j;
  j["superposed_dark_count_triggers"] = dark;
  // Branch truth is only present when the campaign was written with --debug.
  j["branch_truth_recorded"] = b1 + b2 > 0;
  j["surviving_branch1"] = b1;
  j["surviving_branch2"] = b2;
  j["no_collapse_in_trace"] = none;
  j["mean_true_collapse_time"] = n_tc > 0 ? sum_tc / static_cast<double>(n_tc) : 0.0;
  return j;
}

}  // namespace

nlohmann::ordered_json estimate_directory(const std::filesystem::path& dir,
                                          const EstimateOptions& options) {
  if (!std::filesystem::is_directory(dir)) {
    throw InputError("campaign directory '" + dir.string() + "' does not exist");
  }
  std::ifstream cfg_in(dir / "resolved_config.json");
  if (!cfg_in) throw InputError("missing resolved_config.json in '" + dir.string() + "'");
  const RunConfig config = run_config_from_json(nlohmann::json::parse(cfg_in));
  const ApparatusConfig& app = config.apparatus;

  std::vector<TrialRecord> superposed, control;
  if (std::filesystem::exists(campaign_files(dir, kSuperposedLabel).traces)) {
    superposed = load_campaign(dir, kSuperposedLabel, app.sample_interval);
  }
  if (std::filesystem::exists(campaign_files(dir, kControlLabel).traces)) {
    control = load_campaign(dir, kControlLabel, app.sample_interval);
  }
  if (superposed.empty() && control.empty()) {
    throw InputError("no campaign files in '" + dir.string() + "'");
  }
  if (!options.debug) {
    // Only the sample streams are analysed; drop anything the junction hides.
    for (auto* set : {&superposed, &control}) {
      for (auto& t : *set) {
        t.surviving_branch = Branch::None;
        t.trigger_source = TriggerSource::Photon;
        t.collapse_time = kNoCollapse;
      }
    }
  }

  const double threshold = options.threshold.value_or(angstrom_threshold(app));
  const auto summary = summarize_campaign(superposed, control, app, threshold, options.search);
  auto j = summary_to_json(summary);
  if (options.debug) j["debug"] = debug_block(superposed);
  return j;
}

}  // namespace dpc
