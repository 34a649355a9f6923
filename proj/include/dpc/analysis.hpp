#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "dpc/apparatus.hpp"
#include "dpc/selfenergy.hpp"

namespace dpc {

inline constexpr double kNoOnset = std::numeric_limits<double>::infinity();

// Time of the first sample departing from `baseline` by at least `threshold`.
// Throws InputError on an empty trace and DomainError when the threshold does
// not exceed the detector quantisation step.
double estimate_onset_delay(const TrialRecord& trace, double threshold, double baseline,
                            double quantization);

// Same, with the baseline taken from the first sample (mirrors at rest).
double estimate_onset_delay(const TrialRecord& trace, double threshold,
                            double quantization = 0.0);

// Default onset threshold: the intensity step of a 1 Angstrom mirror move.
double angstrom_threshold(const ApparatusConfig& config);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

// Asymptotic Kolmogorov distribution tail, P(K > x).
double kolmogorov_survival(double x);

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);

// One-sample test against a continuous reference CDF.
KsResult ks_one_sample(std::span<const double> sample, const std::function<double(double)>& cdf);

// E[T_c] for the apparatus trajectory at the given gamma; +inf if the hazard
// never accumulates.
double predicted_mean_delay(const ApparatusConfig& config, double gamma);

struct GammaEstimate {
  double estimate = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double observed_mean_delay = 0.0;
  std::size_t n = 0;
  // Observed delay outside the range reachable inside the gamma bracket.
  bool degenerate = false;
};

struct GammaSearch {
  double gamma_low = 1e-6;
  double gamma_high = 1e3;
  double rel_tol = 1e-3;
  std::size_t bootstrap_resamples = 1000;
  std::uint64_t bootstrap_seed = 0x5eed;
};

// Inverts predicted_mean_delay(config, gamma) = mean(excess_delays) by
// bisection on log gamma; percentile bootstrap for the 95% interval.
// `excess_delays` are superposed onset delays minus the mean control delay.
GammaEstimate estimate_gamma(std::span<const double> excess_delays,
                             const ApparatusConfig& config, const GammaSearch& search = {});

struct CampaignSummary {
  std::size_t n_superposed = 0;
  std::size_t n_control = 0;
  std::size_t n_superposed_no_onset = 0;
  std::size_t n_control_no_onset = 0;
  double threshold = 0.0;
  std::vector<double> mean_trace_superposed;
  std::vector<double> mean_trace_control;
  std::vector<double> onset_delays_superposed;
  std::vector<double> onset_delays_control;
  double mean_excess_delay = 0.0;
  double predicted_mean_delay = 0.0;
  double ks_statistic = 0.0;
  double ks_p_value = 1.0;
  GammaEstimate gamma;
  bool gamma_available = false;
};

// Onset delays, averaged traces, superposed-vs-control KS and the gamma
// inversion. Only trace samples are read; branch and collapse truth are not.
CampaignSummary summarize_campaign(std::span<const TrialRecord> superposed,
                                   std::span<const TrialRecord> control,
                                   const ApparatusConfig& config, double threshold,
                                   const GammaSearch& search = {});

struct BenchmarkRow {
  std::string label;
  double mass = 0.0;
  double radius = 0.0;
  double displacement = 0.0;
  double lambda = 0.0;
  double energy = 0.0;
  double t_gamma1 = 0.0;
  double t_gamma_8pi = 0.0;
  std::string assumption;
};

// Proton, dust grain, apparatus mirror and cat under documented assumptions.
std::vector<BenchmarkRow> benchmark_table(const PhysicalConstants& c = {},
                                          OverlapVariant variant =
                                              OverlapVariant::ContinuityCorrected);

struct MountNote {
  double mirror_energy = 0.0;
  double mount_displacement = 0.0;
  double mount_energy = 0.0;
  double ratio = 0.0;  // mount / mirror self-energy
};

// Mount recoil for a 1 micron mirror move of the default apparatus, for
// comparison with the 1/100 estimate quoted alongside the experiment.
MountNote mount_reaction_note(const ApparatusConfig& config = {});

}  // namespace dpc
