#include "dpc/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "dpc/errors.hpp"
#include "dpc/integrate.hpp"
#include "dpc/random.hpp"

namespace dpc {

double estimate_onset_delay(const TrialRecord& trace, double threshold, double baseline,
                            double quantization) {
  if (trace.samples.empty()) throw InputError("estimate_onset_delay: empty trace");
  if (!(threshold > quantization)) {
    throw DomainError("estimate_onset_delay: threshold must exceed the detector quantization");
  }
  // A step exactly at the threshold must count despite rounding.
  const double slack = 1e-12;
  for (const auto& s : trace.samples) {
    if (std::abs(s.intensity - baseline) >= threshold - slack) return s.t;
  }
  return kNoOnset;
}

double estimate_onset_delay(const TrialRecord& trace, double threshold, double quantization) {
  if (trace.samples.empty()) throw InputError("estimate_onset_delay: empty trace");
  return estimate_onset_delay(trace, threshold, trace.samples.front().intensity, quantization);
}

double angstrom_threshold(const ApparatusConfig& config) {
  return intensity_step(1e-10, config);
}

double kolmogorov_survival(double x) {
  if (x <= 0.0) return 1.0;
  if (x < 1.18) {
    // Jacobi-theta form converges fast for small x.
    const double pi = std::numbers::pi;
    const double w = std::exp(-pi * pi / (8.0 * x * x));
    double sum = 0.0;
    for (int j = 1; j <= 7; j += 2) sum += std::pow(w, j * j);
    return std::clamp(1.0 - std::sqrt(2.0 * pi) / x * sum, 0.0, 1.0);
  }
  double sum = 0.0;
  double sign = 1.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = std::exp(-2.0 * j * j * x * x);
    sum += sign * term;
    if (term < 1e-17) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

namespace {

double stephens_p(double d, double effective_n) {
  const double en = std::sqrt(effective_n);
  return kolmogorov_survival((en + 0.12 + 0.11 / en) * d);
}

}  // namespace

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw InputError("ks_two_sample: both samples must be non-empty");
  std::vector<double> x(a.begin(), a.end());
  std::vector<double> y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double nx = static_cast<double>(x.size());
  const double ny = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
  }
  return {d, stephens_p(d, nx * ny / (nx + ny))};
}

KsResult ks_one_sample(std::span<const double> sample,
                       const std::function<double(double)>& cdf) {
  if (sample.empty()) throw InputError("ks_one_sample: sample must be non-empty");
  std::vector<double> x(sample.begin(), sample.end());
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  return {d, stephens_p(d, n)};
}

double predicted_mean_delay(const ApparatusConfig& config, double gamma) {
  if (!(gamma > 0.0)) throw DomainError("predicted_mean_delay: gamma must be > 0");
  ApparatusConfig cfg = config;
  cfg.gamma = gamma;
  return mean_first_event_time(apparatus_hazard(cfg).rate, 1e-8);
}

namespace {

struct GammaInversion {
  double gamma;
  bool degenerate;
};

GammaInversion invert_mean_delay(double observed, const ApparatusConfig& config,
                                 const GammaSearch& s) {
  if (!(observed > 0.0)) return {s.gamma_low, true};
  double lo = std::log(s.gamma_low);
  double hi = std::log(s.gamma_high);
  if (predicted_mean_delay(config, s.gamma_low) >= observed) return {s.gamma_low, true};
  if (predicted_mean_delay(config, s.gamma_high) <= observed) return {s.gamma_high, true};
  const double log_tol = std::log1p(s.rel_tol);
  while (hi - lo > log_tol) {
    const double mid = 0.5 * (lo + hi);
    if (predicted_mean_delay(config, std::exp(mid)) < observed) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return {std::exp(0.5 * (lo + hi)), false};
}

double percentile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto k = static_cast<std::size_t>(std::floor(pos));
  const double frac = pos - static_cast<double>(k);
  return k + 1 < v.size() ? v[k] + frac * (v[k + 1] - v[k]) : v[k];
}

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

GammaEstimate estimate_gamma(std::span<const double> excess_delays,
                             const ApparatusConfig& config, const GammaSearch& search) {
  if (excess_delays.size() < 30) {
    throw InputError("estimate_gamma: need at least 30 superposed delays");
  }
  if (!(search.gamma_low > 0.0 && search.gamma_high > search.gamma_low)) {
    throw DomainError("estimate_gamma: invalid gamma bracket");
  }
  GammaEstimate out;
  out.n = excess_delays.size();
  out.observed_mean_delay = mean_of(excess_delays);
  const auto point = invert_mean_delay(out.observed_mean_delay, config, search);
  out.estimate = point.gamma;
  out.degenerate = point.degenerate;
  if (out.degenerate || search.bootstrap_resamples == 0) {
    out.ci_low = out.ci_high = out.estimate;
    return out;
  }

  std::vector<double> boot;
  boot.reserve(search.bootstrap_resamples);
  const std::size_t n = excess_delays.size();
  for (std::size_t r = 0; r < search.bootstrap_resamples; ++r) {
    CounterRng rng(derive_seed(search.bootstrap_seed, r));
    double sum = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      sum += excess_delays[static_cast<std::size_t>(rng.next_u64() % n)];
    }
    boot.push_back(invert_mean_delay(sum / static_cast<double>(n), config, search).gamma);
  }
  out.ci_low = percentile(boot, 0.025);
  out.ci_high = percentile(boot, 0.975);
  return out;
}

namespace {

std::vector<double> mean_trace(std::span<const TrialRecord> trials) {
  std::vector<double> acc;
  if (trials.empty()) return acc;
  acc.assign(trials.front().samples.size(), 0.0);
  for (const auto& t : trials) {
    if (t.samples.size() != acc.size()) throw InputError("traces have unequal lengths");
    for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += t.samples[k].intensity;
  }
  for (double& v : acc) v /= static_cast<double>(trials.size());
  return acc;
}

}  // namespace

CampaignSummary summarize_campaign(std::span<const TrialRecord> superposed,
                                   std::span<const TrialRecord> control,
                                   const ApparatusConfig& config, double threshold,
                                   const GammaSearch& search) {
  CampaignSummary s;
  s.n_superposed = superposed.size();
  s.n_control = control.size();
  s.threshold = threshold;
  s.mean_trace_superposed = mean_trace(superposed);
  s.mean_trace_control = mean_trace(control);
  for (const auto& t : superposed) {
    const double d = estimate_onset_delay(t, threshold, config.detector_quantization);
    if (std::isinf(d)) {
      ++s.n_superposed_no_onset;
    } else {
      s.onset_delays_superposed.push_back(d);
    }
  }
  for (const auto& t : control) {
    const double d = estimate_onset_delay(t, threshold, config.detector_quantization);
    if (std::isinf(d)) {
      ++s.n_control_no_onset;
    } else {
      s.onset_delays_control.push_back(d);
    }
  }
  s.predicted_mean_delay = predicted_mean_delay(config, config.gamma);
  if (!s.onset_delays_superposed.empty() && !s.onset_delays_control.empty()) {
    const auto ks = ks_two_sample(s.onset_delays_superposed, s.onset_delays_control);
    s.ks_statistic = ks.statistic;
    s.ks_p_value = ks.p_value;
    const double control_mean = mean_of(s.onset_delays_control);
    std::vector<double> excess;
    excess.reserve(s.onset_delays_superposed.size());
    for (double d : s.onset_delays_superposed) excess.push_back(d - control_mean);
    s.mean_excess_delay = mean_of(excess);
    if (excess.size() >= 30) {
      s.gamma = estimate_gamma(excess, config, search);
      s.gamma_available = true;
    }
  }
  return s;
}

namespace {

BenchmarkRow make_row(std::string label, const MassBody& body, double displacement,
                      std::string assumption, const PhysicalConstants& c,
                      OverlapVariant variant) {
  BenchmarkRow row;
  row.label = std::move(label);
  row.mass = body.mass;
  row.radius = body.radius;
  row.displacement = displacement;
  row.lambda = lambda_ratio(displacement, body.radius);
  row.energy = self_energy({body, displacement}, variant, c);
  row.t_gamma1 = collapse_time(row.energy, 1.0, c);
  row.t_gamma_8pi = collapse_time(row.energy, kPenroseGamma, c);
  row.assumption = std::move(assumption);
  return row;
}

}  // namespace

std::vector<BenchmarkRow> benchmark_table(const PhysicalConstants& c, OverlapVariant variant) {
  std::vector<BenchmarkRow> rows;

  const MassBody proton{1.6726e-27, 8.414e-16, "proton"};
  rows.push_back(make_row("proton", proton, proton.radius,
                          "uniform sphere at the charge radius, displaced by one radius", c,
                          variant));

  const double dust_radius = 1.5e-5;
  const double dust_mass = 4.0 / 3.0 * std::numbers::pi * std::pow(dust_radius, 3) * 2500.0;
  rows.push_back(make_row("dust", {dust_mass, dust_radius, "dust"}, 2.0 * dust_radius,
                          "15 um grain, density 2500 kg/m^3, displaced by its diameter", c,
                          variant));

  const double mirror_mass = 2e-4;
  const MassBody mirror{mirror_mass, equivalent_sphere_radius(mirror_mass, 2500.0), "mirror"};
  rows.push_back(make_row("mirror", mirror, 1e-10,
                          "0.2 g glass mirror as equal-volume sphere, displaced by 1 Angstrom",
                          c, variant));

  const double cat_mass = 4.0;
  const MassBody cat{cat_mass, equivalent_sphere_radius(cat_mass, 1000.0), "cat"};
  rows.push_back(make_row("cat", cat, 0.1,
                          "4 kg at water density, centre of mass shifted by 10 cm", c,
                          variant));
  return rows;
}

MountNote mount_reaction_note(const ApparatusConfig& config) {
  MountNote note;
  const double travel = 1e-6;
  note.mirror_energy = self_energy({config.mirror(), travel}, config.variant, config.constants);
  const auto mount = mount_reaction_contribution(config.mirror(), travel, config.mount(),
                                                 config.variant, config.constants);
  note.mount_displacement = mount.mount_displacement;
  note.mount_energy = mount.mount_energy;
  note.ratio = note.mount_energy / note.mirror_energy;
  return note;
}

}  // namespace dpc
