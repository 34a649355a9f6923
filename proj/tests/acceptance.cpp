// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Apparatus-level criteria run over several piezo lag constants.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "dpc/analysis.hpp"
#include "dpc/apparatus.hpp"
#include "dpc/config.hpp"
#include "dpc/dynamics.hpp"
#include "dpc/io.hpp"
#include "dpc/oracle.hpp"
#include "dpc/random.hpp"
#include "dpc/runner.hpp"
#include "dpc/selfenergy.hpp"

using namespace dpc;
namespace fs = std::filesystem;

namespace {

// Tolerances and budgets.
constexpr double kOracleRelTol = 0.01;
constexpr double kContinuityRelTol = 1e-12;
constexpr double kPrintedRatio = 3.5;
constexpr double kKsAlpha = 0.01;
constexpr double kMedianRelTol = 0.02;
constexpr double kDelayRelTol = 0.10;
constexpr double kGammaRelTol = 0.20;
constexpr double kTraceTol = 1e-12;

constexpr double kOracleBudget = 120.0;
constexpr double kSamplerBudget = 60.0;
constexpr double kDelayBudget = 300.0;
constexpr double kGammaBudget = 600.0;

// Default lag first; the others bracket it.
const std::vector<double> kTaus{1e-4, 3e-5, 3e-4};

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

void info(const std::string& line) { std::printf("      . %s\n", line.c_str()); }

ApparatusConfig with_tau(double tau) {
  ApparatusConfig c;
  c.piezo_tau = tau;
  return c;
}

std::vector<double> photon_collapse_times(const std::vector<TrialRecord>& trials) {
  std::vector<double> out;
  for (const auto& t : trials) {
    if (t.trigger_source == TriggerSource::Photon && std::isfinite(t.collapse_time)) {
      out.push_back(t.collapse_time);
    }
  }
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome oracle_equivalence() {
  Outcome o;
  const MassBody body{1.0, 1.0, "unit"};
  double worst = 0.0;
  for (double lambda : {0.1, 0.25, 0.5, 1.0, 2.0, 5.0}) {
    const SuperpositionGeometry g{body, 2.0 * lambda};
    const double analytic = self_energy(g, OverlapVariant::ContinuityCorrected);
    const auto numeric = self_energy_numeric_oracle(g, 24);
    const double err = std::abs(numeric.energy - analytic) / analytic;
    info("lambda=" + fmt("%g", lambda) + " rel_err=" + fmt("%.3e", err));
    worst = std::max(worst, err);
    if (err > kOracleRelTol || numeric.under_resolved) o.pass = false;
  }
  o.detail = "max_rel_err=" + fmt("%.3e", worst);
  return o;
}

Outcome continuity() {
  const MassBody body{1.0, 1.0, "unit"};
  const double separated = self_energy_separated(body, 1.0);
  const double corrected = self_energy_overlapping(body, 1.0, OverlapVariant::ContinuityCorrected);
  const double printed = self_energy_overlapping(body, 1.0, OverlapVariant::PaperPrinted);
  const double rel = std::abs(corrected - separated) / separated;
  const double ratio = separated / printed;
  Outcome o;
  o.pass = rel <= kContinuityRelTol && std::abs(ratio - kPrintedRatio) <= 1e-9;
  o.detail = "corrected_rel_gap=" + fmt("%.2e", rel) + " separated/printed=" + fmt("%.12g", ratio);
  return o;
}

Outcome benchmark_bands() {
  const auto rows = benchmark_table();
  const double year = 365.25 * 86400.0;
  const auto& proton = rows.at(0);
  const auto& dust = rows.at(1);
  const auto& mirror = rows.at(2);
  const auto& cat = rows.at(3);
  Outcome o;
  for (double t : {proton.t_gamma1, proton.t_gamma_8pi}) {
    if (t / year < 1e6 || t / year > 1e8) o.pass = false;
  }
  for (double t : {dust.t_gamma1, dust.t_gamma_8pi}) {
    if (t < 1e-9 || t > 1e-7) o.pass = false;
  }
  auto factor = [](double t) { return std::max(t, 1.4e-6) / std::min(t, 1.4e-6); };
  const double mirror_factor = std::min(factor(mirror.t_gamma1), factor(mirror.t_gamma_8pi));
  if (mirror_factor > 10.0) o.pass = false;
  for (std::size_t i = 0; i < 3; ++i) {
    if (!(cat.t_gamma1 < rows[i].t_gamma1 && cat.t_gamma_8pi < rows[i].t_gamma_8pi)) o.pass = false;
  }
  for (const auto& r : rows) {
    info(r.label + ": t(gamma=1)=" + fmt("%.3e", r.t_gamma1) + " s, t(gamma=1/8pi)=" +
         fmt("%.3e", r.t_gamma_8pi) + " s");
  }
  o.detail = "proton=" + fmt("%.2e", proton.t_gamma1 / year) + "/" +
             fmt("%.2e", proton.t_gamma_8pi / year) + " yr, dust=" + fmt("%.2e", dust.t_gamma1) +
             "/" + fmt("%.2e", dust.t_gamma_8pi) + " s, mirror factor " +
             fmt("%.2f", mirror_factor);
  return o;
}

Outcome collapse_sampler() {
  Outcome o;
  const double rate = 1e7;
  const HazardTrajectory constant{[rate](double) { return rate; }, 1.0};
  CounterRng rng(0xacce55);
  std::vector<double> draws(100000);
  for (auto& d : draws) d = sample_collapse_time(constant, rng.uniform());
  const auto ks = ks_one_sample(draws, [rate](double t) { return 1.0 - std::exp(-rate * t); });
  if (ks.p_value <= kKsAlpha) o.pass = false;

  const double c = 1e21;
  const HazardTrajectory ramp{[c](double t) { return c * t * t; }, 1.0};
  for (auto& d : draws) d = sample_collapse_time(ramp, rng.uniform());
  std::nth_element(draws.begin(), draws.begin() + draws.size() / 2, draws.end());
  const double median = draws[draws.size() / 2];
  const double expected = std::cbrt(3.0 * std::numbers::ln2 / c);
  const double err = std::abs(median - expected) / expected;
  if (err > kMedianRelTol) o.pass = false;
  o.detail = "exp KS p=" + fmt("%.3f", ks.p_value) + ", ramp median rel_err=" + fmt("%.2e", err);
  return o;
}

Outcome decoherence_independence() {
  Outcome o;
  double min_p = 1.0;
  for (double tau : kTaus) {
    auto a = with_tau(tau);
    a.gamma_dec = 0.0;
    auto b = with_tau(tau);
    b.gamma_dec = 1e38;
    const auto ta = photon_collapse_times(run_campaign(a, 10000, 501, 1));
    const auto tb = photon_collapse_times(run_campaign(b, 10000, 502, 1));
    const auto ks = ks_two_sample(ta, tb);
    info("tau=" + fmt("%g", tau) + " KS p=" + fmt("%.3f", ks.p_value) + " (n=" +
         std::to_string(ta.size()) + "/" + std::to_string(tb.size()) + ")");
    min_p = std::min(min_p, ks.p_value);
    if (ks.p_value <= kKsAlpha) o.pass = false;
  }
  o.detail = "min KS p=" + fmt("%.3f", min_p) + " over " + std::to_string(kTaus.size()) + " lags";
  return o;
}

struct DelayRun {
  double excess = 0.0;
  double predicted = 0.0;
  double worst_control_gap = 0.0;
  GammaEstimate gamma;
};

DelayRun delay_run(const ApparatusConfig& cfg, std::uint64_t seed, bool with_gamma) {
  const auto sup = run_campaign(cfg, 10000, seed, 1);
  const auto con = run_campaign(control_config(cfg), 10000, control_master_seed(seed), 1);
  GammaSearch search;
  if (!with_gamma) search.bootstrap_resamples = 0;
  const auto s = summarize_campaign(sup, con, cfg, angstrom_threshold(cfg), search);
  DelayRun r;
  r.excess = s.mean_excess_delay;
  r.predicted = s.predicted_mean_delay;
  r.gamma = s.gamma;
  const double analytic = -cfg.piezo_tau * std::log1p(-1e-10 / cfg.piezo_full_scale);
  for (double d : s.onset_delays_control) {
    r.worst_control_gap = std::max(r.worst_control_gap, std::abs(d - analytic));
  }
  if (s.n_control_no_onset > 0) r.worst_control_gap = kNoOnset;
  return r;
}

Outcome end_to_end_delay() {
  Outcome o;
  const ApparatusConfig defaults;
  const auto r = delay_run(defaults, 7001, false);
  const double err = (r.excess - r.predicted) / r.predicted;
  o.pass = std::abs(err) <= kDelayRelTol && r.worst_control_gap <= defaults.sample_interval;
  o.detail = "excess=" + fmt("%.2f", r.excess * 1e9) + " ns predicted=" +
             fmt("%.2f", r.predicted * 1e9) + " ns (" + fmt("%+.1f", 100.0 * err) +
             "%), control gap " + fmt("%.2f", r.worst_control_gap * 1e9) + " ns";

  // The criterion is stated at defaults; other lags are reported only.
  for (double tau : kTaus) {
    if (tau == defaults.piezo_tau) continue;
    const auto cfg = with_tau(tau);
    const auto q = delay_run(cfg, 7001, false);
    const double e = (q.excess - q.predicted) / q.predicted;
    info("tau=" + fmt("%g", tau) + " excess/predicted " + fmt("%+.1f", 100.0 * e) +
         "%, control gap " + fmt("%.2f", q.worst_control_gap * 1e9) + " ns (" +
         (q.worst_control_gap <= cfg.sample_interval ? "ok" : "exceeds one sample") + ")");
  }
  return o;
}

Outcome gamma_recovery() {
  Outcome o;
  std::string detail;
  for (double gamma : {kPenroseGamma, 1.0}) {
    ApparatusConfig cfg;
    cfg.gamma = gamma;
    const auto r = delay_run(cfg, 9001, true);
    const double err = (r.gamma.estimate - gamma) / gamma;
    if (std::abs(err) > kGammaRelTol || r.gamma.degenerate) o.pass = false;
    detail += (detail.empty() ? "" : ", ") + std::string("gamma=") + fmt("%.4g", gamma) + " -> " +
              fmt("%.4g", r.gamma.estimate) + " (" + fmt("%+.1f", 100.0 * err) + "%, CI " +
              fmt("%.4g", r.gamma.ci_low) + ".." + fmt("%.4g", r.gamma.ci_high) + ")";
  }
  o.detail = detail;

  for (double tau : kTaus) {
    if (tau == ApparatusConfig{}.piezo_tau) continue;
    for (double gamma : {kPenroseGamma, 1.0}) {
      auto cfg = with_tau(tau);
      cfg.gamma = gamma;
      const auto q = delay_run(cfg, 9001, false);
      info("tau=" + fmt("%g", tau) + " gamma=" + fmt("%.4g", gamma) + " -> " +
           fmt("%.4g", q.gamma.estimate) + " (" +
           fmt("%+.1f", 100.0 * (q.gamma.estimate - gamma) / gamma) + "%)");
    }
  }
  return o;
}

Outcome eraser() {
  Outcome o;
  std::string detail;
  for (double tau : kTaus) {
    auto on = with_tau(tau);
    const auto trials = run_campaign(on, 3000, 8101, 1);
    const double thr = angstrom_threshold(on);
    std::vector<double> onset1, onset2, final1, final2;
    for (const auto& t : trials) {
      if (t.trigger_source != TriggerSource::Photon) continue;
      const double d = estimate_onset_delay(t, thr, on.detector_quantization);
      if (t.surviving_branch == Branch::Branch1) {
        onset1.push_back(d);
        final1.push_back(t.samples.back().intensity);
      } else if (t.surviving_branch == Branch::Branch2) {
        onset2.push_back(d);
        final2.push_back(t.samples.back().intensity);
      }
    }
    const bool enough = onset1.size() >= 1000 && onset2.size() >= 1000;
    const auto ks_onset = ks_two_sample(onset1, onset2);
    const auto ks_final = ks_two_sample(final1, final2);
    if (!enough || ks_onset.p_value <= kKsAlpha || ks_final.p_value <= kKsAlpha) o.pass = false;

    auto off = with_tau(tau);
    off.eraser_enabled = false;
    const auto off_trials = run_campaign(off, 2000, 8102, 1);
    std::size_t collapsed = 0, correct = 0, neg = 0, pos = 0;
    for (const auto& t : off_trials) {
      if (t.surviving_branch == Branch::None) continue;
      ++collapsed;
      // Read the sign of the shift from the trace alone.
      const double shift = t.samples.back().intensity - t.samples.front().intensity;
      const Branch seen = shift < 0.0 ? Branch::Branch1 : shift > 0.0 ? Branch::Branch2 : Branch::None;
      if (seen == t.surviving_branch) ++correct;
      if (shift < 0.0) ++neg;
      if (shift > 0.0) ++pos;
    }
    if (collapsed == 0 || correct != collapsed || neg == 0 || pos == 0) o.pass = false;
    info("tau=" + fmt("%g", tau) + " on: n=" + std::to_string(onset1.size()) + "/" +
         std::to_string(onset2.size()) + " KS p(onset)=" + fmt("%.3f", ks_onset.p_value) +
         " p(final)=" + fmt("%.3f", ks_final.p_value) + "; off: " + std::to_string(correct) + "/" +
         std::to_string(collapsed) + " signed correctly");
    detail = "all lags checked";
  }
  o.detail = detail;
  return o;
}

Outcome determinism() {
  Outcome o;
  const auto base = fs::temp_directory_path() / "dpc_acceptance_determinism";
  for (double tau : kTaus) {
    RunConfig cfg;
    cfg.apparatus.piezo_tau = tau;
    cfg.n_trials = 2000;
    cfg.master_seed = 424242;
    const auto d1 = base / ("p1_" + fmt("%g", tau));
    const auto d8 = base / ("p8_" + fmt("%g", tau));
    fs::remove_all(d1);
    fs::remove_all(d8);
    fs::create_directories(d1);
    fs::create_directories(d8);
    write_simulation(d1, cfg, simulate(cfg, 1), true);
    write_simulation(d8, cfg, simulate(cfg, 8), true);
    std::size_t files = 0;
    for (const auto& e : fs::directory_iterator(d1)) {
      ++files;
      if (slurp(e.path()) != slurp(d8 / e.path().filename())) {
        o.pass = false;
        info("tau=" + fmt("%g", tau) + " differs: " + e.path().filename().string());
      }
    }
    if (files != 5) o.pass = false;
  }
  fs::remove_all(base);
  o.detail = "parallelism 1 vs 8, " + std::to_string(kTaus.size()) + " lags, 5 files each";
  return o;
}

Outcome density_matrix_invariants() {
  Outcome o;
  CounterRng rng(0xd3a5);
  std::size_t steps = 0;
  double worst_trace = 0.0;
  double worst_psd = 0.0;
  while (steps < 1000000) {
    auto cfg = with_tau(kTaus[rng.next_u64() % kTaus.size()]);
    cfg.gamma = std::pow(10.0, -3.0 + 4.0 * rng.uniform());
    const double gamma_dec = rng.uniform() < 0.2 ? 0.0 : std::pow(10.0, 4.0 + 36.0 * rng.uniform());
    const double dt = 1e-9 * static_cast<double>(1 + rng.next_u64() % 20);
    const auto evo = evolve(apparatus_hazard(cfg), gamma_dec, dt, rng.next_u64(),
                            CollapseModel::Poisson, 2.0 * std::numbers::pi * rng.uniform());
    for (const auto& p : evo.timeline) {
      worst_trace = std::max(worst_trace, std::abs(p.p1 + p.p2 - 1.0));
      // 2x2 Hermitian PSD: nonnegative diagonal and |c|^2 <= p1 p2.
      const double psd_violation =
          std::max({-p.p1, -p.p2, p.coherence * p.coherence - p.p1 * p.p2});
      worst_psd = std::max(worst_psd, psd_violation);
      ++steps;
    }
  }
  o.pass = worst_trace <= kTraceTol && worst_psd <= kTraceTol;
  o.detail = std::to_string(steps) + " steps, max |tr-1|=" + fmt("%.1e", worst_trace) +
             ", max PSD violation=" + fmt("%.1e", worst_psd);
  return o;
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
  double budget_s;  // 0 = none
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "oracle_equivalence", oracle_equivalence, kOracleBudget},
      {2, "continuity", continuity, 0.0},
      {3, "benchmark_bands", benchmark_bands, 0.0},
      {4, "collapse_sampler", collapse_sampler, kSamplerBudget},
      {5, "decoherence_collapse_independence", decoherence_independence, 0.0},
      {6, "end_to_end_delay", end_to_end_delay, kDelayBudget},
      {7, "gamma_recovery", gamma_recovery, kGammaBudget},
      {8, "eraser_symmetry", eraser, 0.0},
      {9, "determinism", determinism, 0.0},
      {10, "density_matrix_invariants", density_matrix_invariants, 0.0},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.budget_s > 0.0 && secs > c.budget_s) {
      o.pass = false;
      o.detail += " [over budget " + fmt("%.0f", c.budget_s) + " s]";
    }
    if (!o.pass) ++failures;
    std::printf("%s  %2d %-34s %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", c.id, c.name,
                o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}
