#include "dpc/apparatus.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "dpc/errors.hpp"

namespace dpc {

const char* to_string(TriggerSource s) {
  switch (s) {
    case TriggerSource::Photon: return "photon";
    case TriggerSource::DarkCountSpad1: return "dark_spad1";
    case TriggerSource::DarkCountSpad2: return "dark_spad2";
  }
  return "photon";
}

TriggerSource trigger_source_from_string(const std::string& s) {
  if (s == "photon") return TriggerSource::Photon;
  if (s == "dark_spad1") return TriggerSource::DarkCountSpad1;
  if (s == "dark_spad2") return TriggerSource::DarkCountSpad2;
  throw InputError("unknown trigger source '" + s + "'");
}

const char* to_string(PrecollapseReadout r) {
  return r == PrecollapseReadout::Baseline ? "baseline" : "mixture";
}

PrecollapseReadout precollapse_readout_from_string(const std::string& s) {
  if (s == "baseline") return PrecollapseReadout::Baseline;
  if (s == "mixture") return PrecollapseReadout::Mixture;
  throw DomainError("unknown precollapse readout '" + s + "' (expected baseline|mixture)");
}

std::vector<ComponentTime> default_component_times() {
  return {{"spad", 1000.0}, {"copper_wiring", 1e10}, {"resistor", 50.0}, {"piezo", 0.1}};
}

MassBody ApparatusConfig::mirror() const {
  return MassBody{mirror_mass, equivalent_sphere_radius(mirror_mass, mirror_density),
                  "mirror", mirror_shape_correction};
}

MassBody ApparatusConfig::mount() const {
  return MassBody{mount_mass, equivalent_sphere_radius(mount_mass, mount_density), "mount"};
}

namespace {

void require(bool ok, const char* field, const char* bound) {
  if (!ok) throw ConfigError(std::string(field) + " must be " + bound);
}

}  // namespace

void ApparatusConfig::validate() const {
  require(photon_rate >= 0.0, "photon_rate", ">= 0");
  require(spad_efficiency >= 0.0 && spad_efficiency <= 1.0, "spad_efficiency", "in [0, 1]");
  require(spad_dead_time >= 0.0, "spad_dead_time", ">= 0");
  require(ambient_dark_rate >= 0.0, "ambient_dark_rate", ">= 0");
  require(cooling_delta >= 0.0, "cooling_delta", ">= 0");
  require(laser_wavelength > 0.0, "laser_wavelength", "> 0");
  require(geometry_factor >= 0.0, "geometry_factor", ">= 0");
  require(std::isfinite(bias_phase), "bias_phase", "finite");
  require(piezo_tau > 0.0, "piezo_tau", "> 0");
  require(piezo_full_scale >= 0.0, "piezo_full_scale", ">= 0");
  require(mirror_mass > 0.0, "mirror_mass", "> 0");
  require(mirror_density > 0.0, "mirror_density", "> 0");
  require(mirror_shape_correction > 0.0, "mirror_shape_correction", "> 0");
  require(mount_mass > 0.0, "mount_mass", "> 0");
  require(mount_density > 0.0, "mount_density", "> 0");
  require(spread_rate_factor >= 0.0, "spread_rate_factor", ">= 0");
  require(entrainment_rate >= 0.0, "entrainment_rate", ">= 0");
  require(sample_interval > 0.0 && sample_interval <= 1e-7, "sample_interval",
          "in (0, 1e-7] s");
  {
    // Traces store integer nanoseconds.
    const double ns = sample_interval * 1e9;
    require(ns >= 1.0 - 1e-9 && std::abs(ns - std::round(ns)) < 1e-6, "sample_interval",
            "a whole number of nanoseconds");
  }
  require(trace_duration > 0.0, "trace_duration", "> 0");
  require(trace_duration / sample_interval <= 1e8, "trace_duration",
          "<= 1e8 sample intervals");
  require(detector_noise_sigma >= 0.0, "detector_noise_sigma", ">= 0");
  require(detector_quantization >= 0.0 && detector_quantization < 1.0,
          "detector_quantization", "in [0, 1)");
  require(gamma > 0.0, "gamma", "> 0");
  require(gamma_dec >= 0.0, "gamma_dec", ">= 0");
  for (const auto& c : extra_component_times) {
    require(c.collapse_time > 0.0, "extra_component_times", "> 0 for every component");
  }
  require(constants.G > 0.0, "G", "> 0");
  require(constants.hbar > 0.0, "hbar", "> 0");
}

double dark_rate(double ambient_dark_rate, double cooling_delta) {
  if (!(cooling_delta >= 0.0)) throw DomainError("cooling_delta must be >= 0");
  if (!(ambient_dark_rate >= 0.0)) throw DomainError("ambient_dark_rate must be >= 0");
  return ambient_dark_rate * std::pow(10.0, -cooling_delta / 10.0);
}

Trigger sample_trigger(const ApparatusConfig& config, CounterRng& rng) {
  const double photon = config.photon_rate * config.spad_efficiency;
  const double dark = dark_rate(config.ambient_dark_rate, config.cooling_delta);
  const double total = photon + 2.0 * dark;
  if (!(total > 0.0)) throw DomainError("sample_trigger: photon and dark rates are all zero");
  Trigger out;
  out.time = rng.exponential(total);
  const double pick = rng.uniform() * total;
  if (pick < photon) {
    out.source = TriggerSource::Photon;
  } else if (pick < photon + dark) {
    out.source = TriggerSource::DarkCountSpad1;
  } else {
    out.source = TriggerSource::DarkCountSpad2;
  }
  return out;
}

double piezo_displacement(double t, const ApparatusConfig& config) {
  if (!(t >= 0.0)) throw DomainError("piezo_displacement: t must be >= 0");
  return config.piezo_full_scale * -std::expm1(-t / config.piezo_tau);
}

double interference_intensity(double mirror_a_disp, double mirror_b_disp,
                              const ApparatusConfig& config) {
  const double sign_b = config.eraser_enabled ? -1.0 : 1.0;
  const double path = mirror_a_disp - sign_b * mirror_b_disp;
  const double c = std::cos(0.5 * config.bias_phase +
                            std::numbers::pi * config.geometry_factor * path /
                                config.laser_wavelength);
  return c * c;
}

double intensity_step(double displacement, const ApparatusConfig& config) {
  return std::abs(interference_intensity(displacement, 0.0, config) -
                  interference_intensity(0.0, 0.0, config));
}

double detector_readout(double intensity, const ApparatusConfig& config, CounterRng& rng) {
  double v = intensity;
  if (config.detector_noise_sigma > 0.0) v += config.detector_noise_sigma * rng.normal();
  if (config.detector_quantization > 0.0) {
    v = std::round(v / config.detector_quantization) * config.detector_quantization;
  }
  return std::clamp(v, 0.0, 1.0);
}

HazardTrajectory apparatus_hazard(const ApparatusConfig& config) {
  const MassBody mirror = config.mirror();
  const MassBody mount = config.mount();
  double fixed = 0.0;
  for (const auto& c : config.extra_component_times) fixed += 1.0 / c.collapse_time;
  if (!config.eraser_enabled) fixed += config.entrainment_rate;

  HazardTrajectory h;
  h.horizon = config.trace_duration;
  h.rate = [config, mirror, mount, fixed](double t) {
    const double d = piezo_displacement(t, config);
    const double d_mount = mirror.mass / mount.mass * d;
    // Branch k has mirror k (and its mount) displaced; both bodies differ
    // between branches.
    const std::array<SuperpositionGeometry, 4> bodies{{
        {mirror, d}, {mirror, d}, {mount, d_mount}, {mount, d_mount}}};
    const auto sys = system_self_energy(bodies, {}, config.variant, config.gamma,
                                        config.constants);
    return config.spread_rate_factor * sys.rate + fixed;
  };
  return h;
}

std::size_t samples_per_trace(const ApparatusConfig& config) {
  return static_cast<std::size_t>(
             std::floor(config.trace_duration / config.sample_interval + 1e-9)) + 1;
}

TrialRecord run_trial(const ApparatusConfig& config, std::uint64_t trial_id,
                      std::uint64_t seed) {
  config.validate();
  CounterRng rng(seed);
  TrialRecord rec;
  rec.trial_id = trial_id;
  rec.seed = seed;
  const Trigger trig = sample_trigger(config, rng);
  rec.trigger_time = trig.time;
  rec.trigger_source = trig.source;

  const std::size_t n = samples_per_trace(config);
  rec.samples.reserve(n);
  auto branch_intensity = [&](Branch b, double d) {
    return b == Branch::Branch1 ? interference_intensity(d, 0.0, config)
                                : interference_intensity(0.0, d, config);
  };

  if (trig.source == TriggerSource::Photon) {
    const Evolution evo = evolve(apparatus_hazard(config), config.gamma_dec,
                                 config.sample_interval, rng.next_u64(),
                                 config.collapse_model);
    rec.collapse_time = evo.collapse_time;
    rec.surviving_branch = evo.branch;
    const double baseline = interference_intensity(0.0, 0.0, config);
    for (std::size_t k = 0; k < n; ++k) {
      const double t = static_cast<double>(k) * config.sample_interval;
      const double d = piezo_displacement(t, config);
      double raw;
      if (rec.surviving_branch != Branch::None && t >= rec.collapse_time) {
        raw = branch_intensity(rec.surviving_branch, d);
      } else if (config.precollapse_readout == PrecollapseReadout::Mixture) {
        // Populations stay 1/2 : 1/2 until collapse.
        raw = 0.5 * branch_intensity(Branch::Branch1, d) +
              0.5 * branch_intensity(Branch::Branch2, d);
      } else {
        raw = baseline;
      }
      rec.samples.push_back({t, detector_readout(raw, config, rng)});
    }
  } else {
    rec.collapse_time = 0.0;
    rec.surviving_branch =
        trig.source == TriggerSource::DarkCountSpad1 ? Branch::Branch1 : Branch::Branch2;
    for (std::size_t k = 0; k < n; ++k) {
      const double t = static_cast<double>(k) * config.sample_interval;
      const double raw = branch_intensity(rec.surviving_branch, piezo_displacement(t, config));
      rec.samples.push_back({t, detector_readout(raw, config, rng)});
    }
  }
  return rec;
}

std::vector<TrialRecord> run_campaign(const ApparatusConfig& config, std::size_t n_trials,
                                      std::uint64_t master_seed, unsigned parallelism) {
  if (n_trials < 1) throw DomainError("run_campaign: n_trials must be >= 1");
  config.validate();
  std::vector<TrialRecord> out(n_trials);
  unsigned workers = parallelism == 0 ? std::max(1u, std::thread::hardware_concurrency())
                                      : parallelism;
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n_trials));

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    try {
      for (std::size_t i = next++; i < n_trials; i = next++) {
        out[i] = run_trial(config, i, derive_seed(master_seed, i));
      }
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      next = n_trials;
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace dpc
