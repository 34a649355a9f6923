#pragma once

#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "dpc/dynamics.hpp"
#include "dpc/random.hpp"
#include "dpc/selfenergy.hpp"

namespace dpc {

enum class TriggerSource { Photon, DarkCountSpad1, DarkCountSpad2 };

const char* to_string(TriggerSource s);
TriggerSource trigger_source_from_string(const std::string& s);

enum class PrecollapseReadout {
  Baseline,  // pattern unchanged until collapse
  Mixture,   // population-weighted average of the two branch patterns
};

const char* to_string(PrecollapseReadout r);
PrecollapseReadout precollapse_readout_from_string(const std::string& s);

struct ComponentTime {
  std::string label;
  double collapse_time = 0.0;  // s
};

// Electronics collapse times quoted for the tabletop build; used as fixed
// hazards, not recomputed.
std::vector<ComponentTime> default_component_times();

struct ApparatusConfig {
  // Source and detectors.
  double photon_rate = 1e7;       // 1/s, attenuated first laser
  double spad_efficiency = 0.7;
  double spad_dead_time = 5e-8;   // s; informational, quench circuit omitted
  double ambient_dark_rate = 1e7; // 1/s per SPAD at ambient temperature
  double cooling_delta = 30.0;    // K below ambient

  // Interferometer.
  double laser_wavelength = 632.8e-9;  // m
  double geometry_factor = 2.0;
  double bias_phase = std::numbers::pi / 2.0;

  // Piezo and masses.
  double piezo_tau = 1e-4;         // s
  double piezo_full_scale = 1e-6;  // m
  double mirror_mass = 2e-4;       // kg
  double mirror_density = 2500.0;  // kg/m^3
  double mirror_shape_correction = 1.0;
  double mount_mass = 2e-2;        // kg
  double mount_density = 2700.0;   // kg/m^3
  double spread_rate_factor = 1.0; // multiplies the gravitational hazard

  // Which-way handling.
  bool eraser_enabled = true;
  double entrainment_rate = 0.0;  // 1/s, added when the eraser is off

  // Detector sampling.
  double sample_interval = 1e-8;  // s
  double trace_duration = 2e-6;   // s
  double detector_noise_sigma = 0.0;
  double detector_quantization = 1e-4;

  // Collapse physics.
  double gamma = kPenroseGamma;
  double gamma_dec = 1e38;  // 1/s
  CollapseModel collapse_model = CollapseModel::Poisson;
  OverlapVariant variant = OverlapVariant::ContinuityCorrected;
  PrecollapseReadout precollapse_readout = PrecollapseReadout::Baseline;
  std::vector<ComponentTime> extra_component_times = default_component_times();
  PhysicalConstants constants{};

  MassBody mirror() const;
  MassBody mount() const;
  // Throws ConfigError naming the offending field and its bound.
  void validate() const;
};

struct TraceSample {
  double t = 0.0;  // s since trigger
  double intensity = 0.0;
};

struct TrialRecord {
  std::uint64_t trial_id = 0;
  std::uint64_t seed = 0;
  double trigger_time = 0.0;  // s
  TriggerSource trigger_source = TriggerSource::Photon;
  double collapse_time = kNoCollapse;  // s since trigger; 0 for dark counts
  Branch surviving_branch = Branch::None;
  std::vector<TraceSample> samples;
};

// Dark-count rate after cooling: one decade per 10 K.
double dark_rate(double ambient_dark_rate, double cooling_delta);

struct Trigger {
  double time = 0.0;
  TriggerSource source = TriggerSource::Photon;
};

// First of three competing exponential clocks: detected photons and the dark
// counts of each SPAD.
Trigger sample_trigger(const ApparatusConfig& config, CounterRng& rng);

// First-order lag response to a step drive.
double piezo_displacement(double t, const ApparatusConfig& config);

// Mach-Zehnder output for the two mirror displacements. With the eraser on,
// mirror B is driven in reverse so either branch shifts the phase the same
// way.
double interference_intensity(double mirror_a_disp, double mirror_b_disp,
                              const ApparatusConfig& config);

// Intensity step produced by `displacement` of mirror A alone.
double intensity_step(double displacement, const ApparatusConfig& config);

// Quantisation, optional Gaussian noise and clamping to [0, 1].
double detector_readout(double intensity, const ApparatusConfig& config, CounterRng& rng);

// Collapse hazard of the superposed apparatus: both mirrors and both mount
// recoils ramping with the piezo, plus fixed component hazards and the
// entrainment term when the eraser is off. Horizon = trace_duration.
HazardTrajectory apparatus_hazard(const ApparatusConfig& config);

std::size_t samples_per_trace(const ApparatusConfig& config);

TrialRecord run_trial(const ApparatusConfig& config, std::uint64_t trial_id,
                      std::uint64_t seed);

// Trials are seeded with derive_seed(master_seed, trial_id) and returned in
// trial_id order; output does not depend on `parallelism` (0 = all cores).
std::vector<TrialRecord> run_campaign(const ApparatusConfig& config, std::size_t n_trials,
                                      std::uint64_t master_seed, unsigned parallelism = 0);

}  // namespace dpc
