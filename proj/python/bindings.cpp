#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "dpc/analysis.hpp"
#include "dpc/apparatus.hpp"
#include "dpc/config.hpp"
#include "dpc/dynamics.hpp"
#include "dpc/errors.hpp"
#include "dpc/oracle.hpp"
#include "dpc/selfenergy.hpp"

namespace py = pybind11;
using namespace pybind11::literals;

namespace {

py::array_t<double> sample_times(const dpc::TrialRecord& r) {
  py::array_t<double> out(static_cast<py::ssize_t>(r.samples.size()));
  auto v = out.mutable_unchecked<1>();
  for (std::size_t i = 0; i < r.samples.size(); ++i) v(i) = r.samples[i].t;
  return out;
}

py::array_t<double> sample_intensities(const dpc::TrialRecord& r) {
  py::array_t<double> out(static_cast<py::ssize_t>(r.samples.size()));
  auto v = out.mutable_unchecked<1>();
  for (std::size_t i = 0; i < r.samples.size(); ++i) v(i) = r.samples[i].intensity;
  return out;
}

}  // namespace

PYBIND11_MODULE(_dpcollapse, m) {
  m.doc() = "Diosi-Penrose self-energy, collapse dynamics and tabletop-experiment simulation";

  py::register_exception<dpc::DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<dpc::RegimeError>(m, "RegimeError", PyExc_ValueError);
  py::register_exception<dpc::StateError>(m, "StateError", PyExc_RuntimeError);
  py::register_exception<dpc::ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<dpc::InputError>(m, "InputError", PyExc_ValueError);

  m.attr("PENROSE_GAMMA") = dpc::kPenroseGamma;

  // --- self-energy -------------------------------------------------------
  py::class_<dpc::PhysicalConstants>(m, "PhysicalConstants")
      .def(py::init<>())
      .def(py::init([](double G, double hbar) { return dpc::PhysicalConstants{G, hbar}; }),
           "G"_a, "hbar"_a)
      .def_readwrite("G", &dpc::PhysicalConstants::G)
      .def_readwrite("hbar", &dpc::PhysicalConstants::hbar);

  py::class_<dpc::MassBody>(m, "MassBody")
      .def(py::init([](double mass, double radius, std::string label, double shape) {
             dpc::MassBody b{mass, radius, std::move(label), shape};
             b.validate();
             return b;
           }),
           "mass"_a, "radius"_a, "label"_a = "", "shape_correction"_a = 1.0)
      .def_readwrite("mass", &dpc::MassBody::mass)
      .def_readwrite("radius", &dpc::MassBody::radius)
      .def_readwrite("label", &dpc::MassBody::label)
      .def_readwrite("shape_correction", &dpc::MassBody::shape_correction)
      .def("__repr__", [](const dpc::MassBody& b) {
        return "MassBody(mass=" + std::to_string(b.mass) + ", radius=" +
               std::to_string(b.radius) + ", label='" + b.label + "')";
      });

  py::class_<dpc::SuperpositionGeometry>(m, "SuperpositionGeometry")
      .def(py::init([](dpc::MassBody body, double displacement) {
             dpc::SuperpositionGeometry g{std::move(body), displacement};
             g.validate();
             return g;
           }),
           "body"_a, "displacement"_a)
      .def_readwrite("body", &dpc::SuperpositionGeometry::body)
      .def_readwrite("displacement", &dpc::SuperpositionGeometry::displacement)
      .def_property_readonly("lambda_", &dpc::SuperpositionGeometry::lambda);

  py::enum_<dpc::OverlapVariant>(m, "OverlapVariant")
      .value("PaperPrinted", dpc::OverlapVariant::PaperPrinted)
      .value("ContinuityCorrected", dpc::OverlapVariant::ContinuityCorrected);

  const auto corrected = dpc::OverlapVariant::ContinuityCorrected;
  const dpc::PhysicalConstants defaults{};

  m.def("equivalent_sphere_radius", &dpc::equivalent_sphere_radius, "mass"_a, "density"_a);
  m.def("lambda_ratio", &dpc::lambda_ratio, "displacement"_a, "radius"_a);
  m.def("self_energy_separated", &dpc::self_energy_separated, "body"_a, "lam"_a,
        "constants"_a = defaults);
  m.def("self_energy_overlapping", &dpc::self_energy_overlapping, "body"_a, "lam"_a,
        "variant"_a = corrected, "constants"_a = defaults);
  m.def("self_energy", &dpc::self_energy, "geometry"_a, "variant"_a = corrected,
        "constants"_a = defaults);
  m.def("collapse_time", &dpc::collapse_time, "energy"_a, "gamma"_a = dpc::kPenroseGamma,
        "constants"_a = defaults);
  m.def("collapse_rate", &dpc::collapse_rate, "energy"_a, "gamma"_a = dpc::kPenroseGamma,
        "constants"_a = defaults);
  m.def(
      "mount_reaction_contribution",
      [](const dpc::MassBody& mirror, double disp, const dpc::MassBody& mount,
         dpc::OverlapVariant v, const dpc::PhysicalConstants& c) {
        const auto r = dpc::mount_reaction_contribution(mirror, disp, mount, v, c);
        return py::make_tuple(r.mount_displacement, r.mount_energy);
      },
      "mirror"_a, "mirror_displacement"_a, "mount"_a, "variant"_a = corrected,
      "constants"_a = defaults);
  m.def(
      "system_self_energy",
      [](const std::vector<dpc::SuperpositionGeometry>& g, const std::vector<double>& extra,
         dpc::OverlapVariant v, double gamma, const dpc::PhysicalConstants& c) {
        const auto r = dpc::system_self_energy(g, extra, v, gamma, c);
        return py::make_tuple(r.energy, r.rate);
      },
      "geometries"_a, "extra_component_rates"_a = std::vector<double>{},
      "variant"_a = corrected, "gamma"_a = dpc::kPenroseGamma, "constants"_a = defaults);
  m.def(
      "self_energy_numeric_oracle",
      [](const dpc::SuperpositionGeometry& g, int resolution, const dpc::PhysicalConstants& c) {
        dpc::OracleResult r;
        {
          py::gil_scoped_release release;
          r = dpc::self_energy_numeric_oracle(g, resolution, c);
        }
        return py::dict("energy"_a = r.energy, "under_resolved"_a = r.under_resolved,
                        "resolution"_a = r.resolution);
      },
      "geometry"_a, "resolution"_a = 24, "constants"_a = defaults);

  // --- dynamics ----------------------------------------------------------
  py::enum_<dpc::Branch>(m, "Branch")
      .value("None_", dpc::Branch::None)
      .value("Branch1", dpc::Branch::Branch1)
      .value("Branch2", dpc::Branch::Branch2);

  py::enum_<dpc::CollapseModel>(m, "CollapseModel")
      .value("Poisson", dpc::CollapseModel::Poisson)
      .value("Deterministic", dpc::CollapseModel::Deterministic);

  py::class_<dpc::TwoBranchState>(m, "TwoBranchState")
      .def(py::init<>())
      .def_readwrite("p1", &dpc::TwoBranchState::p1)
      .def_readwrite("p2", &dpc::TwoBranchState::p2)
      .def_readwrite("coherence_mag", &dpc::TwoBranchState::coherence_mag)
      .def_readwrite("coherence_phase", &dpc::TwoBranchState::coherence_phase)
      .def_readwrite("collapsed", &dpc::TwoBranchState::collapsed)
      .def("purity", &dpc::TwoBranchState::purity)
      .def("is_physical", &dpc::TwoBranchState::is_physical, "tol"_a = 1e-12);

  m.def("initial_state", &dpc::initial_state, "phase"_a = 0.0);
  m.def("decohere_step", &dpc::decohere_step, "state"_a, "dt"_a, "gamma_dec"_a);
  m.def("apply_collapse", &dpc::apply_collapse, "state"_a, "u"_a);
  m.def(
      "sample_collapse_time",
      [](const std::function<double(double)>& rate, double horizon, double u) {
        return dpc::sample_collapse_time({rate, horizon}, u);
      },
      "rate"_a, "horizon"_a, "u"_a);
  m.def(
      "evolve",
      [](const std::function<double(double)>& rate, double horizon, double gamma_dec, double dt,
         std::uint64_t seed, dpc::CollapseModel model) {
        const auto e = dpc::evolve({rate, horizon}, gamma_dec, dt, seed, model);
        std::vector<double> t, coherence, p1;
        for (const auto& p : e.timeline) {
          t.push_back(p.t);
          coherence.push_back(p.coherence);
          p1.push_back(p.p1);
        }
        return py::dict("collapse_time"_a = e.collapse_time, "branch"_a = e.branch, "t"_a = t,
                        "p1"_a = p1, "coherence"_a = coherence);
      },
      "rate"_a, "horizon"_a, "gamma_dec"_a, "dt"_a, "seed"_a,
      "model"_a = dpc::CollapseModel::Poisson);

  // --- apparatus ---------------------------------------------------------
  py::enum_<dpc::TriggerSource>(m, "TriggerSource")
      .value("Photon", dpc::TriggerSource::Photon)
      .value("DarkCountSpad1", dpc::TriggerSource::DarkCountSpad1)
      .value("DarkCountSpad2", dpc::TriggerSource::DarkCountSpad2);

  py::enum_<dpc::PrecollapseReadout>(m, "PrecollapseReadout")
      .value("Baseline", dpc::PrecollapseReadout::Baseline)
      .value("Mixture", dpc::PrecollapseReadout::Mixture);

  py::class_<dpc::ApparatusConfig> cfg(m, "ApparatusConfig");
  cfg.def(py::init<>())
      .def("validate", &dpc::ApparatusConfig::validate)
      .def("mirror", &dpc::ApparatusConfig::mirror)
      .def("mount", &dpc::ApparatusConfig::mount)
      .def_readwrite("eraser_enabled", &dpc::ApparatusConfig::eraser_enabled)
      .def_readwrite("collapse_model", &dpc::ApparatusConfig::collapse_model)
      .def_readwrite("variant", &dpc::ApparatusConfig::variant)
      .def_readwrite("precollapse_readout", &dpc::ApparatusConfig::precollapse_readout)
      .def_readwrite("constants", &dpc::ApparatusConfig::constants)
      .def_property(
          "extra_component_times",
          [](const dpc::ApparatusConfig& c) {
            std::vector<std::pair<std::string, double>> out;
            for (const auto& x : c.extra_component_times) out.emplace_back(x.label, x.collapse_time);
            return out;
          },
          [](dpc::ApparatusConfig& c, const std::vector<std::pair<std::string, double>>& v) {
            c.extra_component_times.clear();
            for (const auto& [label, t] : v) c.extra_component_times.push_back({label, t});
          });
#define DPC_FIELD(name) cfg.def_readwrite(#name, &dpc::ApparatusConfig::name)
  DPC_FIELD(photon_rate);
  DPC_FIELD(spad_efficiency);
  DPC_FIELD(spad_dead_time);
  DPC_FIELD(ambient_dark_rate);
  DPC_FIELD(cooling_delta);
  DPC_FIELD(laser_wavelength);
  DPC_FIELD(geometry_factor);
  DPC_FIELD(bias_phase);
  DPC_FIELD(piezo_tau);
  DPC_FIELD(piezo_full_scale);
  DPC_FIELD(mirror_mass);
  DPC_FIELD(mirror_density);
  DPC_FIELD(mirror_shape_correction);
  DPC_FIELD(mount_mass);
  DPC_FIELD(mount_density);
  DPC_FIELD(spread_rate_factor);
  DPC_FIELD(entrainment_rate);
  DPC_FIELD(sample_interval);
  DPC_FIELD(trace_duration);
  DPC_FIELD(detector_noise_sigma);
  DPC_FIELD(detector_quantization);
  DPC_FIELD(gamma);
  DPC_FIELD(gamma_dec);
#undef DPC_FIELD

  py::class_<dpc::TrialRecord>(m, "TrialRecord")
      .def_readonly("trial_id", &dpc::TrialRecord::trial_id)
      .def_readonly("seed", &dpc::TrialRecord::seed)
      .def_readonly("trigger_time", &dpc::TrialRecord::trigger_time)
      .def_readonly("trigger_source", &dpc::TrialRecord::trigger_source)
      .def_readonly("collapse_time", &dpc::TrialRecord::collapse_time)
      .def_readonly("surviving_branch", &dpc::TrialRecord::surviving_branch)
      .def_property_readonly("t", &sample_times)
      .def_property_readonly("intensity", &sample_intensities);

  m.def("dark_rate", &dpc::dark_rate, "ambient_dark_rate"_a, "cooling_delta"_a);
  m.def("piezo_displacement", &dpc::piezo_displacement, "t"_a, "config"_a);
  m.def("interference_intensity", &dpc::interference_intensity, "mirror_a_disp"_a,
        "mirror_b_disp"_a, "config"_a);
  m.def("run_trial", &dpc::run_trial, "config"_a, "trial_id"_a, "seed"_a,
        py::call_guard<py::gil_scoped_release>());
  m.def("run_campaign", &dpc::run_campaign, "config"_a, "n_trials"_a, "master_seed"_a,
        "parallelism"_a = 0u, py::call_guard<py::gil_scoped_release>());

  // --- analysis ----------------------------------------------------------
  m.def("angstrom_threshold", &dpc::angstrom_threshold, "config"_a);
  m.def(
      "estimate_onset_delay",
      [](const dpc::TrialRecord& r, double threshold, double quantization) {
        return dpc::estimate_onset_delay(r, threshold, quantization);
      },
      "trace"_a, "threshold"_a, "quantization"_a = 0.0);
  m.def(
      "ks_two_sample",
      [](const std::vector<double>& a, const std::vector<double>& b) {
        const auto r = dpc::ks_two_sample(a, b);
        return py::make_tuple(r.statistic, r.p_value);
      },
      "a"_a, "b"_a);
  m.def("predicted_mean_delay", &dpc::predicted_mean_delay, "config"_a, "gamma"_a,
        py::call_guard<py::gil_scoped_release>());
  m.def(
      "estimate_gamma",
      [](const std::vector<double>& excess, const dpc::ApparatusConfig& config,
         std::size_t resamples, std::uint64_t seed) {
        dpc::GammaSearch s;
        s.bootstrap_resamples = resamples;
        s.bootstrap_seed = seed;
        dpc::GammaEstimate g;
        {
          py::gil_scoped_release release;
          g = dpc::estimate_gamma(excess, config, s);
        }
        return py::dict("estimate"_a = g.estimate, "ci_low"_a = g.ci_low, "ci_high"_a = g.ci_high,
                        "degenerate"_a = g.degenerate,
                        "observed_mean_delay"_a = g.observed_mean_delay);
      },
      "excess_delays"_a, "config"_a, "bootstrap_resamples"_a = 1000, "seed"_a = 0x5eed);
  m.def(
      "benchmark_table",
      [](const dpc::PhysicalConstants& c, dpc::OverlapVariant v) {
        py::list rows;
        for (const auto& r : dpc::benchmark_table(c, v)) {
          rows.append(py::dict("label"_a = r.label, "mass"_a = r.mass, "radius"_a = r.radius,
                               "displacement"_a = r.displacement, "lambda"_a = r.lambda,
                               "E_g"_a = r.energy, "t_gamma1"_a = r.t_gamma1,
                               "t_gamma_8pi"_a = r.t_gamma_8pi, "assumption"_a = r.assumption));
        }
        return rows;
      },
      "constants"_a = defaults, "variant"_a = corrected);

  // --- configuration -----------------------------------------------------
  m.def("config_keys", &dpc::config_keys);
  m.def(
      "resolve_apparatus_config",
      [](const std::vector<std::string>& overrides) {
        return dpc::resolve_config(nullptr, overrides).apparatus;
      },
      "overrides"_a = std::vector<std::string>{});
}
