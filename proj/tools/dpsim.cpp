// dpsim: collapse-time tables, single-body self-energies and Monte Carlo
// campaigns of the superposed-mirror interferometer.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"

#include "dpc/analysis.hpp"
#include "dpc/config.hpp"
#include "dpc/errors.hpp"
#include "dpc/io.hpp"
#include "dpc/runner.hpp"
#include "dpc/selfenergy.hpp"

namespace fs = std::filesystem;

namespace {

constexpr const char* kOutputDirEnv = "DPSIM_OUTPUT_DIR";

struct RunOptions {
  std::string config_file;
  std::vector<std::string> overrides;
  std::optional<std::size_t> n_trials;
  std::optional<std::uint64_t> master_seed;
  std::optional<std::string> output_dir;
  std::optional<std::string> mode;
  std::optional<std::string> variant;
  std::optional<std::string> precollapse_readout;
  unsigned parallelism = std::max(1u, std::thread::hardware_concurrency());
  bool debug = false;
};

void add_run_options(CLI::App* cmd, RunOptions& o) {
  cmd->add_option("--config", o.config_file, "Config file (sectioned key = value)");
  cmd->add_option("--set", o.overrides, "Override a config key, key=value (repeatable)");
  cmd->add_option("--n-trials", o.n_trials, "Trials per campaign");
  cmd->add_option("--master-seed", o.master_seed, "Master seed");
  cmd->add_option("--output-dir", o.output_dir, "Output directory (env " + std::string(kOutputDirEnv) + ")");
  cmd->add_option("--mode", o.mode, "superposed | control | both");
  cmd->add_option("--variant", o.variant, "Overlap formula: corrected | printed");
  cmd->add_option("--precollapse-readout", o.precollapse_readout, "baseline | mixture");
  cmd->add_option("--parallelism", o.parallelism, "Worker threads (default: all cores)");
  cmd->add_flag("--debug", o.debug, "Write branch truth to trial metadata");
}

// defaults <- config file <- environment <- command line
dpc::RunConfig resolve(const RunOptions& o) {
  dpc::RunConfig config;
  if (!o.config_file.empty()) dpc::apply_config_file(config, o.config_file);
  if (const char* env = std::getenv(kOutputDirEnv); env != nullptr && *env != '\0') {
    config.output_dir = env;
  }
  dpc::apply_overrides(config, o.overrides);
  if (o.n_trials) config.n_trials = *o.n_trials;
  if (o.master_seed) config.master_seed = *o.master_seed;
  if (o.output_dir) config.output_dir = *o.output_dir;
  if (o.mode) dpc::set_config_value(config, "mode", *o.mode);
  if (o.variant) dpc::set_config_value(config, "variant", *o.variant);
  if (o.precollapse_readout) {
    dpc::set_config_value(config, "precollapse_readout", *o.precollapse_readout);
  }
  config.validate();
  return config;
}

int cmd_table(const std::string& variant, const std::string& csv_path) {
  const auto v = dpc::overlap_variant_from_string(variant);
  const auto rows = dpc::benchmark_table({}, v);
  std::cout << dpc::format_benchmark_text(rows) << '\n';
  for (const auto& r : rows) std::cout << "  " << r.label << ": " << r.assumption << '\n';

  std::cout << "\ncomponent collapse times (fixed inputs):\n";
  for (const auto& c : dpc::default_component_times()) {
    std::cout << "  " << c.label << ": " << c.collapse_time << " s\n";
  }
  const auto note = dpc::mount_reaction_note();
  std::cout << "\nmount recoil for a 1 um mirror move: " << note.mount_displacement
            << " m, E_g(mount)/E_g(mirror) = " << note.ratio
            << " (the 1/100 estimate does not include the mount's larger radius)\n";

  if (!csv_path.empty()) {
    std::ofstream out(csv_path, std::ios::binary);
    if (!out) throw dpc::InputError("cannot write " + csv_path);
    dpc::write_benchmark_csv(out, rows);
  }
  return 0;
}

int cmd_selfenergy(double mass, double radius, double displacement, const std::string& variant) {
  const dpc::SuperpositionGeometry g{{mass, radius, "body"}, displacement};
  const double e = dpc::self_energy(g, dpc::overlap_variant_from_string(variant));
  auto fmt = [](double v) {
    std::ostringstream os;
    os.precision(6);
    if (std::isinf(v)) return std::string("inf");
    os << v;
    return os.str();
  };
  std::cout << "lambda " << fmt(g.lambda()) << '\n'
            << "E_g_J " << fmt(e) << '\n'
            << "t_gamma1_s " << fmt(dpc::collapse_time(e, 1.0)) << '\n'
            << "t_gamma_8pi_s " << fmt(dpc::collapse_time(e, dpc::kPenroseGamma)) << '\n';
  return 0;
}

int cmd_simulate(const RunOptions& o) {
  const auto config = resolve(o);
  const auto result = dpc::simulate(config, o.parallelism);
  dpc::write_simulation(config.output_dir, config, result, o.debug);
  std::cout << "wrote " << config.n_trials << " trials per campaign to " << config.output_dir
            << '\n';
  return 0;
}

int cmd_estimate(const std::string& dir, const dpc::EstimateOptions& opts) {
  const auto summary = dpc::estimate_directory(dir, opts);
  {
    std::ofstream out(fs::path(dir) / "summary.json", std::ios::binary);
    if (!out) throw dpc::InputError("cannot write summary.json in " + dir);
    out << summary.dump(2) << '\n';
  }
  auto brief = summary;
  for (const char* k : {"mean_trace_superposed", "mean_trace_control", "onset_delays_superposed",
                        "onset_delays_control"}) {
    brief.erase(k);
  }
  std::cout << brief.dump(2) << '\n';
  return 0;
}

std::vector<std::string> split_values(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

int cmd_sweep(const RunOptions& o, const std::string& param, const std::string& values,
              const dpc::EstimateOptions& est) {
  const auto base = resolve(o);
  const auto points = split_values(values);
  if (points.empty()) throw dpc::ConfigError("--values is empty");
  if (dpc::nearest_config_key(param) != param) {
    throw dpc::ConfigError("unknown sweep parameter '" + param + "' (did you mean '" +
                           dpc::nearest_config_key(param) + "'?)");
  }
  fs::create_directories(base.output_dir);
  std::ofstream table(fs::path(base.output_dir) / "sweep.csv", std::ios::binary);
  table << "param,value,n_superposed,n_control,mean_excess_delay_s,predicted_mean_delay_s,"
           "ks_statistic,ks_p_value,gamma_estimate,gamma_ci_low,gamma_ci_high\n";
  auto cell = [](const nlohmann::ordered_json& v) {
    if (v.is_null()) return std::string("nan");
    if (v.is_string()) return v.get<std::string>();
    std::ostringstream os;
    os.precision(10);
    os << v.get<double>();
    return os.str();
  };
  for (std::size_t i = 0; i < points.size(); ++i) {
    dpc::RunConfig point = base;
    dpc::set_config_value(point, param, points[i]);
    point.mode = dpc::RunMode::Both;
    point.output_dir = (fs::path(base.output_dir) / ("point_" + std::to_string(i))).string();
    point.validate();
    dpc::write_simulation(point.output_dir, point, dpc::simulate(point, o.parallelism), o.debug);
    const auto s = dpc::estimate_directory(point.output_dir, est);
    table << param << ',' << points[i] << ',' << s["n_superposed"].get<std::size_t>() << ','
          << s["n_control"].get<std::size_t>() << ',' << cell(s["mean_excess_delay"]) << ','
          << cell(s["predicted_mean_delay"]) << ',' << cell(s["ks_statistic"]) << ','
          << cell(s["ks_p_value"]) << ',' << cell(s["gamma_estimate"]) << ','
          << cell(s["gamma_ci_low"]) << ',' << cell(s["gamma_ci_high"]) << '\n';
    std::cout << param << '=' << points[i] << " done\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dpsim: Diosi-Penrose collapse-time calculator and interferometer simulator"};
  app.set_version_flag("--version", std::string("dpsim ") + DPC_VERSION + " (config schema " +
                                        dpc::kConfigSchemaVersion + ")");
  app.require_subcommand(1);

  std::string table_variant = "corrected";
  std::string table_csv;
  auto* table = app.add_subcommand("table", "Benchmark collapse-time table");
  table->add_option("--variant", table_variant, "corrected | printed");
  table->add_option("--csv", table_csv, "Also write the table as CSV");

  double mass = 0.0, radius = 0.0, displacement = 0.0;
  std::string se_variant = "corrected";
  auto* se = app.add_subcommand("selfenergy", "Self-energy and collapse times of one body");
  se->add_option("--mass", mass, "kg")->required();
  se->add_option("--radius", radius, "m")->required();
  se->add_option("--displacement", displacement, "m")->required();
  se->add_option("--variant", se_variant, "corrected | printed");

  RunOptions sim_opts;
  auto* sim = app.add_subcommand("simulate", "Run superposed/control campaigns");
  add_run_options(sim, sim_opts);

  std::string est_dir;
  std::optional<double> est_threshold;
  std::size_t bootstrap = 1000;
  bool est_debug = false;
  auto* est = app.add_subcommand("estimate", "Analyse a campaign directory");
  est->add_option("dir", est_dir, "Directory written by simulate")->required();
  est->add_option("--threshold", est_threshold, "Onset threshold in intensity units");
  est->add_option("--bootstrap", bootstrap, "Bootstrap resamples for the gamma interval");
  est->add_flag("--debug", est_debug, "Also report branch truth from debug metadata");

  RunOptions sweep_opts;
  std::string sweep_param, sweep_values;
  auto* sweep = app.add_subcommand("sweep", "simulate + estimate over a parameter grid");
  add_run_options(sweep, sweep_opts);
  sweep->add_option("--param", sweep_param, "Config key to vary")->required();
  sweep->add_option("--values", sweep_values, "Comma-separated values")->required();
  sweep->add_option("--bootstrap", bootstrap, "Bootstrap resamples for the gamma interval");

  CLI11_PARSE(app, argc, argv);

  try {
    dpc::EstimateOptions eo;
    eo.threshold = est_threshold;
    eo.search.bootstrap_resamples = bootstrap;
    if (*table) return cmd_table(table_variant, table_csv);
    if (*se) return cmd_selfenergy(mass, radius, displacement, se_variant);
    if (*sim) return cmd_simulate(sim_opts);
    if (*est) {
      eo.debug = est_debug;
      return cmd_estimate(est_dir, eo);
    }
    if (*sweep) {
      eo.debug = sweep_opts.debug;
      return cmd_sweep(sweep_opts, sweep_param, sweep_values, eo);
    }
  } catch (const std::exception& e) {
    std::cerr << "dpsim: error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
