#include "dpc/io.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "dpc/errors.hpp"

namespace dpc {

long long to_ns(double seconds) { return std::llround(seconds * 1e9); }

namespace {

std::string format_g(double v, int digits = 10) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

nlohmann::ordered_json ns_or_inf(double seconds) {
  if (std::isinf(seconds)) return "inf";
  return to_ns(seconds);
}

nlohmann::ordered_json seconds_or_inf(double seconds) {
  if (std::isinf(seconds)) return "inf";
  return seconds;
}

}  // namespace

void write_traces_csv(std::ostream& out, std::span<const TrialRecord> trials) {
  out << "trial_id,t_ns,intensity\n";
  std::string line;
  for (const auto& t : trials) {
    for (const auto& s : t.samples) {
      line.clear();
      line += std::to_string(t.trial_id);
      line += ',';
      line += std::to_string(to_ns(s.t));
      line += ',';
      line += format_g(s.intensity);
      line += '\n';
      out << line;
    }
  }
}

nlohmann::ordered_json trials_to_json(std::span<const TrialRecord> trials, bool debug) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& t : trials) {
    nlohmann::ordered_json o;
    o["trial_id"] = t.trial_id;
    o["trigger_time_ns"] = to_ns(t.trigger_time);
    o["trigger_source"] = debug ? to_string(t.trigger_source) : "junction";
    o["collapse_time_ns"] = ns_or_inf(t.collapse_time);
    if (debug) o["surviving_branch"] = to_string(t.surviving_branch);
    o["seed"] = t.seed;
    arr.push_back(std::move(o));
  }
  return arr;
}

std::vector<TrialRecord> read_campaign(std::istream& traces_csv, const nlohmann::json& trials,
                                       double sample_interval) {
  if (!trials.is_array()) throw InputError("trial metadata must be a JSON array");
  std::vector<TrialRecord> out;
  std::map<std::uint64_t, std::size_t> index;
  for (const auto& o : trials) {
    TrialRecord r;
    r.trial_id = o.at("trial_id").get<std::uint64_t>();
    r.seed = o.at("seed").get<std::uint64_t>();
    r.trigger_time = static_cast<double>(o.at("trigger_time_ns").get<long long>()) * 1e-9;
    const auto& src = o.at("trigger_source");
    if (src.get<std::string>() != "junction") {
      r.trigger_source = trigger_source_from_string(src.get<std::string>());
    }
    const auto& ct = o.at("collapse_time_ns");
    r.collapse_time = ct.is_string() ? kNoCollapse
                                     : static_cast<double>(ct.get<long long>()) * 1e-9;
    if (o.contains("surviving_branch")) {
      const auto b = o["surviving_branch"].get<std::string>();
      r.surviving_branch = b == "branch1"   ? Branch::Branch1
                           : b == "branch2" ? Branch::Branch2
                                            : Branch::None;
    }
    index[r.trial_id] = out.size();
    out.push_back(std::move(r));
  }

  std::string line;
  if (!std::getline(traces_csv, line) || line != "trial_id,t_ns,intensity") {
    throw InputError("trace CSV must start with 'trial_id,t_ns,intensity'");
  }
  std::size_t lineno = 1;
  while (std::getline(traces_csv, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::uint64_t id = 0;
    long long t_ns = 0;
    double intensity = 0.0;
    if (std::sscanf(line.c_str(), "%" SCNu64 ",%lld,%lf", &id, &t_ns, &intensity) != 3) {
      throw InputError("malformed trace row " + std::to_string(lineno));
    }
    const auto it = index.find(id);
    if (it == index.end()) {
      throw InputError("trace row " + std::to_string(lineno) + " names unknown trial " +
                       std::to_string(id));
    }
    // Rebuild t from the sample index so it matches the simulator grid exactly.
    auto& samples = out[it->second].samples;
    const double t = static_cast<double>(samples.size()) * sample_interval;
    if (to_ns(t) != t_ns) {
      throw InputError("trace row " + std::to_string(lineno) + " is off the sample grid");
    }
    samples.push_back({t, intensity});
  }
  return out;
}

CampaignFiles campaign_files(const std::filesystem::path& dir, const std::string& label) {
  return {dir / (label + "_traces.csv"), dir / (label + "_trials.json")};
}

void write_campaign(const std::filesystem::path& dir, const std::string& label,
                    std::span<const TrialRecord> trials, bool debug) {
  std::filesystem::create_directories(dir);
  const auto files = campaign_files(dir, label);
  std::ofstream csv(files.traces, std::ios::binary);
  if (!csv) throw InputError("cannot write " + files.traces.string());
  write_traces_csv(csv, trials);
  std::ofstream js(files.trials, std::ios::binary);
  if (!js) throw InputError("cannot write " + files.trials.string());
  js << trials_to_json(trials, debug).dump(1) << '\n';
}

std::vector<TrialRecord> load_campaign(const std::filesystem::path& dir, const std::string& label,
                                       double sample_interval) {
  const auto files = campaign_files(dir, label);
  std::ifstream csv(files.traces, std::ios::binary);
  std::ifstream js(files.trials, std::ios::binary);
  if (!csv || !js) {
    throw InputError("missing " + label + " campaign files in '" + dir.string() + "'");
  }
  return read_campaign(csv, nlohmann::json::parse(js), sample_interval);
}

nlohmann::ordered_json summary_to_json(const CampaignSummary& s) {
  nlohmann::ordered_json j;
  j["n_superposed"] = s.n_superposed;
  j["n_control"] = s.n_control;
  j["n_superposed_no_onset"] = s.n_superposed_no_onset;
  j["n_control_no_onset"] = s.n_control_no_onset;
  j["threshold"] = s.threshold;
  j["mean_excess_delay"] = s.mean_excess_delay;
  j["predicted_mean_delay"] = seconds_or_inf(s.predicted_mean_delay);
  j["ks_statistic"] = s.ks_statistic;
  j["ks_p_value"] = s.ks_p_value;
  if (s.gamma_available) {
    j["gamma_estimate"] = s.gamma.estimate;
    j["gamma_ci_low"] = s.gamma.ci_low;
    j["gamma_ci_high"] = s.gamma.ci_high;
    j["gamma_degenerate"] = s.gamma.degenerate;
  } else {
    j["gamma_estimate"] = nullptr;
    j["gamma_ci_low"] = nullptr;
    j["gamma_ci_high"] = nullptr;
    j["gamma_degenerate"] = true;
  }
  j["mean_trace_superposed"] = s.mean_trace_superposed;
  j["mean_trace_control"] = s.mean_trace_control;
  j["onset_delays_superposed"] = s.onset_delays_superposed;
  j["onset_delays_control"] = s.onset_delays_control;
  return j;
}

void write_benchmark_csv(std::ostream& out, std::span<const BenchmarkRow> rows) {
  out << "label,mass_kg,radius_m,displacement_m,lambda,E_g_J,t_gamma1_s,t_gamma_8pi_s\n";
  for (const auto& r : rows) {
    out << r.label << ',' << format_g(r.mass, 6) << ',' << format_g(r.radius, 6) << ','
        << format_g(r.displacement, 6) << ',' << format_g(r.lambda, 6) << ','
        << format_g(r.energy, 6) << ',' << format_g(r.t_gamma1, 6) << ','
        << format_g(r.t_gamma_8pi, 6) << '\n';
  }
}

std::string format_benchmark_text(std::span<const BenchmarkRow> rows) {
  std::ostringstream out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-8s %12s %12s %12s %12s %12s %14s %14s\n", "label",
                "mass_kg", "radius_m", "disp_m", "lambda", "E_g_J", "t(g=1)_s",
                "t(g=1/8pi)_s");
  out << buf;
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%-8s %12.4e %12.4e %12.4e %12.4e %12.4e %14.4e %14.4e\n",
                  r.label.c_str(), r.mass, r.radius, r.displacement, r.lambda, r.energy,
                  r.t_gamma1, r.t_gamma_8pi);
    out << buf;
  }
  return out.str();
}

}  // namespace dpc
