#include "dpc/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

#include "dpc/errors.hpp"

namespace dpc {

const char* to_string(RunMode m) {
  switch (m) {
    case RunMode::Superposed: return "superposed";
    case RunMode::Control: return "control";
    case RunMode::Both: return "both";
  }
  return "both";
}

RunMode run_mode_from_string(const std::string& s) {
  if (s == "superposed") return RunMode::Superposed;
  if (s == "control") return RunMode::Control;
  if (s == "both") return RunMode::Both;
  throw ConfigError("mode must be one of superposed|control|both, got '" + s + "'");
}

void RunConfig::validate() const {
  apparatus.validate();
  if (n_trials < 1) throw ConfigError("n_trials must be >= 1");
  if (output_dir.empty()) throw ConfigError("output_dir must be non-empty");
}

namespace {

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

double parse_double(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  if (t == "inf" || t == "+inf") return std::numeric_limits<double>::infinity();
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(t, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != t.size()) {
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  }
  return out;
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  if (t.empty() || !std::all_of(t.begin(), t.end(), [](unsigned char c) { return std::isdigit(c); })) {
    throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
  }
  try {
    return std::stoull(t);
  } catch (const std::exception&) {
    throw ConfigError(key + ": integer out of range '" + v + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& v) {
  std::string t = trim(v);
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
  if (t == "true" || t == "on" || t == "yes" || t == "1") return true;
  if (t == "false" || t == "off" || t == "no" || t == "0") return false;
  throw ConfigError(key + ": expected true|false, got '" + v + "'");
}

// "label:seconds, label:seconds" or "none".
std::vector<ComponentTime> parse_components(const std::string& key, const std::string& v) {
  std::vector<ComponentTime> out;
  const std::string t = trim(v);
  if (t.empty() || t == "none") return out;
  std::stringstream ss(t);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    const auto colon = item.find(':');
    if (colon == std::string::npos) {
      throw ConfigError(key + ": expected label:seconds, got '" + item + "'");
    }
    out.push_back({trim(item.substr(0, colon)), parse_double(key, item.substr(colon + 1))});
  }
  return out;
}

template <typename Fn>
auto wrap_enum(const std::string& key, Fn&& fn) {
  try {
    return fn();
  } catch (const DomainError& e) {
    throw ConfigError(key + ": " + e.what());
  }
}

struct KeySpec {
  std::string name;
  std::string section;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<nlohmann::ordered_json(const RunConfig&)> get;
};

#define DPC_DOUBLE_KEY(section, field)                                                   \
  KeySpec {                                                                              \
    #field, section,                                                                     \
        [](RunConfig& c, const std::string& v) { c.apparatus.field = parse_double(#field, v); }, \
        [](const RunConfig& c) { return nlohmann::ordered_json(c.apparatus.field); }     \
  }

const std::vector<KeySpec>& key_table() {
  static const std::vector<KeySpec> table = [] {
    std::vector<KeySpec> t{
        DPC_DOUBLE_KEY("source", photon_rate),
        DPC_DOUBLE_KEY("source", spad_efficiency),
        DPC_DOUBLE_KEY("source", spad_dead_time),
        DPC_DOUBLE_KEY("source", ambient_dark_rate),
        DPC_DOUBLE_KEY("source", cooling_delta),
        DPC_DOUBLE_KEY("optics", laser_wavelength),
        DPC_DOUBLE_KEY("optics", geometry_factor),
        DPC_DOUBLE_KEY("optics", bias_phase),
        {"eraser_enabled", "optics",
         [](RunConfig& c, const std::string& v) {
           c.apparatus.eraser_enabled = parse_bool("eraser_enabled", v);
         },
         [](const RunConfig& c) { return nlohmann::ordered_json(c.apparatus.eraser_enabled); }},
        DPC_DOUBLE_KEY("optics", entrainment_rate),
        DPC_DOUBLE_KEY("piezo", piezo_tau),
        DPC_DOUBLE_KEY("piezo", piezo_full_scale),
        DPC_DOUBLE_KEY("masses", mirror_mass),
        DPC_DOUBLE_KEY("masses", mirror_density),
        DPC_DOUBLE_KEY("masses", mirror_shape_correction),
        DPC_DOUBLE_KEY("masses", mount_mass),
        DPC_DOUBLE_KEY("masses", mount_density),
        DPC_DOUBLE_KEY("masses", spread_rate_factor),
        DPC_DOUBLE_KEY("detector", sample_interval),
        DPC_DOUBLE_KEY("detector", trace_duration),
        DPC_DOUBLE_KEY("detector", detector_noise_sigma),
        DPC_DOUBLE_KEY("detector", detector_quantization),
        {"precollapse_readout", "detector",
         [](RunConfig& c, const std::string& v) {
           c.apparatus.precollapse_readout = wrap_enum(
               "precollapse_readout", [&] { return precollapse_readout_from_string(trim(v)); });
         },
         [](const RunConfig& c) {
           return nlohmann::ordered_json(to_string(c.apparatus.precollapse_readout));
         }},
        DPC_DOUBLE_KEY("collapse", gamma),
        DPC_DOUBLE_KEY("collapse", gamma_dec),
        {"collapse_model", "collapse",
         [](RunConfig& c, const std::string& v) {
           c.apparatus.collapse_model =
               wrap_enum("collapse_model", [&] { return collapse_model_from_string(trim(v)); });
         },
         [](const RunConfig& c) {
           return nlohmann::ordered_json(to_string(c.apparatus.collapse_model));
         }},
        {"variant", "collapse",
         [](RunConfig& c, const std::string& v) {
           c.apparatus.variant =
               wrap_enum("variant", [&] { return overlap_variant_from_string(trim(v)); });
         },
         [](const RunConfig& c) { return nlohmann::ordered_json(to_string(c.apparatus.variant)); }},
        {"extra_component_times", "collapse",
         [](RunConfig& c, const std::string& v) {
           c.apparatus.extra_component_times = parse_components("extra_component_times", v);
         },
         [](const RunConfig& c) {
           std::string s;
           for (const auto& comp : c.apparatus.extra_component_times) {
             if (!s.empty()) s += ", ";
             std::ostringstream os;
             os.precision(17);
             os << comp.label << ':' << comp.collapse_time;
             s += os.str();
           }
           return nlohmann::ordered_json(s.empty() ? std::string("none") : s);
         }},
        {"G", "collapse",
         [](RunConfig& c, const std::string& v) { c.apparatus.constants.G = parse_double("G", v); },
         [](const RunConfig& c) { return nlohmann::ordered_json(c.apparatus.constants.G); }},
        {"hbar", "collapse",
         [](RunConfig& c, const std::string& v) {
           c.apparatus.constants.hbar = parse_double("hbar", v);
         },
         [](const RunConfig& c) { return nlohmann::ordered_json(c.apparatus.constants.hbar); }},
        {"n_trials", "run",
         [](RunConfig& c, const std::string& v) { c.n_trials = parse_u64("n_trials", v); },
         [](const RunConfig& c) { return nlohmann::ordered_json(c.n_trials); }},
        {"master_seed", "run",
         [](RunConfig& c, const std::string& v) { c.master_seed = parse_u64("master_seed", v); },
         [](const RunConfig& c) { return nlohmann::ordered_json(c.master_seed); }},
        {"output_dir", "run",
         [](RunConfig& c, const std::string& v) { c.output_dir = trim(v); },
         [](const RunConfig& c) { return nlohmann::ordered_json(c.output_dir); }},
        {"mode", "run",
         [](RunConfig& c, const std::string& v) { c.mode = run_mode_from_string(trim(v)); },
         [](const RunConfig& c) { return nlohmann::ordered_json(to_string(c.mode)); }},
    };
    return t;
  }();
  return table;
}

#undef DPC_DOUBLE_KEY

const KeySpec* find_key(const std::string& key) {
  for (const auto& k : key_table()) {
    if (k.name == key) return &k;
  }
  return nullptr;
}

std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] != b[j - 1])});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

}  // namespace

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const auto& k : key_table()) out.push_back(k.name);
  return out;
}

std::string nearest_config_key(const std::string& key) {
  std::string best;
  std::size_t best_d = std::numeric_limits<std::size_t>::max();
  for (const auto& k : key_table()) {
    const auto d = edit_distance(key, k.name);
    if (d < best_d) {
      best_d = d;
      best = k.name;
    }
  }
  return best;
}

void set_config_value(RunConfig& config, const std::string& key, const std::string& value) {
  const KeySpec* spec = find_key(key);
  if (spec == nullptr) {
    throw ConfigError("unknown config key '" + key + "' (did you mean '" +
                      nearest_config_key(key) + "'?)");
  }
  spec->set(config, value);
}

void apply_config_text(RunConfig& config, const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = origin + ":" + std::to_string(lineno) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + "malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      const bool known = std::any_of(key_table().begin(), key_table().end(),
                                     [&](const KeySpec& k) { return k.section == section; });
      if (!known) throw ConfigError(where + "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      const KeySpec* spec = find_key(key);
      if (spec != nullptr && !section.empty() && spec->section != section) {
        throw ConfigError("key '" + key + "' belongs in [" + spec->section + "], not [" +
                          section + "]");
      }
      set_config_value(config, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
  }
}

void apply_config_file(RunConfig& config, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  apply_config_text(config, buf.str(), path.string());
}

void apply_overrides(RunConfig& config, const std::vector<std::string>& overrides) {
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) throw ConfigError("override '" + o + "' is not key=value");
    set_config_value(config, trim(o.substr(0, eq)), o.substr(eq + 1));
  }
}

RunConfig resolve_config(const std::filesystem::path* file,
                         const std::vector<std::string>& overrides) {
  RunConfig config;
  if (file != nullptr) apply_config_file(config, *file);
  apply_overrides(config, overrides);
  config.validate();
  return config;
}

nlohmann::ordered_json to_json(const RunConfig& config) {
  nlohmann::ordered_json j;
  j["schema"] = kConfigSchemaVersion;
  for (const auto& k : key_table()) j[k.name] = k.get(config);
  return j;
}

RunConfig run_config_from_json(const nlohmann::json& j) {
  RunConfig config;
  for (const auto& [key, value] : j.items()) {
    if (key == "schema") continue;
    if (value.is_string()) {
      set_config_value(config, key, value.get<std::string>());
    } else if (value.is_boolean()) {
      set_config_value(config, key, value.get<bool>() ? "true" : "false");
    } else if (value.is_number_unsigned()) {
      set_config_value(config, key, std::to_string(value.get<std::uint64_t>()));
    } else if (value.is_number()) {
      std::ostringstream os;
      os.precision(17);
      os << value.get<double>();
      set_config_value(config, key, os.str());
    } else {
      throw ConfigError("config key '" + key + "' has an unsupported JSON type");
    }
  }
  config.validate();
  return config;
}

}  // namespace dpc
