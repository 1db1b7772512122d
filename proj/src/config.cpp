#include "enkbf/config.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace enkbf {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

// Strip a trailing comment that is not inside a quoted string.
std::string strip_comment(const std::string& s) {
  bool quoted = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') quoted = !quoted;
    if (s[i] == '#' && !quoted) return s.substr(0, i);
  }
  return s;
}

}  // namespace

void ConfigFile::fail(const std::string& what, int line) const {
  throw std::runtime_error(origin_ + ":" + std::to_string(line) + ": " +
                           what);
}

ConfigFile ConfigFile::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_string(ss.str(), path);
}

ConfigFile ConfigFile::parse_string(const std::string& text,
                                    const std::string& origin) {
  ConfigFile cfg;
  cfg.origin_ = origin;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(strip_comment(line));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') cfg.fail("unterminated section header", lineno);
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) cfg.fail("empty section name", lineno);
      cfg.sections_[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      cfg.fail("expected key = value", lineno);
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      cfg.fail("expected key = value", lineno);
    }
    cfg.sections_[section][key] = Value{value, lineno};
  }
  return cfg;
}

const ConfigFile::Value* ConfigFile::find(const std::string& section,
                                          const std::string& key) const {
  const auto s = sections_.find(section);
  if (s == sections_.end()) return nullptr;
  const auto k = s->second.find(key);
  return k == s->second.end() ? nullptr : &k->second;
}

bool ConfigFile::has(const std::string& section,
                     const std::string& key) const {
  return find(section, key) != nullptr;
}

std::string ConfigFile::get_string(const std::string& section,
                                   const std::string& key,
                                   std::optional<std::string> fallback) const {
  const Value* v = find(section, key);
  if (v == nullptr) {
    if (fallback) return *fallback;
    throw std::runtime_error(origin_ + ": missing [" + section + "] " + key);
  }
  if (v->raw.size() >= 2 && v->raw.front() == '"' && v->raw.back() == '"') {
    return v->raw.substr(1, v->raw.size() - 2);
  }
  fail("expected a quoted string for " + key, v->line);
}

double ConfigFile::get_number(const std::string& section,
                              const std::string& key,
                              std::optional<double> fallback) const {
  const Value* v = find(section, key);
  if (v == nullptr) {
    if (fallback) return *fallback;
    throw std::runtime_error(origin_ + ": missing [" + section + "] " + key);
  }
  try {
    std::size_t used = 0;
    const double x = std::stod(v->raw, &used);
    if (used != v->raw.size()) fail("trailing junk after number", v->line);
    return x;
  } catch (const std::invalid_argument&) {
    fail("expected a number for " + key, v->line);
  } catch (const std::out_of_range&) {
    fail("number out of range for " + key, v->line);
  }
}

long ConfigFile::get_integer(const std::string& section,
                             const std::string& key,
                             std::optional<long> fallback) const {
  const Value* v = find(section, key);
  if (v == nullptr) {
    if (fallback) return *fallback;
    throw std::runtime_error(origin_ + ": missing [" + section + "] " + key);
  }
  try {
    std::size_t used = 0;
    const long x = std::stol(v->raw, &used);
    if (used != v->raw.size()) fail("expected an integer for " + key, v->line);
    return x;
  } catch (const std::exception&) {
    fail("expected an integer for " + key, v->line);
  }
}

bool ConfigFile::get_bool(const std::string& section, const std::string& key,
                          std::optional<bool> fallback) const {
  const Value* v = find(section, key);
  if (v == nullptr) {
    if (fallback) return *fallback;
    throw std::runtime_error(origin_ + ": missing [" + section + "] " + key);
  }
  if (v->raw == "true") return true;
  if (v->raw == "false") return false;
  fail("expected true or false for " + key, v->line);
}

std::vector<double> ConfigFile::get_number_array(const std::string& section,
                                                 const std::string& key) const {
  const Value* v = find(section, key);
  if (v == nullptr) {
    throw std::runtime_error(origin_ + ": missing [" + section + "] " + key);
  }
  if (v->raw.front() != '[' || v->raw.back() != ']') {
    fail("expected an array for " + key, v->line);
  }
  std::vector<double> out;
  std::istringstream in(v->raw.substr(1, v->raw.size() - 2));
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      fail("bad array element for " + key, v->line);
    }
  }
  return out;
}

ExperimentConfig experiment_config_from(const ConfigFile& f) {
  ExperimentConfig cfg;

  const std::string model = f.get_string("model", "kind", std::string("l63"));
  if (model == "l63") {
    cfg.model = ModelSpec::lorenz63(f.get_number("model", "dt", 0.01));
    cfg.model.p = f.get_number("model", "p", 10.0);
    cfg.model.r = f.get_number("model", "r", 28.0);
    cfg.model.b = f.get_number("model", "b", 8.0 / 3.0);
  } else if (model == "l96") {
    cfg.model = ModelSpec::lorenz96(
        static_cast<int>(f.get_integer("model", "n", 40)),
        f.get_number("model", "forcing", 8.0),
        f.get_number("model", "dt", 0.025));
  } else {
    throw std::runtime_error("config: unknown model kind: " + model);
  }

  cfg.obs_interval =
      static_cast<int>(f.get_integer("observations", "interval", 8));
  const std::string op =
      f.get_string("observations", "operator", std::string("identity"));
  if (op == "identity") {
    cfg.observe_all = true;
  } else if (op == "every_other") {
    cfg.observe_all = false;
  } else {
    throw std::runtime_error("config: unknown observation operator: " + op);
  }
  cfg.obs_parity =
      static_cast<int>(f.get_integer("observations", "parity", 0));
  cfg.obs_variance = f.get_number("observations", "variance", 2.0);

  cfg.ensemble_size =
      static_cast<int>(f.get_integer("filter", "ensemble_size", 3));
  cfg.filter =
      parse_filter_kind(f.get_string("filter", "kind", std::string("letkf")));
  cfg.scheme =
      parse_step_scheme(f.get_string("filter", "scheme", std::string("dsi")));
  cfg.schedule_kind = parse_schedule_kind(
      f.get_string("filter", "schedule", std::string("uniform")));
  cfg.pseudo_steps = static_cast<int>(f.get_integer("filter", "steps", 5));
  cfg.mean_mode = parse_mean_mode(
      f.get_string("filter", "mean_mode", std::string("per_step")));

  cfg.localize = f.get_bool("localization", "enabled", false);
  cfg.localization_radius = f.get_number("localization", "radius", 4.0);

  const std::string infl =
      f.get_string("inflation", "mode", std::string("fixed"));
  if (infl == "fixed") {
    cfg.inflation_mode = InflationMode::Fixed;
  } else if (infl == "adaptive") {
    cfg.inflation_mode = InflationMode::Adaptive;
  } else {
    throw std::runtime_error("config: unknown inflation mode: " + infl);
  }
  cfg.fixed_delta = f.get_number("inflation", "delta", 0.0);
  cfg.adaptive.kappa = f.get_number("inflation", "kappa", 0.03);
  cfg.adaptive.floor = f.get_number("inflation", "floor", 1.0);
  cfg.adaptive.delta_min = f.get_number("inflation", "delta_min", 0.0);
  cfg.adaptive.delta_max = f.get_number("inflation", "delta_max", 1.0);

  cfg.cycles = f.get_integer("run", "cycles", 20000);
  cfg.spinup = f.get_integer("run", "spinup", 1000);
  cfg.seed = static_cast<std::uint64_t>(f.get_integer("run", "seed", 1));
  const std::string init =
      f.get_string("run", "init", std::string("obs_noise"));
  if (init == "obs_noise") {
    cfg.init = EnsembleInit::ObsNoise;
  } else if (init == "unit_noise") {
    cfg.init = EnsembleInit::UnitNoise;
  } else if (init == "steady_state") {
    cfg.init = EnsembleInit::SteadyState;
  } else {
    throw std::runtime_error("config: unknown ensemble init: " + init);
  }
  cfg.init_noise_scale = f.get_number("run", "init_noise_scale", 1.0);
  cfg.abort_failure_rate = f.get_number("run", "abort_failure_rate", 0.05);
  cfg.out_dir = f.get_string("run", "out_dir", std::string("out"));
  cfg.dump_inflation_fields =
      f.get_bool("run", "dump_inflation_fields", false);

  cfg.validate();
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  return experiment_config_from(ConfigFile::parse_file(path));
}

}  // namespace enkbf
