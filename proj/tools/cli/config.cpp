#include "config.hpp"

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "kgstab/error.hpp"

namespace kgstab::cli {

namespace {

Error config_error(const std::string& what) {
  return Error("cli.ConfigError", what, ErrorKind::config);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_real(const std::string& key, const std::string& v) {
  errno = 0;
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size() || errno == ERANGE) {
    throw config_error("key '" + key + "': '" + v + "' is not a number");
  }
  return x;
}

long parse_integer(const std::string& key, const std::string& v) {
  errno = 0;
  char* end = nullptr;
  const long x = std::strtol(v.c_str(), &end, 10);
  if (v.empty() || end != v.c_str() + v.size() || errno == ERANGE) {
    throw config_error("key '" + key + "': '" + v + "' is not an integer");
  }
  return x;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw config_error("key '" + key + "': '" + v + "' is not a boolean");
}

}  // namespace

const std::vector<OptionSpec>& option_schema() {
  static const std::vector<OptionSpec> schema = {
      {"L", "1", ValueType::real, "ball radius"},
      {"a", "0.5", ValueType::real, "boundary damping, 0 < a < 1"},
      {"coords", "scaled", ValueType::text, "input coordinates: scaled or original"},
      {"n", "401", ValueType::integer, "radial grid points"},
      {"cfl", "0.9", ValueType::real, "dt / dr"},
      {"T_end", "30", ValueType::real, "final time"},
      {"record_every", "10", ValueType::integer, "steps between history rows"},
      {"mode", "linearized", ValueType::text, "linearized or nonlinear"},
      {"epsilon", "0.0001", ValueType::real, "H1 norm of the initial perturbation"},
      {"beta", "auto", ValueType::text, "target decay rate; auto = beta_fraction * asymptotic line"},
      {"beta_fraction", "0.4", ValueType::real, "fraction of the asymptotic line used by beta = auto"},
      {"beta_max", "auto", ValueType::text, "pole strip height; auto = asymptotic line + 0.5"},
      {"alpha_max", "60", ValueType::real, "pole strip half width"},
      {"route", "discrete", ValueType::text, "target route: discrete or continuous"},
      {"extra_columns", "4", ValueType::integer, "control basis size beyond the moment rows"},
      {"max_picard", "50", ValueType::integer, "Picard iteration cap"},
      {"picard_tol", "1e-08", ValueType::real, "relative Picard tolerance"},
      {"fit_t1", "5", ValueType::real, "decay fit window start"},
      {"fit_t2", "-1", ValueType::real, "decay fit window end; negative = T_end"},
      {"twin", "true", ValueType::boolean, "also run the uncontrolled twin"},
      {"T_beta", "6", ValueType::real, "feedback period"},
      {"epsilon0", "0.02", ValueType::real, "rate margin of the period bound"},
      {"periods", "6", ValueType::integer, "number of feedback periods"},
      {"picard_per_period", "3", ValueType::integer, "Picard iterations per period"},
      {"observer", "true", ValueType::boolean, "feedback on (closed loop)"},
      {"auto_grow", "true", ValueType::boolean, "lengthen the period when it fails to contract"},
      {"kick_time", "-1", ValueType::real, "time of the state kick; negative = none"},
      {"kick_fraction", "0.1", ValueType::real, "relative size of the kick"},
      {"A", "1", ValueType::real, "frequency cutoff of the kernel tails"},
      {"verify_beta", "0.1", ValueType::real, "Im omega used by the expansion checks"},
      {"seed", "2024", ValueType::integer, "random seed for sampled checks"},
      {"sweep_scenario", "instability", ValueType::text, "scenario run by sweep"},
      {"sweep_key", "a", ValueType::text, "key varied by sweep"},
      {"sweep_values", "0.3,0.5,0.7", ValueType::text, "comma separated values"},
      {"out_dir", ".", ValueType::text, "output directory"},
      {"prefix", "", ValueType::text, "output file prefix; empty = scenario name"},
      {"emit_plots", "true", ValueType::boolean, "write gnuplot scripts"},
  };
  return schema;
}

const OptionSpec* find_option(const std::string& key) {
  for (const auto& o : option_schema()) {
    if (o.key == key) return &o;
  }
  return nullptr;
}

Config Config::defaults() {
  Config c;
  for (const auto& o : option_schema()) c.values_[o.key] = o.default_value;
  return c;
}

Config Config::parse_text(const std::string& text, const std::string& origin) {
  Config c;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw config_error(origin + ":" + std::to_string(lineno) + ": expected key = value");
    }
    c.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return c;
}

Config Config::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string::npos || text[first] != '{') return parse_text(text, path);

  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    throw config_error(path + ": " + e.what());
  }
  const auto& obj = j.contains("config") ? j["config"] : j;
  if (!obj.is_object()) throw config_error(path + ": no config object");
  Config c;
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    const auto& v = it.value();
    if (v.is_string()) c.set(it.key(), v.get<std::string>());
    else if (v.is_boolean()) c.set(it.key(), v.get<bool>() ? "true" : "false");
    else if (v.is_number()) c.set(it.key(), v.dump());
    else throw config_error(path + ": value of '" + it.key() + "' is not a scalar");
  }
  return c;
}

void Config::merge(const Config& other) {
  for (const auto& [k, v] : other.values_) values_[k] = v;
}

void Config::set(const std::string& key, const std::string& value) {
  const auto* spec = find_option(key);
  if (!spec) throw config_error("unknown key '" + key + "'");
  // Type check eagerly so bad input fails before any work starts.
  switch (spec->type) {
    case ValueType::real:
      parse_real(key, value);
      break;
    case ValueType::integer:
      parse_integer(key, value);
      break;
    case ValueType::boolean:
      parse_bool(key, value);
      break;
    case ValueType::text:
      break;
  }
  values_[key] = value;
}

double Config::to_real(const std::string& key, const std::string& value) {
  return parse_real(key, value);
}

double Config::real(const std::string& key) const { return parse_real(key, text(key)); }
long Config::integer(const std::string& key) const { return parse_integer(key, text(key)); }
bool Config::boolean(const std::string& key) const { return parse_bool(key, text(key)); }

const std::string& Config::text(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw config_error("missing key '" + key + "'");
  return it->second;
}

std::vector<double> Config::real_list(const std::string& key) const {
  std::vector<double> out;
  std::istringstream is(text(key));
  std::string item;
  while (std::getline(is, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(parse_real(key, item));
  }
  return out;
}

std::string Config::to_json_object() const {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [k, v] : values_) {
    const auto* spec = find_option(k);
    // Text form is kept verbatim; numbers go out as strings too so that the
    // exact digits the run used come back on reload.
    if (spec && spec->type == ValueType::boolean) j[k] = parse_bool(k, v);
    else j[k] = v;
  }
  return j.dump();
}

}  // namespace kgstab::cli
