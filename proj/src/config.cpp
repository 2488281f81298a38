#include "sslhop/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace sslhop {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

long parse_integer(const std::string& key, const std::string& value) {
  long out = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size())
    throw std::invalid_argument("invalid value for " + key + ": " + value);
  return out;
}

double parse_real(const std::string& key, const std::string& value) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size())
    throw std::invalid_argument("invalid value for " + key + ": " + value);
  return out;
}

Aggregation parse_aggregation(const std::string& value) {
  if (value == "flatten") return Aggregation::flatten;
  if (value == "spatial_max") return Aggregation::spatial_max;
  if (value == "spatial_mean") return Aggregation::spatial_mean;
  throw std::invalid_argument("invalid value for aggregation: " + value);
}

}  // namespace

TrainConfig parse_config(const std::string& text) {
  TrainConfig config;
  std::istringstream lines(text);
  std::string raw;
  while (std::getline(lines, raw)) {
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;

    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("malformed config line: " + line);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));

    if (key == "num_levels") {
      config.hop.num_levels = static_cast<int>(parse_integer(key, value));
    } else if (key == "window") {
      config.hop.window = static_cast<int>(parse_integer(key, value));
    } else if (key == "stride") {
      config.hop.stride = static_cast<int>(parse_integer(key, value));
    } else if (key == "pool") {
      config.hop.pool = static_cast<int>(parse_integer(key, value));
    } else if (key == "energy_forward") {
      config.hop.energy_forward = parse_real(key, value);
    } else if (key == "energy_cutoff") {
      config.hop.energy_cutoff = parse_real(key, value);
    } else if (key == "aggregation") {
      config.hop.aggregation = parse_aggregation(value);
    } else if (key == "patch_cap") {
      const long cap = parse_integer(key, value);
      if (cap < 0) throw std::invalid_argument("invalid value for patch_cap: " + value);
      config.hop.patch_cap = static_cast<std::size_t>(cap);
    } else if (key == "head.ridge") {
      if (value == "auto") {
        config.head_ridge = -1.0;
      } else {
        config.head_ridge = parse_real(key, value);
        if (config.head_ridge < 0.0)
          throw std::invalid_argument("invalid value for head.ridge: " + value);
      }
    } else {
      throw std::invalid_argument("unknown config key: " + key);
    }
  }
  validate(config.hop);
  return config;
}

TrainConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

std::string dump_config(const TrainConfig& config) {
  std::string out;
  out += "num_levels=" + std::to_string(config.hop.num_levels) + '\n';
  out += "window=" + std::to_string(config.hop.window) + '\n';
  out += "stride=" + std::to_string(config.hop.stride) + '\n';
  out += "pool=" + std::to_string(config.hop.pool) + '\n';
  out += "energy_forward=" + format_g9(config.hop.energy_forward) + '\n';
  out += "energy_cutoff=" + format_g9(config.hop.energy_cutoff) + '\n';
  out += "aggregation=" + std::string(to_string(config.hop.aggregation)) + '\n';
  out += "patch_cap=" + std::to_string(config.hop.patch_cap) + '\n';
  out += "head.ridge=" +
         (config.head_ridge < 0.0 ? std::string("auto") : format_g9(config.head_ridge)) + '\n';
  return out;
}

}  // namespace sslhop
