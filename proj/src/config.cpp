#include "detour/config.hpp"

#include <charconv>
#include <filesystem>
#include <istream>

#include "detour/io_util.hpp"

namespace detour {

std::size_t RunConfig::epoch_count() const {
  check_window();
  return std::size_t((window_end - window_start) / kEpochSeconds);
}

void RunConfig::check_window() const {
  if (window_end <= window_start)
    throw ConfigError("window_end must be after window_start");
  if ((window_end - window_start) % kEpochSeconds != 0)
    throw ConfigError("window length must be a whole number of 8-hour epochs");
}

std::string RunConfig::geo_map_path() const {
  return geo_map.empty() ? output_dir + "/as_geo.jsonl" : geo_map;
}
std::string RunConfig::detect_dir_path() const {
  return detect_dir.empty() ? output_dir : detect_dir;
}
std::string RunConfig::routing_table_path() const {
  return routing_table.empty() ? output_dir + "/routing_table.csv" : routing_table;
}

namespace {

std::string resolve(const std::string& base_dir, std::string_view value) {
  std::filesystem::path p{std::string(value)};
  if (p.is_absolute() || base_dir.empty()) return p.string();
  return (std::filesystem::path(base_dir) / p).lexically_normal().string();
}

std::int64_t to_int(std::string_view value, std::string_view key) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc{} || ptr != value.data() + value.size())
    throw ConfigError("bad integer for " + std::string(key) + ": " + std::string(value));
  return v;
}

double to_double(std::string_view value, std::string_view key) {
  try {
    return std::stod(std::string(value));
  } catch (const std::exception&) {
    throw ConfigError("bad number for " + std::string(key) + ": " + std::string(value));
  }
}

bool to_bool(std::string_view value, std::string_view key) {
  if (value == "on" || value == "true" || value == "1") return true;
  if (value == "off" || value == "false" || value == "0") return false;
  throw ConfigError("bad boolean for " + std::string(key) + ": " + std::string(value));
}

}  // namespace

void apply_config_entry(RunConfig& c, std::string_view key, std::string_view value,
                        const std::string& base_dir) {
  if (key == "window_start") c.window_start = to_int(value, key);
  else if (key == "window_end") c.window_end = to_int(value, key);
  else if (key == "rib") c.rib_files.push_back(resolve(base_dir, value));
  else if (key == "ip_country_db") c.ip_country_db = resolve(base_dir, value);
  else if (key == "fallback_db") c.fallback_db = resolve(base_dir, value);
  else if (key == "infra_ips") c.infra_ips = resolve(base_dir, value);
  else if (key == "ip_to_as") c.ip_to_as = resolve(base_dir, value);
  else if (key == "ixp") c.ixp = resolve(base_dir, value);
  else if (key == "as_rel") c.as_rel = resolve(base_dir, value);
  else if (key == "traceroutes") c.traceroutes = resolve(base_dir, value);
  else if (key == "output_dir") c.output_dir = resolve(base_dir, value);
  else if (key == "geo_map") c.geo_map = resolve(base_dir, value);
  else if (key == "detect_dir") c.detect_dir = resolve(base_dir, value);
  else if (key == "routing_table") c.routing_table = resolve(base_dir, value);
  else if (key == "min_ownership_days") c.min_ownership_days = int(to_int(value, key));
  else if (key == "transient_hours") c.transient_hours = int(to_int(value, key));
  else if (key == "rtt_ratio") c.rtt_ratio = to_double(value, key);
  else if (key == "rtt_floor_ms") c.rtt_floor_ms = to_double(value, key);
  else if (key == "dedup_representative") c.dedup_representative = to_bool(value, key);
  else if (key == "peering_filter") c.peering_filter = to_bool(value, key);
  else if (key == "anchor_on_return") c.anchor_on_return = to_bool(value, key);
  else if (key == "jobs") c.jobs = int(to_int(value, key));
  else if (key == "top_n") c.top_n = int(to_int(value, key));
  else throw ConfigError("unknown config key: " + std::string(key));
}

RunConfig load_config_file(const std::string& path) {
  RunConfig config;
  auto in = open_input(path);
  std::string base_dir = std::filesystem::path(path).parent_path().string();
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(*in, raw)) {
    ++line_no;
    auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError(path + ":" + std::to_string(line_no) + ": expected key = value");
    auto key = trim(line.substr(0, eq));
    auto value = trim(line.substr(eq + 1));
    try {
      apply_config_entry(config, key, value, base_dir);
    } catch (const ConfigError& e) {
      throw ConfigError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return config;
}

}  // namespace detour
