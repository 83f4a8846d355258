#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "detour/types.hpp"

namespace detour {

/// Run settings shared by the pipeline subcommands. Every key of the config
/// file maps to one field and one CLI flag; CLI flags win.
struct RunConfig {
  std::int64_t window_start = 0;
  std::int64_t window_end = 0;

  std::vector<std::string> rib_files;
  std::string ip_country_db;
  std::string fallback_db;
  std::string infra_ips;
  std::string ip_to_as;
  std::string ixp;
  std::string as_rel;
  std::string traceroutes;

  std::string output_dir = "out";
  std::string geo_map;        // defaults to <output_dir>/as_geo.jsonl
  std::string detect_dir;     // defaults to <output_dir>
  std::string routing_table;  // defaults to <output_dir>/routing_table.csv

  int min_ownership_days = 15;
  int transient_hours = 72;
  double rtt_ratio = 10.0;
  double rtt_floor_ms = 5.0;
  bool dedup_representative = true;
  bool peering_filter = true;
  bool anchor_on_return = false;
  int jobs = 1;
  int top_n = 10;

  /// Window length must divide into whole 8-hour epochs.
  std::size_t epoch_count() const;
  void check_window() const;

  std::string geo_map_path() const;
  std::string detect_dir_path() const;
  std::string routing_table_path() const;
};

/// `key = value` lines, `#` comments; `rib` may repeat. Relative paths are
/// resolved against the config file's directory.
RunConfig load_config_file(const std::string& path);
void apply_config_entry(RunConfig& config, std::string_view key, std::string_view value,
                        const std::string& base_dir);

}  // namespace detour
