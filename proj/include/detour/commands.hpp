#pragma once

#include <string>

#include "detour/config.hpp"
#include "detour/fixtures.hpp"

namespace detour {

// Pipeline subcommands. Each validates its inputs (ConfigError), reads and
// writes only under config.output_dir, and produces byte-identical outputs
// for identical inputs. Errors surface as exceptions; the CLI maps them to
// exit codes.

/// Builds the AS-to-country map. Writes as_geo.jsonl, geo_stats.json,
/// geo_cdf.csv, routing_table.csv, ownership_rejects.csv.
void cmd_geo(const RunConfig& config);

/// Runs detection over the RIB corpus. Writes verdicts.jsonl, counters.json,
/// peers.json.
void cmd_detect(const RunConfig& config);

/// Timelines, metrics, quadrants, per-country averages and report tables.
/// Writes metrics.csv, per_country.csv, tables.json, tables.txt, coverage.json.
void cmd_dynamics(const RunConfig& config);

/// Offline traceroute validation. Writes validation_summary.json.
void cmd_validate(const RunConfig& config);

/// Generates a synthetic bundle with ground truth (see fixtures).
void cmd_gen(const RandomScenarioSpec& spec, const std::string& out_dir);

}  // namespace detour
