#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "detour/commands.hpp"
#include "detour/config.hpp"
#include "detour/types.hpp"

namespace {

using detour::RunConfig;

/// --config is resolved before CLI11 parsing so explicit flags override it.
RunConfig preload_config(int argc, char** argv) {
  for (int i = 1; i < argc - 1; ++i) {
    std::string arg = argv[i];
    if (arg == "--config" || arg == "-c") return detour::load_config_file(argv[i + 1]);
    if (arg.rfind("--config=", 0) == 0) return detour::load_config_file(arg.substr(9));
  }
  return RunConfig{};
}

void add_common_options(CLI::App* cmd, RunConfig& config, std::vector<std::string>& cli_ribs) {
  cmd->add_option("-c,--config", "config file (key = value)")->type_name("FILE");
  cmd->add_option("--window-start", config.window_start, "window start, seconds since epoch");
  cmd->add_option("--window-end", config.window_end, "window end, seconds since epoch");
  cmd->add_option("--rib", cli_ribs, "RIB file (repeatable; replaces config list)");
  cmd->add_option("--ip-country-db", config.ip_country_db, "IP range to country CSV");
  cmd->add_option("--fallback-db", config.fallback_db, "fallback IP range CSV, misses only");
  cmd->add_option("--infra-ips", config.infra_ips, "infrastructure IP evidence CSV");
  cmd->add_option("--ip-to-as", config.ip_to_as, "exact ip,asn dataset CSV");
  cmd->add_option("--ixp", config.ixp, "IXP participant CSV");
  cmd->add_option("--as-rel", config.as_rel, "AS relationship file (serial-1)");
  cmd->add_option("--traceroutes", config.traceroutes, "traceroute results JSONL");
  cmd->add_option("-o,--output-dir", config.output_dir, "output directory");
  cmd->add_option("--geo-map", config.geo_map, "AS geolocation map JSONL (detect input)");
  cmd->add_option("--detect-dir", config.detect_dir, "directory with detect outputs");
  cmd->add_option("--routing-table", config.routing_table, "routing table CSV (validate input)");
  cmd->add_option("--min-ownership-days", config.min_ownership_days,
                  "days a prefix must be announced to trust ownership");
  cmd->add_option("--transient-hours", config.transient_hours, "transient persistence bound, hours");
  cmd->add_option("--rtt-ratio", config.rtt_ratio, "RTT jump ratio");
  cmd->add_option("--rtt-floor-ms", config.rtt_floor_ms, "RTT jump absolute floor, ms");
  cmd->add_flag("--dedup-representative,!--no-dedup-representative", config.dedup_representative,
                "keep only the representative peer per AS");
  cmd->add_flag("--peering-filter,!--no-peering-filter", config.peering_filter,
                "drop detours explainable by an origin-return peering link");
  cmd->add_flag("--anchor-on-return", config.anchor_on_return,
                "congruence anchors on the return AS instead of the first destination AS");
  cmd->add_option("-j,--jobs", config.jobs, "parallel RIB parsers");
  cmd->add_option("--top-n", config.top_n, "rows per report table");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"International BGP detour detection and characterization toolkit"};
  app.require_subcommand(1);

  RunConfig config;
  try {
    config = preload_config(argc, argv);
  } catch (const detour::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const detour::ParseError& e) {
    std::fprintf(stderr, "parse error: %s\n", e.what());
    return 2;
  }

  std::vector<std::string> cli_ribs;
  auto* geo = app.add_subcommand("geo", "build the AS-to-country map from RIBs and evidence files");
  auto* detect = app.add_subcommand("detect", "detect definite international detours in RIB snapshots");
  auto* dynamics = app.add_subcommand("dynamics", "flap rate, duty cycle, persistence and report tables");
  auto* validate = app.add_subcommand("validate", "judge detours against traceroute results");
  for (auto* cmd : {geo, detect, dynamics, validate}) add_common_options(cmd, config, cli_ribs);

  auto* gen = app.add_subcommand("gen", "generate a synthetic bundle with planted ground truth");
  detour::RandomScenarioSpec spec;
  std::string gen_out = "bundle";
  gen->add_option("--seed", spec.seed, "scenario seed");
  gen->add_option("--out", gen_out, "bundle directory");
  gen->add_option("--peers", spec.peer_count, "number of peer ASes");
  gen->add_option("--transit", spec.transit_as_count, "number of transit ASes");
  gen->add_option("--epochs", spec.epoch_count, "window length in 8-hour epochs");
  gen->add_option("--persistent", spec.persistent_plants, "persistent detours to plant");
  gen->add_option("--transient", spec.transient_plants, "transient detours to plant");
  gen->add_option("--flash", spec.flash_plants, "flash detours to plant");
  gen->add_option("--baseline-prefixes", spec.baseline_prefixes_per_as, "baseline prefixes per AS");
  gen->add_flag("--mrt", spec.mrt_format, "write MRT RIBs instead of the text format");

  CLI11_PARSE(app, argc, argv);
  if (!cli_ribs.empty()) config.rib_files = cli_ribs;

  try {
    if (geo->parsed()) detour::cmd_geo(config);
    else if (detect->parsed()) detour::cmd_detect(config);
    else if (dynamics->parsed()) detour::cmd_dynamics(config);
    else if (validate->parsed()) detour::cmd_validate(config);
    else if (gen->parsed()) detour::cmd_gen(spec, gen_out);
  } catch (const detour::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const detour::ParseError& e) {
    std::fprintf(stderr, "parse error: %s\n", e.what());
    return 2;
  } catch (const detour::InternalError& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 0;
}
