#include "detour/commands.hpp"

#include <algorithm>
#include <fstream>
#include <future>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "detour/dynamics.hpp"
#include "detour/engine.hpp"
#include "detour/geo.hpp"
#include "detour/io_util.hpp"
#include "detour/rib.hpp"
#include "detour/validator.hpp"

namespace detour {

namespace {

void require_file(const std::string& path, const char* role) {
  if (path.empty()) throw ConfigError(std::string("missing required input: ") + role);
  if (!file_exists(path)) throw ConfigError(std::string(role) + " file not found: " + path);
}

GeoDatabase load_geo_database(const RunConfig& config) {
  require_file(config.ip_country_db, "ip_country_db");
  IpCountryDb primary = IpCountryDb::load_csv(config.ip_country_db);
  if (!config.fallback_db.empty()) {
    require_file(config.fallback_db, "fallback_db");
    return GeoDatabase{std::move(primary), IpCountryDb::load_csv(config.fallback_db)};
  }
  return GeoDatabase{std::move(primary)};
}

/// Parses RIB files with up to config.jobs in flight, preserving file order.
std::vector<RibSnapshot> parse_ribs(const std::vector<std::string>& files, std::int64_t window_start,
                                    int jobs) {
  std::vector<RibSnapshot> out(files.size());
  std::size_t batch = std::size_t(std::max(1, jobs));
  for (std::size_t i = 0; i < files.size(); i += batch) {
    std::size_t end = std::min(files.size(), i + batch);
    std::vector<std::future<RibSnapshot>> running;
    for (std::size_t j = i; j < end; ++j) {
      running.push_back(std::async(std::launch::async,
                                   [&files, j, window_start] { return load_rib(files[j], window_start); }));
    }
    for (std::size_t j = i; j < end; ++j) out[j] = running[j - i].get();
  }
  return out;
}

std::vector<std::string> sorted_rib_files(const RunConfig& config) {
  if (config.rib_files.empty()) throw ConfigError("no RIB files configured");
  for (const auto& f : config.rib_files) require_file(f, "rib");
  auto files = config.rib_files;
  std::sort(files.begin(), files.end());
  files.erase(std::unique(files.begin(), files.end()), files.end());
  return files;
}

nlohmann::json load_json_file(const std::string& path) {
  auto j = nlohmann::json::parse(read_file(path), nullptr, false);
  if (j.is_discarded()) throw ParseError("bad JSON in " + path);
  return j;
}

}  // namespace

// --- geo ---------------------------------------------------------------------

void cmd_geo(const RunConfig& config) {
  config.check_window();
  auto files = sorted_rib_files(config);
  GeoDatabase db = load_geo_database(config);
  ensure_directory(config.output_dir);

  OwnershipTracker ownership;
  std::set<AsNum> path_ases;
  const std::size_t epochs = config.epoch_count();

  // Files are grouped by epoch so only one epoch of records is resident.
  std::map<std::int64_t, std::vector<std::string>> by_epoch;
  for (const auto& f : files) by_epoch[epoch_of(peek_snapshot_time(f), config.window_start)].push_back(f);

  for (const auto& [epoch, epoch_files] : by_epoch) {
    if (std::size_t(epoch) >= epochs)
      throw ConfigError("RIB snapshot falls beyond window_end: " + epoch_files.front());
    for (auto& snap : parse_ribs(epoch_files, config.window_start, config.jobs)) {
      for (const auto& rec : snap.records) {
        for (AsNum asn : rec.as_path)
          if (asn != kUnknownAs) path_ases.insert(asn);
        if (rec.origin_asn == kUnknownAs) continue;  // AS_SET origin cannot own
        ownership.observe(day_of(rec.snapshot_time), rec.prefix, rec.origin_asn);
      }
    }
  }

  OwnershipResult owned = ownership.finish(config.min_ownership_days);

  PrefixTable table;
  std::vector<PrefixGeoEvidence> prefix_geo;
  prefix_geo.reserve(owned.retained.size());
  for (const auto& own : owned.retained) {
    table.add(own.prefix, own.origin_asn);
    prefix_geo.push_back(PrefixGeoEvidence{own.origin_asn, db.geolocate_prefix(own.prefix)});
  }

  std::vector<InfraIpRecord> infra_records;
  if (!config.infra_ips.empty()) {
    require_file(config.infra_ips, "infra_ips");
    IpToAsMap datasets;
    if (!config.ip_to_as.empty()) {
      require_file(config.ip_to_as, "ip_to_as");
      datasets = IpToAsMap::load_csv(config.ip_to_as);
    }
    auto rows = load_infra_csv(config.infra_ips);
    std::set<Ipv4> ips;
    for (const auto& row : rows) ips.insert(row.ip);
    for (Ipv4 ip : ips) {
      InfraIpRecord rec;
      rec.ip = ip;
      rec.geo = geolocate_infra_ip(ip, rows, db);
      rec.asn = map_infra_ip_to_as(ip, datasets, table);
      infra_records.push_back(std::move(rec));
    }
  }

  std::vector<IxpParticipant> ixp;
  if (!config.ixp.empty()) {
    require_file(config.ixp, "ixp");
    ixp = load_ixp_csv(config.ixp);
  }

  AsGeoMap map = build_as_geo(prefix_geo, infra_records, ixp);
  for (AsNum asn : path_ases) map.ensure_present(asn);

  GeoStats stats = compute_geo_stats(map);

  write_file(config.output_dir + "/as_geo.jsonl", map.render_jsonl());
  write_file(config.output_dir + "/geo_cdf.csv", render_cdf_csv(stats));
  write_file(config.output_dir + "/routing_table.csv", table.render_csv());

  std::ostringstream rejects;
  rejects << "prefix,origin_asn,days_seen\n";
  for (const auto& own : owned.rejected)
    rejects << to_string(own.prefix) << ',' << own.origin_asn << ',' << own.days_seen.size() << '\n';
  write_file(config.output_dir + "/ownership_rejects.csv", rejects.str());

  nlohmann::json j;
  j["total_ases"] = stats.total_ases;
  j["unknown_ases"] = stats.unknown_ases;
  j["multi_country_ases"] = stats.multi_country_ases;
  j["multi_country_fraction"] = stats.multi_country_fraction;
  j["avg_multi_set_size"] = stats.avg_multi_set_size;
  j["retained_prefix_owners"] = owned.retained.size();
  j["rejected_prefix_owners"] = owned.rejected.size();
  nlohmann::json hist = nlohmann::json::object();
  for (const auto& [n, count] : stats.countries_histogram) hist[std::to_string(n)] = count;
  j["countries_histogram"] = std::move(hist);
  write_file(config.output_dir + "/geo_stats.json", j.dump(2) + "\n");
}

// --- detect ------------------------------------------------------------------

void cmd_detect(const RunConfig& config) {
  config.check_window();
  auto files = sorted_rib_files(config);
  require_file(config.geo_map_path(), "geo_map");
  AsGeoMap geo = AsGeoMap::load_jsonl(config.geo_map_path());
  RelationshipDb rel;
  if (!config.as_rel.empty()) {
    require_file(config.as_rel, "as_rel");
    rel = RelationshipDb::load_serial1(config.as_rel);
  }
  ensure_directory(config.output_dir);

  const std::size_t epochs = config.epoch_count();
  std::map<std::int64_t, std::vector<std::string>> by_epoch;
  for (const auto& f : files) {
    std::int64_t epoch = epoch_of(peek_snapshot_time(f), config.window_start);
    if (std::size_t(epoch) >= epochs)
      throw ConfigError("RIB snapshot falls beyond window_end: " + f);
    by_epoch[epoch].push_back(f);
  }

  DetectOptions options;
  options.apply_peering_filter = config.peering_filter;

  std::ofstream verdicts(config.output_dir + "/verdicts.jsonl", std::ios::trunc);
  if (!verdicts) throw ConfigError("cannot write " + config.output_dir + "/verdicts.jsonl");

  AggregateCounters totals;
  std::map<PeerId, PeerStats> peer_totals;
  for (const auto& [epoch, epoch_files] : by_epoch) {
    auto snapshots = parse_ribs(epoch_files, config.window_start, config.jobs);
    DetectAllResult result = detect_all(snapshots, geo, rel, options,
                                        [&](const RouteRecord& rec, const DetectionVerdict& verdict) {
                                          verdicts << verdict_to_json(rec, verdict) << '\n';
                                        });
    totals.total_entries += result.counters.total_entries;
    totals.superseded_same_epoch += result.counters.superseded_same_epoch;
    totals.detoured_entries += result.counters.detoured_entries;
    totals.definite_before_filter += result.counters.definite_before_filter;
    totals.filtered_by_peering += result.counters.filtered_by_peering;
    totals.multi_departure_entries += result.counters.multi_departure_entries;
    for (const auto& [name, count] : result.counters.outcomes) totals.outcomes[name] += count;
    totals.unique_detours.insert(result.counters.unique_detours.begin(),
                                 result.counters.unique_detours.end());
    totals.ingest += result.counters.ingest;
    for (const auto& [peer, stats] : result.peers) {
      auto& agg = peer_totals[peer];
      agg.records += stats.records;
      agg.detoured_entries += stats.detoured_entries;
      agg.unique_detours.insert(stats.unique_detours.begin(), stats.unique_detours.end());
      agg.epochs_observed.insert(stats.epochs_observed.begin(), stats.epochs_observed.end());
    }
  }
  verdicts.close();
  if (!verdicts) throw ConfigError("short write on verdicts.jsonl");

  nlohmann::json j;
  j["window_start"] = config.window_start;
  j["window_end"] = config.window_end;
  j["epoch_count"] = epochs;
  j["total_entries"] = totals.total_entries;
  j["superseded_same_epoch"] = totals.superseded_same_epoch;
  j["detoured_entries"] = totals.detoured_entries;
  j["unique_detours"] = totals.unique_detours.size();
  j["definite_before_filter"] = totals.definite_before_filter;
  j["filtered_by_peering"] = totals.filtered_by_peering;
  j["filtered_pct"] = totals.filtered_pct();
  j["multi_departure_entries"] = totals.multi_departure_entries;
  j["peering_filter_applied"] = config.peering_filter;
  j["outcomes"] = totals.outcomes;
  j["ingest"] = {{"loops_rejected", totals.ingest.loops_rejected},
                 {"empty_paths_rejected", totals.ingest.empty_paths_rejected},
                 {"confed_rejected", totals.ingest.confed_rejected},
                 {"as_set_replaced", totals.ingest.as_set_replaced},
                 {"v6_skipped", totals.ingest.v6_skipped},
                 {"skipped_subtypes", totals.ingest.skipped_subtypes}};
  write_file(config.output_dir + "/counters.json", j.dump(2) + "\n");

  nlohmann::json parr = nlohmann::json::array();
  for (const auto& [peer, stats] : peer_totals) {
    nlohmann::json p;
    p["ip"] = to_string(peer.ip);
    p["asn"] = peer.asn;
    p["records"] = stats.records;
    p["detoured_entries"] = stats.detoured_entries;
    p["unique_detours"] = stats.unique_detours.size();
    p["epochs_observed"] = stats.epochs_observed;
    parr.push_back(std::move(p));
  }
  write_file(config.output_dir + "/peers.json", parr.dump(2) + "\n");
}

// --- dynamics -------------------------------------------------------------------

void cmd_dynamics(const RunConfig& config) {
  const std::string dir = config.detect_dir_path();
  require_file(dir + "/verdicts.jsonl", "verdicts");
  require_file(dir + "/counters.json", "counters");
  require_file(dir + "/peers.json", "peers");
  GeoDatabase db = load_geo_database(config);
  ensure_directory(config.output_dir);

  auto counters = load_json_file(dir + "/counters.json");
  const std::size_t epochs = counters.at("epoch_count").get<std::size_t>();

  std::vector<DetourRecord> records;
  {
    auto in = open_input(dir + "/verdicts.jsonl");
    std::string line;
    while (std::getline(*in, line)) {
      auto trimmed = trim(line);
      if (trimmed.empty()) continue;
      if (auto rec = detour_from_json(std::string(trimmed))) records.push_back(std::move(*rec));
    }
  }

  std::map<Ipv4, AsNum> peer_as;
  std::map<PeerId, std::optional<CountryCode>> peer_country;
  std::map<PeerId, std::set<std::int64_t>> peer_epochs;
  for (const auto& p : load_json_file(dir + "/peers.json")) {
    PeerId peer{parse_ipv4(p.at("ip").get<std::string>()), p.at("asn").get<AsNum>()};
    peer_as[peer.ip] = peer.asn;
    GeoEvidence geo = db.geolocate_ip(peer.ip);
    peer_country[peer] =
        geo.countries.size() == 1 ? std::optional<CountryCode>(*geo.countries.begin()) : std::nullopt;
    peer_epochs[peer] = p.at("epochs_observed").get<std::set<std::int64_t>>();
  }

  auto timelines = build_timelines(records, epochs);
  auto deduped = representative_peers(timelines, peer_as);
  const auto& selected = config.dedup_representative ? deduped : timelines;

  auto rows = compute_metrics(selected, config.transient_hours);
  assign_quadrants(rows);

  auto tables = top_tables(rows, std::size_t(std::max(1, config.top_n)));

  auto unique_per_peer = [&](const std::vector<DetourTimeline>& set) {
    std::map<PeerId, std::uint64_t> out;
    for (const auto& t : set) {
      auto it = peer_as.find(t.key.peer_ip);
      AsNum asn = it == peer_as.end() ? 0 : it->second;
      ++out[PeerId{t.key.peer_ip, asn}];
    }
    return out;
  };
  auto raw_report = per_country_average(unique_per_peer(timelines), peer_country);
  auto dedup_report = per_country_average(unique_per_peer(deduped), peer_country);

  write_file(config.output_dir + "/metrics.csv", render_metrics_csv(rows));
  write_file(config.output_dir + "/tables.json", render_tables_json(tables));
  write_file(config.output_dir + "/tables.txt", render_tables_text(tables));
  write_file(config.output_dir + "/per_country.csv", render_country_csv(raw_report, dedup_report));

  nlohmann::json coverage = nlohmann::json::object();
  for (const auto& [peer, observed] : peer_epochs) {
    std::vector<std::int64_t> missing;
    for (std::size_t e = 0; e < epochs; ++e)
      if (!observed.contains(std::int64_t(e))) missing.push_back(std::int64_t(e));
    if (!missing.empty()) coverage[to_string(peer.ip)] = missing;
  }
  nlohmann::json j;
  j["epoch_count"] = epochs;
  j["timelines"] = timelines.size();
  j["timelines_after_dedup"] = deduped.size();
  j["dedup_applied"] = config.dedup_representative;
  j["peers_missing_epochs"] = std::move(coverage);
  j["peers_unknown_country"] = raw_report.peers_unknown_country;
  write_file(config.output_dir + "/coverage.json", j.dump(2) + "\n");
}

// --- validate --------------------------------------------------------------------

void cmd_validate(const RunConfig& config) {
  const std::string dir = config.detect_dir_path();
  require_file(dir + "/verdicts.jsonl", "verdicts");
  GeoDatabase db = load_geo_database(config);
  ensure_directory(config.output_dir);

  std::vector<DetourRecord> detours;
  {
    auto in = open_input(dir + "/verdicts.jsonl");
    std::string line;
    while (std::getline(*in, line)) {
      auto trimmed = trim(line);
      if (trimmed.empty()) continue;
      if (auto rec = detour_from_json(std::string(trimmed))) detours.push_back(std::move(*rec));
    }
  }

  std::vector<TracerouteResult> traceroutes;
  if (!config.traceroutes.empty()) {
    require_file(config.traceroutes, "traceroutes");
    traceroutes = load_traceroutes_jsonl(config.traceroutes);
  }

  IpToAsMap datasets;
  if (!config.ip_to_as.empty()) {
    require_file(config.ip_to_as, "ip_to_as");
    datasets = IpToAsMap::load_csv(config.ip_to_as);
  }
  PrefixTable table;
  if (file_exists(config.routing_table_path())) table = PrefixTable::load_csv(config.routing_table_path());

  ValidationOptions options;
  options.anchor_on_return = config.anchor_on_return;
  options.rtt_ratio = config.rtt_ratio;
  options.rtt_floor_ms = config.rtt_floor_ms;

  auto pairing = pair_with_detours(detours, traceroutes);
  auto summary = validate_all(pairing.pairs, datasets, table, db, options);

  nlohmann::json j = nlohmann::json::parse(render_summary_json(summary));
  j["unmatched_traceroutes"] = pairing.unmatched;
  write_file(config.output_dir + "/validation_summary.json", j.dump(2) + "\n");
}

// --- gen -------------------------------------------------------------------------

void cmd_gen(const RandomScenarioSpec& spec, const std::string& out_dir) {
  Scenario scenario = make_random_scenario(spec);
  generate_bundle(scenario, out_dir);
}

}  // namespace detour
