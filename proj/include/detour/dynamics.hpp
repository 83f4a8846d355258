#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "detour/engine.hpp"
#include "detour/geo.hpp"
#include "detour/types.hpp"

namespace detour {

/// Presence bitmap of one unique detour over the sampling window, plus the
/// detour fields shared by every record of the key.
struct DetourTimeline {
  DetourKey key;
  std::vector<bool> presence;  // length == epoch count, at least one bit set
  CountryCode home_country;
  AsNum origin_asn = 0;
  AsNum anchor_destination_asn = 0;  // first AS of the foreign segment
  CountrySet destination_countries;
  AsNum return_asn = 0;
  AsNum prefix_origin_asn = 0;
};

/// One timeline per unique key, sorted by key. Throws if an epoch >= E.
std::vector<DetourTimeline> build_timelines(const std::vector<DetourRecord>& records,
                                            std::size_t epoch_count);

struct DynamicsMetrics {
  double flap_rate = 0.0;        // percent
  double duty_cycle = 0.0;       // percent
  std::int64_t persistence_hours = 0;  // longest run of set bits x 8
  bool is_transient = false;
  bool is_flash = false;
  int quadrant = 0;  // 1..4 once assigned
};

/// Pure per-timeline metrics. `peers_seen` is the number of distinct peers
/// that observed this (prefix, as_path) detour; flash requires exactly one.
DynamicsMetrics metrics(const DetourTimeline& timeline, std::size_t peers_seen = 1,
                        int transient_hours = 72);

/// Distinct peer count per (prefix, as_path), feeding the flash rule.
std::map<std::pair<Prefix, std::vector<AsNum>>, std::size_t> peer_visibility(
    const std::vector<DetourTimeline>& timelines);

struct TimelineMetrics {
  DetourTimeline timeline;
  DynamicsMetrics metrics;
};

/// Metrics for every timeline with flash visibility resolved.
std::vector<TimelineMetrics> compute_metrics(const std::vector<DetourTimeline>& timelines,
                                             int transient_hours = 72);

/// Quadrants split at the mean flap rate / mean duty cycle of the input set,
/// numbered anti-clockwise from top right with flap rate on x and duty cycle
/// on y (I: both above or at mean; II: low flap, high duty).
void assign_quadrants(std::vector<TimelineMetrics>& rows);

/// For each peer AS with several peers, keeps only the timelines of the peer
/// that saw the most unique detours (ties: lowest peer IP).
std::vector<DetourTimeline> representative_peers(const std::vector<DetourTimeline>& timelines,
                                                 const std::map<Ipv4, AsNum>& peer_as);

struct CountryAverageRow {
  CountryCode country;
  std::uint64_t detours = 0;
  std::size_t peers = 0;
  double average = 0.0;
};

struct CountryAverageReport {
  std::vector<CountryAverageRow> rows;  // sorted by country
  std::size_t peers_unknown_country = 0;
  std::uint64_t detours_excluded = 0;  // detours of peers with unknown country
};

/// Detours per peer divided by peers per country. Every country hosting at
/// least one geolocated peer appears, zero-detour countries included.
CountryAverageReport per_country_average(const std::map<PeerId, std::uint64_t>& detours_by_peer,
                                         const std::map<PeerId, std::optional<CountryCode>>& peer_country);

struct TopRow {
  std::string label;  // origin ASN or prefix
  std::uint64_t count = 0;
  double share_pct = 0.0;
  AsNum top_destination = 0;
  double destination_share_pct = 0.0;
};

struct FlashRow {
  Prefix prefix;
  AsNum owner_asn = 0;  // prefix origin
  AsNum destination_asn = 0;
  CountryCode home_country;
};

struct ReportTables {
  std::vector<TopRow> top_origins;
  std::vector<TopRow> top_prefixes;
  std::vector<TopRow> transient_origins;
  std::vector<TopRow> transient_prefixes;
  std::vector<FlashRow> flash;
};

/// Shares computed over unique detours; destination is the anchor AS of the
/// foreign segment.
ReportTables top_tables(const std::vector<TimelineMetrics>& rows, std::size_t top_n = 10);

std::string render_metrics_csv(const std::vector<TimelineMetrics>& rows);
std::string render_tables_json(const ReportTables& tables);
std::string render_tables_text(const ReportTables& tables);
std::string render_country_csv(const CountryAverageReport& raw, const CountryAverageReport& dedup);

}  // namespace detour
