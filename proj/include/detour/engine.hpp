#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "detour/geo.hpp"
#include "detour/relationship.hpp"
#include "detour/rib.hpp"
#include "detour/types.hpp"

namespace detour {

/// Identity of a detour: the {peer, prefix, aspath} tuple.
struct DetourKey {
  Ipv4 peer_ip;
  Prefix prefix;
  std::vector<AsNum> as_path;

  auto operator<=>(const DetourKey&) const = default;
  std::string str() const;
};

struct DetourRecord {
  DetourKey key;
  std::int64_t epoch = 0;
  CountryCode home_country;
  AsNum detour_origin_asn = 0;
  std::vector<AsNum> detour_destination_asns;  // the definitely-foreign segment
  CountrySet detour_destination_countries;
  AsNum detour_return_asn = 0;
  AsNum prefix_origin_asn = 0;
  std::size_t foreign_hop_count = 0;
  bool multi_departure = false;  // another departure seen after the return

  bool operator==(const DetourRecord&) const = default;
};

enum class Outcome {
  definite_detour,
  possible_only,
  no_detour,
  discarded_unknown_geo,
  discarded_ambiguous_code,
  not_same_country_endpoints,
  filtered_by_peering,
};
const char* to_string(Outcome outcome);

struct DetectionVerdict {
  Outcome outcome = Outcome::no_detour;
  std::optional<DetourRecord> record;  // present iff definite_detour
  bool peering_link_present = false;   // filter_peering fired (or would have)
};

struct DetectOptions {
  bool apply_peering_filter = true;
};

/// Walks the geolocated AS path and decides whether it contains a definite
/// international detour. Pure given immutable geo and rel.
DetectionVerdict detect(const RouteRecord& record, const AsGeoMap& geo, const RelationshipDb& rel,
                        const DetectOptions& options = {});

/// True when the origin-return peering link plausibly carried the traffic
/// instead of the detour, i.e. the detour should be filtered out.
bool filter_peering(const DetourRecord& detour, const std::vector<AsNum>& path,
                    const RelationshipDb& rel, AsNum peer_asn);

struct PeerId {
  Ipv4 ip;
  AsNum asn = 0;
  auto operator<=>(const PeerId&) const = default;
};

struct PeerStats {
  std::uint64_t records = 0;
  std::uint64_t detoured_entries = 0;
  std::set<DetourKey> unique_detours;
  std::set<std::int64_t> epochs_observed;
};

struct AggregateCounters {
  std::uint64_t total_entries = 0;
  std::uint64_t superseded_same_epoch = 0;  // older same-peer RIB within an epoch
  std::uint64_t detoured_entries = 0;       // definite, after peering filter
  std::uint64_t definite_before_filter = 0;
  std::uint64_t filtered_by_peering = 0;
  std::uint64_t multi_departure_entries = 0;
  std::map<std::string, std::uint64_t> outcomes;
  std::set<DetourKey> unique_detours;
  IngestCounters ingest;

  double filtered_pct() const {
    return definite_before_filter ? 100.0 * double(filtered_by_peering) / double(definite_before_filter)
                                  : 0.0;
  }
};

struct DetectAllResult {
  AggregateCounters counters;
  std::map<PeerId, PeerStats> peers;
};

/// Called once per surviving record, in deterministic order.
using VerdictSink = std::function<void(const RouteRecord&, const DetectionVerdict&)>;

/// Applies detect to every record of every snapshot. When several RIBs from
/// one peer land in the same epoch, only the latest by snapshot_time counts
/// (ties: first by source order). Order-invariant across snapshot permutations.
DetectAllResult detect_all(const std::vector<RibSnapshot>& snapshots, const AsGeoMap& geo,
                           const RelationshipDb& rel, const DetectOptions& options = {},
                           const VerdictSink& sink = {});

/// JSONL line for one verdict: outcome, key, and record fields when present.
std::string verdict_to_json(const RouteRecord& record, const DetectionVerdict& verdict);
/// Parses a verdict line back; returns the record only for definite detours.
std::optional<DetourRecord> detour_from_json(const std::string& line);

}  // namespace detour
