#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "detour/engine.hpp"
#include "detour/geo.hpp"
#include "detour/types.hpp"

namespace detour {

struct TracerouteHop {
  int ttl = 0;
  std::optional<Ipv4> ip;  // nullopt = timeout
  std::vector<double> rtts_ms;
};

struct TracerouteResult {
  std::string probe_id;
  AsNum src_asn = 0;
  CountryCode src_country;
  Ipv4 dst_ip;
  std::vector<TracerouteHop> hops;  // ttl strictly increasing
};

/// JSONL `{probe_id, src_asn, src_country, dst_ip, hops:[{ttl, ip|null, rtts:[ms]}]}`.
std::vector<TracerouteResult> load_traceroutes_jsonl(const std::string& path);
std::string traceroute_to_json(const TracerouteResult& tr);

std::size_t responsive_hop_count(const TracerouteResult& tr);
/// Traceroutes with fewer than 3 responsive hops carry no usable signal.
inline bool usable_traceroute(const TracerouteResult& tr) { return responsive_hop_count(tr) >= 3; }

/// Per responsive hop: exact dataset mapping, else longest prefix match, else
/// kUnknownAs; consecutive duplicates collapsed, unknowns kept as gaps.
std::vector<AsNum> hops_to_as_path(const TracerouteResult& tr, const IpToAsMap& datasets,
                                   const PrefixTable& table);

enum class Mutation { exact, deletion, insertion, mix, incongruent };
const char* to_string(Mutation m);

struct CongruenceVerdict {
  bool usable = true;
  bool congruent = false;
  Mutation mutation = Mutation::incongruent;
  std::vector<AsNum> data_as_path;
};

/// Congruent iff the detour origin AS and the anchor AS both occur in the
/// data path, origin first. The anchor is the first detour destination AS, or
/// the return AS when `anchor_on_return` is set. Mutations classified via a
/// longest-common-subsequence alignment against the control path.
CongruenceVerdict validate_as_path(const DetourRecord& detour, const std::vector<AsNum>& data_path,
                                   bool anchor_on_return = false);

/// True iff the geolocated hop sequence leaves the home country, visits one
/// of the expected destination countries, and is seen back home afterwards.
bool validate_ip_hops(const DetourRecord& detour, const TracerouteResult& tr, const GeoDatabase& db);

/// True iff some consecutive responsive hop pair jumps by at least `ratio`
/// times and by at least `floor_ms` in absolute terms (per-hop minimum RTTs).
bool validate_rtts(const TracerouteResult& tr, double ratio = 10.0, double floor_ms = 5.0);

struct ValidationSummary {
  std::uint64_t pairs = 0;
  std::uint64_t unusable = 0;  // < 3 responsive hops, excluded everywhere
  std::uint64_t usable = 0;
  std::uint64_t congruent = 0;
  std::uint64_t country_hits = 0;  // among congruent pairs
  std::uint64_t rtt_hits = 0;      // among congruent pairs
  std::uint64_t both_hits = 0;
  std::uint64_t exact = 0, deletions = 0, insertions = 0, mixed = 0;
};

struct ValidationOptions {
  bool anchor_on_return = false;
  double rtt_ratio = 10.0;
  double rtt_floor_ms = 5.0;
};

ValidationSummary validate_all(const std::vector<std::pair<DetourRecord, TracerouteResult>>& pairs,
                               const IpToAsMap& datasets, const PrefixTable& table,
                               const GeoDatabase& db, const ValidationOptions& options = {});

std::string render_summary_json(const ValidationSummary& summary);

/// Pairs each traceroute with the detour whose prefix contains its target:
/// longest prefix wins, then a peer-AS match on the path head, then the
/// smallest key. Unpaired traceroutes are dropped and counted.
struct PairingResult {
  std::vector<std::pair<DetourRecord, TracerouteResult>> pairs;
  std::uint64_t unmatched = 0;
};
PairingResult pair_with_detours(const std::vector<DetourRecord>& detours,
                                const std::vector<TracerouteResult>& traceroutes);

}  // namespace detour
