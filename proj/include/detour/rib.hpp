#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "detour/types.hpp"

namespace detour {

/// One (peer, prefix, AS-path) observation at a sampling epoch.
struct RouteRecord {
  Ipv4 peer_ip;
  AsNum peer_asn = 0;
  Prefix prefix;
  std::vector<AsNum> as_path;  // prepending stripped, loop-free
  AsNum origin_asn = 0;        // last path element
  std::int64_t epoch = 0;
  std::int64_t snapshot_time = 0;

  bool operator==(const RouteRecord&) const = default;
};

/// Records skipped or rewritten during ingestion, by reason.
struct IngestCounters {
  std::uint64_t loops_rejected = 0;
  std::uint64_t empty_paths_rejected = 0;
  std::uint64_t confed_rejected = 0;
  std::uint64_t as_set_replaced = 0;
  std::uint64_t v6_skipped = 0;
  std::uint64_t skipped_subtypes = 0;

  IngestCounters& operator+=(const IngestCounters& o);
};

struct RibSnapshot {
  std::string source_uri;
  std::int64_t snapshot_time = 0;
  std::vector<RouteRecord> records;
  std::size_t peer_count = 0;  // distinct (peer_ip, peer_asn) pairs
  IngestCounters counters;
};

/// Truncated MRT input: complete entries parsed so far travel with the error.
struct MrtTruncatedError : ParseError {
  MrtTruncatedError(const std::string& msg, RibSnapshot partial_snapshot)
      : ParseError(msg), partial(std::move(partial_snapshot)) {}
  RibSnapshot partial;
};

/// Strips prepending and rejects looped paths (nullopt). kUnknownAs markers
/// are exempt from the non-adjacent repeat check: two distinct AS_SETs in one
/// path are not a loop.
std::optional<std::vector<AsNum>> normalize_as_path(const std::vector<AsNum>& raw);

/// Line format: `<snapshot_time>|<peer_ip>|<peer_asn>|<prefix>|<asn asn ...>`,
/// `#` comments. All data lines must share one snapshot_time.
RibSnapshot parse_text_rib(const std::string& path, std::int64_t window_start);
std::string render_text_rib(const RibSnapshot& snapshot);
void write_text_rib(const std::string& path, const RibSnapshot& snapshot);

/// MRT TABLE_DUMP_V2 (RFC 6396): PEER_INDEX_TABLE + RIB_IPV4_UNICAST,
/// optionally gzip/bzip2-compressed.
RibSnapshot parse_mrt(const std::string& path, std::int64_t window_start);

/// Reads just enough of a RIB file (either format) to learn its snapshot time.
std::int64_t peek_snapshot_time(const std::string& path);

/// Dispatches on content: MRT common header vs text fixture lines.
RibSnapshot load_rib(const std::string& path, std::int64_t window_start);

/// Distinct (peer_ip, peer_asn) count; also recomputed by parsers.
std::size_t count_distinct_peers(const std::vector<RouteRecord>& records);

}  // namespace detour
