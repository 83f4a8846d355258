#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "detour/types.hpp"

namespace detour {

// Byte-level TABLE_DUMP_V2 writer for fixtures and conformance tests.

struct MrtPeerSpec {
  Ipv4 ip;
  AsNum asn = 0;
  bool two_byte_asn = false;  // encode with the 16-bit peer-AS form
};

/// One AS_PATH segment as written on the wire (1 = AS_SET, 2 = AS_SEQUENCE,
/// 3/4 = confederation variants for negative tests).
struct MrtSegmentSpec {
  std::uint8_t type = 2;
  std::vector<AsNum> asns;
};

struct MrtEntrySpec {
  std::uint16_t peer_index = 0;
  std::uint32_t originated_time = 0;
  std::vector<MrtSegmentSpec> segments;
  bool extended_length_attr = false;  // force the 2-byte attribute length form
  bool include_filler_attrs = true;   // emit ORIGIN/NEXT_HOP so skip logic runs
};

struct MrtPrefixSpec {
  Prefix prefix;
  std::vector<MrtEntrySpec> entries;
};

class MrtBuilder {
 public:
  explicit MrtBuilder(std::uint32_t timestamp) : timestamp_(timestamp) {}

  MrtBuilder& peers(std::vector<MrtPeerSpec> peers);
  MrtBuilder& add_prefix(MrtPrefixSpec spec);
  /// Appends an arbitrary record (unknown type/subtype tests).
  MrtBuilder& add_raw_record(std::uint16_t type, std::uint16_t subtype, const std::string& body);

  /// Serializes PEER_INDEX_TABLE followed by one RIB_IPV4_UNICAST record per
  /// prefix. Raw records appear after the peer table in insertion order.
  std::string build() const;

 private:
  std::uint32_t timestamp_;
  std::vector<MrtPeerSpec> peers_;
  std::vector<MrtPrefixSpec> prefixes_;
  std::vector<std::string> raw_records_;  // pre-framed
};

/// Convenience: single AS_SEQUENCE path.
MrtEntrySpec mrt_entry(std::uint16_t peer_index, std::vector<AsNum> sequence);

}  // namespace detour
