#include <cstring>
#include <istream>
#include <utility>

#include "detour/io_util.hpp"
#include "detour/rib.hpp"

namespace detour {

namespace {

constexpr std::uint16_t kTypeTableDumpV2 = 13;
constexpr std::uint16_t kSubtypePeerIndexTable = 1;
constexpr std::uint16_t kSubtypeRibIpv4Unicast = 2;
constexpr std::uint16_t kSubtypeRibIpv6Unicast = 4;
constexpr std::uint16_t kSubtypeRibIpv6Multicast = 5;
constexpr std::uint32_t kMaxMessageLength = 1u << 26;

constexpr std::uint8_t kAttrAsPath = 2;
constexpr std::uint8_t kSegAsSet = 1;
constexpr std::uint8_t kSegAsSequence = 2;
constexpr std::uint8_t kSegConfedSequence = 3;
constexpr std::uint8_t kSegConfedSet = 4;

struct MrtPeerEntry {
  Ipv4 ip;
  AsNum asn = 0;
  bool ipv6 = false;
};

/// Big-endian cursor over one MRT message body.
class ByteReader {
 public:
  ByteReader(const std::string& data, std::uint64_t base_offset)
      : data_(data), base_(base_offset) {}

  std::uint64_t offset() const { return base_ + pos_; }
  std::size_t remaining() const { return data_.size() - pos_; }

  std::uint8_t u8(const char* what) { return static_cast<std::uint8_t>(take(1, what)[0]); }
  std::uint16_t u16(const char* what) {
    auto* p = take(2, what);
    return static_cast<std::uint16_t>((std::uint8_t(p[0]) << 8) | std::uint8_t(p[1]));
  }
  std::uint32_t u32(const char* what) {
    auto* p = take(4, what);
    return (std::uint32_t(std::uint8_t(p[0])) << 24) | (std::uint32_t(std::uint8_t(p[1])) << 16) |
           (std::uint32_t(std::uint8_t(p[2])) << 8) | std::uint32_t(std::uint8_t(p[3]));
  }
  const char* take(std::size_t n, const char* what) {
    if (pos_ + n > data_.size())
      throw ParseError("malformed MRT record at byte offset " + std::to_string(offset()) +
                       ": truncated " + what);
    const char* p = data_.data() + pos_;
    pos_ += n;
    return p;
  }
  void skip(std::size_t n, const char* what) { take(n, what); }

 private:
  const std::string& data_;
  std::uint64_t base_;
  std::size_t pos_ = 0;
};

struct RawPathResult {
  std::vector<AsNum> path;
  bool has_as_path = false;
  bool confed = false;
  bool had_as_set = false;
};

RawPathResult decode_attributes(ByteReader& rd, std::uint16_t attr_len) {
  RawPathResult out;
  std::int64_t left = attr_len;
  while (left > 0) {
    std::uint8_t flags = rd.u8("attribute flags");
    std::uint8_t type = rd.u8("attribute type");
    std::uint32_t len;
    std::uint32_t header = 3;
    if (flags & 0x10) {
      len = rd.u16("attribute length");
      header = 4;
    } else {
      len = rd.u8("attribute length");
    }
    if (len > rd.remaining())
      throw ParseError("malformed MRT record at byte offset " + std::to_string(rd.offset()) +
                       ": attribute overruns entry");
    if (type == kAttrAsPath) {
      out.has_as_path = true;
      std::int64_t seg_left = len;
      while (seg_left > 0) {
        std::uint8_t seg_type = rd.u8("segment type");
        std::uint8_t seg_count = rd.u8("segment length");
        if (seg_type == kSegConfedSequence || seg_type == kSegConfedSet) {
          out.confed = true;
          rd.skip(std::size_t(seg_count) * 4, "confed segment");
        } else if (seg_type == kSegAsSet) {
          for (std::uint8_t i = 0; i < seg_count; ++i) rd.u32("AS number");
          out.path.push_back(kUnknownAs);
          out.had_as_set = true;
        } else if (seg_type == kSegAsSequence) {
          for (std::uint8_t i = 0; i < seg_count; ++i) out.path.push_back(rd.u32("AS number"));
        } else {
          throw ParseError("malformed MRT record at byte offset " + std::to_string(rd.offset()) +
                           ": unknown AS_PATH segment type " + std::to_string(seg_type));
        }
        seg_left -= 2 + std::int64_t(seg_count) * 4;
      }
      if (seg_left != 0)
        throw ParseError("malformed MRT record at byte offset " + std::to_string(rd.offset()) +
                         ": AS_PATH segment overruns attribute");
    } else {
      rd.skip(len, "attribute value");
    }
    left -= header + len;
  }
  if (left != 0)
    throw ParseError("malformed MRT record at byte offset " + std::to_string(rd.offset()) +
                     ": attribute framing mismatch");
  return out;
}

}  // namespace

RibSnapshot parse_mrt(const std::string& path, std::int64_t window_start) {
  auto in = open_input(path);
  RibSnapshot snap;
  snap.source_uri = path;

  std::vector<MrtPeerEntry> peers;
  bool have_peer_table = false;
  bool have_timestamp = false;
  std::uint64_t offset = 0;

  auto truncated = [&](const std::string& what, std::uint64_t at) -> MrtTruncatedError {
    snap.peer_count = count_distinct_peers(snap.records);
    return MrtTruncatedError("truncated MRT file " + path + " at byte offset " + std::to_string(at) +
                                 " (" + what + "); " + std::to_string(snap.records.size()) +
                                 " complete entries parsed",
                             snap);
  };

  while (true) {
    char header[12];
    in->read(header, 12);
    std::streamsize got = in->gcount();
    if (got == 0) break;  // clean end of file
    if (got < 12) throw truncated("inside common header", offset + std::uint64_t(got));

    auto be16 = [&](int i) {
      return std::uint16_t((std::uint8_t(header[i]) << 8) | std::uint8_t(header[i + 1]));
    };
    auto be32 = [&](int i) {
      return (std::uint32_t(std::uint8_t(header[i])) << 24) |
             (std::uint32_t(std::uint8_t(header[i + 1])) << 16) |
             (std::uint32_t(std::uint8_t(header[i + 2])) << 8) | std::uint32_t(std::uint8_t(header[i + 3]));
    };
    std::uint32_t timestamp = be32(0);
    std::uint16_t type = be16(4);
    std::uint16_t subtype = be16(6);
    std::uint32_t length = be32(8);
    if (length > kMaxMessageLength)
      throw ParseError("malformed MRT header at byte offset " + std::to_string(offset) +
                       ": message length " + std::to_string(length) + " exceeds limit");

    std::string body(length, '\0');
    in->read(body.data(), length);
    if (std::uint64_t(in->gcount()) < length)
      throw truncated("inside message body", offset + 12 + std::uint64_t(in->gcount()));

    std::uint64_t body_offset = offset + 12;
    offset += 12 + length;

    if (!have_timestamp) {
      snap.snapshot_time = timestamp;
      have_timestamp = true;
    }

    if (type != kTypeTableDumpV2) {
      ++snap.counters.skipped_subtypes;
      continue;
    }

    if (subtype == kSubtypePeerIndexTable) {
      if (have_peer_table)
        throw ParseError("malformed MRT record at byte offset " + std::to_string(body_offset - 12) +
                         ": duplicate PEER_INDEX_TABLE");
      ByteReader rd(body, body_offset);
      rd.u32("collector BGP id");
      std::uint16_t name_len = rd.u16("view name length");
      rd.skip(name_len, "view name");
      std::uint16_t peer_count = rd.u16("peer count");
      peers.reserve(peer_count);
      for (std::uint16_t i = 0; i < peer_count; ++i) {
        MrtPeerEntry pe;
        std::uint8_t peer_type = rd.u8("peer type");
        rd.u32("peer BGP id");
        if (peer_type & 0x01) {
          pe.ipv6 = true;
          rd.skip(16, "peer IPv6 address");
        } else {
          pe.ip = Ipv4{rd.u32("peer IPv4 address")};
        }
        pe.asn = (peer_type & 0x02) ? rd.u32("peer AS") : rd.u16("peer AS");
        peers.push_back(pe);
      }
      have_peer_table = true;
      continue;
    }

    if (subtype == kSubtypeRibIpv6Unicast || subtype == kSubtypeRibIpv6Multicast) {
      ++snap.counters.v6_skipped;
      continue;
    }
    if (subtype != kSubtypeRibIpv4Unicast) {
      ++snap.counters.skipped_subtypes;
      continue;
    }

    if (!have_peer_table)
      throw ParseError("malformed MRT record at byte offset " + std::to_string(body_offset - 12) +
                       ": RIB entry before PEER_INDEX_TABLE");

    ByteReader rd(body, body_offset);
    rd.u32("sequence number");
    std::uint8_t prefix_len = rd.u8("prefix length");
    if (prefix_len > 32)
      throw ParseError("malformed MRT record at byte offset " + std::to_string(rd.offset()) +
                       ": IPv4 prefix length " + std::to_string(prefix_len));
    std::uint32_t base = 0;
    std::size_t prefix_bytes = (prefix_len + 7) / 8;
    for (std::size_t i = 0; i < prefix_bytes; ++i)
      base |= std::uint32_t(std::uint8_t(rd.take(1, "prefix byte")[0])) << (24 - 8 * i);
    Prefix prefix = make_prefix_masked(Ipv4{base}, prefix_len);

    std::uint16_t entry_count = rd.u16("entry count");
    for (std::uint16_t e = 0; e < entry_count; ++e) {
      std::uint16_t peer_index = rd.u16("peer index");
      rd.u32("originated time");
      std::uint16_t attr_len = rd.u16("attribute length");
      if (peer_index >= peers.size())
        throw ParseError("malformed MRT record at byte offset " + std::to_string(rd.offset()) +
                         ": peer index " + std::to_string(peer_index) + " out of range");
      const auto& peer = peers[peer_index];

      auto decoded = decode_attributes(rd, attr_len);
      if (peer.ipv6) {
        ++snap.counters.v6_skipped;
        continue;
      }
      if (decoded.confed) {
        ++snap.counters.confed_rejected;
        continue;
      }
      if (!decoded.has_as_path || decoded.path.empty()) {
        ++snap.counters.empty_paths_rejected;
        continue;
      }
      if (decoded.had_as_set) ++snap.counters.as_set_replaced;

      auto normalized = normalize_as_path(decoded.path);
      if (!normalized) {
        ++snap.counters.loops_rejected;
        continue;
      }

      RouteRecord rec;
      rec.peer_ip = peer.ip;
      rec.peer_asn = peer.asn;
      rec.prefix = prefix;
      rec.as_path = std::move(*normalized);
      rec.origin_asn = rec.as_path.back();
      rec.snapshot_time = snap.snapshot_time;
      rec.epoch = epoch_of(rec.snapshot_time, window_start);
      snap.records.push_back(std::move(rec));
    }
  }

  snap.peer_count = count_distinct_peers(snap.records);
  return snap;
}

namespace {

bool sniff_mrt(const std::string& path) {
  auto in = open_input(path);
  char head[12];
  in->read(head, 12);
  if (in->gcount() < 12) throw ParseError("RIB file too short: " + path);
  std::uint16_t type = std::uint16_t((std::uint8_t(head[4]) << 8) | std::uint8_t(head[5]));
  return type == kTypeTableDumpV2;
}

}  // namespace

RibSnapshot load_rib(const std::string& path, std::int64_t window_start) {
  return sniff_mrt(path) ? parse_mrt(path, window_start) : parse_text_rib(path, window_start);
}

std::int64_t peek_snapshot_time(const std::string& path) {
  auto in = open_input(path);
  char head[12];
  in->read(head, 12);
  if (in->gcount() < 12) throw ParseError("RIB file too short: " + path);

  // An MRT common header carries type TABLE_DUMP_V2 at bytes 4-5.
  std::uint16_t type = std::uint16_t((std::uint8_t(head[4]) << 8) | std::uint8_t(head[5]));
  if (type == kTypeTableDumpV2) {
    return (std::uint32_t(std::uint8_t(head[0])) << 24) | (std::uint32_t(std::uint8_t(head[1])) << 16) |
           (std::uint32_t(std::uint8_t(head[2])) << 8) | std::uint32_t(std::uint8_t(head[3]));
  }

  std::string line(head, 12);
  std::string rest;
  std::getline(*in, rest);
  line += rest;
  while (true) {
    auto trimmed = trim(line);
    if (!trimmed.empty() && trimmed.front() != '#') {
      auto fields = split(trimmed, '|');
      try {
        return std::stoll(std::string(fields[0]));
      } catch (const std::exception&) {
        throw ParseError("cannot read snapshot time of " + path);
      }
    }
    if (!std::getline(*in, line)) throw ParseError("no data lines in RIB file: " + path);
  }
}

}  // namespace detour
