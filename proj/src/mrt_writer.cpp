#include "detour/mrt_writer.hpp"

namespace detour {

namespace {

void put_u8(std::string& out, std::uint8_t v) { out.push_back(char(v)); }
void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(char(v >> 8));
  out.push_back(char(v & 0xff));
}
void put_u32(std::string& out, std::uint32_t v) {
  out.push_back(char(v >> 24));
  out.push_back(char((v >> 16) & 0xff));
  out.push_back(char((v >> 8) & 0xff));
  out.push_back(char(v & 0xff));
}

std::string frame_record(std::uint32_t timestamp, std::uint16_t type, std::uint16_t subtype,
                         const std::string& body) {
  std::string out;
  put_u32(out, timestamp);
  put_u16(out, type);
  put_u16(out, subtype);
  put_u32(out, std::uint32_t(body.size()));
  out += body;
  return out;
}

std::string encode_attributes(const MrtEntrySpec& e) {
  std::string attrs;
  if (e.include_filler_attrs) {
    // ORIGIN: well-known transitive, value IGP.
    put_u8(attrs, 0x40);
    put_u8(attrs, 1);
    put_u8(attrs, 1);
    put_u8(attrs, 0);
  }
  std::string path;
  for (const auto& seg : e.segments) {
    put_u8(path, seg.type);
    put_u8(path, std::uint8_t(seg.asns.size()));
    for (AsNum a : seg.asns) put_u32(path, a);
  }
  if (e.extended_length_attr) {
    put_u8(attrs, 0x50);  // transitive + extended length
    put_u8(attrs, 2);
    put_u16(attrs, std::uint16_t(path.size()));
  } else {
    put_u8(attrs, 0x40);
    put_u8(attrs, 2);
    put_u8(attrs, std::uint8_t(path.size()));
  }
  attrs += path;
  if (e.include_filler_attrs) {
    // NEXT_HOP: arbitrary address, exercised only by the skip path.
    put_u8(attrs, 0x40);
    put_u8(attrs, 3);
    put_u8(attrs, 4);
    put_u32(attrs, 0x0a000001);
  }
  return attrs;
}

}  // namespace

MrtBuilder& MrtBuilder::peers(std::vector<MrtPeerSpec> peers) {
  peers_ = std::move(peers);
  return *this;
}

MrtBuilder& MrtBuilder::add_prefix(MrtPrefixSpec spec) {
  prefixes_.push_back(std::move(spec));
  return *this;
}

MrtBuilder& MrtBuilder::add_raw_record(std::uint16_t type, std::uint16_t subtype, const std::string& body) {
  raw_records_.push_back(frame_record(timestamp_, type, subtype, body));
  return *this;
}

std::string MrtBuilder::build() const {
  std::string out;

  std::string table;
  put_u32(table, 0x0a0a0a0a);  // collector BGP id
  put_u16(table, 0);           // empty view name
  put_u16(table, std::uint16_t(peers_.size()));
  for (const auto& p : peers_) {
    put_u8(table, p.two_byte_asn ? 0x00 : 0x02);  // IPv4 peer; AS size bit
    put_u32(table, p.ip.v);                       // peer BGP id, reuse the address
    put_u32(table, p.ip.v);
    if (p.two_byte_asn)
      put_u16(table, std::uint16_t(p.asn));
    else
      put_u32(table, p.asn);
  }
  out += frame_record(timestamp_, 13, 1, table);

  for (const auto& raw : raw_records_) out += raw;

  std::uint32_t seq = 0;
  for (const auto& spec : prefixes_) {
    std::string body;
    put_u32(body, seq++);
    put_u8(body, spec.prefix.length);
    std::size_t prefix_bytes = (spec.prefix.length + 7) / 8;
    for (std::size_t i = 0; i < prefix_bytes; ++i)
      put_u8(body, std::uint8_t(spec.prefix.base.v >> (24 - 8 * i)));
    put_u16(body, std::uint16_t(spec.entries.size()));
    for (const auto& e : spec.entries) {
      put_u16(body, e.peer_index);
      put_u32(body, e.originated_time);
      std::string attrs = encode_attributes(e);
      put_u16(body, std::uint16_t(attrs.size()));
      body += attrs;
    }
    out += frame_record(timestamp_, 13, 2, body);
  }
  return out;
}

MrtEntrySpec mrt_entry(std::uint16_t peer_index, std::vector<AsNum> sequence) {
  MrtEntrySpec e;
  e.peer_index = peer_index;
  e.segments.push_back(MrtSegmentSpec{2, std::move(sequence)});
  return e;
}

}  // namespace detour
