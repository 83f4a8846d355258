#include <doctest.h>

#include <algorithm>
#include <fstream>

#include "detour/io_util.hpp"
#include "detour/mrt_writer.hpp"
#include "detour/rib.hpp"
#include "test_util.hpp"

using namespace detour;
using testutil::TempDir;

TEST_CASE("normalize_as_path strips prepending and rejects loops") {
  CHECK(*normalize_as_path({65001, 65002, 65002, 65003}) == std::vector<AsNum>{65001, 65002, 65003});
  CHECK(*normalize_as_path({65001}) == std::vector<AsNum>{65001});
  CHECK_FALSE(normalize_as_path({65001, 65002, 65001}).has_value());
  // Already-normalized paths are fixed points.
  auto once = *normalize_as_path({10, 10, 20, 30, 30, 30});
  CHECK(*normalize_as_path(once) == once);
  // Two distinct AS_SET markers are not a loop; adjacent ones collapse.
  CHECK(*normalize_as_path({10, kUnknownAs, 20, kUnknownAs, 30}) ==
        std::vector<AsNum>{10, kUnknownAs, 20, kUnknownAs, 30});
  CHECK(*normalize_as_path({10, kUnknownAs, kUnknownAs, 30}) ==
        std::vector<AsNum>{10, kUnknownAs, 30});
}

TEST_CASE("text rib parsing") {
  TempDir dir("rib_text");

  SUBCASE("single record") {
    write_file(dir.file("a.txt"), "0|10.0.0.1|65001|203.0.113.0/24|65001 65002 65003\n");
    RibSnapshot snap = parse_text_rib(dir.file("a.txt"), 0);
    REQUIRE(snap.records.size() == 1);
    const auto& r = snap.records[0];
    CHECK(r.peer_ip == testutil::ip("10.0.0.1"));
    CHECK(r.peer_asn == 65001);
    CHECK(r.prefix == testutil::pfx("203.0.113.0/24"));
    CHECK(r.as_path == std::vector<AsNum>{65001, 65002, 65003});
    CHECK(r.origin_asn == 65003);
    CHECK(r.epoch == 0);
    CHECK(snap.peer_count == 1);
  }

  SUBCASE("comments, blank lines, epoch bucketing") {
    write_file(dir.file("b.txt"),
               "# fixture\n\n28800|10.0.0.1|65001|203.0.113.0/24|65001 65003\n");
    RibSnapshot snap = parse_text_rib(dir.file("b.txt"), 0);
    REQUIRE(snap.records.size() == 1);
    CHECK(snap.records[0].epoch == 1);
    CHECK(snap.snapshot_time == 28800);
  }

  SUBCASE("empty path field errors with line number") {
    write_file(dir.file("c.txt"), "0|10.0.0.1|65001|203.0.113.0/24|\n");
    CHECK_THROWS_WITH_AS(parse_text_rib(dir.file("c.txt"), 0),
                         doctest::Contains("line 1"), ParseError);
  }

  SUBCASE("bad line reports its number") {
    write_file(dir.file("d.txt"),
               "0|10.0.0.1|65001|203.0.113.0/24|65001\n0|10.0.0.1|65001|not-a-prefix|65001\n");
    CHECK_THROWS_WITH_AS(parse_text_rib(dir.file("d.txt"), 0),
                         doctest::Contains("line 2"), ParseError);
  }

  SUBCASE("loops are rejected and counted, not fatal") {
    write_file(dir.file("e.txt"),
               "0|10.0.0.1|65001|203.0.113.0/24|65001 65002 65001\n"
               "0|10.0.0.1|65001|198.51.100.0/24|65001 65002\n");
    RibSnapshot snap = parse_text_rib(dir.file("e.txt"), 0);
    CHECK(snap.records.size() == 1);
    CHECK(snap.counters.loops_rejected == 1);
  }

  SUBCASE("prepending is stripped") {
    write_file(dir.file("f.txt"), "0|10.0.0.1|65001|203.0.113.0/24|65001 65002 65002 65003\n");
    RibSnapshot snap = parse_text_rib(dir.file("f.txt"), 0);
    CHECK(snap.records[0].as_path == std::vector<AsNum>{65001, 65002, 65003});
  }

  SUBCASE("ipv6 rows are skipped with a counter") {
    write_file(dir.file("g.txt"),
               "0|2001:db8::1|65001|203.0.113.0/24|65001\n"
               "0|10.0.0.1|65001|2001:db8::/32|65001\n"
               "0|10.0.0.1|65001|203.0.113.0/24|65001\n");
    RibSnapshot snap = parse_text_rib(dir.file("g.txt"), 0);
    CHECK(snap.records.size() == 1);
    CHECK(snap.counters.v6_skipped == 2);
  }

  SUBCASE("mixed snapshot times are rejected") {
    write_file(dir.file("h.txt"),
               "0|10.0.0.1|65001|203.0.113.0/24|65001\n28800|10.0.0.1|65001|203.0.113.0/24|65001\n");
    CHECK_THROWS_AS(parse_text_rib(dir.file("h.txt"), 0), ParseError);
  }

  SUBCASE("round trip: parse, serialize, parse") {
    std::string body =
        "100|10.0.0.1|65001|203.0.113.0/24|65001 65002 65003\n"
        "100|10.0.0.2|65002|198.51.100.0/24|65002 65003\n"
        "100|10.0.0.1|65001|192.0.2.0/24|65001 65004 65005\n";
    write_file(dir.file("i.txt"), body);
    RibSnapshot first = parse_text_rib(dir.file("i.txt"), 0);
    write_text_rib(dir.file("i2.txt"), first);
    RibSnapshot second = parse_text_rib(dir.file("i2.txt"), 0);
    CHECK(first.records == second.records);
    CHECK(first.peer_count == second.peer_count);
  }
}

namespace {

MrtBuilder small_builder(std::uint32_t timestamp = 0) {
  MrtBuilder b{timestamp};
  b.peers({MrtPeerSpec{testutil::ip("10.0.0.1"), 65001, false}});
  return b;
}

}  // namespace

TEST_CASE("mrt parsing") {
  TempDir dir("rib_mrt");

  SUBCASE("prepending is stripped") {
    auto b = small_builder();
    b.add_prefix(MrtPrefixSpec{testutil::pfx("203.0.113.0/24"),
                               {mrt_entry(0, {65001, 65002, 65002, 65003})}});
    write_file(dir.file("a.mrt"), b.build());
    RibSnapshot snap = parse_mrt(dir.file("a.mrt"), 0);
    REQUIRE(snap.records.size() == 1);
    CHECK(snap.records[0].as_path == std::vector<AsNum>{65001, 65002, 65003});
    CHECK(snap.records[0].peer_ip == testutil::ip("10.0.0.1"));
    CHECK(snap.records[0].peer_asn == 65001);
  }

  SUBCASE("loops rejected with counter") {
    auto b = small_builder();
    b.add_prefix(MrtPrefixSpec{testutil::pfx("203.0.113.0/24"),
                               {mrt_entry(0, {65001, 65002, 65001})}});
    write_file(dir.file("b.mrt"), b.build());
    RibSnapshot snap = parse_mrt(dir.file("b.mrt"), 0);
    CHECK(snap.records.empty());
    CHECK(snap.counters.loops_rejected == 1);
  }

  SUBCASE("three peers, two prefixes") {
    MrtBuilder b{0};
    b.peers({MrtPeerSpec{testutil::ip("10.0.0.1"), 65001, false},
             MrtPeerSpec{testutil::ip("10.0.0.2"), 65002, true},
             MrtPeerSpec{testutil::ip("10.0.0.3"), 65003, false}});
    for (const char* prefix : {"203.0.113.0/24", "198.51.100.0/24"}) {
      b.add_prefix(MrtPrefixSpec{testutil::pfx(prefix),
                                 {mrt_entry(0, {65001, 65010}), mrt_entry(1, {65002, 65010}),
                                  mrt_entry(2, {65003, 65010})}});
    }
    write_file(dir.file("c.mrt"), b.build());
    RibSnapshot snap = parse_mrt(dir.file("c.mrt"), 0);
    CHECK(snap.records.size() == 6);
    CHECK(snap.peer_count == 3);
  }

  SUBCASE("AS_SET becomes the unknown marker") {
    auto b = small_builder();
    MrtEntrySpec e;
    e.peer_index = 0;
    e.segments.push_back(MrtSegmentSpec{2, {65001, 65002}});
    e.segments.push_back(MrtSegmentSpec{1, {65010, 65011}});
    b.add_prefix(MrtPrefixSpec{testutil::pfx("203.0.113.0/24"), {e}});
    write_file(dir.file("d.mrt"), b.build());
    RibSnapshot snap = parse_mrt(dir.file("d.mrt"), 0);
    REQUIRE(snap.records.size() == 1);
    CHECK(snap.records[0].as_path == std::vector<AsNum>{65001, 65002, kUnknownAs});
    CHECK(snap.records[0].origin_asn == kUnknownAs);
    CHECK(snap.counters.as_set_replaced == 1);
  }

  SUBCASE("confederation segments reject the record") {
    auto b = small_builder();
    MrtEntrySpec e;
    e.peer_index = 0;
    e.segments.push_back(MrtSegmentSpec{3, {65001, 65002}});
    b.add_prefix(MrtPrefixSpec{testutil::pfx("203.0.113.0/24"), {e}});
    write_file(dir.file("e.mrt"), b.build());
    RibSnapshot snap = parse_mrt(dir.file("e.mrt"), 0);
    CHECK(snap.records.empty());
    CHECK(snap.counters.confed_rejected == 1);
  }

  SUBCASE("unknown subtypes are skipped with a counter") {
    auto b = small_builder();
    b.add_raw_record(13, 6, std::string("\x00\x00\x00\x00", 4));  // RIB_GENERIC
    b.add_raw_record(16, 4, std::string());                       // BGP4MP message
    b.add_prefix(MrtPrefixSpec{testutil::pfx("203.0.113.0/24"), {mrt_entry(0, {65001, 65002})}});
    write_file(dir.file("f.mrt"), b.build());
    RibSnapshot snap = parse_mrt(dir.file("f.mrt"), 0);
    CHECK(snap.records.size() == 1);
    CHECK(snap.counters.skipped_subtypes == 2);
  }

  SUBCASE("ipv6 rib subtypes are counted") {
    auto b = small_builder();
    b.add_raw_record(13, 4, std::string());
    b.add_prefix(MrtPrefixSpec{testutil::pfx("203.0.113.0/24"), {mrt_entry(0, {65001, 65002})}});
    write_file(dir.file("g.mrt"), b.build());
    RibSnapshot snap = parse_mrt(dir.file("g.mrt"), 0);
    CHECK(snap.counters.v6_skipped == 1);
  }

  SUBCASE("extended-length AS_PATH attribute") {
    auto b = small_builder();
    auto e = mrt_entry(0, {65001, 65002, 65003});
    e.extended_length_attr = true;
    b.add_prefix(MrtPrefixSpec{testutil::pfx("203.0.113.0/24"), {e}});
    write_file(dir.file("h.mrt"), b.build());
    RibSnapshot snap = parse_mrt(dir.file("h.mrt"), 0);
    REQUIRE(snap.records.size() == 1);
    CHECK(snap.records[0].as_path == std::vector<AsNum>{65001, 65002, 65003});
  }

  SUBCASE("4-byte asns survive") {
    auto b = small_builder();
    b.add_prefix(MrtPrefixSpec{testutil::pfx("203.0.113.0/24"),
                               {mrt_entry(0, {65001, 4200000001u, 196608})}});
    write_file(dir.file("i.mrt"), b.build());
    RibSnapshot snap = parse_mrt(dir.file("i.mrt"), 0);
    REQUIRE(snap.records.size() == 1);
    CHECK(snap.records[0].as_path == std::vector<AsNum>{65001, 4200000001u, 196608});
  }

  SUBCASE("truncated file carries complete entries") {
    auto b = small_builder();
    b.add_prefix(MrtPrefixSpec{testutil::pfx("203.0.113.0/24"), {mrt_entry(0, {65001, 65002})}});
    b.add_prefix(MrtPrefixSpec{testutil::pfx("198.51.100.0/24"), {mrt_entry(0, {65001, 65003})}});
    std::string bytes = b.build();
    write_file(dir.file("j.mrt"), bytes.substr(0, bytes.size() - 7));
    try {
      parse_mrt(dir.file("j.mrt"), 0);
      FAIL("expected MrtTruncatedError");
    } catch (const MrtTruncatedError& e) {
      CHECK(e.partial.records.size() == 1);
      CHECK(std::string(e.what()).find("byte offset") != std::string::npos);
    }
  }

  SUBCASE("absurd header length is a malformed-header error") {
    auto b = small_builder();
    std::string bytes = b.build();
    // Corrupt the length field of the first record.
    bytes[8] = char(0x7f);
    write_file(dir.file("k.mrt"), bytes);
    CHECK_THROWS_WITH_AS(parse_mrt(dir.file("k.mrt"), 0), doctest::Contains("byte offset"),
                         ParseError);
  }

  SUBCASE("rib entry before peer table is malformed") {
    MrtBuilder b{0};
    b.peers({});
    std::string with_table = b.build();
    MrtBuilder b2{0};
    b2.peers({MrtPeerSpec{testutil::ip("10.0.0.1"), 65001, false}});
    b2.add_prefix(MrtPrefixSpec{testutil::pfx("203.0.113.0/24"), {mrt_entry(0, {65001, 65002})}});
    std::string full = b2.build();
    // Drop the leading PEER_INDEX_TABLE record.
    std::string stripped = full.substr(with_table.size());
    write_file(dir.file("l.mrt"), stripped);
    CHECK_THROWS_WITH_AS(parse_mrt(dir.file("l.mrt"), 0),
                         doctest::Contains("PEER_INDEX_TABLE"), ParseError);
  }

  SUBCASE("gzip and bzip2 transparent decompression") {
    auto b = small_builder(123);
    b.add_prefix(MrtPrefixSpec{testutil::pfx("203.0.113.0/24"), {mrt_entry(0, {65001, 65002})}});
    std::string bytes = b.build();
    write_file(dir.file("m.mrt.gz"), gzip_bytes(bytes));
    RibSnapshot snap = parse_mrt(dir.file("m.mrt.gz"), 0);
    CHECK(snap.records.size() == 1);
    CHECK(snap.snapshot_time == 123);
    CHECK(peek_snapshot_time(dir.file("m.mrt.gz")) == 123);
  }
}

TEST_CASE("mrt and text fixtures decode to identical records") {
  TempDir dir("rib_equiv");
  MrtBuilder b{3600};
  b.peers({MrtPeerSpec{testutil::ip("10.0.0.1"), 65001, false},
           MrtPeerSpec{testutil::ip("10.0.0.2"), 65002, false}});
  b.add_prefix(MrtPrefixSpec{testutil::pfx("203.0.113.0/24"),
                             {mrt_entry(0, {65001, 65010, 65020}), mrt_entry(1, {65002, 65020})}});
  b.add_prefix(MrtPrefixSpec{testutil::pfx("198.51.100.0/23"), {mrt_entry(0, {65001, 65030})}});
  write_file(dir.file("x.mrt"), b.build());

  write_file(dir.file("x.txt"),
             "3600|10.0.0.1|65001|203.0.113.0/24|65001 65010 65020\n"
             "3600|10.0.0.2|65002|203.0.113.0/24|65002 65020\n"
             "3600|10.0.0.1|65001|198.51.100.0/23|65001 65030\n");

  RibSnapshot mrt = parse_mrt(dir.file("x.mrt"), 0);
  RibSnapshot text = parse_text_rib(dir.file("x.txt"), 0);
  auto sort_records = [](std::vector<RouteRecord> records) {
    std::sort(records.begin(), records.end(), [](const RouteRecord& a, const RouteRecord& b) {
      return std::tie(a.peer_ip.v, a.prefix, a.as_path) < std::tie(b.peer_ip.v, b.prefix, b.as_path);
    });
    return records;
  };
  CHECK(sort_records(mrt.records) == sort_records(text.records));
  CHECK(mrt.peer_count == text.peer_count);
  CHECK(peek_snapshot_time(dir.file("x.mrt")) == 3600);
  CHECK(peek_snapshot_time(dir.file("x.txt")) == 3600);

  // load_rib dispatches on content.
  CHECK(load_rib(dir.file("x.mrt"), 0).records.size() == 3);
  CHECK(load_rib(dir.file("x.txt"), 0).records.size() == 3);
}
