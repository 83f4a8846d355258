#include <doctest.h>

#include "detour/io_util.hpp"
#include "detour/validator.hpp"
#include "test_util.hpp"

using namespace detour;
using testutil::cs;
using testutil::ip;
using testutil::pfx;
using testutil::TempDir;

namespace {

TracerouteHop hop(int ttl, const char* addr, std::initializer_list<double> rtts) {
  TracerouteHop h;
  h.ttl = ttl;
  if (addr) h.ip = parse_ipv4(addr);
  h.rtts_ms = rtts;
  return h;
}

TracerouteHop timeout(int ttl) { return TracerouteHop{ttl, std::nullopt, {}}; }

TracerouteResult traceroute(std::vector<TracerouteHop> hops, const char* dst = "203.0.113.1") {
  TracerouteResult tr;
  tr.probe_id = "p1";
  tr.src_asn = 10;
  tr.src_country = cc("US");
  tr.dst_ip = parse_ipv4(dst);
  tr.hops = std::move(hops);
  return tr;
}

DetourRecord detour_record(std::vector<AsNum> control, AsNum origin, AsNum dest, AsNum ret,
                           std::initializer_list<const char*> dest_countries = {"GB", "DE"}) {
  DetourRecord d;
  d.key = DetourKey{parse_ipv4("10.0.0.1"), parse_prefix("203.0.113.0/24"), std::move(control)};
  d.home_country = cc("US");
  d.detour_origin_asn = origin;
  d.detour_destination_asns = {dest};
  for (const char* code : dest_countries) d.detour_destination_countries.insert(cc(code));
  d.detour_return_asn = ret;
  d.prefix_origin_asn = d.key.as_path.back();
  d.foreign_hop_count = 1;
  return d;
}

}  // namespace

TEST_CASE("hops_to_as_path") {
  IpToAsMap datasets;
  datasets.add(ip("10.1.0.1"), 100);
  datasets.add(ip("10.1.0.2"), 100);
  datasets.add(ip("10.2.0.1"), 200);
  PrefixTable table;
  table.add(pfx("10.3.0.0/16"), 300);
  table.add(pfx("10.3.4.0/22"), 333);

  SUBCASE("consecutive duplicates collapse") {
    auto tr = traceroute({hop(1, "10.1.0.1", {1}), hop(2, "10.1.0.2", {2}), hop(3, "10.2.0.1", {3})});
    CHECK(hops_to_as_path(tr, datasets, table) == std::vector<AsNum>{100, 200});
  }
  SUBCASE("longest prefix match fallback") {
    auto tr = traceroute({hop(1, "10.1.0.1", {1}), hop(2, "10.3.4.9", {2})});
    CHECK(hops_to_as_path(tr, datasets, table) == std::vector<AsNum>{100, 333});
  }
  SUBCASE("unmapped hops stay as gaps") {
    auto tr = traceroute({hop(1, "10.1.0.1", {1}), hop(2, "192.168.0.1", {2}), hop(3, "10.2.0.1", {3})});
    CHECK(hops_to_as_path(tr, datasets, table) == std::vector<AsNum>{100, kUnknownAs, 200});
  }
  SUBCASE("timeouts are skipped, all-timeout yields an empty path") {
    auto tr = traceroute({timeout(1), timeout(2), timeout(3)});
    CHECK(hops_to_as_path(tr, datasets, table).empty());
    CHECK_FALSE(usable_traceroute(tr));
  }
}

TEST_CASE("as-path congruence and mutation classes") {
  // Control path A B C D E with origin B and anchor (first destination) C.
  DetourRecord d = detour_record({1, 2, 3, 4, 5}, 2, 3, 4);

  SUBCASE("published example: A X B C E is congruent, a mix") {
    auto v = validate_as_path(d, {1, 9, 2, 3, 5});
    CHECK(v.congruent);
    CHECK(v.mutation == Mutation::mix);
  }
  SUBCASE("identical paths are exact") {
    auto v = validate_as_path(d, {1, 2, 3, 4, 5});
    CHECK(v.congruent);
    CHECK(v.mutation == Mutation::exact);
  }
  SUBCASE("deletion only") {
    auto v = validate_as_path(d, {1, 2, 3, 5});
    CHECK(v.congruent);
    CHECK(v.mutation == Mutation::deletion);
  }
  SUBCASE("insertion only") {
    auto v = validate_as_path(d, {1, 2, 9, 3, 4, 5});
    CHECK(v.congruent);
    CHECK(v.mutation == Mutation::insertion);
  }
  SUBCASE("missing origin is incongruent") {
    auto v = validate_as_path(d, {1, 3, 4, 5});
    CHECK_FALSE(v.congruent);
    CHECK(v.mutation == Mutation::incongruent);
  }
  SUBCASE("origin after anchor is incongruent") {
    CHECK_FALSE(validate_as_path(d, {1, 3, 2, 5}).congruent);
  }
  SUBCASE("anchor can switch to the return AS") {
    // Data path misses C but keeps B before D.
    auto v = validate_as_path(d, {1, 2, 4, 5}, true);
    CHECK(v.congruent);
    CHECK_FALSE(validate_as_path(d, {1, 2, 9, 5}, true).congruent);
  }
  SUBCASE("unknown gaps are ignored for alignment") {
    auto v = validate_as_path(d, {1, kUnknownAs, 2, 3, 4, 5});
    CHECK(v.congruent);
    CHECK(v.mutation == Mutation::exact);
  }
}

TEST_CASE("country-wise data-plane check") {
  // DB: 10.1.* US, 10.2.* GB, 10.3.* IT.
  IpCountryDb db = IpCountryDb::from_rows({{parse_ipv4("10.1.0.0").v, parse_ipv4("10.1.255.255").v, cc("US")},
                                           {parse_ipv4("10.2.0.0").v, parse_ipv4("10.2.255.255").v, cc("GB")},
                                           {parse_ipv4("10.3.0.0").v, parse_ipv4("10.3.255.255").v, cc("IT")}});
  GeoDatabase geo{db};
  DetourRecord d = detour_record({1, 2, 3, 4}, 2, 3, 4);

  SUBCASE("US US GB US against {GB, DE} hits") {
    auto tr = traceroute({hop(1, "10.1.0.1", {1}), hop(2, "10.1.0.2", {1}), hop(3, "10.2.0.1", {20}),
                          hop(4, "10.1.0.3", {21})});
    CHECK(validate_ip_hops(d, tr, geo));
  }
  SUBCASE("wrong destination country is a miss") {
    auto tr = traceroute({hop(1, "10.1.0.1", {1}), hop(2, "10.1.0.2", {1}), hop(3, "10.3.0.1", {20}),
                          hop(4, "10.1.0.3", {21})});
    CHECK_FALSE(validate_ip_hops(d, tr, geo));
  }
  SUBCASE("no observed return is a miss") {
    auto tr = traceroute({hop(1, "10.1.0.1", {1}), hop(2, "10.1.0.2", {1}), hop(3, "10.2.0.1", {20}),
                          timeout(4), timeout(5)});
    CHECK_FALSE(validate_ip_hops(d, tr, geo));
  }
  SUBCASE("return after a second excursion still counts") {
    auto tr = traceroute({hop(1, "10.1.0.1", {1}), hop(2, "10.3.0.1", {9}), hop(3, "10.2.0.1", {20}),
                          hop(4, "10.1.0.3", {21})});
    CHECK(validate_ip_hops(d, tr, geo));
  }
}

TEST_CASE("rtt magnitude jump") {
  SUBCASE("clear jump") {
    CHECK(validate_rtts(traceroute({hop(1, "10.1.0.1", {1.2}), hop(2, "10.1.0.2", {1.5}),
                                    hop(3, "10.2.0.1", {18.0}), hop(4, "10.1.0.3", {19.1})})));
  }
  SUBCASE("9x is below the ratio") {
    CHECK_FALSE(validate_rtts(traceroute({hop(1, "10.1.0.1", {0.1}), hop(2, "10.1.0.2", {0.9})})));
  }
  SUBCASE("ratio met but absolute floor not met") {
    CHECK_FALSE(validate_rtts(traceroute({hop(1, "10.1.0.1", {0.2}), hop(2, "10.1.0.2", {2.1})})));
  }
  SUBCASE("exactly 10x with the floor met") {
    CHECK(validate_rtts(traceroute({hop(1, "10.1.0.1", {1.0}), hop(2, "10.1.0.2", {10.0})})));
  }
  SUBCASE("exactly the 5ms floor") {
    CHECK(validate_rtts(traceroute({hop(1, "10.1.0.1", {0.5}), hop(2, "10.1.0.2", {5.5})})));
  }
  SUBCASE("per-hop minimum is what matters") {
    // Second hop has one noisy 80ms sample but a 2ms floor.
    CHECK_FALSE(validate_rtts(traceroute({hop(1, "10.1.0.1", {1.0}), hop(2, "10.1.0.2", {80.0, 2.0})})));
  }
  SUBCASE("monotone: raising post-jump rtts never loses the jump") {
    auto tr = traceroute({hop(1, "10.1.0.1", {1.0}), hop(2, "10.2.0.1", {15.0}), hop(3, "10.2.0.2", {16.0})});
    REQUIRE(validate_rtts(tr));
    tr.hops[2].rtts_ms = {400.0};
    CHECK(validate_rtts(tr));
  }
  SUBCASE("timeouts between responsive hops do not break adjacency") {
    CHECK(validate_rtts(traceroute({hop(1, "10.1.0.1", {1.0}), timeout(2), hop(3, "10.2.0.1", {30.0})})));
  }
}

TEST_CASE("validate_all counts") {
  IpCountryDb db = IpCountryDb::from_rows({{parse_ipv4("10.1.0.0").v, parse_ipv4("10.1.255.255").v, cc("US")},
                                           {parse_ipv4("10.2.0.0").v, parse_ipv4("10.2.255.255").v, cc("GB")}});
  GeoDatabase geo{db};
  IpToAsMap datasets;
  datasets.add(ip("10.1.0.1"), 1);
  datasets.add(ip("10.1.0.2"), 2);
  datasets.add(ip("10.2.0.1"), 3);
  datasets.add(ip("10.1.0.4"), 4);
  datasets.add(ip("10.1.0.9"), 9);
  PrefixTable table;

  DetourRecord d = detour_record({1, 2, 3, 4}, 2, 3, 4, {"GB"});

  // Congruent, country hit, RTT hit.
  auto tr_full = traceroute({hop(1, "10.1.0.1", {1.0}), hop(2, "10.1.0.2", {1.2}),
                             hop(3, "10.2.0.1", {25.0}), hop(4, "10.1.0.4", {26.0})});
  // Congruent, country hit, no RTT jump.
  auto tr_country = traceroute({hop(1, "10.1.0.1", {1.0}), hop(2, "10.1.0.2", {1.2}),
                                hop(3, "10.2.0.1", {3.0}), hop(4, "10.1.0.4", {3.5})});
  // Congruent, tail timeouts: RTT jump but no observed return.
  auto tr_rtt = traceroute({hop(1, "10.1.0.1", {1.0}), hop(2, "10.1.0.2", {1.2}),
                            hop(3, "10.2.0.1", {25.0}), timeout(4)});
  // Incongruent: origin AS missing from the data path.
  auto tr_incongruent = traceroute({hop(1, "10.1.0.1", {1.0}), hop(2, "10.2.0.1", {25.0}),
                                    hop(3, "10.1.0.4", {26.0})});
  // Unusable: two responsive hops.
  auto tr_short = traceroute({hop(1, "10.1.0.1", {1.0}), hop(2, "10.2.0.1", {25.0}), timeout(3)});

  std::vector<std::pair<DetourRecord, TracerouteResult>> pairs = {
      {d, tr_full}, {d, tr_country}, {d, tr_rtt}, {d, tr_incongruent}, {d, tr_short}};
  auto summary = validate_all(pairs, datasets, table, geo);
  CHECK(summary.pairs == 5);
  CHECK(summary.unusable == 1);
  CHECK(summary.usable == 4);
  CHECK(summary.congruent == 3);
  CHECK(summary.country_hits == 2);
  CHECK(summary.rtt_hits == 2);
  CHECK(summary.both_hits == 1);

  CHECK(validate_all({}, datasets, table, geo).pairs == 0);
}

TEST_CASE("traceroute jsonl io") {
  TempDir dir("validator_io");
  auto tr = traceroute({hop(1, "10.1.0.1", {1.0, 1.1}), timeout(2), hop(3, "10.2.0.1", {20.0})});
  write_file(dir.file("t.jsonl"), traceroute_to_json(tr) + "\n");
  auto loaded = load_traceroutes_jsonl(dir.file("t.jsonl"));
  REQUIRE(loaded.size() == 1);
  CHECK(loaded[0].src_asn == 10);
  CHECK(loaded[0].hops.size() == 3);
  CHECK_FALSE(loaded[0].hops[1].ip.has_value());
  CHECK(loaded[0].hops[2].rtts_ms == std::vector<double>{20.0});

  write_file(dir.file("bad.jsonl"), "{not json\n");
  CHECK_THROWS_WITH_AS(load_traceroutes_jsonl(dir.file("bad.jsonl")), doctest::Contains("line 1"),
                       ParseError);
}

TEST_CASE("pairing traceroutes with detours") {
  DetourRecord wide = detour_record({1, 2, 3, 4}, 2, 3, 4);
  wide.key.prefix = pfx("203.0.112.0/23");
  DetourRecord narrow = detour_record({1, 2, 3, 4}, 2, 3, 4);
  DetourRecord other_peer = detour_record({9, 2, 3, 4}, 2, 3, 4);
  other_peer.key.prefix = pfx("203.0.113.0/24");
  other_peer.key.peer_ip = parse_ipv4("10.0.0.9");

  auto tr = traceroute({hop(1, "10.1.0.1", {1.0})}, "203.0.113.7");
  auto pairing = pair_with_detours({wide, narrow, other_peer}, {tr});
  REQUIRE(pairing.pairs.size() == 1);
  // Longest prefix wins; then the src-AS match on the path head.
  CHECK(pairing.pairs[0].first.key.prefix == pfx("203.0.113.0/24"));
  CHECK(pairing.pairs[0].first.key.as_path.front() == 1);

  auto none = pair_with_detours({wide}, {traceroute({hop(1, "10.1.0.1", {1.0})}, "192.0.2.1")});
  CHECK(none.pairs.empty());
  CHECK(none.unmatched == 1);
}
