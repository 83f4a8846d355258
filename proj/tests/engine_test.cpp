#include <doctest.h>

#include <algorithm>
#include <random>

#include "detour/engine.hpp"
#include "detour/oracle.hpp"
#include "test_util.hpp"

using namespace detour;
using testutil::cs;
using testutil::geo_map;
using testutil::route;

namespace {

/// detect() over a path whose hop i is AS 10*(i+1) with the given countries.
DetectionVerdict detect_countries(std::initializer_list<std::vector<const char*>> hops,
                                  const RelationshipDb& rel = {}, DetectOptions options = {}) {
  std::vector<std::pair<AsNum, std::vector<const char*>>> entries;
  std::vector<AsNum> path;
  AsNum asn = 10;
  for (const auto& hop : hops) {
    entries.emplace_back(asn, hop);
    path.push_back(asn);
    asn += 10;
  }
  AsGeoMap geo;
  for (const auto& [a, codes] : entries) {
    geo.ensure_present(a);
    for (const char* code : codes) {
      GeoEvidence e;
      e.countries.insert(cc(code));
      geo.add_evidence(a, e, EvidenceSource::prefix);
    }
  }
  return detect(route("10.0.0.1", path.front(), "203.0.113.0/24", path), geo, rel, options);
}

}  // namespace

TEST_CASE("worked path examples") {
  SUBCASE("US IN US is a definite detour") {
    auto v = detect_countries({{"US"}, {"IN"}, {"US"}});
    REQUIRE(v.outcome == Outcome::definite_detour);
    CHECK(v.record->detour_destination_countries == cs({"IN"}));
    CHECK(v.record->detour_origin_asn == 10);
    CHECK(v.record->detour_destination_asns == std::vector<AsNum>{20});
    CHECK(v.record->detour_return_asn == 30);
    CHECK(v.record->foreign_hop_count == 1);
  }
  SUBCASE("US {IN,CN} US is a definite detour") {
    auto v = detect_countries({{"US"}, {"IN", "CN"}, {"US"}});
    REQUIRE(v.outcome == Outcome::definite_detour);
    CHECK(v.record->detour_destination_countries == cs({"IN", "CN"}));
  }
  SUBCASE("US {US,IN} US may stay home") {
    CHECK(detect_countries({{"US"}, {"US", "IN"}, {"US"}}).outcome == Outcome::possible_only);
  }
  SUBCASE("unknown middle hop discards the path") {
    CHECK(detect_countries({{"US"}, {}, {"US"}}).outcome == Outcome::discarded_unknown_geo);
  }
  SUBCASE("detour completed before the unknown hop stands") {
    auto v = detect_countries({{"US"}, {"BR"}, {"US"}, {}, {"US"}});
    REQUIRE(v.outcome == Outcome::definite_detour);
    CHECK(v.record->detour_destination_countries == cs({"BR"}));
    CHECK(v.record->detour_return_asn == 30);
  }
  SUBCASE("only the outermost detour counts") {
    auto v = detect_countries({{"US"}, {"IN"}, {"CN"}, {"IN"}, {"US"}});
    REQUIRE(v.outcome == Outcome::definite_detour);
    CHECK(v.record->detour_destination_asns == std::vector<AsNum>{20, 30, 40});
    CHECK(v.record->foreign_hop_count == 3);
    CHECK(v.record->detour_destination_countries == cs({"IN", "CN"}));
    CHECK_FALSE(v.record->multi_departure);
  }
  SUBCASE("multi-country origin hop starts the detour from home") {
    auto v = detect_countries({{"US"}, {"US", "BR"}, {"CN"}, {"US"}});
    REQUIRE(v.outcome == Outcome::definite_detour);
    CHECK(v.record->detour_origin_asn == 20);
    CHECK(v.record->home_country == cc("US"));
  }
  SUBCASE("uncertain endpoints are not considered") {
    CHECK(detect_countries({{"US", "BR"}, {"IN"}, {"US"}}).outcome ==
          Outcome::not_same_country_endpoints);
    CHECK(detect_countries({{"US"}, {"IN"}, {"BR"}}).outcome == Outcome::not_same_country_endpoints);
  }
  SUBCASE("ambiguous-only middle hop gets its own discard reason") {
    AsGeoMap geo = geo_map({{10, {"DE"}}, {30, {"DE"}}});
    GeoEvidence amb;
    amb.saw_ambiguous = true;  // the EU row was stripped at ingestion
    geo.add_evidence(20, amb, EvidenceSource::prefix);
    RelationshipDb rel;
    auto v = detect(route("10.0.0.1", 10, "203.0.113.0/24", {10, 20, 30}), geo, rel);
    CHECK(v.outcome == Outcome::discarded_ambiguous_code);
  }
  SUBCASE("announcement-direction example: AS3 AS2 AS1 AS0 with AS1 in JP") {
    AsGeoMap geo = geo_map({{3, {"US"}}, {2, {"US"}}, {1, {"JP"}}, {0xA0, {"US"}}});
    RelationshipDb rel;
    auto v = detect(route("10.0.0.1", 3, "1.2.3.0/24", {3, 2, 1, 0xA0}), geo, rel);
    REQUIRE(v.outcome == Outcome::definite_detour);
    CHECK(v.record->detour_origin_asn == 2);
    CHECK(v.record->detour_destination_asns == std::vector<AsNum>{1});
    CHECK(v.record->detour_return_asn == 0xA0);
    CHECK(v.record->prefix_origin_asn == 0xA0);
  }
}

TEST_CASE("detect edge cases") {
  SUBCASE("short paths cannot detour") {
    CHECK(detect_countries({{"US"}, {"US"}}).outcome == Outcome::no_detour);
    CHECK(detect_countries({{"US"}}).outcome == Outcome::no_detour);
  }
  SUBCASE("all-home path") {
    CHECK(detect_countries({{"US"}, {"US"}, {"US"}}).outcome == Outcome::no_detour);
  }
  SUBCASE("unknown endpoint fails the endpoint rule") {
    CHECK(detect_countries({{}, {"IN"}, {"US"}}).outcome == Outcome::not_same_country_endpoints);
  }
  SUBCASE("second departure after the return is flagged, not recorded") {
    auto v = detect_countries({{"US"}, {"IN"}, {"US"}, {"CN"}, {"US"}});
    REQUIRE(v.outcome == Outcome::definite_detour);
    CHECK(v.record->detour_destination_asns == std::vector<AsNum>{20});
    CHECK(v.record->multi_departure);
  }
  SUBCASE("unknown after completed detour does not hide a later departure flag") {
    auto v = detect_countries({{"US"}, {"IN"}, {"US"}, {}, {"US"}});
    REQUIRE(v.outcome == Outcome::definite_detour);
    CHECK_FALSE(v.record->multi_departure);
  }
  SUBCASE("return hop may be multi-country as long as it contains home") {
    auto v = detect_countries({{"US"}, {"IN"}, {"US", "BR"}, {"US"}});
    REQUIRE(v.outcome == Outcome::definite_detour);
    CHECK(v.record->detour_return_asn == 30);
  }
  SUBCASE("enlarging a middle set to include home demotes, never creates") {
    CHECK(detect_countries({{"US"}, {"IN"}, {"US"}}).outcome == Outcome::definite_detour);
    CHECK(detect_countries({{"US"}, {"IN", "US"}, {"US"}}).outcome == Outcome::possible_only);
    CHECK(detect_countries({{"US", "BR"}, {"IN"}, {"US"}}).outcome ==
          Outcome::not_same_country_endpoints);
  }
}

TEST_CASE("peering filter") {
  AsGeoMap geo = geo_map({{10, {"US"}}, {20, {"US"}}, {30, {"IN"}}, {40, {"US"}}});
  auto make_record = [&] { return route("10.0.0.1", 10, "203.0.113.0/24", {10, 20, 30, 40}); };
  // Detour origin 20, return 40.

  SUBCASE("p2c origin-return link always filters") {
    RelationshipDb rel;
    rel.add(20, 40, Relation::p2c);
    auto v = detect(make_record(), geo, rel);
    CHECK(v.outcome == Outcome::filtered_by_peering);
    CHECK(v.peering_link_present);
    rel = {};
    rel.add(40, 20, Relation::p2c);  // c2p seen from the origin side
    CHECK(detect(make_record(), geo, rel).outcome == Outcome::filtered_by_peering);
  }
  SUBCASE("p2p filters when the origin is the peer itself") {
    AsGeoMap geo2 = geo_map({{10, {"US"}}, {30, {"IN"}}, {40, {"US"}}});
    RelationshipDb rel;
    rel.add(10, 40, Relation::p2p);
    RouteRecord rec = route("10.0.0.1", 10, "203.0.113.0/24", {10, 30, 40});
    CHECK(detect(rec, geo2, rel).outcome == Outcome::filtered_by_peering);
  }
  SUBCASE("p2p filters when the peer is a downstream customer") {
    RelationshipDb rel;
    rel.add(20, 40, Relation::p2p);
    rel.add(10, 20, Relation::c2p);  // peer climbs one customer link to the origin
    CHECK(detect(make_record(), geo, rel).outcome == Outcome::filtered_by_peering);
  }
  SUBCASE("p2p with a p2p edge on the climb keeps the detour") {
    RelationshipDb rel;
    rel.add(20, 40, Relation::p2p);
    rel.add(10, 20, Relation::p2p);
    auto v = detect(make_record(), geo, rel);
    CHECK(v.outcome == Outcome::definite_detour);
    CHECK_FALSE(v.peering_link_present);
  }
  SUBCASE("unknown climb edges keep the detour") {
    RelationshipDb rel;
    rel.add(20, 40, Relation::p2p);
    CHECK(detect(make_record(), geo, rel).outcome == Outcome::definite_detour);
  }
  SUBCASE("no origin-return relation keeps the detour") {
    RelationshipDb rel;
    rel.add(10, 20, Relation::c2p);
    CHECK(detect(make_record(), geo, rel).outcome == Outcome::definite_detour);
  }
  SUBCASE("disabled filter keeps the detour but flags the link") {
    RelationshipDb rel;
    rel.add(20, 40, Relation::p2c);
    auto v = detect(make_record(), geo, rel, DetectOptions{false});
    CHECK(v.outcome == Outcome::definite_detour);
    CHECK(v.peering_link_present);
  }
}

TEST_CASE("relationship db parses serial-1 text") {
  auto rel = RelationshipDb::parse_serial1("# comment\n100|200|-1\n300|400|0\n");
  CHECK(rel.relation(100, 200) == Relation::p2c);
  CHECK(rel.relation(200, 100) == Relation::c2p);
  CHECK(rel.relation(300, 400) == Relation::p2p);
  CHECK(rel.relation(400, 300) == Relation::p2p);
  CHECK_FALSE(rel.relation(100, 300).has_value());
  CHECK_THROWS_AS(RelationshipDb::parse_serial1("100|200|2\n"), ParseError);
}

namespace {

RibSnapshot snapshot_of(std::vector<RouteRecord> records, std::string uri, std::int64_t time) {
  RibSnapshot snap;
  snap.source_uri = std::move(uri);
  snap.snapshot_time = time;
  for (auto& r : records) {
    r.snapshot_time = time;
    r.epoch = time / kEpochSeconds;
  }
  snap.records = std::move(records);
  snap.peer_count = count_distinct_peers(snap.records);
  return snap;
}

}  // namespace

TEST_CASE("detect_all aggregates") {
  AsGeoMap geo = geo_map({{10, {"US"}}, {20, {"IN"}}, {30, {"US"}}, {40, {"US"}}});
  RelationshipDb rel;

  SUBCASE("persistent planted detour across 93 epochs") {
    std::vector<RibSnapshot> snaps;
    for (int e = 0; e < 93; ++e) {
      snaps.push_back(snapshot_of({route("10.0.0.1", 10, "203.0.113.0/24", {10, 20, 30})},
                                  "rib_" + std::to_string(e), std::int64_t(e) * kEpochSeconds));
    }
    auto result = detect_all(snaps, geo, rel);
    CHECK(result.counters.total_entries == 93);
    CHECK(result.counters.detoured_entries == 93);
    CHECK(result.counters.unique_detours.size() == 1);
  }

  SUBCASE("no foreign hops, no detours") {
    auto result = detect_all({snapshot_of({route("10.0.0.1", 10, "203.0.113.0/24", {10, 30, 40})},
                                          "rib", 0)},
                             geo, rel);
    CHECK(result.counters.detoured_entries == 0);
    CHECK(result.counters.outcomes.at("no_detour") == 1);
  }

  SUBCASE("p2c plants all filtered: before N, after 0") {
    RelationshipDb filt;
    filt.add(10, 30, Relation::p2c);
    std::vector<RibSnapshot> snaps;
    for (int e = 0; e < 5; ++e)
      snaps.push_back(snapshot_of({route("10.0.0.1", 10, "203.0.113.0/24", {10, 20, 30})},
                                  "rib_" + std::to_string(e), std::int64_t(e) * kEpochSeconds));
    auto result = detect_all(snaps, geo, filt);
    CHECK(result.counters.definite_before_filter == 5);
    CHECK(result.counters.detoured_entries == 0);
    CHECK(result.counters.filtered_by_peering == 5);
    CHECK(result.counters.filtered_pct() == doctest::Approx(100.0));
  }

  SUBCASE("order invariance over permuted snapshots") {
    std::vector<RibSnapshot> snaps;
    for (int e = 0; e < 6; ++e) {
      snaps.push_back(snapshot_of({route("10.0.0.1", 10, "203.0.113.0/24", {10, 20, 30}),
                                   route("10.0.0.2", 40, "198.51.100.0/24", {40, 20, 30})},
                                  "rib_" + std::to_string(e), std::int64_t(e) * kEpochSeconds));
    }
    auto collect = [&](const std::vector<RibSnapshot>& input) {
      std::vector<std::string> lines;
      detect_all(input, geo, rel, {}, [&](const RouteRecord& r, const DetectionVerdict& v) {
        lines.push_back(verdict_to_json(r, v));
      });
      std::sort(lines.begin(), lines.end());
      return lines;
    };
    auto baseline = collect(snaps);
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 5; ++trial) {
      auto shuffled = snaps;
      std::shuffle(shuffled.begin(), shuffled.end(), rng);
      CHECK(collect(shuffled) == baseline);
    }
  }

  SUBCASE("same peer twice in one epoch keeps the later snapshot only") {
    auto early = snapshot_of({route("10.0.0.1", 10, "203.0.113.0/24", {10, 20, 30})}, "early", 100);
    auto late = snapshot_of({route("10.0.0.1", 10, "203.0.113.0/24", {10, 30, 40})}, "late", 200);
    auto result = detect_all({early, late}, geo, rel);
    CHECK(result.counters.total_entries == 2);
    CHECK(result.counters.superseded_same_epoch == 1);
    CHECK(result.counters.detoured_entries == 0);  // the late, clean path won
  }
}

TEST_CASE("verdict json round trip") {
  AsGeoMap geo = geo_map({{10, {"US"}}, {20, {"IN"}}, {30, {"US"}}});
  RelationshipDb rel;
  RouteRecord rec = route("10.0.0.1", 10, "203.0.113.0/24", {10, 20, 30}, 7, 7 * kEpochSeconds);
  auto verdict = detect(rec, geo, rel);
  REQUIRE(verdict.outcome == Outcome::definite_detour);
  std::string line = verdict_to_json(rec, verdict);
  auto parsed = detour_from_json(line);
  REQUIRE(parsed.has_value());
  CHECK(*parsed == *verdict.record);

  auto none = detour_from_json(verdict_to_json(rec, DetectionVerdict{Outcome::no_detour, {}, false}));
  CHECK_FALSE(none.has_value());
}
