#include <doctest.h>

#include "detour/types.hpp"

using namespace detour;

TEST_CASE("ipv4 parse and format") {
  CHECK(parse_ipv4("10.0.0.1").v == 0x0a000001u);
  CHECK(parse_ipv4("255.255.255.255").v == 0xffffffffu);
  CHECK(to_string(Ipv4{0x0a000001u}) == "10.0.0.1");
  CHECK_THROWS_AS(parse_ipv4("10.0.0"), ParseError);
  CHECK_THROWS_AS(parse_ipv4("10.0.0.256"), ParseError);
  CHECK_THROWS_AS(parse_ipv4("10.0.0.1.2"), ParseError);
}

TEST_CASE("prefix parse, bounds and containment") {
  Prefix p = parse_prefix("203.0.113.0/24");
  CHECK(p.length == 24);
  CHECK(p.first() == parse_ipv4("203.0.113.0").v);
  CHECK(p.last() == parse_ipv4("203.0.113.255").v);
  CHECK(p.contains(parse_ipv4("203.0.113.7")));
  CHECK_FALSE(p.contains(parse_ipv4("203.0.114.0")));

  CHECK(parse_prefix("0.0.0.0/0").last() == 0xffffffffu);
  CHECK(parse_prefix("10.1.2.3/32").first() == parse_prefix("10.1.2.3/32").last());
  CHECK_THROWS_AS(parse_prefix("203.0.113.1/24"), ParseError);  // host bits
  CHECK_THROWS_AS(parse_prefix("203.0.113.0/33"), ParseError);
  CHECK_THROWS_AS(parse_prefix("203.0.113.0"), ParseError);
  CHECK(make_prefix_masked(parse_ipv4("203.0.113.99"), 24).base == parse_ipv4("203.0.113.0"));
}

TEST_CASE("country codes and ambiguity") {
  CHECK(cc("US").str() == "US");
  CHECK(is_ambiguous_code(cc("EU")));
  CHECK(is_ambiguous_code(cc("A1")));
  CHECK(is_ambiguous_code(cc("AP")));
  CHECK_FALSE(is_ambiguous_code(cc("US")));
  CHECK_FALSE(CountryCode::parse("usa").has_value());
  CHECK_FALSE(CountryCode::parse("u").has_value());

  CountrySet set;
  set.insert(cc("US"));
  set.insert(cc("US"));
  set.insert(cc("BR"));
  CHECK(set.size() == 2);
  CHECK(set.contains(cc("BR")));
  CHECK_THROWS_AS(set.insert(cc("EU")), InternalError);
}

TEST_CASE("epoch bucketing") {
  CHECK(epoch_of(28799, 0) == 0);
  CHECK(epoch_of(28800, 0) == 1);
  CHECK(epoch_of(0, 0) == 0);
  // A 31-day window holds 93 epochs, indices 0..92.
  const std::int64_t month = 31 * kDaySeconds;
  CHECK(month / kEpochSeconds == 93);
  CHECK(epoch_of(month - 1, 0) == 92);
  CHECK_THROWS_AS(epoch_of(10, 20), ParseError);
}

TEST_CASE("reserved asn ranges") {
  CHECK(is_reserved_asn(0));
  CHECK(is_reserved_asn(64512));
  CHECK(is_reserved_asn(65534));
  CHECK_FALSE(is_reserved_asn(64511));
  CHECK_FALSE(is_reserved_asn(65535));
  CHECK(is_reserved_asn(4200000000u));
  CHECK_FALSE(is_reserved_asn(3356));
}
