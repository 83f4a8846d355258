#pragma once

#include <optional>
#include <vector>

#include "detour/engine.hpp"
#include "detour/geo.hpp"
#include "detour/relationship.hpp"
#include "detour/types.hpp"

namespace detour {

/// Country view of one path hop as the oracle sees it.
struct OracleHop {
  CountrySet countries;
  bool ambiguous_evidence = false;
};

struct OracleInput {
  std::vector<AsNum> path;
  std::vector<OracleHop> hops;  // parallel to path
  AsNum peer_asn = 0;
  const RelationshipDb* rel = nullptr;
  bool apply_peering_filter = true;
};

struct OracleVerdict {
  Outcome outcome = Outcome::no_detour;
  bool peering_link_present = false;
  bool multi_departure = false;
  CountryCode home_country;
  AsNum origin_asn = 0;
  std::vector<AsNum> destination_asns;
  CountrySet destination_countries;
  AsNum return_asn = 0;
};

/// Literal, rule-by-rule application of the detection rules: endpoint check,
/// left-to-right foreign-segment search, unknown/ambiguous discards, outermost
/// detour only, then the peering filter. Deliberately unoptimized and kept
/// independent of detect() so the two can cross-check each other.
OracleVerdict oracle_detect(const OracleInput& input);

}  // namespace detour
