#include "detour/oracle.hpp"

#include <algorithm>

namespace detour {

namespace {

bool is_home(const OracleHop& hop, CountryCode home) { return hop.countries.contains(home); }

bool is_definitely_foreign(const OracleHop& hop, CountryCode home) {
  return !hop.countries.empty() && !hop.countries.contains(home);
}

/// Re-derivation of the peering rule from the text, separate from the engine:
/// a p2c/c2p origin-return link always wins; a p2p link wins only for traffic
/// entering at the origin AS or climbing to it through customer links.
bool oracle_filter_peering(const OracleInput& in, AsNum origin, AsNum ret) {
  if (!in.rel) return false;
  auto link = in.rel->relation(origin, ret);
  if (!link) return false;
  if (*link != Relation::p2p) return true;
  if (origin == in.peer_asn) return true;

  std::vector<AsNum> chain;
  chain.push_back(in.peer_asn);
  for (AsNum asn : in.path) {
    if (chain.back() != asn) chain.push_back(asn);
    if (asn == origin) break;
  }
  for (std::size_t i = 0; i + 1 < chain.size(); ++i) {
    auto edge = in.rel->relation(chain[i], chain[i + 1]);
    if (!edge || *edge != Relation::c2p) return false;
  }
  return true;
}

}  // namespace

OracleVerdict oracle_detect(const OracleInput& in) {
  OracleVerdict v;
  const std::size_t n = in.path.size();
  if (n != in.hops.size()) throw InternalError("oracle input: hop/path size mismatch");
  if (n < 3) return v;  // no_detour: a detour needs origin, foreign hop, return

  // Rule 1: both endpoints must confidently sit in one and the same country.
  const auto& head = in.hops.front().countries;
  const auto& tail = in.hops.back().countries;
  if (head.size() != 1 || tail.size() != 1 || !(head == tail)) {
    v.outcome = Outcome::not_same_country_endpoints;
    return v;
  }
  const CountryCode home = *head.begin();
  v.home_country = home;

  // Rules 2-4: first definitely-foreign hop, its maximal run, then the return.
  std::optional<std::size_t> first_foreign;
  for (std::size_t i = 0; i < n; ++i) {
    if (is_definitely_foreign(in.hops[i], home)) {
      first_foreign = i;
      break;
    }
  }

  auto discard_reason = [&](std::size_t idx) {
    return in.hops[idx].ambiguous_evidence ? Outcome::discarded_ambiguous_code
                                           : Outcome::discarded_unknown_geo;
  };

  if (!first_foreign) {
    // Rule 5: an unknown hop with no certain detour discards the path.
    for (std::size_t i = 0; i < n; ++i) {
      if (in.hops[i].countries.empty()) {
        v.outcome = discard_reason(i);
        return v;
      }
    }
    for (std::size_t i = 1; i + 1 < n; ++i) {
      if (is_home(in.hops[i], home) && in.hops[i].countries.size() > 1) {
        v.outcome = Outcome::possible_only;
        return v;
      }
    }
    v.outcome = Outcome::no_detour;
    return v;
  }

  std::size_t segment_end = *first_foreign;
  while (segment_end + 1 < n && is_definitely_foreign(in.hops[segment_end + 1], home)) ++segment_end;

  // The hop after the maximal run is the return candidate. Rule 1 guarantees
  // the last hop is home, so the segment never reaches it.
  std::size_t return_idx = segment_end + 1;
  if (return_idx >= n) throw InternalError("oracle: foreign segment swallowed the path tail");

  // Rule 5: any unknown hop at or before the return point means the detour
  // never completed; the first such hop (scan order) names the reason.
  for (std::size_t i = 0; i <= return_idx; ++i) {
    if (in.hops[i].countries.empty()) {
      v.outcome = discard_reason(i);
      return v;
    }
  }

  // Rule 3: detour origin is the last home-containing AS before the segment.
  std::optional<std::size_t> origin_idx;
  for (std::size_t i = 0; i < *first_foreign; ++i)
    if (is_home(in.hops[i], home)) origin_idx = i;
  if (!origin_idx) throw InternalError("oracle: no home hop precedes the foreign segment");

  // Rule 7: only this outermost detour counts; later departures only flagged.
  for (std::size_t i = return_idx + 1; i < n; ++i)
    if (is_definitely_foreign(in.hops[i], home)) v.multi_departure = true;

  v.origin_asn = in.path[*origin_idx];
  v.return_asn = in.path[return_idx];
  for (std::size_t i = *first_foreign; i <= segment_end; ++i) {
    v.destination_asns.push_back(in.path[i]);
    v.destination_countries.merge(in.hops[i].countries);
  }

  // Rule 8: peering filter.
  v.peering_link_present = oracle_filter_peering(in, v.origin_asn, v.return_asn);
  if (v.peering_link_present && in.apply_peering_filter) {
    v.outcome = Outcome::filtered_by_peering;
    return v;
  }
  v.outcome = Outcome::definite_detour;
  return v;
}

}  // namespace detour
