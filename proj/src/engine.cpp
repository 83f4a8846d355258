#include "detour/engine.hpp"

#include <algorithm>
#include <sstream>

#include <json.hpp>

#include "detour/io_util.hpp"

namespace detour {

std::string DetourKey::str() const {
  std::ostringstream out;
  out << to_string(peer_ip) << '|' << to_string(prefix) << '|';
  for (std::size_t i = 0; i < as_path.size(); ++i) {
    if (i) out << ' ';
    out << as_path[i];
  }
  return out.str();
}

const char* to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::definite_detour: return "definite_detour";
    case Outcome::possible_only: return "possible_only";
    case Outcome::no_detour: return "no_detour";
    case Outcome::discarded_unknown_geo: return "discarded_unknown_geo";
    case Outcome::discarded_ambiguous_code: return "discarded_ambiguous_code";
    case Outcome::not_same_country_endpoints: return "not_same_country_endpoints";
    case Outcome::filtered_by_peering: return "filtered_by_peering";
  }
  return "?";
}

namespace {

void check_record_invariants(const DetourRecord& rec) {
  if (rec.detour_destination_countries.contains(rec.home_country))
    throw InternalError("detour record contains home country among destinations");
  if (rec.foreign_hop_count == 0 || rec.foreign_hop_count != rec.detour_destination_asns.size())
    throw InternalError("detour record foreign segment is inconsistent");
  const auto& path = rec.key.as_path;
  auto origin = std::find(path.begin(), path.end(), rec.detour_origin_asn);
  auto ret = std::find(path.begin(), path.end(), rec.detour_return_asn);
  if (origin == path.end() || ret == path.end() || origin >= ret)
    throw InternalError("detour record origin/return ordering violated");
}

}  // namespace

bool filter_peering(const DetourRecord& detour, const std::vector<AsNum>& path,
                    const RelationshipDb& rel, AsNum peer_asn) {
  AsNum origin = detour.detour_origin_asn;
  AsNum ret = detour.detour_return_asn;
  auto origin_it = std::find(path.begin(), path.end(), origin);
  auto return_it = std::find(path.begin(), path.end(), ret);
  if (origin_it == path.end() || return_it == path.end())
    throw InternalError("peering filter: origin or return AS not on path");

  auto link = rel.relation(origin, ret);
  if (!link) return false;
  if (*link == Relation::p2c || *link == Relation::c2p) return true;

  // p2p is usable only when the traffic enters from the origin AS itself or
  // climbs a pure customer-to-provider chain from the peer.
  if (origin == peer_asn) return true;
  std::vector<AsNum> segment;
  if (path.front() != peer_asn) segment.push_back(peer_asn);
  segment.insert(segment.end(), path.begin(), origin_it + 1);
  for (std::size_t i = 0; i + 1 < segment.size(); ++i) {
    auto edge = rel.relation(segment[i], segment[i + 1]);
    if (!edge || *edge != Relation::c2p) return false;  // unknown edges keep the detour
  }
  return true;
}

DetectionVerdict detect(const RouteRecord& record, const AsGeoMap& geo, const RelationshipDb& rel,
                        const DetectOptions& options) {
  const auto& path = record.as_path;
  const std::size_t n = path.size();
  if (n < 3) return {Outcome::no_detour, std::nullopt, false};

  GeoEvidence first = geo.view(path.front());
  GeoEvidence last = geo.view(path.back());
  if (first.countries.size() != 1 || last.countries.size() != 1 ||
      !(first.countries == last.countries))
    return {Outcome::not_same_country_endpoints, std::nullopt, false};
  const CountryCode home = *first.countries.begin();

  std::optional<std::size_t> first_foreign;
  std::size_t segment_end = 0;
  std::optional<std::size_t> return_idx;
  CountrySet destination_countries;
  bool possible = false;
  bool multi_departure = false;

  for (std::size_t i = 1; i < n; ++i) {
    GeoEvidence hop = geo.view(path[i]);
    if (return_idx) {
      // Detour already complete; later unknowns cannot invalidate it.
      if (!hop.countries.empty() && !hop.countries.contains(home)) multi_departure = true;
      continue;
    }
    if (hop.countries.empty()) {
      return {hop.saw_ambiguous ? Outcome::discarded_ambiguous_code : Outcome::discarded_unknown_geo,
              std::nullopt, false};
    }
    if (hop.countries.contains(home)) {
      if (first_foreign)
        return_idx = i;
      else if (hop.countries.size() > 1)
        possible = true;
      continue;
    }
    // Definitely foreign: the whole set excludes home.
    if (!first_foreign) first_foreign = i;
    segment_end = i;
    destination_countries.merge(hop.countries);
  }

  if (!return_idx) return {possible ? Outcome::possible_only : Outcome::no_detour, std::nullopt, false};

  DetourRecord rec;
  rec.key = DetourKey{record.peer_ip, record.prefix, path};
  rec.epoch = record.epoch;
  rec.home_country = home;
  rec.detour_origin_asn = path[*first_foreign - 1];
  rec.detour_destination_asns.assign(path.begin() + std::ptrdiff_t(*first_foreign),
                                     path.begin() + std::ptrdiff_t(segment_end) + 1);
  rec.detour_destination_countries = std::move(destination_countries);
  rec.detour_return_asn = path[*return_idx];
  rec.prefix_origin_asn = record.origin_asn;
  rec.foreign_hop_count = rec.detour_destination_asns.size();
  rec.multi_departure = multi_departure;
  check_record_invariants(rec);

  bool peering = filter_peering(rec, path, rel, record.peer_asn);
  if (peering && options.apply_peering_filter)
    return {Outcome::filtered_by_peering, std::nullopt, true};
  return {Outcome::definite_detour, std::move(rec), peering};
}

DetectAllResult detect_all(const std::vector<RibSnapshot>& snapshots, const AsGeoMap& geo,
                           const RelationshipDb& rel, const DetectOptions& options,
                           const VerdictSink& sink) {
  DetectAllResult result;

  // Deterministic processing order regardless of input order.
  std::vector<const RibSnapshot*> ordered;
  ordered.reserve(snapshots.size());
  for (const auto& s : snapshots) ordered.push_back(&s);
  std::sort(ordered.begin(), ordered.end(), [](const RibSnapshot* a, const RibSnapshot* b) {
    if (a->snapshot_time != b->snapshot_time) return a->snapshot_time < b->snapshot_time;
    return a->source_uri < b->source_uri;
  });

  // Latest snapshot_time per (peer, epoch); earlier same-epoch RIBs from the
  // same peer are superseded.
  std::map<std::pair<PeerId, std::int64_t>, std::int64_t> latest;
  for (const auto* snap : ordered) {
    for (const auto& r : snap->records) {
      auto key = std::make_pair(PeerId{r.peer_ip, r.peer_asn}, r.epoch);
      auto [it, inserted] = latest.emplace(key, r.snapshot_time);
      if (!inserted && r.snapshot_time > it->second) it->second = r.snapshot_time;
    }
  }

  for (const auto* snap : ordered) {
    result.counters.ingest += snap->counters;
    for (const auto& r : snap->records) {
      ++result.counters.total_entries;
      PeerId peer{r.peer_ip, r.peer_asn};
      auto& pstats = result.peers[peer];
      pstats.epochs_observed.insert(r.epoch);
      if (latest.at({peer, r.epoch}) != r.snapshot_time) {
        ++result.counters.superseded_same_epoch;
        continue;
      }
      ++pstats.records;

      DetectionVerdict verdict = detect(r, geo, rel, options);
      ++result.counters.outcomes[to_string(verdict.outcome)];
      if (verdict.outcome == Outcome::definite_detour || verdict.outcome == Outcome::filtered_by_peering)
        ++result.counters.definite_before_filter;
      if (verdict.peering_link_present) ++result.counters.filtered_by_peering;
      if (verdict.outcome == Outcome::definite_detour) {
        ++result.counters.detoured_entries;
        ++pstats.detoured_entries;
        if (verdict.record->multi_departure) ++result.counters.multi_departure_entries;
        result.counters.unique_detours.insert(verdict.record->key);
        pstats.unique_detours.insert(verdict.record->key);
      }
      if (sink) sink(r, verdict);
    }
  }
  return result;
}

std::string verdict_to_json(const RouteRecord& record, const DetectionVerdict& verdict) {
  nlohmann::json j;
  j["outcome"] = to_string(verdict.outcome);
  j["key"] = {{"peer_ip", to_string(record.peer_ip)},
              {"prefix", to_string(record.prefix)},
              {"as_path", record.as_path}};
  j["peer_asn"] = record.peer_asn;
  j["epoch"] = record.epoch;
  if (verdict.peering_link_present) j["peering_link_present"] = true;
  if (verdict.record) {
    const auto& r = *verdict.record;
    auto countries = nlohmann::json::array();
    for (auto code : r.detour_destination_countries) countries.push_back(code.str());
    j["detour"] = {{"home_country", r.home_country.str()},
                   {"origin_asn", r.detour_origin_asn},
                   {"destination_asns", r.detour_destination_asns},
                   {"destination_countries", std::move(countries)},
                   {"return_asn", r.detour_return_asn},
                   {"prefix_origin_asn", r.prefix_origin_asn},
                   {"foreign_hop_count", r.foreign_hop_count},
                   {"multi_departure", r.multi_departure}};
  }
  return j.dump();
}

std::optional<DetourRecord> detour_from_json(const std::string& line) {
  nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
  if (j.is_discarded()) throw ParseError("bad JSON verdict line");
  if (j.at("outcome").get<std::string>() != "definite_detour") return std::nullopt;
  const auto& key = j.at("key");
  DetourRecord rec;
  rec.key.peer_ip = parse_ipv4(key.at("peer_ip").get<std::string>());
  rec.key.prefix = parse_prefix(key.at("prefix").get<std::string>());
  rec.key.as_path = key.at("as_path").get<std::vector<AsNum>>();
  rec.epoch = j.at("epoch").get<std::int64_t>();
  const auto& d = j.at("detour");
  rec.home_country = cc(d.at("home_country").get<std::string>());
  rec.detour_origin_asn = d.at("origin_asn").get<AsNum>();
  rec.detour_destination_asns = d.at("destination_asns").get<std::vector<AsNum>>();
  for (const auto& code : d.at("destination_countries"))
    rec.detour_destination_countries.insert(cc(code.get<std::string>()));
  rec.detour_return_asn = d.at("return_asn").get<AsNum>();
  rec.prefix_origin_asn = d.at("prefix_origin_asn").get<AsNum>();
  rec.foreign_hop_count = d.at("foreign_hop_count").get<std::size_t>();
  rec.multi_departure = d.value("multi_departure", false);
  return rec;
}

}  // namespace detour
