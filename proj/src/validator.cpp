#include "detour/validator.hpp"

#include <algorithm>
#include <istream>
#include <sstream>

#include <json.hpp>

#include "detour/io_util.hpp"

namespace detour {

std::vector<TracerouteResult> load_traceroutes_jsonl(const std::string& path) {
  std::vector<TracerouteResult> out;
  auto in = open_input(path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(*in, line)) {
    ++line_no;
    auto trimmed = trim(line);
    if (trimmed.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(trimmed, nullptr, false);
    if (j.is_discarded())
      throw ParseError("line " + std::to_string(line_no) + ": bad JSON traceroute");
    try {
      TracerouteResult tr;
      tr.probe_id = j.at("probe_id").get<std::string>();
      tr.src_asn = j.at("src_asn").get<AsNum>();
      tr.src_country = cc(j.at("src_country").get<std::string>());
      tr.dst_ip = parse_ipv4(j.at("dst_ip").get<std::string>());
      int last_ttl = 0;
      for (const auto& h : j.at("hops")) {
        TracerouteHop hop;
        hop.ttl = h.at("ttl").get<int>();
        if (hop.ttl <= last_ttl)
          throw ParseError("ttl not strictly increasing");
        last_ttl = hop.ttl;
        if (h.contains("ip") && !h["ip"].is_null()) hop.ip = parse_ipv4(h["ip"].get<std::string>());
        if (h.contains("rtts")) hop.rtts_ms = h["rtts"].get<std::vector<double>>();
        if (hop.ip && hop.rtts_ms.empty())
          throw ParseError("responsive hop without RTT samples");
        tr.hops.push_back(std::move(hop));
      }
      out.push_back(std::move(tr));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
    } catch (const ParseError& e) {
      throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::string traceroute_to_json(const TracerouteResult& tr) {
  nlohmann::json j;
  j["probe_id"] = tr.probe_id;
  j["src_asn"] = tr.src_asn;
  j["src_country"] = tr.src_country.str();
  j["dst_ip"] = to_string(tr.dst_ip);
  auto hops = nlohmann::json::array();
  for (const auto& h : tr.hops) {
    nlohmann::json hop;
    hop["ttl"] = h.ttl;
    if (h.ip)
      hop["ip"] = to_string(*h.ip);
    else
      hop["ip"] = nullptr;
    hop["rtts"] = h.rtts_ms;
    hops.push_back(std::move(hop));
  }
  j["hops"] = std::move(hops);
  return j.dump();
}

std::size_t responsive_hop_count(const TracerouteResult& tr) {
  return std::size_t(std::count_if(tr.hops.begin(), tr.hops.end(),
                                   [](const TracerouteHop& h) { return h.ip.has_value(); }));
}

std::vector<AsNum> hops_to_as_path(const TracerouteResult& tr, const IpToAsMap& datasets,
                                   const PrefixTable& table) {
  std::vector<AsNum> path;
  for (const auto& hop : tr.hops) {
    if (!hop.ip) continue;
    AsNum asn = map_infra_ip_to_as(*hop.ip, datasets, table);
    if (!path.empty() && path.back() == asn) continue;
    path.push_back(asn);
  }
  return path;
}

const char* to_string(Mutation m) {
  switch (m) {
    case Mutation::exact: return "exact";
    case Mutation::deletion: return "deletion";
    case Mutation::insertion: return "insertion";
    case Mutation::mix: return "mix";
    case Mutation::incongruent: return "incongruent";
  }
  return "?";
}

namespace {

std::size_t lcs_length(const std::vector<AsNum>& a, const std::vector<AsNum>& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

}  // namespace

CongruenceVerdict validate_as_path(const DetourRecord& detour, const std::vector<AsNum>& data_path,
                                   bool anchor_on_return) {
  CongruenceVerdict v;
  v.data_as_path = data_path;

  // Unmapped hops carry no AS information and are ignored for alignment.
  std::vector<AsNum> data;
  for (AsNum asn : data_path)
    if (asn != kUnknownAs) data.push_back(asn);

  AsNum origin = detour.detour_origin_asn;
  AsNum anchor = anchor_on_return ? detour.detour_return_asn : detour.detour_destination_asns.front();

  auto origin_it = std::find(data.begin(), data.end(), origin);
  auto anchor_it = std::find(data.begin(), data.end(), anchor);
  v.congruent = origin_it != data.end() && anchor_it != data.end() && origin_it < anchor_it;
  if (!v.congruent) {
    v.mutation = Mutation::incongruent;
    return v;
  }

  const auto& control = detour.key.as_path;
  std::size_t lcs = lcs_length(control, data);
  std::size_t deletions = control.size() - lcs;
  std::size_t insertions = data.size() - lcs;
  if (deletions == 0 && insertions == 0)
    v.mutation = Mutation::exact;
  else if (insertions == 0)
    v.mutation = Mutation::deletion;
  else if (deletions == 0)
    v.mutation = Mutation::insertion;
  else
    v.mutation = Mutation::mix;
  return v;
}

bool validate_ip_hops(const DetourRecord& detour, const TracerouteResult& tr, const GeoDatabase& db) {
  const CountryCode home = detour.home_country;
  // The probe sits in the home country; hops geolocate per responsive IP.
  std::vector<CountryCode> countries;
  countries.push_back(home);
  for (const auto& hop : tr.hops) {
    if (!hop.ip) continue;
    GeoEvidence geo = db.geolocate_ip(*hop.ip);
    if (geo.countries.size() != 1) continue;  // unknown or ambiguous hop
    countries.push_back(*geo.countries.begin());
  }
  // A hop in one of the expected destination countries, followed later by a
  // hop back home.
  bool expected_foreign_seen = false;
  for (auto code : countries) {
    if (code == home) {
      if (expected_foreign_seen) return true;
    } else if (detour.detour_destination_countries.contains(code)) {
      expected_foreign_seen = true;
    }
  }
  return false;
}

bool validate_rtts(const TracerouteResult& tr, double ratio, double floor_ms) {
  std::vector<double> mins;
  for (const auto& hop : tr.hops) {
    if (!hop.ip || hop.rtts_ms.empty()) continue;
    mins.push_back(*std::min_element(hop.rtts_ms.begin(), hop.rtts_ms.end()));
  }
  for (std::size_t i = 0; i + 1 < mins.size(); ++i) {
    if (mins[i + 1] >= ratio * mins[i] && mins[i + 1] - mins[i] >= floor_ms) return true;
  }
  return false;
}

ValidationSummary validate_all(const std::vector<std::pair<DetourRecord, TracerouteResult>>& pairs,
                               const IpToAsMap& datasets, const PrefixTable& table,
                               const GeoDatabase& db, const ValidationOptions& options) {
  ValidationSummary s;
  for (const auto& [detour, tr] : pairs) {
    ++s.pairs;
    if (!usable_traceroute(tr)) {
      ++s.unusable;
      continue;
    }
    ++s.usable;
    auto data_path = hops_to_as_path(tr, datasets, table);
    auto verdict = validate_as_path(detour, data_path, options.anchor_on_return);
    if (!verdict.congruent) continue;
    ++s.congruent;
    switch (verdict.mutation) {
      case Mutation::exact: ++s.exact; break;
      case Mutation::deletion: ++s.deletions; break;
      case Mutation::insertion: ++s.insertions; break;
      case Mutation::mix: ++s.mixed; break;
      case Mutation::incongruent: break;
    }
    bool country = validate_ip_hops(detour, tr, db);
    bool rtt = validate_rtts(tr, options.rtt_ratio, options.rtt_floor_ms);
    if (country) ++s.country_hits;
    if (rtt) ++s.rtt_hits;
    if (country && rtt) ++s.both_hits;
  }
  return s;
}

std::string render_summary_json(const ValidationSummary& s) {
  nlohmann::json j;
  j["pairs"] = s.pairs;
  j["unusable"] = s.unusable;
  j["usable"] = s.usable;
  j["congruent"] = s.congruent;
  j["country_hits"] = s.country_hits;
  j["rtt_hits"] = s.rtt_hits;
  j["both_hits"] = s.both_hits;
  j["mutations"] = {{"exact", s.exact},
                    {"deletion", s.deletions},
                    {"insertion", s.insertions},
                    {"mix", s.mixed}};
  return j.dump(2) + "\n";
}

PairingResult pair_with_detours(const std::vector<DetourRecord>& detours,
                                const std::vector<TracerouteResult>& traceroutes) {
  PairingResult out;
  for (const auto& tr : traceroutes) {
    const DetourRecord* best = nullptr;
    for (const auto& d : detours) {
      if (!d.key.prefix.contains(tr.dst_ip)) continue;
      if (!best) {
        best = &d;
        continue;
      }
      // Longest prefix, then a peer-AS match, then the smallest key.
      if (d.key.prefix.length != best->key.prefix.length) {
        if (d.key.prefix.length > best->key.prefix.length) best = &d;
        continue;
      }
      bool d_peer = !d.key.as_path.empty() && d.key.as_path.front() == tr.src_asn;
      bool b_peer = !best->key.as_path.empty() && best->key.as_path.front() == tr.src_asn;
      if (d_peer != b_peer) {
        if (d_peer) best = &d;
        continue;
      }
      if (d.key < best->key) best = &d;
    }
    if (best)
      out.pairs.emplace_back(*best, tr);
    else
      ++out.unmatched;
  }
  return out;
}

}  // namespace detour
