#include "detour/dynamics.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include <json.hpp>

namespace detour {

std::vector<DetourTimeline> build_timelines(const std::vector<DetourRecord>& records,
                                            std::size_t epoch_count) {
  std::map<DetourKey, DetourTimeline> by_key;
  for (const auto& rec : records) {
    if (rec.epoch < 0 || std::size_t(rec.epoch) >= epoch_count)
      throw InternalError("detour epoch " + std::to_string(rec.epoch) + " outside window of " +
                          std::to_string(epoch_count) + " epochs");
    auto it = by_key.find(rec.key);
    if (it == by_key.end()) {
      DetourTimeline t;
      t.key = rec.key;
      t.presence.assign(epoch_count, false);
      t.home_country = rec.home_country;
      t.origin_asn = rec.detour_origin_asn;
      t.anchor_destination_asn = rec.detour_destination_asns.front();
      t.destination_countries = rec.detour_destination_countries;
      t.return_asn = rec.detour_return_asn;
      t.prefix_origin_asn = rec.prefix_origin_asn;
      it = by_key.emplace(rec.key, std::move(t)).first;
    }
    it->second.presence[std::size_t(rec.epoch)] = true;
  }
  std::vector<DetourTimeline> out;
  out.reserve(by_key.size());
  for (auto& [key, t] : by_key) out.push_back(std::move(t));
  return out;
}

DynamicsMetrics metrics(const DetourTimeline& t, std::size_t peers_seen, int transient_hours) {
  const std::size_t e = t.presence.size();
  if (e == 0) throw InternalError("empty timeline");

  std::size_t uptime = 0;
  std::size_t transitions = 0;
  std::size_t longest_run = 0;
  std::size_t run = 0;
  for (std::size_t i = 0; i < e; ++i) {
    if (t.presence[i]) {
      ++uptime;
      ++run;
      longest_run = std::max(longest_run, run);
    } else {
      run = 0;
    }
    if (i + 1 < e && t.presence[i] != t.presence[i + 1]) ++transitions;
  }
  if (uptime == 0) throw InternalError("timeline with no presence bit set");

  DynamicsMetrics m;
  m.duty_cycle = 100.0 * double(uptime) / double(e);
  m.flap_rate = 100.0 * double(transitions) / double(e);
  m.persistence_hours = std::int64_t(longest_run) * 8;
  m.is_transient = m.persistence_hours <= transient_hours;
  m.is_flash = uptime == 1 && peers_seen == 1;
  return m;
}

std::map<std::pair<Prefix, std::vector<AsNum>>, std::size_t> peer_visibility(
    const std::vector<DetourTimeline>& timelines) {
  std::map<std::pair<Prefix, std::vector<AsNum>>, std::set<std::uint32_t>> peers;
  for (const auto& t : timelines)
    peers[{t.key.prefix, t.key.as_path}].insert(t.key.peer_ip.v);
  std::map<std::pair<Prefix, std::vector<AsNum>>, std::size_t> out;
  for (const auto& [k, ips] : peers) out[k] = ips.size();
  return out;
}

std::vector<TimelineMetrics> compute_metrics(const std::vector<DetourTimeline>& timelines,
                                             int transient_hours) {
  auto visibility = peer_visibility(timelines);
  std::vector<TimelineMetrics> rows;
  rows.reserve(timelines.size());
  for (const auto& t : timelines) {
    std::size_t seen = visibility.at({t.key.prefix, t.key.as_path});
    rows.push_back(TimelineMetrics{t, metrics(t, seen, transient_hours)});
  }
  return rows;
}

void assign_quadrants(std::vector<TimelineMetrics>& rows) {
  if (rows.empty()) return;
  double flap_mean = 0.0;
  double duty_mean = 0.0;
  for (const auto& r : rows) {
    flap_mean += r.metrics.flap_rate;
    duty_mean += r.metrics.duty_cycle;
  }
  flap_mean /= double(rows.size());
  duty_mean /= double(rows.size());
  for (auto& r : rows) {
    bool high_flap = r.metrics.flap_rate >= flap_mean;
    bool high_duty = r.metrics.duty_cycle >= duty_mean;
    r.metrics.quadrant = high_flap ? (high_duty ? 1 : 4) : (high_duty ? 2 : 3);
  }
}

std::vector<DetourTimeline> representative_peers(const std::vector<DetourTimeline>& timelines,
                                                 const std::map<Ipv4, AsNum>& peer_as) {
  std::map<Ipv4, std::uint64_t> detours_per_peer;
  for (const auto& t : timelines) ++detours_per_peer[t.key.peer_ip];

  // Per peer AS, the peer with the most unique detours; ties to lowest IP.
  std::map<AsNum, Ipv4> winner;
  for (const auto& [ip, count] : detours_per_peer) {
    auto as_it = peer_as.find(ip);
    if (as_it == peer_as.end()) continue;  // unknown AS: never grouped, kept below
    AsNum asn = as_it->second;
    auto it = winner.find(asn);
    if (it == winner.end()) {
      winner[asn] = ip;
      continue;
    }
    std::uint64_t best = detours_per_peer[it->second];
    if (count > best || (count == best && ip < it->second)) it->second = ip;
  }

  std::vector<DetourTimeline> out;
  for (const auto& t : timelines) {
    auto as_it = peer_as.find(t.key.peer_ip);
    if (as_it == peer_as.end() || winner.at(as_it->second) == t.key.peer_ip) out.push_back(t);
  }
  return out;
}

CountryAverageReport per_country_average(const std::map<PeerId, std::uint64_t>& detours_by_peer,
                                         const std::map<PeerId, std::optional<CountryCode>>& peer_country) {
  CountryAverageReport report;
  std::map<CountryCode, CountryAverageRow> rows;
  for (const auto& [peer, country] : peer_country) {
    auto detours_it = detours_by_peer.find(peer);
    std::uint64_t detours = detours_it == detours_by_peer.end() ? 0 : detours_it->second;
    if (!country) {
      ++report.peers_unknown_country;
      report.detours_excluded += detours;
      continue;
    }
    auto& row = rows[*country];
    row.country = *country;
    row.detours += detours;
    ++row.peers;
  }
  for (auto& [code, row] : rows) {
    row.average = row.peers ? double(row.detours) / double(row.peers) : 0.0;
    report.rows.push_back(row);
  }
  return report;
}

namespace {

std::vector<TopRow> make_top_rows(const std::map<std::string, std::map<AsNum, std::uint64_t>>& dest_counts,
                                  std::uint64_t total, std::size_t top_n) {
  std::vector<TopRow> rows;
  for (const auto& [label, dests] : dest_counts) {
    TopRow row;
    row.label = label;
    for (const auto& [dest, count] : dests) {
      row.count += count;
      if (count > 0 && (row.top_destination == 0 || count > dests.at(row.top_destination)))
        row.top_destination = dest;
    }
    row.share_pct = total ? 100.0 * double(row.count) / double(total) : 0.0;
    row.destination_share_pct =
        row.count ? 100.0 * double(dests.at(row.top_destination)) / double(row.count) : 0.0;
    rows.push_back(std::move(row));
  }
  std::sort(rows.begin(), rows.end(), [](const TopRow& a, const TopRow& b) {
    if (a.count != b.count) return a.count > b.count;
    return a.label < b.label;
  });
  if (rows.size() > top_n) rows.resize(top_n);
  return rows;
}

}  // namespace

ReportTables top_tables(const std::vector<TimelineMetrics>& rows, std::size_t top_n) {
  ReportTables tables;
  std::map<std::string, std::map<AsNum, std::uint64_t>> by_origin, by_prefix, tr_origin, tr_prefix;
  std::uint64_t total = rows.size();
  std::uint64_t transient_total = 0;

  for (const auto& r : rows) {
    const auto& t = r.timeline;
    std::string origin = std::to_string(t.origin_asn);
    std::string prefix = to_string(t.key.prefix);
    ++by_origin[origin][t.anchor_destination_asn];
    ++by_prefix[prefix][t.anchor_destination_asn];
    if (r.metrics.is_transient) {
      ++transient_total;
      ++tr_origin[origin][t.anchor_destination_asn];
      ++tr_prefix[prefix][t.anchor_destination_asn];
    }
    if (r.metrics.is_flash)
      tables.flash.push_back(FlashRow{t.key.prefix, t.prefix_origin_asn, t.anchor_destination_asn,
                                      t.home_country});
  }

  tables.top_origins = make_top_rows(by_origin, total, top_n);
  tables.top_prefixes = make_top_rows(by_prefix, total, top_n);
  tables.transient_origins = make_top_rows(tr_origin, transient_total, top_n);
  tables.transient_prefixes = make_top_rows(tr_prefix, transient_total, top_n);
  std::sort(tables.flash.begin(), tables.flash.end(), [](const FlashRow& a, const FlashRow& b) {
    if (a.prefix != b.prefix) return a.prefix < b.prefix;
    return a.destination_asn < b.destination_asn;
  });
  return tables;
}

namespace {

std::string fmt_pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

nlohmann::json top_rows_json(const std::vector<TopRow>& rows) {
  auto arr = nlohmann::json::array();
  for (const auto& r : rows) {
    arr.push_back({{"label", r.label},
                   {"count", r.count},
                   {"share_pct", r.share_pct},
                   {"top_destination_asn", r.top_destination},
                   {"destination_share_pct", r.destination_share_pct}});
  }
  return arr;
}

void render_top_table_text(std::ostringstream& out, const char* title, const std::vector<TopRow>& rows) {
  out << title << '\n';
  out << "  " << std::string(72, '-') << '\n';
  char line[160];
  std::snprintf(line, sizeof(line), "  %-24s %8s %10s %14s %10s", "label", "count", "share%",
                "top-dest-asn", "dest%");
  out << line << '\n';
  for (const auto& r : rows) {
    std::snprintf(line, sizeof(line), "  %-24s %8llu %10.2f %14u %10.2f", r.label.c_str(),
                  static_cast<unsigned long long>(r.count), r.share_pct, r.top_destination,
                  r.destination_share_pct);
    out << line << '\n';
  }
  out << '\n';
}

}  // namespace

std::string render_metrics_csv(const std::vector<TimelineMetrics>& rows) {
  std::ostringstream out;
  out << "key,home_country,flap_rate,duty_cycle,persistence_hours,transient,flash,quadrant\n";
  for (const auto& r : rows) {
    out << r.timeline.key.str() << ',' << r.timeline.home_country.str() << ','
        << fmt_pct(r.metrics.flap_rate) << ',' << fmt_pct(r.metrics.duty_cycle) << ','
        << r.metrics.persistence_hours << ',' << (r.metrics.is_transient ? "true" : "false") << ','
        << (r.metrics.is_flash ? "true" : "false") << ',' << r.metrics.quadrant << '\n';
  }
  return out.str();
}

std::string render_tables_json(const ReportTables& tables) {
  nlohmann::json j;
  j["top_origins"] = top_rows_json(tables.top_origins);
  j["top_prefixes"] = top_rows_json(tables.top_prefixes);
  j["transient_origins"] = top_rows_json(tables.transient_origins);
  j["transient_prefixes"] = top_rows_json(tables.transient_prefixes);
  auto flash = nlohmann::json::array();
  for (const auto& f : tables.flash) {
    flash.push_back({{"prefix", to_string(f.prefix)},
                     {"owner_asn", f.owner_asn},
                     {"destination_asn", f.destination_asn},
                     {"home_country", f.home_country.str()}});
  }
  j["flash"] = std::move(flash);
  return j.dump(2) + "\n";
}

std::string render_tables_text(const ReportTables& tables) {
  std::ostringstream out;
  render_top_table_text(out, "Top detour origin ASNs", tables.top_origins);
  render_top_table_text(out, "Top detoured prefixes", tables.top_prefixes);
  render_top_table_text(out, "Top transient detour origin ASNs", tables.transient_origins);
  render_top_table_text(out, "Top transient detoured prefixes", tables.transient_prefixes);
  out << "Flash detours\n";
  out << "  " << std::string(72, '-') << '\n';
  char line[160];
  std::snprintf(line, sizeof(line), "  %-24s %12s %16s %6s", "prefix", "owner-asn", "destination-asn",
                "home");
  out << line << '\n';
  for (const auto& f : tables.flash) {
    std::snprintf(line, sizeof(line), "  %-24s %12u %16u %6s", to_string(f.prefix).c_str(), f.owner_asn,
                  f.destination_asn, f.home_country.str().c_str());
    out << line << '\n';
  }
  return out.str();
}

std::string render_country_csv(const CountryAverageReport& raw, const CountryAverageReport& dedup) {
  std::map<CountryCode, std::pair<const CountryAverageRow*, const CountryAverageRow*>> merged;
  for (const auto& row : raw.rows) merged[row.country].first = &row;
  for (const auto& row : dedup.rows) merged[row.country].second = &row;

  std::ostringstream out;
  out << "country,peers,detours_raw,average_raw,detours_dedup,average_dedup\n";
  for (const auto& [code, rows] : merged) {
    const auto* r = rows.first;
    const auto* d = rows.second;
    std::size_t peers = r ? r->peers : d->peers;
    out << code.str() << ',' << peers << ',' << (r ? r->detours : 0) << ','
        << fmt_pct(r ? r->average : 0.0) << ',' << (d ? d->detours : 0) << ','
        << fmt_pct(d ? d->average : 0.0) << '\n';
  }
  return out.str();
}

}  // namespace detour
