#include "detour/geo.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <sstream>

#include <json.hpp>

#include "detour/io_util.hpp"

namespace detour {

namespace {

std::uint32_t parse_ip_or_int(std::string_view text, const char* what, std::size_t line_no) {
  if (text.find('.') != std::string_view::npos) return parse_ipv4(text).v;
  std::uint32_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    throw ParseError("line " + std::to_string(line_no) + ": bad " + what + ": " + std::string(text));
  return v;
}

template <typename T>
T parse_number(std::string_view text, const char* what, std::size_t line_no) {
  T v{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    throw ParseError("line " + std::to_string(line_no) + ": bad " + what + ": " + std::string(text));
  return v;
}

CountryCode parse_code(std::string_view text, std::size_t line_no) {
  auto code = CountryCode::parse(trim(text));
  if (!code) throw ParseError("line " + std::to_string(line_no) + ": bad country code: " + std::string(text));
  return *code;
}

/// Iterates non-comment CSV lines.
template <typename Fn>
void for_each_csv_line(const std::string& path, Fn&& fn) {
  auto in = open_input(path);
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(*in, raw)) {
    ++line_no;
    auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    fn(line, line_no);
  }
}

}  // namespace

// --- IpCountryDb -----------------------------------------------------------

IpCountryDb IpCountryDb::load_csv(const std::string& path) {
  std::vector<std::tuple<std::uint32_t, std::uint32_t, CountryCode>> rows;
  for_each_csv_line(path, [&](std::string_view line, std::size_t line_no) {
    auto fields = split(line, ',');
    if (fields.size() != 3)
      throw ParseError("line " + std::to_string(line_no) + ": expected range_start,range_end,country");
    std::uint32_t lo = parse_ip_or_int(trim(fields[0]), "range start", line_no);
    std::uint32_t hi = parse_ip_or_int(trim(fields[1]), "range end", line_no);
    if (hi < lo) throw ParseError("line " + std::to_string(line_no) + ": range end precedes start");
    rows.emplace_back(lo, hi, parse_code(fields[2], line_no));
  });
  return from_rows(std::move(rows));
}

IpCountryDb IpCountryDb::from_rows(std::vector<std::tuple<std::uint32_t, std::uint32_t, CountryCode>> rows) {
  IpCountryDb db;
  db.ranges_.reserve(rows.size());
  for (auto& [lo, hi, code] : rows)
    db.ranges_.push_back(Range{lo, hi, code, is_ambiguous_code(code)});
  std::sort(db.ranges_.begin(), db.ranges_.end(),
            [](const Range& a, const Range& b) { return a.lo < b.lo; });
  for (std::size_t i = 1; i < db.ranges_.size(); ++i) {
    if (db.ranges_[i].lo <= db.ranges_[i - 1].hi)
      throw ParseError("overlapping IP ranges at " + to_string(Ipv4{db.ranges_[i].lo}));
  }
  return db;
}

IpCountryDb::Hit IpCountryDb::lookup(Ipv4 ip) const {
  auto it = std::upper_bound(ranges_.begin(), ranges_.end(), ip.v,
                             [](std::uint32_t v, const Range& r) { return v < r.lo; });
  if (it == ranges_.begin()) return {};
  --it;
  if (ip.v > it->hi) return {};
  Hit hit;
  hit.found = true;
  hit.ambiguous = it->ambiguous;
  if (!it->ambiguous) hit.country = it->country;
  return hit;
}

GeoEvidence IpCountryDb::query_interval(std::uint32_t lo, std::uint32_t hi) const {
  GeoEvidence out;
  auto it = std::upper_bound(ranges_.begin(), ranges_.end(), lo,
                             [](std::uint32_t v, const Range& r) { return v < r.lo; });
  if (it != ranges_.begin()) --it;
  for (; it != ranges_.end() && it->lo <= hi; ++it) {
    if (it->hi < lo) continue;
    if (it->ambiguous)
      out.saw_ambiguous = true;
    else
      out.countries.insert(it->country);
  }
  return out;
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> IpCountryDb::gaps(std::uint32_t lo,
                                                                       std::uint32_t hi) const {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
  std::uint64_t cursor = lo;
  auto it = std::upper_bound(ranges_.begin(), ranges_.end(), lo,
                             [](std::uint32_t v, const Range& r) { return v < r.lo; });
  if (it != ranges_.begin()) --it;
  for (; it != ranges_.end() && it->lo <= hi; ++it) {
    if (it->hi < cursor) continue;
    if (it->lo > cursor) out.emplace_back(std::uint32_t(cursor), it->lo - 1);
    cursor = std::uint64_t(it->hi) + 1;
    if (cursor > hi) break;
  }
  if (cursor <= hi) out.emplace_back(std::uint32_t(cursor), hi);
  return out;
}

// --- GeoDatabase -------------------------------------------------------------

GeoEvidence GeoDatabase::geolocate_prefix(const Prefix& prefix) const {
  GeoEvidence out = primary_.query_interval(prefix.first(), prefix.last());
  if (fallback_) {
    for (auto [lo, hi] : primary_.gaps(prefix.first(), prefix.last()))
      out.merge(fallback_->query_interval(lo, hi));
  }
  return out;
}

GeoEvidence GeoDatabase::geolocate_ip(Ipv4 ip) const {
  GeoEvidence out;
  auto hit = primary_.lookup(ip);
  if (!hit.found && fallback_) hit = fallback_->lookup(ip);
  if (hit.found) {
    if (hit.country)
      out.countries.insert(*hit.country);
    else
      out.saw_ambiguous = true;
  }
  return out;
}

// --- Ownership ----------------------------------------------------------------

void OwnershipTracker::observe(std::int64_t day, const Prefix& prefix, AsNum origin_asn) {
  seen_[{prefix, origin_asn}].insert(day);
}

OwnershipResult OwnershipTracker::finish(int min_days) const {
  OwnershipResult out;
  for (const auto& [key, days] : seen_) {
    PrefixOwnership own{key.first, key.second, days};
    if (std::ssize(days) >= min_days)
      out.retained.push_back(std::move(own));
    else
      out.rejected.push_back(std::move(own));
  }
  return out;
}

// --- PrefixTable ----------------------------------------------------------------

void PrefixTable::add(const Prefix& prefix, AsNum origin) {
  by_length_[prefix.length].emplace_back(prefix.base.v, origin);
  sorted_ = false;
}

void PrefixTable::ensure_sorted() const {
  if (sorted_) return;
  auto* self = const_cast<PrefixTable*>(this);
  for (auto& bucket : self->by_length_) {
    std::sort(bucket.begin(), bucket.end());
    bucket.erase(std::unique(bucket.begin(), bucket.end()), bucket.end());
    // Multi-origin prefixes: keep the smallest ASN per base.
    auto out = bucket.begin();
    for (auto it = bucket.begin(); it != bucket.end(); ++it) {
      if (out != bucket.begin() && std::prev(out)->first == it->first) continue;
      *out++ = *it;
    }
    bucket.erase(out, bucket.end());
  }
  self->sorted_ = true;
}

std::optional<AsNum> PrefixTable::lookup(Ipv4 ip) const {
  ensure_sorted();
  for (int len = 32; len >= 0; --len) {
    const auto& bucket = by_length_[len];
    if (bucket.empty()) continue;
    std::uint32_t masked = len == 0 ? 0 : ip.v & (0xffffffffu << (32 - len));
    auto it = std::lower_bound(bucket.begin(), bucket.end(), std::make_pair(masked, AsNum{0}));
    if (it != bucket.end() && it->first == masked) return it->second;
  }
  return std::nullopt;
}

PrefixTable PrefixTable::load_csv(const std::string& path) {
  PrefixTable table;
  for_each_csv_line(path, [&](std::string_view line, std::size_t line_no) {
    auto fields = split(line, ',');
    if (fields.size() != 2)
      throw ParseError("line " + std::to_string(line_no) + ": expected prefix,asn");
    table.add(parse_prefix(trim(fields[0])), parse_number<AsNum>(trim(fields[1]), "asn", line_no));
  });
  return table;
}

std::string PrefixTable::render_csv() const {
  ensure_sorted();
  std::ostringstream out;
  for (int len = 0; len <= 32; ++len) {
    for (const auto& [base, asn] : by_length_[len])
      out << to_string(Prefix{Ipv4{base}, std::uint8_t(len)}) << ',' << asn << '\n';
  }
  return out.str();
}

std::size_t PrefixTable::size() const {
  std::size_t n = 0;
  for (const auto& bucket : by_length_) n += bucket.size();
  return n;
}

// --- Infrastructure IPs -----------------------------------------------------------

std::vector<InfraEvidenceRow> load_infra_csv(const std::string& path) {
  std::vector<InfraEvidenceRow> rows;
  for_each_csv_line(path, [&](std::string_view line, std::size_t line_no) {
    auto fields = split(line, ',');
    if (fields.size() != 4)
      throw ParseError("line " + std::to_string(line_no) + ": expected ip,source,country,confidence");
    InfraEvidenceRow row;
    row.ip = parse_ipv4(trim(fields[0]));
    row.source = std::string(trim(fields[1]));
    row.country = parse_code(fields[2], line_no);
    row.ambiguous = is_ambiguous_code(row.country);
    auto conf = trim(fields[3]);
    try {
      row.confidence = std::stod(std::string(conf));
    } catch (const std::exception&) {
      throw ParseError("line " + std::to_string(line_no) + ": bad confidence: " + std::string(conf));
    }
    rows.push_back(std::move(row));
  });
  return rows;
}

GeoEvidence geolocate_infra_ip(Ipv4 ip, const std::vector<InfraEvidenceRow>& evidence,
                               const GeoDatabase& db) {
  GeoEvidence out = db.geolocate_ip(ip);
  for (const auto& row : evidence) {
    if (row.ip != ip) continue;
    if (row.confidence < kInfraConfidenceFloor) continue;
    if (row.ambiguous)
      out.saw_ambiguous = true;
    else
      out.countries.insert(row.country);
  }
  return out;
}

IpToAsMap IpToAsMap::load_csv(const std::string& path) {
  IpToAsMap map;
  for_each_csv_line(path, [&](std::string_view line, std::size_t line_no) {
    auto fields = split(line, ',');
    if (fields.size() != 2)
      throw ParseError("line " + std::to_string(line_no) + ": expected ip,asn");
    map.add(parse_ipv4(trim(fields[0])), parse_number<AsNum>(trim(fields[1]), "asn", line_no));
  });
  return map;
}

void IpToAsMap::add(Ipv4 ip, AsNum asn) { map_[ip] = asn; }

std::optional<AsNum> IpToAsMap::find(Ipv4 ip) const {
  auto it = map_.find(ip);
  if (it == map_.end()) return std::nullopt;
  return it->second;
}

AsNum map_infra_ip_to_as(Ipv4 ip, const IpToAsMap& datasets, const PrefixTable& table) {
  if (auto asn = datasets.find(ip)) return *asn;
  if (auto asn = table.lookup(ip)) return *asn;
  return kUnknownAs;
}

// --- IXP ------------------------------------------------------------------------

std::vector<IxpParticipant> load_ixp_csv(const std::string& path) {
  std::vector<IxpParticipant> rows;
  for_each_csv_line(path, [&](std::string_view line, std::size_t line_no) {
    auto fields = split(line, ',');
    if (fields.size() != 3)
      throw ParseError("line " + std::to_string(line_no) + ": expected asn,ixp_id,country");
    IxpParticipant p;
    p.asn = parse_number<AsNum>(trim(fields[0]), "asn", line_no);
    p.ixp_id = std::string(trim(fields[1]));
    p.country = parse_code(fields[2], line_no);
    p.ambiguous = is_ambiguous_code(p.country);
    rows.push_back(std::move(p));
  });
  return rows;
}

// --- AsGeoMap ----------------------------------------------------------------------

const char* to_string(EvidenceSource source) {
  switch (source) {
    case EvidenceSource::prefix: return "prefix";
    case EvidenceSource::infra: return "infra";
    case EvidenceSource::ixp: return "ixp";
  }
  return "?";
}

void AsGeoMap::add_evidence(AsNum asn, const GeoEvidence& geo, EvidenceSource source) {
  auto& entry = entries_[asn];
  entry.asn = asn;
  if (geo.saw_ambiguous) entry.ambiguous_evidence = true;
  if (is_reserved_asn(asn)) return;  // kept present, never geolocated
  for (auto code : geo.countries) {
    entry.countries.insert(code);
    entry.provenance[code].insert(source);
  }
}

void AsGeoMap::ensure_present(AsNum asn) {
  auto& entry = entries_[asn];
  entry.asn = asn;
}

const AsGeoEntry* AsGeoMap::find(AsNum asn) const {
  auto it = entries_.find(asn);
  return it == entries_.end() ? nullptr : &it->second;
}

GeoEvidence AsGeoMap::view(AsNum asn) const {
  const auto* entry = find(asn);
  if (!entry) return {};
  return GeoEvidence{entry->countries, entry->ambiguous_evidence};
}

std::vector<const AsGeoEntry*> AsGeoMap::sorted_entries() const {
  std::vector<const AsGeoEntry*> out;
  out.reserve(entries_.size());
  for (const auto& [asn, entry] : entries_) out.push_back(&entry);
  std::sort(out.begin(), out.end(),
            [](const AsGeoEntry* a, const AsGeoEntry* b) { return a->asn < b->asn; });
  return out;
}

std::string AsGeoMap::render_jsonl() const {
  std::ostringstream out;
  for (const auto* entry : sorted_entries()) {
    nlohmann::json j;
    j["asn"] = entry->asn;
    auto countries = nlohmann::json::array();
    for (auto code : entry->countries) countries.push_back(code.str());
    j["countries"] = std::move(countries);
    nlohmann::json prov = nlohmann::json::object();
    for (const auto& [code, sources] : entry->provenance) {
      auto tags = nlohmann::json::array();
      for (auto s : sources) tags.push_back(to_string(s));
      prov[code.str()] = std::move(tags);
    }
    j["provenance"] = std::move(prov);
    if (entry->ambiguous_evidence) j["ambiguous_evidence"] = true;
    out << j.dump() << '\n';
  }
  return out.str();
}

AsGeoMap AsGeoMap::parse_jsonl(const std::string& text) {
  AsGeoMap map;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto trimmed = trim(line);
    if (trimmed.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(trimmed, nullptr, false);
    if (j.is_discarded())
      throw ParseError("line " + std::to_string(line_no) + ": bad JSON in AS geolocation map");
    AsGeoEntry entry;
    entry.asn = j.at("asn").get<AsNum>();
    entry.ambiguous_evidence = j.value("ambiguous_evidence", false);
    for (const auto& code : j.at("countries")) entry.countries.insert(cc(code.get<std::string>()));
    if (j.contains("provenance")) {
      for (auto it = j["provenance"].begin(); it != j["provenance"].end(); ++it) {
        auto code = cc(it.key());
        for (const auto& tag : it.value()) {
          std::string t = tag.get<std::string>();
          EvidenceSource s = t == "prefix"  ? EvidenceSource::prefix
                             : t == "infra" ? EvidenceSource::infra
                                            : EvidenceSource::ixp;
          entry.provenance[code].insert(s);
        }
      }
    }
    map.entries_[entry.asn] = std::move(entry);
  }
  return map;
}

AsGeoMap AsGeoMap::load_jsonl(const std::string& path) { return parse_jsonl(read_file(path)); }

AsGeoMap build_as_geo(const std::vector<PrefixGeoEvidence>& prefix_geo,
                      const std::vector<InfraIpRecord>& infra,
                      const std::vector<IxpParticipant>& ixp) {
  AsGeoMap map;
  for (const auto& pg : prefix_geo) map.add_evidence(pg.asn, pg.geo, EvidenceSource::prefix);
  for (const auto& rec : infra) {
    if (rec.asn == kUnknownAs) continue;
    map.add_evidence(rec.asn, rec.geo, EvidenceSource::infra);
  }
  for (const auto& p : ixp) {
    GeoEvidence geo;
    if (p.ambiguous)
      geo.saw_ambiguous = true;
    else
      geo.countries.insert(p.country);
    map.add_evidence(p.asn, geo, EvidenceSource::ixp);
  }
  return map;
}

AsGeoMap merge(const AsGeoMap& a, const AsGeoMap& b) {
  AsGeoMap out;
  for (const AsGeoMap* side : {&a, &b}) {
    for (const auto* entry : side->sorted_entries()) {
      out.ensure_present(entry->asn);
      for (const auto& [code, sources] : entry->provenance) {
        for (auto s : sources) {
          GeoEvidence geo;
          geo.countries.insert(code);
          out.add_evidence(entry->asn, geo, s);
        }
      }
      if (entry->ambiguous_evidence) {
        GeoEvidence geo;
        geo.saw_ambiguous = true;
        out.add_evidence(entry->asn, geo, EvidenceSource::prefix);
      }
    }
  }
  return out;
}

GeoStats compute_geo_stats(const AsGeoMap& map) {
  GeoStats stats;
  stats.total_ases = map.size();
  std::size_t multi_sum = 0;
  for (const auto* entry : map.sorted_entries()) {
    std::size_t n = entry->countries.size();
    ++stats.countries_histogram[n];
    if (n == 0) ++stats.unknown_ases;
    if (n > 1) {
      ++stats.multi_country_ases;
      multi_sum += n;
    }
  }
  if (stats.total_ases > 0)
    stats.multi_country_fraction = double(stats.multi_country_ases) / double(stats.total_ases);
  if (stats.multi_country_ases > 0)
    stats.avg_multi_set_size = double(multi_sum) / double(stats.multi_country_ases);
  return stats;
}

std::string render_cdf_csv(const GeoStats& stats) {
  std::ostringstream out;
  out << "countries,as_count,cumulative_fraction\n";
  std::size_t cumulative = 0;
  for (const auto& [n, count] : stats.countries_histogram) {
    cumulative += count;
    double frac = stats.total_ases ? double(cumulative) / double(stats.total_ases) : 0.0;
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", frac);
    out << n << ',' << count << ',' << buf << '\n';
  }
  return out.str();
}

}  // namespace detour
