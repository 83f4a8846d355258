#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "detour/types.hpp"

namespace detour {

/// Country evidence plus a marker for stripped ambiguous pseudo-codes.
struct GeoEvidence {
  CountrySet countries;
  bool saw_ambiguous = false;

  void merge(const GeoEvidence& other) {
    countries.merge(other.countries);
    saw_ambiguous = saw_ambiguous || other.saw_ambiguous;
  }
};

/// Sorted, non-overlapping IP ranges mapped to countries. Rows carrying
/// ambiguous pseudo-codes stay in the index (they count as coverage) but
/// never contribute a country.
class IpCountryDb {
 public:
  struct Range {
    std::uint32_t lo = 0;
    std::uint32_t hi = 0;
    CountryCode country;
    bool ambiguous = false;
  };

  static IpCountryDb load_csv(const std::string& path);
  /// Rows carry raw codes; ambiguous ones are flagged here. Sorts and
  /// rejects overlapping ranges.
  static IpCountryDb from_rows(std::vector<std::tuple<std::uint32_t, std::uint32_t, CountryCode>> rows);

  struct Hit {
    std::optional<CountryCode> country;  // nullopt when the row was ambiguous
    bool ambiguous = false;
    bool found = false;
  };
  Hit lookup(Ipv4 ip) const;

  /// All countries of ranges overlapping [lo, hi], ambiguous rows flagged.
  GeoEvidence query_interval(std::uint32_t lo, std::uint32_t hi) const;
  /// Sub-intervals of [lo, hi] not covered by any range (fallback input).
  std::vector<std::pair<std::uint32_t, std::uint32_t>> gaps(std::uint32_t lo, std::uint32_t hi) const;

  const std::vector<Range>& ranges() const { return ranges_; }
  bool empty() const { return ranges_.empty(); }

 private:
  std::vector<Range> ranges_;
};

/// Primary geolocation source plus optional fallback consulted only on
/// primary misses.
class GeoDatabase {
 public:
  GeoDatabase() = default;
  explicit GeoDatabase(IpCountryDb primary) : primary_(std::move(primary)) {}
  GeoDatabase(IpCountryDb primary, IpCountryDb fallback)
      : primary_(std::move(primary)), fallback_(std::move(fallback)) {}

  /// Interval-intersection equivalent of unioning per-IP lookups over the
  /// whole prefix.
  GeoEvidence geolocate_prefix(const Prefix& prefix) const;
  GeoEvidence geolocate_ip(Ipv4 ip) const;

  const IpCountryDb& primary() const { return primary_; }
  bool has_fallback() const { return fallback_.has_value(); }

 private:
  IpCountryDb primary_;
  std::optional<IpCountryDb> fallback_;
};

// --- Prefix ownership (15-day rule) --------------------------------------

struct PrefixOwnership {
  Prefix prefix;
  AsNum origin_asn = 0;
  std::set<std::int64_t> days_seen;
};

struct OwnershipResult {
  std::vector<PrefixOwnership> retained;
  std::vector<PrefixOwnership> rejected;  // suspected transients / hijacks
};

/// Accumulates (day, prefix, origin) observations across the RIB corpus.
class OwnershipTracker {
 public:
  void observe(std::int64_t day, const Prefix& prefix, AsNum origin_asn);
  /// Pairs seen on at least `min_days` distinct days are retained.
  OwnershipResult finish(int min_days = 15) const;

 private:
  std::map<std::pair<Prefix, AsNum>, std::set<std::int64_t>> seen_;
};

// --- Longest-prefix-match table -------------------------------------------

/// Global routing table built from ownership-filtered prefixes.
class PrefixTable {
 public:
  void add(const Prefix& prefix, AsNum origin);
  /// AS of the longest matching prefix; multi-origin ties resolve to the
  /// smallest ASN.
  std::optional<AsNum> lookup(Ipv4 ip) const;

  static PrefixTable load_csv(const std::string& path);  // prefix,asn
  std::string render_csv() const;
  std::size_t size() const;

 private:
  // One sorted vector per prefix length; lookups probe /32 down to /0.
  std::array<std::vector<std::pair<std::uint32_t, AsNum>>, 33> by_length_{};
  mutable bool sorted_ = true;
  void ensure_sorted() const;
};

// --- Infrastructure IPs ---------------------------------------------------

/// One row of the infra CSV: ip,source,country,confidence.
struct InfraEvidenceRow {
  Ipv4 ip;
  std::string source;
  CountryCode country;
  bool ambiguous = false;
  double confidence = 1.0;
};

std::vector<InfraEvidenceRow> load_infra_csv(const std::string& path);

/// Crowd-style evidence below this confidence is dropped.
inline constexpr double kInfraConfidenceFloor = 0.90;

/// Union of per-source countries passing the confidence rule plus the
/// database lookup for the address itself.
GeoEvidence geolocate_infra_ip(Ipv4 ip, const std::vector<InfraEvidenceRow>& evidence,
                               const GeoDatabase& db);

/// Exact ip->asn dataset (CAIDA ITDK / iPlane role).
class IpToAsMap {
 public:
  static IpToAsMap load_csv(const std::string& path);  // ip,asn
  void add(Ipv4 ip, AsNum asn);
  std::optional<AsNum> find(Ipv4 ip) const;
  std::size_t size() const { return map_.size(); }

 private:
  std::unordered_map<Ipv4, AsNum> map_;
};

/// Dataset mapping wins; else longest prefix match; else kUnknownAs.
AsNum map_infra_ip_to_as(Ipv4 ip, const IpToAsMap& datasets, const PrefixTable& table);

struct InfraIpRecord {
  Ipv4 ip;
  GeoEvidence geo;
  AsNum asn = kUnknownAs;
};

// --- IXP presence ----------------------------------------------------------

struct IxpParticipant {
  AsNum asn = 0;
  std::string ixp_id;
  CountryCode country;
  bool ambiguous = false;
};

std::vector<IxpParticipant> load_ixp_csv(const std::string& path);  // asn,ixp_id,country_code

// --- AS-to-country map ------------------------------------------------------

enum class EvidenceSource { prefix, infra, ixp };
const char* to_string(EvidenceSource source);

struct AsGeoEntry {
  AsNum asn = 0;
  CountrySet countries;
  std::map<CountryCode, std::set<EvidenceSource>> provenance;
  bool ambiguous_evidence = false;  // stripped pseudo-code evidence existed
};

class AsGeoMap {
 public:
  /// Evidence for reserved/private ASNs is dropped; the AS stays present with
  /// an empty set.
  void add_evidence(AsNum asn, const GeoEvidence& geo, EvidenceSource source);
  void ensure_present(AsNum asn);

  const AsGeoEntry* find(AsNum asn) const;
  /// Empty set for unknown or reserved ASes.
  GeoEvidence view(AsNum asn) const;

  std::size_t size() const { return entries_.size(); }
  /// Entries in ascending ASN order.
  std::vector<const AsGeoEntry*> sorted_entries() const;

  std::string render_jsonl() const;
  static AsGeoMap parse_jsonl(const std::string& text);
  static AsGeoMap load_jsonl(const std::string& path);

 private:
  std::unordered_map<AsNum, AsGeoEntry> entries_;
};

/// Per-prefix country evidence attributed to the announcing AS.
struct PrefixGeoEvidence {
  AsNum asn = 0;
  GeoEvidence geo;
};

/// Union of the three evidence sources per AS.
AsGeoMap build_as_geo(const std::vector<PrefixGeoEvidence>& prefix_geo,
                      const std::vector<InfraIpRecord>& infra,
                      const std::vector<IxpParticipant>& ixp);

/// Per-AS set union of two maps (source-independence checks).
AsGeoMap merge(const AsGeoMap& a, const AsGeoMap& b);

struct GeoStats {
  std::size_t total_ases = 0;
  std::size_t unknown_ases = 0;  // present with empty country set
  std::size_t multi_country_ases = 0;
  double multi_country_fraction = 0.0;
  double avg_multi_set_size = 0.0;
  std::map<std::size_t, std::size_t> countries_histogram;  // set size -> AS count
};

GeoStats compute_geo_stats(const AsGeoMap& map);
/// CDF rows `countries,as_count,cumulative_fraction` for the histogram.
std::string render_cdf_csv(const GeoStats& stats);

}  // namespace detour
