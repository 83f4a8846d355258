#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace detour {

using AsNum = std::uint32_t;

/// Marker substituted for AS_SET path segments; it never geolocates.
inline constexpr AsNum kUnknownAs = 0;

/// Reserved/private ASNs never receive geolocation evidence.
inline constexpr bool is_reserved_asn(AsNum asn) {
  return asn == 0 || (asn >= 64512 && asn <= 65534) || asn >= 4200000000u;
}

// Error taxonomy, mapped to CLI exit codes (1/2/3) in the tool front end.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InternalError : std::logic_error {
  using std::logic_error::logic_error;
};

/// IPv4 address, host byte order.
struct Ipv4 {
  std::uint32_t v = 0;
  auto operator<=>(const Ipv4&) const = default;
};

Ipv4 parse_ipv4(std::string_view text);
std::string to_string(Ipv4 ip);
inline bool looks_like_ipv6(std::string_view text) {
  return text.find(':') != std::string_view::npos;
}

/// IPv4 CIDR block. `base` has host bits zeroed.
struct Prefix {
  Ipv4 base;
  std::uint8_t length = 0;

  std::uint32_t first() const { return base.v; }
  std::uint32_t last() const {
    return length == 0 ? 0xffffffffu : base.v | (0xffffffffu >> length << (32 - length) >> (32 - length));
  }
  bool contains(Ipv4 ip) const { return ip.v >= first() && ip.v <= last(); }
  auto operator<=>(const Prefix&) const = default;
};

/// Parses "a.b.c.d/len". Rejects host bits set beyond the mask.
Prefix parse_prefix(std::string_view text);
/// Same, but masks stray host bits instead of rejecting (MRT decode path).
Prefix make_prefix_masked(Ipv4 base, std::uint8_t length);
std::string to_string(const Prefix& p);

/// ISO-3166 alpha-2 code, packed.
struct CountryCode {
  std::array<char, 2> c{{'?', '?'}};

  static std::optional<CountryCode> parse(std::string_view text);
  std::string str() const { return std::string(c.data(), 2); }
  auto operator<=>(const CountryCode&) const = default;
};

/// MaxMind-style ambiguous pseudo-codes: stripped at ingestion, flagged.
bool is_ambiguous_code(CountryCode code);

/// Set of country codes attached to an AS or prefix. Empty means unknown.
/// Ambiguous pseudo-codes are rejected here; callers strip and flag them.
class CountrySet {
 public:
  CountrySet() = default;
  CountrySet(std::initializer_list<CountryCode> codes);

  void insert(CountryCode code);
  void merge(const CountrySet& other);
  bool contains(CountryCode code) const;
  bool empty() const { return codes_.empty(); }
  std::size_t size() const { return codes_.size(); }
  auto begin() const { return codes_.begin(); }
  auto end() const { return codes_.end(); }
  bool operator==(const CountrySet&) const = default;
  auto operator<=>(const CountrySet&) const = default;

 private:
  std::vector<CountryCode> codes_;  // sorted, unique
};

/// Convenience for tests and fixtures: "US" -> CountryCode, throws on junk.
CountryCode cc(std::string_view text);

// --- Sampling epochs ---------------------------------------------------

/// One sampling epoch is eight hours.
inline constexpr std::int64_t kEpochSeconds = 28800;
inline constexpr std::int64_t kDaySeconds = 86400;

/// Half-open 8-hour buckets since window_start. Throws on negative offset.
std::int64_t epoch_of(std::int64_t snapshot_time, std::int64_t window_start);

/// Absolute UTC day index (used by the prefix-ownership rule).
inline std::int64_t day_of(std::int64_t snapshot_time) {
  return snapshot_time / kDaySeconds;
}

// --- Hash support -------------------------------------------------------

inline void hash_combine(std::size_t& seed, std::size_t value) {
  seed ^= value + 0x9e3779b97f4a7c15ull + (seed << 6) + (seed >> 2);
}

}  // namespace detour

template <>
struct std::hash<detour::Ipv4> {
  std::size_t operator()(const detour::Ipv4& ip) const noexcept {
    return std::hash<std::uint32_t>{}(ip.v);
  }
};

template <>
struct std::hash<detour::Prefix> {
  std::size_t operator()(const detour::Prefix& p) const noexcept {
    std::size_t h = std::hash<std::uint32_t>{}(p.base.v);
    detour::hash_combine(h, p.length);
    return h;
  }
};
