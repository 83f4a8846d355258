#include "detour/types.hpp"

#include <algorithm>
#include <charconv>

namespace detour {

namespace {

std::optional<std::uint32_t> parse_octet(std::string_view text) {
  if (text.empty() || text.size() > 3) return std::nullopt;
  std::uint32_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || value > 255) return std::nullopt;
  return value;
}

}  // namespace

Ipv4 parse_ipv4(std::string_view text) {
  std::uint32_t v = 0;
  std::size_t pos = 0;
  for (int i = 0; i < 4; ++i) {
    std::size_t dot = i < 3 ? text.find('.', pos) : text.size();
    if (dot == std::string_view::npos) throw ParseError("bad IPv4 address: " + std::string(text));
    auto octet = parse_octet(text.substr(pos, dot - pos));
    if (!octet) throw ParseError("bad IPv4 address: " + std::string(text));
    v = (v << 8) | *octet;
    pos = dot + 1;
  }
  return Ipv4{v};
}

std::string to_string(Ipv4 ip) {
  std::string out;
  out.reserve(15);
  for (int shift = 24; shift >= 0; shift -= 8) {
    out += std::to_string((ip.v >> shift) & 0xff);
    if (shift > 0) out += '.';
  }
  return out;
}

Prefix parse_prefix(std::string_view text) {
  auto slash = text.find('/');
  if (slash == std::string_view::npos) throw ParseError("missing /len in prefix: " + std::string(text));
  Ipv4 base = parse_ipv4(text.substr(0, slash));
  std::uint32_t len = 0;
  auto lenstr = text.substr(slash + 1);
  auto [ptr, ec] = std::from_chars(lenstr.data(), lenstr.data() + lenstr.size(), len);
  if (ec != std::errc{} || ptr != lenstr.data() + lenstr.size() || len > 32)
    throw ParseError("bad prefix length: " + std::string(text));
  Prefix p{base, static_cast<std::uint8_t>(len)};
  if (make_prefix_masked(base, p.length).base != base)
    throw ParseError("prefix has host bits set: " + std::string(text));
  return p;
}

Prefix make_prefix_masked(Ipv4 base, std::uint8_t length) {
  std::uint32_t mask = length == 0 ? 0 : 0xffffffffu << (32 - length);
  return Prefix{Ipv4{base.v & mask}, length};
}

std::string to_string(const Prefix& p) {
  return to_string(p.base) + "/" + std::to_string(p.length);
}

std::optional<CountryCode> CountryCode::parse(std::string_view text) {
  if (text.size() != 2) return std::nullopt;
  auto valid = [](char ch) { return (ch >= 'A' && ch <= 'Z') || (ch >= '0' && ch <= '9'); };
  if (!valid(text[0]) || !valid(text[1])) return std::nullopt;
  return CountryCode{{text[0], text[1]}};
}

bool is_ambiguous_code(CountryCode code) {
  static constexpr std::array<std::array<char, 2>, 5> kAmbiguous{
      {{'A', '1'}, {'A', '2'}, {'O', '1'}, {'E', 'U'}, {'A', 'P'}}};
  return std::find(kAmbiguous.begin(), kAmbiguous.end(), code.c) != kAmbiguous.end();
}

CountrySet::CountrySet(std::initializer_list<CountryCode> codes) {
  for (auto code : codes) insert(code);
}

void CountrySet::insert(CountryCode code) {
  if (is_ambiguous_code(code))
    throw InternalError("ambiguous pseudo-code must be stripped before CountrySet insertion: " + code.str());
  auto it = std::lower_bound(codes_.begin(), codes_.end(), code);
  if (it == codes_.end() || *it != code) codes_.insert(it, code);
}

void CountrySet::merge(const CountrySet& other) {
  for (auto code : other) insert(code);
}

bool CountrySet::contains(CountryCode code) const {
  return std::binary_search(codes_.begin(), codes_.end(), code);
}

CountryCode cc(std::string_view text) {
  auto parsed = CountryCode::parse(text);
  if (!parsed) throw ParseError("bad country code: " + std::string(text));
  return *parsed;
}

std::int64_t epoch_of(std::int64_t snapshot_time, std::int64_t window_start) {
  if (snapshot_time < window_start)
    throw ParseError("snapshot_time " + std::to_string(snapshot_time) + " precedes window_start " +
                     std::to_string(window_start));
  return (snapshot_time - window_start) / kEpochSeconds;
}

}  // namespace detour
