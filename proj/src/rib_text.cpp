#include <charconv>
#include <istream>
#include <set>
#include <sstream>
#include <utility>

#include "detour/io_util.hpp"
#include "detour/rib.hpp"

namespace detour {

IngestCounters& IngestCounters::operator+=(const IngestCounters& o) {
  loops_rejected += o.loops_rejected;
  empty_paths_rejected += o.empty_paths_rejected;
  confed_rejected += o.confed_rejected;
  as_set_replaced += o.as_set_replaced;
  v6_skipped += o.v6_skipped;
  skipped_subtypes += o.skipped_subtypes;
  return *this;
}

std::optional<std::vector<AsNum>> normalize_as_path(const std::vector<AsNum>& raw) {
  std::vector<AsNum> path;
  path.reserve(raw.size());
  for (AsNum asn : raw) {
    if (!path.empty() && path.back() == asn) continue;  // prepending
    path.push_back(asn);
  }
  std::set<AsNum> seen;
  for (AsNum asn : path) {
    if (asn == kUnknownAs) continue;
    if (!seen.insert(asn).second) return std::nullopt;  // loop
  }
  return path;
}

std::size_t count_distinct_peers(const std::vector<RouteRecord>& records) {
  std::set<std::pair<std::uint32_t, AsNum>> peers;
  for (const auto& r : records) peers.emplace(r.peer_ip.v, r.peer_asn);
  return peers.size();
}

namespace {

template <typename T>
T parse_uint_field(std::string_view text, const char* what, std::size_t line_no) {
  T value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    throw ParseError("line " + std::to_string(line_no) + ": bad " + what + ": " + std::string(text));
  return value;
}

}  // namespace

RibSnapshot parse_text_rib(const std::string& path, std::int64_t window_start) {
  auto in = open_input(path);
  RibSnapshot snap;
  snap.source_uri = path;
  std::optional<std::int64_t> snapshot_time;

  std::string raw_line;
  std::size_t line_no = 0;
  while (std::getline(*in, raw_line)) {
    ++line_no;
    std::string_view line = trim(raw_line);
    if (line.empty() || line.front() == '#') continue;

    auto fields = split(line, '|');
    if (fields.size() != 5)
      throw ParseError("line " + std::to_string(line_no) + ": expected 5 '|'-separated fields, got " +
                       std::to_string(fields.size()));

    auto time = parse_uint_field<std::int64_t>(trim(fields[0]), "snapshot_time", line_no);
    if (snapshot_time && *snapshot_time != time)
      throw ParseError("line " + std::to_string(line_no) + ": snapshot_time " + std::to_string(time) +
                       " differs from earlier " + std::to_string(*snapshot_time));
    snapshot_time = time;

    auto peer_field = trim(fields[1]);
    auto prefix_field = trim(fields[3]);
    if (looks_like_ipv6(peer_field) || looks_like_ipv6(prefix_field)) {
      ++snap.counters.v6_skipped;
      continue;
    }

    RouteRecord rec;
    rec.snapshot_time = time;
    try {
      rec.epoch = epoch_of(time, window_start);
      rec.peer_ip = parse_ipv4(peer_field);
      rec.prefix = parse_prefix(prefix_field);
    } catch (const ParseError& e) {
      throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
    }
    rec.peer_asn = parse_uint_field<AsNum>(trim(fields[2]), "peer_asn", line_no);

    auto path_field = trim(fields[4]);
    if (path_field.empty())
      throw ParseError("line " + std::to_string(line_no) + ": empty AS path");
    std::vector<AsNum> raw_path;
    for (auto tok : split(path_field, ' ')) {
      if (tok.empty()) continue;
      raw_path.push_back(parse_uint_field<AsNum>(tok, "AS number", line_no));
    }
    if (raw_path.empty())
      throw ParseError("line " + std::to_string(line_no) + ": empty AS path");

    auto normalized = normalize_as_path(raw_path);
    if (!normalized) {
      ++snap.counters.loops_rejected;
      continue;
    }
    rec.as_path = std::move(*normalized);
    rec.origin_asn = rec.as_path.back();
    snap.records.push_back(std::move(rec));
  }

  snap.snapshot_time = snapshot_time.value_or(0);
  snap.peer_count = count_distinct_peers(snap.records);
  return snap;
}

std::string render_text_rib(const RibSnapshot& snapshot) {
  std::ostringstream out;
  for (const auto& r : snapshot.records) {
    out << r.snapshot_time << '|' << to_string(r.peer_ip) << '|' << r.peer_asn << '|'
        << to_string(r.prefix) << '|';
    for (std::size_t i = 0; i < r.as_path.size(); ++i) {
      if (i) out << ' ';
      out << r.as_path[i];
    }
    out << '\n';
  }
  return out.str();
}

void write_text_rib(const std::string& path, const RibSnapshot& snapshot) {
  write_file(path, render_text_rib(snapshot));
}

}  // namespace detour
