#include "detour/relationship.hpp"

#include <charconv>
#include <sstream>

#include "detour/io_util.hpp"

namespace detour {

RelationshipDb RelationshipDb::load_serial1(const std::string& path) {
  return parse_serial1(read_file(path));
}

RelationshipDb RelationshipDb::parse_serial1(const std::string& text) {
  RelationshipDb db;
  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    auto fields = split(line, '|');
    if (fields.size() < 3)
      throw ParseError("line " + std::to_string(line_no) + ": expected asn|asn|relation");
    auto parse_asn = [&](std::string_view t) {
      AsNum v = 0;
      auto s = trim(t);
      auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc{} || ptr != s.data() + s.size())
        throw ParseError("line " + std::to_string(line_no) + ": bad ASN: " + std::string(t));
      return v;
    };
    AsNum a = parse_asn(fields[0]);
    AsNum b = parse_asn(fields[1]);
    auto rel_text = trim(fields[2]);
    if (rel_text == "-1")
      db.add(a, b, Relation::p2c);
    else if (rel_text == "0")
      db.add(a, b, Relation::p2p);
    else
      throw ParseError("line " + std::to_string(line_no) + ": bad relation: " + std::string(rel_text));
  }
  return db;
}

void RelationshipDb::add(AsNum a, AsNum b, Relation rel) {
  edges_[key(a, b)] = rel;
  switch (rel) {
    case Relation::p2p: edges_[key(b, a)] = Relation::p2p; break;
    case Relation::p2c: edges_[key(b, a)] = Relation::c2p; break;
    case Relation::c2p: edges_[key(b, a)] = Relation::p2c; break;
  }
}

std::optional<Relation> RelationshipDb::relation(AsNum a, AsNum b) const {
  auto it = edges_.find(key(a, b));
  if (it == edges_.end()) return std::nullopt;
  return it->second;
}

}  // namespace detour
