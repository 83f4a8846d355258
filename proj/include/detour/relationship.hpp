#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>

#include "detour/types.hpp"

namespace detour {

/// Business relationship between two ASes, read in the a->b direction.
enum class Relation { p2p, p2c, c2p };

/// AS relationship edges (CAIDA serial-1 style input).
class RelationshipDb {
 public:
  /// Lines `asn|asn|relation`, relation -1 = p2c, 0 = p2p; `#` comments.
  static RelationshipDb load_serial1(const std::string& path);
  static RelationshipDb parse_serial1(const std::string& text);

  /// Stores both directions: p2c(a,b) implies c2p(b,a); p2p is symmetric.
  void add(AsNum a, AsNum b, Relation rel);
  std::optional<Relation> relation(AsNum a, AsNum b) const;
  std::size_t edge_count() const { return edges_.size() / 2; }

 private:
  static std::uint64_t key(AsNum a, AsNum b) { return (std::uint64_t(a) << 32) | b; }
  std::unordered_map<std::uint64_t, Relation> edges_;
};

}  // namespace detour
