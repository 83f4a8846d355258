#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "detour/engine.hpp"
#include "detour/oracle.hpp"
#include "detour/relationship.hpp"
#include "detour/types.hpp"

namespace detour {

// Synthetic dataset bundles with planted ground truth. Generation is
// deterministic for a fixed seed (mt19937_64, recorded in the manifest).

enum class DetourClass { persistent, transient, flash };
const char* to_string(DetourClass klass);

struct ScenarioAs {
  AsNum asn = 0;
  std::vector<CountryCode> countries;  // front = home country
};

struct ScenarioPeer {
  std::size_t as_index = 0;
};

struct PlantedDetour {
  std::string name;
  std::vector<std::size_t> peer_indices;  // every peer must sit in path front AS
  std::vector<std::size_t> path;          // AS indices; front = peer AS, back = prefix origin
  std::vector<std::int64_t> epochs;
  DetourClass klass = DetourClass::persistent;
};

struct PeeringEdgeSpec {
  std::size_t a = 0, b = 0;  // AS indices
  Relation rel = Relation::p2p;
};

struct Scenario {
  std::uint64_t seed = 0;
  std::int64_t window_start = 0;
  std::size_t epoch_count = 93;
  std::vector<ScenarioAs> ases;
  std::vector<ScenarioPeer> peers;
  std::vector<PlantedDetour> detours;
  std::vector<PeeringEdgeSpec> edges;
  std::size_t baseline_prefixes_per_as = 1;   // per AS, beyond one per country
  std::size_t transient_announcements = 0;    // prefixes failing the ownership rule
  bool mrt_format = false;
  bool allow_filtered_plants = false;  // accept plants eaten by the peering filter
};

/// Ground truth for one planted detour (one key per seeing peer).
struct ExpectedDetour {
  std::string name;
  std::vector<DetourKey> keys;
  std::vector<std::int64_t> epochs;
  CountryCode home_country;
  AsNum origin_asn = 0;
  std::vector<AsNum> destination_asns;
  CountrySet destination_countries;
  AsNum return_asn = 0;
  AsNum prefix_origin_asn = 0;
  bool transient = false;
  bool flash = false;
  Outcome expected_outcome = Outcome::definite_detour;
};

struct CountryTally {
  std::uint64_t detours = 0;
  std::uint64_t peers = 0;
};

struct GeneratedBundle {
  std::string dir;
  std::vector<std::string> rib_files;
  std::string ip_country_db, infra_ips, ip_to_as, ixp, as_rel, config_file, manifest_file;

  std::vector<ExpectedDetour> detours;
  std::map<CountryCode, CountryTally> per_country_raw;
  std::map<CountryCode, CountryTally> per_country_dedup;
  std::uint64_t expected_detoured_entries = 0;
  std::uint64_t expected_unique_detours = 0;
  std::vector<std::pair<Ipv4, AsNum>> peers;                 // ip, asn
  std::map<std::string, AsNum> rejected_ownership_prefixes;  // prefix -> origin
};

/// Writes the on-disk dataset bundle plus manifest.json and a ready-to-run
/// CLI config. Unrealizable plants raise ConfigError naming the plant.
GeneratedBundle generate_bundle(const Scenario& scenario, const std::string& out_dir);

/// Knobs for seeded random scenarios used by the acceptance suite.
struct RandomScenarioSpec {
  std::uint64_t seed = 0;
  std::size_t peer_count = 5;
  std::size_t transit_as_count = 18;
  std::size_t epoch_count = 93;
  std::size_t persistent_plants = 20;
  std::size_t transient_plants = 20;
  std::size_t flash_plants = 10;
  std::size_t baseline_prefixes_per_as = 1;
  bool mrt_format = false;
};

Scenario make_random_scenario(const RandomScenarioSpec& spec);

/// Deterministic bounded draw (modulo reduction; bias is irrelevant here).
inline std::uint64_t draw(std::mt19937_64& rng, std::uint64_t bound) {
  return bound ? rng() % bound : 0;
}

}  // namespace detour
