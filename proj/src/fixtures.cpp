#include "detour/fixtures.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include <json.hpp>

#include "detour/io_util.hpp"
#include "detour/mrt_writer.hpp"
#include "detour/rib.hpp"

namespace detour {

const char* to_string(DetourClass klass) {
  switch (klass) {
    case DetourClass::persistent: return "persistent";
    case DetourClass::transient: return "transient";
    case DetourClass::flash: return "flash";
  }
  return "?";
}

namespace {

/// Address layout: AS index k owns the /16 block (k+256)<<16, split into one
/// equal power-of-two slice per country; /24s are handed out inside slices.
struct AsLayout {
  std::uint32_t block_base = 0;
  std::uint32_t slice_size = 0;
  std::size_t country_count = 0;
  std::vector<std::uint32_t> next24;  // per-slice allocation cursor

  std::uint32_t slice_base(std::size_t c) const {
    return block_base + std::uint32_t(c) * slice_size;
  }
  std::uint32_t slice_capacity() const { return slice_size >> 8; }

  Prefix alloc24(std::size_t c, const std::string& what) {
    if (next24[c] >= slice_capacity())
      throw ConfigError("scenario exceeds /24 capacity of country slice while allocating " + what);
    Prefix p{Ipv4{slice_base(c) + next24[c] * 256}, 24};
    ++next24[c];
    return p;
  }

  Ipv4 router_ip() const { return Ipv4{block_base + 250}; }
  Ipv4 peer_ip(std::size_t nth) const { return Ipv4{block_base + 1 + std::uint32_t(nth)}; }
};

AsLayout make_layout(std::size_t as_index, std::size_t countries) {
  if (countries == 0 || countries > 16)
    throw ConfigError("scenario AS must have between 1 and 16 countries");
  AsLayout layout;
  layout.block_base = std::uint32_t(as_index + 256) << 16;
  std::uint32_t slice = 0x10000;
  while (slice / 2 >= 0x10000 / countries && slice / 2 >= 256) slice /= 2;
  while (slice * countries > 0x10000) slice /= 2;
  layout.slice_size = slice;
  layout.country_count = countries;
  layout.next24.assign(countries, 0);
  return layout;
}

std::int64_t max_epoch_run(std::vector<std::int64_t> epochs) {
  std::sort(epochs.begin(), epochs.end());
  epochs.erase(std::unique(epochs.begin(), epochs.end()), epochs.end());
  std::int64_t best = 0, run = 0;
  for (std::size_t i = 0; i < epochs.size(); ++i) {
    run = (i > 0 && epochs[i] == epochs[i - 1] + 1) ? run + 1 : 1;
    best = std::max(best, run);
  }
  return best;
}

struct RouteLine {
  Ipv4 peer_ip;
  AsNum peer_asn;
  Prefix prefix;
  std::vector<AsNum> path;
};

}  // namespace

GeneratedBundle generate_bundle(const Scenario& sc, const std::string& out_dir) {
  if (sc.epoch_count == 0) throw ConfigError("scenario needs at least one epoch");
  if (sc.ases.empty() || sc.peers.empty()) throw ConfigError("scenario needs ASes and peers");
  for (const auto& p : sc.peers)
    if (p.as_index >= sc.ases.size()) throw ConfigError("peer references unknown AS index");

  GeneratedBundle bundle;
  bundle.dir = out_dir;
  ensure_directory(out_dir + "/ribs");
  ensure_directory(out_dir + "/geo");
  ensure_directory(out_dir + "/rel");

  // Layouts and peer addresses.
  std::vector<AsLayout> layouts;
  layouts.reserve(sc.ases.size());
  for (std::size_t k = 0; k < sc.ases.size(); ++k)
    layouts.push_back(make_layout(k, sc.ases[k].countries.size()));

  std::vector<Ipv4> peer_ips(sc.peers.size());
  std::map<std::size_t, std::size_t> peers_in_as;  // as index -> peers so far
  for (std::size_t i = 0; i < sc.peers.size(); ++i) {
    auto as_index = sc.peers[i].as_index;
    peer_ips[i] = layouts[as_index].peer_ip(peers_in_as[as_index]++);
    bundle.peers.emplace_back(peer_ips[i], sc.ases[as_index].asn);
  }

  // Relationship DB, both for the realizability oracle and the output file.
  RelationshipDb rel;
  std::ostringstream rel_text;
  rel_text << "# <provider-as>|<customer-as>|-1 or <peer-as>|<peer-as>|0\n";
  for (const auto& e : sc.edges) {
    if (e.a >= sc.ases.size() || e.b >= sc.ases.size())
      throw ConfigError("peering edge references unknown AS index");
    AsNum a = sc.ases[e.a].asn, b = sc.ases[e.b].asn;
    switch (e.rel) {
      case Relation::p2p:
        rel.add(a, b, Relation::p2p);
        rel_text << a << '|' << b << "|0\n";
        break;
      case Relation::p2c:
        rel.add(a, b, Relation::p2c);
        rel_text << a << '|' << b << "|-1\n";
        break;
      case Relation::c2p:
        rel.add(b, a, Relation::p2c);
        rel_text << b << '|' << a << "|-1\n";
        break;
    }
  }

  // Baseline prefixes: one per country slice plus extras in the home slice.
  std::vector<std::vector<Prefix>> baselines(sc.ases.size());
  for (std::size_t k = 0; k < sc.ases.size(); ++k) {
    for (std::size_t c = 0; c < sc.ases[k].countries.size(); ++c)
      baselines[k].push_back(layouts[k].alloc24(c, "baseline of AS " + std::to_string(sc.ases[k].asn)));
    for (std::size_t extra = 1; extra < sc.baseline_prefixes_per_as; ++extra)
      baselines[k].push_back(layouts[k].alloc24(0, "baseline of AS " + std::to_string(sc.ases[k].asn)));
  }

  // Planted detours: realizability check via the rule oracle, prefix
  // allocation in the owner's home slice, ground-truth bookkeeping.
  std::vector<Prefix> plant_prefix(sc.detours.size());
  for (std::size_t d = 0; d < sc.detours.size(); ++d) {
    const auto& plant = sc.detours[d];
    if (plant.path.size() < 3)
      throw ConfigError("planted detour '" + plant.name + "' has fewer than 3 path hops");
    if (plant.peer_indices.empty())
      throw ConfigError("planted detour '" + plant.name + "' lists no peers");
    if (plant.epochs.empty())
      throw ConfigError("planted detour '" + plant.name + "' lists no epochs");
    for (auto e : plant.epochs)
      if (e < 0 || std::size_t(e) >= sc.epoch_count)
        throw ConfigError("planted detour '" + plant.name + "' has an epoch outside the window");
    std::set<std::size_t> distinct(plant.path.begin(), plant.path.end());
    if (distinct.size() != plant.path.size())
      throw ConfigError("planted detour '" + plant.name + "' repeats an AS on the path");
    for (auto idx : plant.path)
      if (idx >= sc.ases.size())
        throw ConfigError("planted detour '" + plant.name + "' references unknown AS index");
    for (auto pi : plant.peer_indices) {
      if (pi >= sc.peers.size())
        throw ConfigError("planted detour '" + plant.name + "' references unknown peer");
      if (sc.peers[pi].as_index != plant.path.front())
        throw ConfigError("planted detour '" + plant.name + "' peer is not in the path-front AS");
    }

    OracleInput oin;
    oin.rel = &rel;
    oin.peer_asn = sc.ases[plant.path.front()].asn;
    for (auto idx : plant.path) {
      oin.path.push_back(sc.ases[idx].asn);
      OracleHop hop;
      for (auto code : sc.ases[idx].countries) hop.countries.insert(code);
      oin.hops.push_back(std::move(hop));
    }
    OracleVerdict verdict = oracle_detect(oin);
    if (verdict.outcome == Outcome::filtered_by_peering && !sc.allow_filtered_plants)
      throw ConfigError("planted detour '" + plant.name + "' is filtered by its peering edges");
    if (verdict.outcome != Outcome::definite_detour &&
        verdict.outcome != Outcome::filtered_by_peering)
      throw ConfigError("planted detour '" + plant.name + "' is not a definite detour (" +
                        std::string(to_string(verdict.outcome)) + ")");

    std::size_t owner = plant.path.back();
    plant_prefix[d] = layouts[owner].alloc24(0, "detour prefix of '" + plant.name + "'");

    ExpectedDetour expected;
    expected.name = plant.name;
    expected.epochs = plant.epochs;
    std::sort(expected.epochs.begin(), expected.epochs.end());
    expected.home_country = verdict.home_country;
    expected.origin_asn = verdict.origin_asn;
    expected.destination_asns = verdict.destination_asns;
    expected.destination_countries = verdict.destination_countries;
    expected.return_asn = verdict.return_asn;
    expected.prefix_origin_asn = oin.path.back();
    expected.transient = max_epoch_run(plant.epochs) <= 9;
    expected.flash = plant.epochs.size() == 1 && plant.peer_indices.size() == 1;
    expected.expected_outcome = verdict.outcome;
    for (auto pi : plant.peer_indices)
      expected.keys.push_back(DetourKey{peer_ips[pi], plant_prefix[d], oin.path});
    if (verdict.outcome == Outcome::definite_detour) {
      bundle.expected_detoured_entries += plant.epochs.size() * plant.peer_indices.size();
      bundle.expected_unique_detours += plant.peer_indices.size();
    }
    bundle.detours.push_back(std::move(expected));
  }

  // Sub-threshold announcements exercising the ownership filter.
  std::vector<Prefix> transient_prefixes;
  std::vector<std::size_t> transient_owner;
  std::size_t transient_epochs = std::min<std::size_t>(15, sc.epoch_count);
  for (std::size_t i = 0; i < sc.transient_announcements; ++i) {
    std::size_t owner = i % sc.ases.size();
    transient_prefixes.push_back(
        layouts[owner].alloc24(0, "transient announcement " + std::to_string(i)));
    transient_owner.push_back(owner);
    bundle.rejected_ownership_prefixes[to_string(transient_prefixes.back())] = sc.ases[owner].asn;
  }

  // --- RIB files, one per epoch ------------------------------------------
  auto route_lines_for_epoch = [&](std::size_t epoch) {
    std::vector<RouteLine> lines;
    for (std::size_t i = 0; i < sc.peers.size(); ++i) {
      AsNum peer_asn = sc.ases[sc.peers[i].as_index].asn;
      auto emit = [&](const Prefix& prefix, std::size_t owner_index) {
        RouteLine line{peer_ips[i], peer_asn, prefix, {}};
        line.path.push_back(peer_asn);
        if (owner_index != sc.peers[i].as_index) line.path.push_back(sc.ases[owner_index].asn);
        lines.push_back(std::move(line));
      };
      for (std::size_t k = 0; k < sc.ases.size(); ++k)
        for (const auto& prefix : baselines[k]) emit(prefix, k);
      for (std::size_t d = 0; d < sc.detours.size(); ++d) {
        const auto& plant = sc.detours[d];
        bool sees_plant = std::find(plant.peer_indices.begin(), plant.peer_indices.end(), i) !=
                              plant.peer_indices.end() &&
                          std::find(plant.epochs.begin(), plant.epochs.end(),
                                    std::int64_t(epoch)) != plant.epochs.end();
        if (sees_plant) {
          RouteLine line{peer_ips[i], peer_asn, plant_prefix[d], {}};
          for (auto idx : plant.path) line.path.push_back(sc.ases[idx].asn);
          lines.push_back(std::move(line));
        } else {
          emit(plant_prefix[d], plant.path.back());
        }
      }
      if (i == 0 && epoch < transient_epochs) {
        for (std::size_t t = 0; t < transient_prefixes.size(); ++t)
          emit(transient_prefixes[t], transient_owner[t]);
      }
    }
    return lines;
  };

  char name[64];
  for (std::size_t epoch = 0; epoch < sc.epoch_count; ++epoch) {
    std::int64_t t = sc.window_start + std::int64_t(epoch) * kEpochSeconds;
    auto lines = route_lines_for_epoch(epoch);
    std::snprintf(name, sizeof(name), "%s/ribs/rib_%03zu.%s", out_dir.c_str(), epoch,
                  sc.mrt_format ? "mrt" : "txt");
    if (sc.mrt_format) {
      MrtBuilder builder{std::uint32_t(t)};
      std::vector<MrtPeerSpec> peer_specs;
      std::map<std::pair<Ipv4, AsNum>, std::uint16_t> peer_index;
      for (std::size_t i = 0; i < sc.peers.size(); ++i) {
        peer_index[{peer_ips[i], sc.ases[sc.peers[i].as_index].asn}] = std::uint16_t(i);
        peer_specs.push_back(MrtPeerSpec{peer_ips[i], sc.ases[sc.peers[i].as_index].asn, false});
      }
      builder.peers(std::move(peer_specs));
      std::map<Prefix, std::vector<MrtEntrySpec>> by_prefix;
      for (const auto& line : lines) {
        auto entry = mrt_entry(peer_index.at({line.peer_ip, line.peer_asn}), line.path);
        entry.originated_time = std::uint32_t(t);
        by_prefix[line.prefix].push_back(std::move(entry));
      }
      for (auto& [prefix, entries] : by_prefix)
        builder.add_prefix(MrtPrefixSpec{prefix, std::move(entries)});
      write_file(name, builder.build());
    } else {
      std::ostringstream out;
      for (const auto& line : lines) {
        out << t << '|' << to_string(line.peer_ip) << '|' << line.peer_asn << '|'
            << to_string(line.prefix) << '|';
        for (std::size_t i = 0; i < line.path.size(); ++i) {
          if (i) out << ' ';
          out << line.path[i];
        }
        out << '\n';
      }
      write_file(name, out.str());
    }
    bundle.rib_files.push_back(name);
  }

  // --- Geolocation inputs ---------------------------------------------------
  {
    std::ostringstream db;
    for (std::size_t k = 0; k < sc.ases.size(); ++k) {
      for (std::size_t c = 0; c < sc.ases[k].countries.size(); ++c) {
        std::uint32_t lo = layouts[k].slice_base(c);
        db << to_string(Ipv4{lo}) << ',' << to_string(Ipv4{lo + layouts[k].slice_size - 1}) << ','
           << sc.ases[k].countries[c].str() << '\n';
      }
    }
    bundle.ip_country_db = out_dir + "/geo/ip_country_db.csv";
    write_file(bundle.ip_country_db, db.str());
  }
  {
    std::ostringstream infra, ip_as;
    for (std::size_t k = 0; k < sc.ases.size(); ++k) {
      Ipv4 router = layouts[k].router_ip();
      infra << to_string(router) << ",iplane," << sc.ases[k].countries.front().str() << ",1.0\n";
      if (sc.ases[k].countries.size() > 1)
        infra << to_string(router) << ",crowd," << sc.ases[k].countries[1].str() << ",0.95\n";
      // Low-confidence crowd report; always dropped by the 0.90 rule.
      infra << to_string(router) << ",crowd," << sc.ases[k].countries.front().str() << ",0.50\n";
      ip_as << to_string(router) << ',' << sc.ases[k].asn << '\n';
    }
    bundle.infra_ips = out_dir + "/geo/infra_ips.csv";
    bundle.ip_to_as = out_dir + "/geo/ip_to_as.csv";
    write_file(bundle.infra_ips, infra.str());
    write_file(bundle.ip_to_as, ip_as.str());
  }
  {
    std::ostringstream ixp;
    for (std::size_t k = 0; k < sc.ases.size(); k += 3) {
      ixp << sc.ases[k].asn << ",IXP-" << sc.ases[k].countries.front().str() << '-' << k << ','
          << sc.ases[k].countries.front().str() << '\n';
    }
    bundle.ixp = out_dir + "/geo/ixp.csv";
    write_file(bundle.ixp, ixp.str());
  }
  bundle.as_rel = out_dir + "/rel/as_rel.txt";
  write_file(bundle.as_rel, rel_text.str());

  // --- Per-country ground truth ---------------------------------------------
  {
    std::map<Ipv4, std::uint64_t> unique_by_peer;
    std::map<Ipv4, CountryCode> country_by_peer;
    std::map<Ipv4, AsNum> as_by_peer;
    for (std::size_t i = 0; i < sc.peers.size(); ++i) {
      unique_by_peer[peer_ips[i]] = 0;
      country_by_peer[peer_ips[i]] = sc.ases[sc.peers[i].as_index].countries.front();
      as_by_peer[peer_ips[i]] = sc.ases[sc.peers[i].as_index].asn;
    }
    for (std::size_t d = 0; d < sc.detours.size(); ++d) {
      if (bundle.detours[d].expected_outcome != Outcome::definite_detour) continue;
      for (auto pi : sc.detours[d].peer_indices) ++unique_by_peer[peer_ips[pi]];
    }
    for (const auto& [ip, count] : unique_by_peer) {
      auto& tally = bundle.per_country_raw[country_by_peer[ip]];
      tally.detours += count;
      ++tally.peers;
    }
    // Representative peer per AS: most unique detours, ties to lowest IP.
    std::map<AsNum, Ipv4> winner;
    for (const auto& [ip, count] : unique_by_peer) {
      AsNum asn = as_by_peer[ip];
      auto it = winner.find(asn);
      if (it == winner.end()) {
        winner[asn] = ip;
        continue;
      }
      std::uint64_t best = unique_by_peer[it->second];
      if (count > best || (count == best && ip < it->second)) it->second = ip;
    }
    for (const auto& [ip, count] : unique_by_peer) {
      auto& tally = bundle.per_country_dedup[country_by_peer[ip]];
      ++tally.peers;
      if (winner.at(as_by_peer[ip]) == ip) tally.detours += count;
    }
  }

  // --- Manifest and runnable config ------------------------------------------
  {
    nlohmann::json m;
    m["format_version"] = 1;
    m["prng"] = "mt19937_64";
    m["seed"] = sc.seed;
    m["window_start"] = sc.window_start;
    m["window_end"] = sc.window_start + std::int64_t(sc.epoch_count) * kEpochSeconds;
    m["epoch_count"] = sc.epoch_count;
    m["rib_format"] = sc.mrt_format ? "mrt" : "text";
    auto ases = nlohmann::json::array();
    for (std::size_t k = 0; k < sc.ases.size(); ++k) {
      auto countries = nlohmann::json::array();
      for (auto code : sc.ases[k].countries) countries.push_back(code.str());
      ases.push_back({{"asn", sc.ases[k].asn},
                      {"countries", std::move(countries)},
                      {"block", to_string(Prefix{Ipv4{layouts[k].block_base}, 16})}});
    }
    m["ases"] = std::move(ases);
    auto peers = nlohmann::json::array();
    for (std::size_t i = 0; i < sc.peers.size(); ++i) {
      peers.push_back({{"ip", to_string(peer_ips[i])},
                       {"asn", sc.ases[sc.peers[i].as_index].asn},
                       {"country", sc.ases[sc.peers[i].as_index].countries.front().str()}});
    }
    m["peers"] = std::move(peers);
    auto detours = nlohmann::json::array();
    for (const auto& d : bundle.detours) {
      auto keys = nlohmann::json::array();
      for (const auto& key : d.keys)
        keys.push_back({{"peer_ip", to_string(key.peer_ip)},
                        {"prefix", to_string(key.prefix)},
                        {"as_path", key.as_path}});
      auto countries = nlohmann::json::array();
      for (auto code : d.destination_countries) countries.push_back(code.str());
      detours.push_back({{"name", d.name},
                         {"keys", std::move(keys)},
                         {"epochs", d.epochs},
                         {"home_country", d.home_country.str()},
                         {"origin_asn", d.origin_asn},
                         {"destination_asns", d.destination_asns},
                         {"destination_countries", std::move(countries)},
                         {"return_asn", d.return_asn},
                         {"prefix_origin_asn", d.prefix_origin_asn},
                         {"transient", d.transient},
                         {"flash", d.flash},
                         {"expected_outcome", to_string(d.expected_outcome)}});
    }
    m["detours"] = std::move(detours);
    auto tally_json = [](const std::map<CountryCode, CountryTally>& tallies) {
      nlohmann::json out = nlohmann::json::object();
      for (const auto& [code, tally] : tallies)
        out[code.str()] = {{"detours", tally.detours}, {"peers", tally.peers}};
      return out;
    };
    m["per_country_raw"] = tally_json(bundle.per_country_raw);
    m["per_country_dedup"] = tally_json(bundle.per_country_dedup);
    m["expected_detoured_entries"] = bundle.expected_detoured_entries;
    m["expected_unique_detours"] = bundle.expected_unique_detours;
    nlohmann::json rejects = nlohmann::json::object();
    for (const auto& [prefix, asn] : bundle.rejected_ownership_prefixes) rejects[prefix] = asn;
    m["rejected_ownership_prefixes"] = std::move(rejects);

    bundle.manifest_file = out_dir + "/manifest.json";
    write_file(bundle.manifest_file, m.dump(2) + "\n");
  }
  {
    std::ostringstream conf;
    conf << "window_start = " << sc.window_start << '\n';
    conf << "window_end = " << sc.window_start + std::int64_t(sc.epoch_count) * kEpochSeconds << '\n';
    for (std::size_t epoch = 0; epoch < sc.epoch_count; ++epoch) {
      std::snprintf(name, sizeof(name), "ribs/rib_%03zu.%s", epoch, sc.mrt_format ? "mrt" : "txt");
      conf << "rib = " << name << '\n';
    }
    conf << "ip_country_db = geo/ip_country_db.csv\n";
    conf << "infra_ips = geo/infra_ips.csv\n";
    conf << "ip_to_as = geo/ip_to_as.csv\n";
    conf << "ixp = geo/ixp.csv\n";
    conf << "as_rel = rel/as_rel.txt\n";
    bundle.config_file = out_dir + "/bundle.conf";
    write_file(bundle.config_file, conf.str());
  }
  return bundle;
}

Scenario make_random_scenario(const RandomScenarioSpec& spec) {
  std::mt19937_64 rng(spec.seed);
  Scenario sc;
  sc.seed = spec.seed;
  sc.epoch_count = spec.epoch_count;
  sc.baseline_prefixes_per_as = spec.baseline_prefixes_per_as;
  sc.transient_announcements = 2;
  sc.mrt_format = spec.mrt_format;

  static const char* kPool[] = {"US", "BR", "RU", "DE", "JP", "IN", "FR", "GB"};
  std::size_t pool_n = 4 + draw(rng, 5);  // 4..8 countries in play
  std::vector<CountryCode> pool;
  for (std::size_t i = 0; i < pool_n; ++i) pool.push_back(cc(kPool[i]));

  // Peer ASes: single home country, spread over the pool.
  for (std::size_t i = 0; i < spec.peer_count; ++i)
    sc.ases.push_back(ScenarioAs{AsNum(100 + i), {pool[i % pool.size()]}});
  // Transit ASes: mostly single-country, some dual.
  for (std::size_t i = 0; i < spec.transit_as_count; ++i) {
    ScenarioAs as;
    as.asn = AsNum(1000 + i);
    CountryCode home = pool[draw(rng, pool.size())];
    as.countries.push_back(home);
    if (draw(rng, 5) == 0) {
      CountryCode second = pool[draw(rng, pool.size())];
      if (second != home) as.countries.push_back(second);
    }
    sc.ases.push_back(std::move(as));
  }

  for (std::size_t i = 0; i < spec.peer_count; ++i) sc.peers.push_back(ScenarioPeer{i});
  // A twin peer in the first AS keeps representative-peer selection honest.
  sc.peers.push_back(ScenarioPeer{0});
  std::size_t twin_peer = sc.peers.size() - 1;

  auto home_of = [&](std::size_t as_index) { return sc.ases[as_index].countries.front(); };
  auto contains_home = [&](std::size_t as_index, CountryCode home) {
    for (auto code : sc.ases[as_index].countries)
      if (code == home) return true;
    return false;
  };
  auto excludes_home = [&](std::size_t as_index, CountryCode home) {
    return !contains_home(as_index, home);
  };

  auto build_path = [&](std::size_t peer_index) -> std::vector<std::size_t> {
    std::size_t peer_as = sc.peers[peer_index].as_index;
    CountryCode home = home_of(peer_as);
    std::vector<std::size_t> home_side, foreign_side;
    for (std::size_t k = spec.peer_count; k < sc.ases.size(); ++k) {
      if (contains_home(k, home))
        home_side.push_back(k);
      else if (excludes_home(k, home) && !sc.ases[k].countries.empty())
        foreign_side.push_back(k);
    }
    if (home_side.size() < 2 || foreign_side.empty()) return {};

    std::vector<std::size_t> path{peer_as};
    std::set<std::size_t> used{peer_as};
    auto pick = [&](const std::vector<std::size_t>& from) -> std::optional<std::size_t> {
      for (int attempt = 0; attempt < 16; ++attempt) {
        std::size_t k = from[draw(rng, from.size())];
        if (used.insert(k).second) return k;
      }
      return std::nullopt;
    };

    if (draw(rng, 2) == 0) {  // optional home transit before the detour origin
      if (auto h = pick(home_side)) path.push_back(*h);
    }
    std::size_t foreign_hops = 1 + draw(rng, 2);
    for (std::size_t f = 0; f < foreign_hops; ++f) {
      auto hop = pick(foreign_side);
      if (!hop) break;
      path.push_back(*hop);
    }
    if (path.back() == peer_as || contains_home(path.back(), home)) return {};
    auto ret = pick(home_side);
    if (!ret) return {};
    path.push_back(*ret);
    return path;
  };

  auto plant = [&](DetourClass klass, std::size_t index) {
    for (int attempt = 0; attempt < 64; ++attempt) {
      std::size_t peer_index = draw(rng, spec.peer_count);
      auto path = build_path(peer_index);
      if (path.empty()) continue;
      PlantedDetour d;
      d.name = std::string(to_string(klass)) + "_" + std::to_string(index);
      d.klass = klass;
      d.peer_indices.push_back(peer_index);
      d.path = std::move(path);
      std::int64_t e = std::int64_t(sc.epoch_count);
      switch (klass) {
        case DetourClass::persistent:
          for (std::int64_t i = 0; i < e; ++i) d.epochs.push_back(i);
          break;
        case DetourClass::transient: {
          std::int64_t len = 1 + std::int64_t(draw(rng, 9));
          std::int64_t start = std::int64_t(draw(rng, std::uint64_t(std::max<std::int64_t>(1, e - len))));
          for (std::int64_t i = 0; i < len; ++i) d.epochs.push_back(start + i);
          break;
        }
        case DetourClass::flash:
          d.epochs.push_back(std::int64_t(draw(rng, std::uint64_t(e))));
          break;
      }
      sc.detours.push_back(std::move(d));
      return true;
    }
    return false;
  };

  std::size_t index = 0;
  for (std::size_t i = 0; i < spec.persistent_plants; ++i)
    if (!plant(DetourClass::persistent, index)) throw ConfigError("could not place persistent plant");
    else ++index;
  for (std::size_t i = 0; i < spec.transient_plants; ++i)
    if (!plant(DetourClass::transient, index)) throw ConfigError("could not place transient plant");
    else ++index;
  for (std::size_t i = 0; i < spec.flash_plants; ++i)
    if (!plant(DetourClass::flash, index)) throw ConfigError("could not place flash plant");
    else ++index;

  // One single-epoch detour seen by two peers of the same AS: transient but
  // not flash, and exercises the twin-peer dedup.
  for (int attempt = 0; attempt < 64; ++attempt) {
    auto path = build_path(0);
    if (path.empty()) continue;
    PlantedDetour d;
    d.name = "twin_single_epoch";
    d.klass = DetourClass::transient;
    d.peer_indices = {0, twin_peer};
    d.path = std::move(path);
    d.epochs.push_back(std::int64_t(draw(rng, std::uint64_t(sc.epoch_count))));
    sc.detours.push_back(std::move(d));
    break;
  }
  return sc;
}

}  // namespace detour
