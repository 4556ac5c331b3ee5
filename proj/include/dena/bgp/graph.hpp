/*
 * Copyright 2026 The DENA Simulator Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef DENA_BGP_GRAPH_HPP_
#define DENA_BGP_GRAPH_HPP_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace dena::bgp
{

using AsId = std::uint32_t;

enum class Rel : std::uint8_t
{
  ProviderOf,  ///< a provides transit to b
  Peer
};

struct AsEdge
{
  AsId a = 0;
  AsId b = 0;
  Rel rel = Rel::Peer;
};

/// AS-level relationship graph. Nodes get dense indices in insertion order;
/// every algorithm works on indices and breaks ties on AS ids.
class AsGraph
{
public:
  /// Throws ConfigError on a self edge or a second, different relationship
  /// for the same pair. Repeating an identical edge is a no-op.
  void add_edge(AsId a, AsId b, Rel rel);

  /// Adds an isolated AS (or returns the existing index).
  std::size_t add_node(AsId as);

  std::size_t size() const noexcept { return ids_.size(); }
  AsId id(std::size_t i) const { return ids_[i]; }
  std::optional<std::size_t> index(AsId as) const;
  /// Throws ConfigError for an unknown AS.
  std::size_t index_of(AsId as) const;

  const std::vector<std::uint32_t> & customers(std::size_t i) const { return customers_[i]; }
  const std::vector<std::uint32_t> & providers(std::size_t i) const { return providers_[i]; }
  const std::vector<std::uint32_t> & peers(std::size_t i) const { return peers_[i]; }
  std::size_t degree(std::size_t i) const
  {
    return customers_[i].size() + providers_[i].size() + peers_[i].size();
  }

  bool is_stub(std::size_t i) const { return customers_[i].empty(); }
  bool is_multihomed_stub(std::size_t i) const
  {
    return customers_[i].empty() && providers_[i].size() >= 2;
  }
  std::vector<std::size_t> multihomed_stubs() const;

  /// Relationship of b as seen from a, if adjacent.
  enum class Neighbor : std::uint8_t { Customer, Peer, Provider };
  std::optional<Neighbor> relation(std::size_t a, std::size_t b) const;

  std::vector<AsEdge> edges() const;

private:
  std::vector<AsId> ids_;
  std::unordered_map<AsId, std::size_t> index_;
  std::vector<std::vector<std::uint32_t>> customers_;
  std::vector<std::vector<std::uint32_t>> providers_;
  std::vector<std::vector<std::uint32_t>> peers_;
};

/// CAIDA serial-1: `a|b|r`, r = -1 (a provides to b) or 0 (peers); `#`
/// starts a comment line. Throws ParseError with the line number.
AsGraph load_topology(std::istream & in, const std::string & source = "<topology>");
/// Throws ConfigError when the file cannot be opened.
AsGraph load_topology_file(const std::string & path);
void write_topology(std::ostream & out, const AsGraph & graph);

struct TopologyStats
{
  std::size_t n_ases = 0;
  std::size_t n_edges = 0;
  std::size_t n_stubs = 0;
  std::size_t n_multihomed_stubs = 0;
  std::map<std::size_t, std::size_t> degree_histogram;  ///< degree -> count
};

TopologyStats topology_stats(const AsGraph & graph);

/// Tiered synthetic Internet: a peering clique of tier-1 ASes, transit ASes
/// buying from tier-1 or older transit ASes and peering among themselves,
/// and stubs buying from one to three transit or tier-1 providers.
struct SynthParams
{
  std::size_t n_ases = 2000;
  std::size_t tier1 = 12;
  double transit_share = 0.12;
  double transit_peers = 4.0;   ///< mean peering links per transit AS
  double multihomed_share = 0.6;
  double stub_on_tier1 = 0.1;   ///< chance a stub provider is tier-1
  std::uint64_t seed = 1;

  void validate() const;
};

AsGraph synthesize_topology(const SynthParams & params);

}  // namespace dena::bgp

#endif  // DENA_BGP_GRAPH_HPP_
