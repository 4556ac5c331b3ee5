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

#include "dena/bgp/graph.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <string_view>

#include "dena/error.hpp"
#include "dena/random.hpp"

namespace dena::bgp
{

std::size_t AsGraph::add_node(AsId as)
{
  auto it = index_.find(as);
  if (it != index_.end()) {
    return it->second;
  }
  const std::size_t i = ids_.size();
  ids_.push_back(as);
  index_.emplace(as, i);
  customers_.emplace_back();
  providers_.emplace_back();
  peers_.emplace_back();
  return i;
}

std::optional<AsGraph::Neighbor> AsGraph::relation(std::size_t a, std::size_t b) const
{
  const auto has = [](const std::vector<std::uint32_t> & v, std::size_t x) {
    return std::find(v.begin(), v.end(), x) != v.end();
  };
  if (has(customers_[a], b)) {
    return Neighbor::Customer;
  }
  if (has(providers_[a], b)) {
    return Neighbor::Provider;
  }
  if (has(peers_[a], b)) {
    return Neighbor::Peer;
  }
  return std::nullopt;
}

void AsGraph::add_edge(AsId a, AsId b, Rel rel)
{
  if (a == b) {
    throw ConfigError("self edge on AS " + std::to_string(a));
  }
  const std::size_t ia = add_node(a);
  const std::size_t ib = add_node(b);
  const auto existing = relation(ia, ib);
  const Neighbor want = rel == Rel::Peer ? Neighbor::Peer : Neighbor::Customer;
  if (existing) {
    if (*existing == want) {
      return;
    }
    throw ConfigError("conflicting relationships for AS " + std::to_string(a) + " and AS " +
                      std::to_string(b));
  }
  if (rel == Rel::Peer) {
    peers_[ia].push_back(static_cast<std::uint32_t>(ib));
    peers_[ib].push_back(static_cast<std::uint32_t>(ia));
  } else {
    customers_[ia].push_back(static_cast<std::uint32_t>(ib));
    providers_[ib].push_back(static_cast<std::uint32_t>(ia));
  }
}

std::optional<std::size_t> AsGraph::index(AsId as) const
{
  auto it = index_.find(as);
  if (it == index_.end()) {
    return std::nullopt;
  }
  return it->second;
}

std::size_t AsGraph::index_of(AsId as) const
{
  auto i = index(as);
  if (!i) {
    throw ConfigError("unknown AS " + std::to_string(as));
  }
  return *i;
}

std::vector<std::size_t> AsGraph::multihomed_stubs() const
{
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < size(); ++i) {
    if (is_multihomed_stub(i)) {
      out.push_back(i);
    }
  }
  return out;
}

std::vector<AsEdge> AsGraph::edges() const
{
  std::vector<AsEdge> out;
  for (std::size_t i = 0; i < size(); ++i) {
    for (auto c : customers_[i]) {
      out.push_back({ids_[i], ids_[c], Rel::ProviderOf});
    }
    for (auto p : peers_[i]) {
      if (ids_[i] < ids_[p]) {
        out.push_back({ids_[i], ids_[p], Rel::Peer});
      }
    }
  }
  std::sort(out.begin(), out.end(), [](const AsEdge & x, const AsEdge & y) {
    return std::tie(x.a, x.b) < std::tie(y.a, y.b);
  });
  return out;
}

namespace
{

std::string_view trim(std::string_view s)
{
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) {
    return {};
  }
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template<typename T>
bool parse_int(std::string_view s, T & out)
{
  s = trim(s);
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size() && !s.empty();
}

}  // namespace

AsGraph load_topology(std::istream & in, const std::string & source)
{
  AsGraph g;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string_view text = trim(raw);
    if (text.empty() || text.front() == '#') {
      continue;
    }
    std::vector<std::string_view> f;
    std::size_t start = 0;
    while (true) {
      const auto bar = text.find('|', start);
      f.push_back(text.substr(start, bar - start));
      if (bar == std::string_view::npos) {
        break;
      }
      start = bar + 1;
    }
    if (f.size() != 3) {
      throw ParseError(source, line, "expected a|b|rel");
    }
    AsId a = 0;
    AsId b = 0;
    int r = 0;
    if (!parse_int(f[0], a) || !parse_int(f[1], b)) {
      throw ParseError(source, line, "bad AS number");
    }
    if (!parse_int(f[2], r) || (r != -1 && r != 0)) {
      throw ParseError(source, line, "relationship must be -1 or 0");
    }
    try {
      g.add_edge(a, b, r == 0 ? Rel::Peer : Rel::ProviderOf);
    } catch (const ConfigError & e) {
      throw ParseError(source, line, e.what());
    }
  }
  return g;
}

AsGraph load_topology_file(const std::string & path)
{
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open topology file '" + path + "'");
  }
  return load_topology(in, path);
}

void write_topology(std::ostream & out, const AsGraph & graph)
{
  out << "# a|b|rel, -1: a provides transit to b, 0: peers\n";
  for (const auto & e : graph.edges()) {
    out << e.a << '|' << e.b << '|' << (e.rel == Rel::Peer ? 0 : -1) << '\n';
  }
}

TopologyStats topology_stats(const AsGraph & graph)
{
  TopologyStats s;
  s.n_ases = graph.size();
  for (std::size_t i = 0; i < graph.size(); ++i) {
    s.n_edges += graph.customers(i).size() + graph.peers(i).size();
    ++s.degree_histogram[graph.degree(i)];
    if (graph.is_stub(i)) {
      ++s.n_stubs;
      if (graph.is_multihomed_stub(i)) {
        ++s.n_multihomed_stubs;
      }
    }
  }
  // peer edges were counted from both ends
  std::size_t peer_ends = 0;
  for (std::size_t i = 0; i < graph.size(); ++i) {
    peer_ends += graph.peers(i).size();
  }
  s.n_edges -= peer_ends / 2;
  return s;
}

void SynthParams::validate() const
{
  if (tier1 < 2 || n_ases < tier1 + 4) {
    throw ConfigError("synthetic topology needs at least two tier-1 ASes and some stubs");
  }
  if (!(transit_share > 0.0 && transit_share < 1.0) || !(multihomed_share >= 0.0 && multihomed_share <= 1.0) ||
      !(stub_on_tier1 >= 0.0 && stub_on_tier1 <= 1.0) || transit_peers < 0.0) {
    throw ConfigError("synthetic topology shares out of range");
  }
}

AsGraph synthesize_topology(const SynthParams & p)
{
  p.validate();
  Rng rng(derive_seed(p.seed, {0x5E7}));
  AsGraph g;
  const std::size_t n_transit = std::max<std::size_t>(
    1, static_cast<std::size_t>(static_cast<double>(p.n_ases) * p.transit_share));
  const std::size_t first_transit = p.tier1;
  const std::size_t first_stub = std::min(p.n_ases, first_transit + n_transit);
  const auto as_of = [](std::size_t k) { return static_cast<AsId>(k + 1); };
  for (std::size_t k = 0; k < p.n_ases; ++k) {
    g.add_node(as_of(k));
  }
  for (std::size_t a = 0; a < p.tier1; ++a) {
    for (std::size_t b = a + 1; b < p.tier1; ++b) {
      g.add_edge(as_of(a), as_of(b), Rel::Peer);
    }
  }
  // Providers always have a smaller id, so the customer cone is acyclic.
  const auto connect = [&](std::size_t k, std::size_t n_prov, std::size_t pool_end, double tier1_bias) {
    std::size_t added = 0;
    for (int guard = 0; added < n_prov && guard < 64; ++guard) {
      const bool top = pool_end <= p.tier1 || rng.bernoulli(tier1_bias);
      const std::size_t lo = top ? 0 : p.tier1;
      const std::size_t hi = top ? p.tier1 : pool_end;
      const std::size_t prov = lo + rng.below(hi - lo);
      if (!g.relation(k, prov)) {
        g.add_edge(as_of(prov), as_of(k), Rel::ProviderOf);
        ++added;
      }
    }
  };
  for (std::size_t k = first_transit; k < first_stub; ++k) {
    connect(k, 1 + rng.below(3), k, 0.5);
  }
  const std::size_t n_peer_links =
    static_cast<std::size_t>(p.transit_peers * static_cast<double>(n_transit) / 2.0);
  for (std::size_t e = 0; e < n_peer_links && n_transit > 1; ++e) {
    const std::size_t a = first_transit + rng.below(n_transit);
    const std::size_t b = first_transit + rng.below(n_transit);
    if (a != b && !g.relation(a, b)) {
      g.add_edge(as_of(a), as_of(b), Rel::Peer);
    }
  }
  for (std::size_t k = first_stub; k < p.n_ases; ++k) {
    const bool multi = rng.bernoulli(p.multihomed_share);
    const std::size_t n_prov = multi ? 2 + (rng.bernoulli(0.25) ? 1 : 0) : 1;
    connect(k, n_prov, first_stub, p.stub_on_tier1);
  }
  return g;
}

}  // namespace dena::bgp
