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

// Slow reference for single-prefix route selection. Every AS keeps a full
// AS path; rounds of export-filtered, loop-checked relaxation run until no
// AS changes its choice. Nothing here shares code with the library.

#ifndef DENA_TESTS_ROUTE_ORACLE_HPP_
#define DENA_TESTS_ROUTE_ORACLE_HPP_

#include <algorithm>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "dena/bgp/graph.hpp"
#include "dena/bgp/routing.hpp"
#include "dena/random.hpp"

namespace dena::testing
{

struct OracleRoute
{
  std::vector<std::size_t> path;  // this AS first, origin last
  bgp::LearnedFrom from = bgp::LearnedFrom::Origin;
  bool legitimate = true;
};

inline int rank(bgp::LearnedFrom f)
{
  switch (f) {
    case bgp::LearnedFrom::Origin: return 0;
    case bgp::LearnedFrom::Customer: return 1;
    case bgp::LearnedFrom::Peer: return 2;
    default: return 3;
  }
}

inline std::vector<std::optional<OracleRoute>> oracle_routes(const bgp::AsGraph & g,
                                                              std::span<const bgp::Announcement> anns)
{
  const std::size_t n = g.size();
  std::vector<std::optional<OracleRoute>> best(n);
  std::vector<bool> origin(n, false);
  for (const auto & a : anns) {
    const std::size_t i = g.index_of(a.announcer);
    best[i] = OracleRoute{{i}, bgp::LearnedFrom::Origin, a.legitimate};
    origin[i] = true;
  }
  const auto learn = [&](std::size_t v, std::size_t u) {
    const auto rel = g.relation(v, u);
    if (*rel == bgp::AsGraph::Neighbor::Customer) {
      return bgp::LearnedFrom::Customer;
    }
    return *rel == bgp::AsGraph::Neighbor::Peer ? bgp::LearnedFrom::Peer : bgp::LearnedFrom::Provider;
  };
  for (std::size_t round = 0; round < 4 * n + 8; ++round) {
    bool changed = false;
    for (std::size_t v = 0; v < n; ++v) {
      if (origin[v]) {
        continue;
      }
      std::optional<OracleRoute> pick;
      std::tuple<int, std::size_t, bgp::AsId> pick_key{};
      std::vector<std::uint32_t> nbrs;
      for (const auto * l : {&g.customers(v), &g.peers(v), &g.providers(v)}) {
        nbrs.insert(nbrs.end(), l->begin(), l->end());
      }
      for (std::size_t u : nbrs) {
        if (!best[u]) {
          continue;
        }
        const OracleRoute & r = *best[u];
        const bool u_sees_v_as_customer = *g.relation(u, v) == bgp::AsGraph::Neighbor::Customer;
        const bool exportable = r.from == bgp::LearnedFrom::Origin ||
                                r.from == bgp::LearnedFrom::Customer || u_sees_v_as_customer;
        if (!exportable || std::find(r.path.begin(), r.path.end(), v) != r.path.end()) {
          continue;
        }
        const auto from = learn(v, u);
        const std::tuple<int, std::size_t, bgp::AsId> key{rank(from), r.path.size(), g.id(u)};
        if (!pick || key < pick_key) {
          OracleRoute cand;
          cand.path.push_back(v);
          cand.path.insert(cand.path.end(), r.path.begin(), r.path.end());
          cand.from = from;
          cand.legitimate = r.legitimate;
          pick = std::move(cand);
          pick_key = key;
        }
      }
      const bool differs = pick.has_value() != best[v].has_value() ||
                           (pick && (pick->path != best[v]->path || pick->from != best[v]->from));
      if (differs) {
        best[v] = std::move(pick);
        changed = true;
      }
    }
    if (!changed) {
      return best;
    }
  }
  return best;  // no fixed point; callers compare and fail
}

/// Random small graph with an acyclic provider hierarchy and random AS ids.
inline bgp::AsGraph random_small_graph(Rng & rng, std::size_t max_nodes = 8)
{
  const std::size_t n = 2 + rng.below(max_nodes - 1);
  std::vector<bgp::AsId> ids;
  while (ids.size() < n) {
    const auto id = static_cast<bgp::AsId>(1 + rng.below(200));
    if (std::find(ids.begin(), ids.end(), id) == ids.end()) {
      ids.push_back(id);
    }
  }
  bgp::AsGraph g;
  for (auto id : ids) {
    g.add_node(id);
  }
  const double density = 0.25 + 0.5 * rng.uniform();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (!rng.bernoulli(density)) {
        continue;
      }
      // earlier ids sit higher in the hierarchy
      g.add_edge(ids[i], ids[j], rng.bernoulli(0.7) ? bgp::Rel::ProviderOf : bgp::Rel::Peer);
    }
  }
  return g;
}

/// Compares the library's converged routes with the oracle; returns a
/// description of the first mismatch or an empty string.
inline std::string compare_with_oracle(const bgp::AsGraph & g, std::span<const bgp::Announcement> anns)
{
  const auto want = oracle_routes(g, anns);
  const auto got = bgp::propagate_prefix(g, anns);
  for (std::size_t v = 0; v < g.size(); ++v) {
    const std::string where = "AS " + std::to_string(g.id(v)) + ": ";
    if (want[v].has_value() != got[v].valid()) {
      return where + "route presence differs";
    }
    if (!want[v]) {
      continue;
    }
    const auto & w = *want[v];
    const auto & r = got[v];
    if (r.length != w.path.size() - 1 || r.from != w.from || r.origin != w.path.back() ||
        r.legitimate != w.legitimate || (w.path.size() > 1 && r.next_hop != w.path[1])) {
      return where + "expected length " + std::to_string(w.path.size() - 1) + " via " +
             std::to_string(g.id(w.path.size() > 1 ? w.path[1] : v)) + ", got length " +
             std::to_string(r.length) + " via " + std::to_string(g.id(r.next_hop));
    }
    const auto ap = bgp::as_path(g, got, v);
    std::vector<bgp::AsId> wp;
    for (auto x : w.path) {
      wp.push_back(g.id(x));
    }
    if (ap != wp) {
      return where + "as_path differs";
    }
  }
  return {};
}

}  // namespace dena::testing

#endif  // DENA_TESTS_ROUTE_ORACLE_HPP_
