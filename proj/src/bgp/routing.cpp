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

#include "dena/bgp/routing.hpp"

#include <algorithm>

#include "dena/error.hpp"

namespace dena::bgp
{

bool better_route(const AsGraph & graph, const Route & a, const Route & b)
{
  if (!b.valid()) {
    return a.valid();
  }
  if (!a.valid()) {
    return false;
  }
  if (a.from != b.from) {
    return static_cast<int>(a.from) < static_cast<int>(b.from);
  }
  if (a.length != b.length) {
    return a.length < b.length;
  }
  return graph.id(a.next_hop) < graph.id(b.next_hop);
}

PrefixRoutes propagate_prefix(const AsGraph & graph, std::span<const Announcement> anns)
{
  const std::size_t n = graph.size();
  PrefixRoutes routes(n);
  std::vector<Route> offer(n);
  std::vector<std::uint32_t> level;
  for (const auto & a : anns) {
    const auto i = static_cast<std::uint32_t>(graph.index_of(a.announcer));
    if (!routes[i].valid()) {
      level.push_back(i);
    }
    routes[i] = Route{i, 0, LearnedFrom::Origin, i, a.legitimate};
  }
  std::sort(level.begin(), level.end());

  // Routes learned from customers climb one level per link.
  std::uint32_t len = 0;
  while (!level.empty()) {
    std::vector<std::uint32_t> next;
    for (auto u : level) {
      for (auto p : graph.providers(u)) {
        if (routes[p].valid()) {
          continue;
        }
        const Route cand{u, len + 1, LearnedFrom::Customer, routes[u].origin, routes[u].legitimate};
        if (!offer[p].valid()) {
          next.push_back(p);
        }
        if (better_route(graph, cand, offer[p])) {
          offer[p] = cand;
        }
      }
    }
    for (auto p : next) {
      routes[p] = offer[p];
    }
    level = std::move(next);
    ++len;
  }

  // One peer link, offered only customer and origin routes.
  std::vector<Route> peer(n);
  for (std::size_t x = 0; x < n; ++x) {
    if (routes[x].valid()) {
      continue;
    }
    for (auto q : graph.peers(x)) {
      const Route & r = routes[q];
      if (!r.valid()) {
        continue;
      }
      const Route cand{q, r.length + 1, LearnedFrom::Peer, r.origin, r.legitimate};
      if (better_route(graph, cand, peer[x])) {
        peer[x] = cand;
      }
    }
  }
  std::uint32_t longest = 0;
  for (std::size_t x = 0; x < n; ++x) {
    if (!routes[x].valid() && peer[x].valid()) {
      routes[x] = peer[x];
    }
    if (routes[x].valid()) {
      longest = std::max(longest, routes[x].length);
    }
  }

  // Everything else descends to customers in order of path length.
  std::vector<std::vector<std::uint32_t>> bucket(longest + 2);
  for (std::uint32_t x = 0; x < n; ++x) {
    if (routes[x].valid()) {
      bucket[routes[x].length].push_back(x);
    }
  }
  std::vector<Route> down(n);
  for (std::uint32_t l = 0; l < bucket.size(); ++l) {
    for (std::size_t k = 0; k < bucket[l].size(); ++k) {
      const std::uint32_t u = bucket[l][k];
      if (!routes[u].valid()) {
        routes[u] = down[u];
      }
      for (auto c : graph.customers(u)) {
        if (routes[c].valid()) {
          continue;
        }
        const Route cand{u, l + 1, LearnedFrom::Provider, routes[u].origin, routes[u].legitimate};
        if (!down[c].valid()) {
          if (bucket.size() <= l + 1) {
            bucket.resize(l + 2);
          }
          bucket[l + 1].push_back(c);
        }
        if (better_route(graph, cand, down[c])) {
          down[c] = cand;
        }
      }
    }
  }
  return routes;
}

RoutingState propagate(const AsGraph & graph, const std::vector<Announcement> & anns)
{
  if (anns.empty()) {
    throw ConfigError("propagate needs at least one announcement");
  }
  std::map<Prefix, std::vector<Announcement>> by_prefix;
  for (const auto & a : anns) {
    graph.index_of(a.announcer);
    by_prefix[a.prefix].push_back(a);
  }
  RoutingState state;
  for (const auto & [prefix, list] : by_prefix) {
    state.table.emplace(prefix, propagate_prefix(graph, list));
  }
  return state;
}

std::vector<AsId> as_path(const AsGraph & graph, const PrefixRoutes & routes, std::size_t node)
{
  std::vector<AsId> path;
  if (!routes[node].valid()) {
    return path;
  }
  std::size_t cur = node;
  while (true) {
    path.push_back(graph.id(cur));
    if (routes[cur].from == LearnedFrom::Origin || path.size() > graph.size()) {
      break;
    }
    cur = routes[cur].next_hop;
  }
  return path;
}

bool valley_free(const AsGraph & graph, std::span<const AsId> path)
{
  // Read from the origin outward: up links, at most one peer link, then
  // only down links.
  bool descending = false;
  for (std::size_t k = path.size(); k > 1; --k) {
    const auto from = graph.index(path[k - 1]);
    const auto to = graph.index(path[k - 2]);
    if (!from || !to) {
      return false;
    }
    const auto rel = graph.relation(*from, *to);
    if (!rel) {
      return false;
    }
    switch (*rel) {
      case AsGraph::Neighbor::Provider:
        if (descending) {
          return false;
        }
        break;
      case AsGraph::Neighbor::Peer:
        if (descending) {
          return false;
        }
        descending = true;
        break;
      case AsGraph::Neighbor::Customer:
        descending = true;
        break;
    }
  }
  return true;
}

Resolution resolve(const AsGraph & graph, const RoutingState & state, AsId src, AsId dst_origin)
{
  Resolution res;
  const PrefixRoutes * specific = state.find(Prefix{dst_origin, PrefixLen::Slash24});
  const PrefixRoutes * coarse = state.find(Prefix{dst_origin, PrefixLen::Short});
  auto cur = graph.index(src);
  if (!cur) {
    return res;
  }
  for (std::size_t steps = 0; steps <= graph.size(); ++steps) {
    res.path.push_back(graph.id(*cur));
    const Route * r = nullptr;
    if (specific && (*specific)[*cur].valid()) {
      r = &(*specific)[*cur];
    } else if (coarse && (*coarse)[*cur].valid()) {
      r = &(*coarse)[*cur];
    }
    if (!r) {
      res.kind = Resolution::Kind::Unreachable;
      return res;
    }
    if (r->from == LearnedFrom::Origin) {
      if (r->legitimate) {
        res.kind = Resolution::Kind::Legit;
      } else {
        res.kind = Resolution::Kind::Hijacked;
        res.adversary = graph.id(*cur);
      }
      return res;
    }
    *cur = r->next_hop;
  }
  res.kind = Resolution::Kind::Unreachable;
  return res;
}

}  // namespace dena::bgp
