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

#ifndef DENA_BGP_ROUTING_HPP_
#define DENA_BGP_ROUTING_HPP_

#include <compare>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <vector>

#include "dena/bgp/graph.hpp"

namespace dena::bgp
{

enum class PrefixLen : std::uint8_t { Short, Slash24 };

struct Prefix
{
  AsId origin_tag = 0;
  PrefixLen length = PrefixLen::Short;

  auto operator<=>(const Prefix &) const = default;
};

struct Announcement
{
  Prefix prefix;
  AsId announcer = 0;
  bool legitimate = true;
};

enum class LearnedFrom : std::uint8_t { Origin, Customer, Peer, Provider };

inline constexpr std::uint32_t kNoRoute = std::numeric_limits<std::uint32_t>::max();

/// Best route of one AS for one prefix. Paths are not stored: every AS uses
/// the route its next hop selected, so following next_hop rebuilds it.
struct Route
{
  std::uint32_t next_hop = kNoRoute;  ///< node index; the node itself at an origin
  std::uint32_t length = 0;           ///< AS-level links to the origin
  LearnedFrom from = LearnedFrom::Origin;
  std::uint32_t origin = kNoRoute;    ///< node index of the announcer
  bool legitimate = true;

  bool valid() const noexcept { return next_hop != kNoRoute; }
};

using PrefixRoutes = std::vector<Route>;  ///< indexed by node

struct RoutingState
{
  std::map<Prefix, PrefixRoutes> table;

  const PrefixRoutes * find(const Prefix & p) const
  {
    auto it = table.find(p);
    return it == table.end() ? nullptr : &it->second;
  }
};

/// Customer > peer > provider, then shorter path, then lowest next-hop AS id.
bool better_route(const AsGraph & graph, const Route & a, const Route & b);

/// Converged routes for a single prefix; all announcements must carry it.
PrefixRoutes propagate_prefix(const AsGraph & graph, std::span<const Announcement> anns);

/// Per-prefix fixed point for every prefix named in anns. Throws ConfigError
/// when anns is empty or names an unknown AS.
RoutingState propagate(const AsGraph & graph, const std::vector<Announcement> & anns);

/// AS path from node to the origin of its route (both ends included); empty
/// when the node has no route.
std::vector<AsId> as_path(const AsGraph & graph, const PrefixRoutes & routes, std::size_t node);

/// True when the path, read from the forwarding AS to the origin, climbs
/// customer-to-provider links, crosses at most one peer link, then descends.
bool valley_free(const AsGraph & graph, std::span<const AsId> path);

struct Resolution
{
  enum class Kind : std::uint8_t { Legit, Hijacked, Unreachable };
  Kind kind = Kind::Unreachable;
  std::vector<AsId> path;  ///< forwarding path actually taken
  AsId adversary = 0;      ///< set when Hijacked
};

/// Hop-by-hop forwarding from src toward the prefixes tagged dst_origin;
/// each hop uses its most specific matching route.
Resolution resolve(const AsGraph & graph, const RoutingState & state, AsId src, AsId dst_origin);

}  // namespace dena::bgp

#endif  // DENA_BGP_ROUTING_HPP_
