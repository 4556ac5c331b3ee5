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
#ifndef DENA_SIM_NAT_HPP_
#define DENA_SIM_NAT_HPP_

#include <cstdint>
#include <map>
#include <optional>

#include "dena/packet.hpp"

namespace dena::sim
{

enum class Direction : std::uint8_t { Outbound, Inbound };

struct NatConfig
{
  Addr public_addr = 0;
  std::uint16_t first_port = 40000;
  std::int64_t idle_timeout_ms = 30000;
};

/// Endpoint-dependent NAT. It rewrites the outermost IP header only: the
/// packet's own tuple when it is plain, the outer tunnel endpoints when it
/// is tunnel-encapsulated (tunnel mappings carry port 0).
class NatState
{
public:
  explicit NatState(NatConfig cfg);

  const NatConfig & config() const noexcept { return cfg_; }

  /// Public tuple that an outbound plain flow is mapped to, if any.
  std::optional<FiveTuple> public_of(const FiveTuple & private_tuple) const;

  std::size_t mappings() const noexcept { return out_.size(); }

  SimPacket outbound(SimPacket pkt, std::int64_t now);

  /// Throws NoMapping when no live mapping matches.
  SimPacket inbound(SimPacket pkt, std::int64_t now);

private:
  struct Key
  {
    Addr local_addr;
    std::uint16_t local_port;
    Addr remote_addr;
    std::uint16_t remote_port;
    std::uint8_t protocol;

    friend auto operator<=>(const Key &, const Key &) = default;
  };
  struct Mapping
  {
    std::uint16_t public_port;
    std::int64_t last_used;
  };

  NatConfig cfg_;
  std::map<Key, Mapping> out_;  // private side key -> public port
  std::map<Key, Key> in_;       // public side key -> private side key
  std::uint32_t next_port_;
};

/// Free-function form of NatState::outbound / inbound.
SimPacket nat_forward(NatState & nat, SimPacket pkt, Direction dir, std::int64_t now);

/// Protocol number used in NAT keys for tunnel packets.
constexpr std::uint8_t kTunnelProto = 4;

}  // namespace dena::sim

#endif  // DENA_SIM_NAT_HPP_
