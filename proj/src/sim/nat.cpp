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

#include "dena/sim/nat.hpp"

#include "dena/error.hpp"

namespace dena::sim
{

NatState::NatState(NatConfig cfg) : cfg_(cfg), next_port_(cfg.first_port)
{
  if (cfg_.public_addr == 0) {
    throw ConfigError("NAT needs a public address");
  }
}

std::optional<FiveTuple> NatState::public_of(const FiveTuple & t) const
{
  const Key k{t.src_addr, t.src_port, t.dst_addr, t.dst_port, t.protocol};
  auto it = out_.find(k);
  if (it == out_.end()) {
    return std::nullopt;
  }
  FiveTuple pub = t;
  pub.src_addr = cfg_.public_addr;
  pub.src_port = it->second.public_port;
  return pub;
}

SimPacket NatState::outbound(SimPacket pkt, std::int64_t now)
{
  Key k;
  if (pkt.encap.empty()) {
    const auto & t = pkt.tuple;
    k = Key{t.src_addr, t.src_port, t.dst_addr, t.dst_port, t.protocol};
  } else {
    const auto & h = pkt.encap.back();
    if (h.kind != EncapKind::IpTunnel) {
      throw ConfigError("NAT sees a non-IP outer header");
    }
    k = Key{h.endpoint_src, 0, h.endpoint_dst, 0, kTunnelProto};
  }
  auto it = out_.find(k);
  if (it == out_.end() || now - it->second.last_used > cfg_.idle_timeout_ms) {
    if (it != out_.end()) {
      in_.erase(Key{cfg_.public_addr, it->second.public_port, k.remote_addr, k.remote_port,
                    k.protocol});
      out_.erase(it);
    }
    std::uint16_t port = 0;
    if (k.protocol != kTunnelProto) {
      if (next_port_ > 0xFFFF) {
        throw ConfigError("NAT ran out of ports");
      }
      port = static_cast<std::uint16_t>(next_port_++);
    }
    it = out_.emplace(k, Mapping{port, now}).first;
    in_[Key{cfg_.public_addr, port, k.remote_addr, k.remote_port, k.protocol}] = k;
  }
  it->second.last_used = now;
  if (pkt.encap.empty()) {
    pkt.tuple.src_addr = cfg_.public_addr;
    pkt.tuple.src_port = it->second.public_port;
  } else {
    pkt.encap.back().endpoint_src = cfg_.public_addr;
  }
  return pkt;
}

SimPacket NatState::inbound(SimPacket pkt, std::int64_t now)
{
  Key pub;
  if (pkt.encap.empty()) {
    const auto & t = pkt.tuple;
    pub = Key{t.dst_addr, t.dst_port, t.src_addr, t.src_port, t.protocol};
  } else {
    const auto & h = pkt.encap.back();
    pub = Key{h.endpoint_dst, 0, h.endpoint_src, 0, kTunnelProto};
  }
  auto it = in_.find(pub);
  if (it == in_.end()) {
    throw NoMapping();
  }
  auto m = out_.find(it->second);
  if (m == out_.end() || now - m->second.last_used > cfg_.idle_timeout_ms) {
    throw NoMapping();
  }
  const Key & priv = it->second;
  if (pkt.encap.empty()) {
    pkt.tuple.dst_addr = priv.local_addr;
    pkt.tuple.dst_port = priv.local_port;
  } else {
    pkt.encap.back().endpoint_dst = priv.local_addr;
  }
  return pkt;
}

SimPacket nat_forward(NatState & nat, SimPacket pkt, Direction dir, std::int64_t now)
{
  return dir == Direction::Outbound ? nat.outbound(std::move(pkt), now)
                                    : nat.inbound(std::move(pkt), now);
}

}  // namespace dena::sim
