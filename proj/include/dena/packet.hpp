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

#ifndef DENA_PACKET_HPP_
#define DENA_PACKET_HPP_

#include <compare>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace dena
{

using Addr = std::uint32_t;

constexpr Addr make_addr(std::uint8_t a, std::uint8_t b, std::uint8_t c, std::uint8_t d) noexcept
{
  return (Addr{a} << 24) | (Addr{b} << 16) | (Addr{c} << 8) | Addr{d};
}

std::string addr_to_string(Addr a);

namespace proto
{
constexpr std::uint8_t kIcmp = 1;
constexpr std::uint8_t kTcp = 6;
constexpr std::uint8_t kUdp = 17;
}  // namespace proto

/// Flow identity. Ports are part of the key so hosts sharing one NAT address
/// stay distinguishable.
struct FiveTuple
{
  Addr src_addr = 0;
  Addr dst_addr = 0;
  std::uint16_t src_port = 0;
  std::uint16_t dst_port = 0;
  std::uint8_t protocol = 0;

  friend auto operator<=>(const FiveTuple &, const FiveTuple &) = default;

  /// The same flow seen from the other direction.
  FiveTuple reversed() const noexcept
  {
    return FiveTuple{dst_addr, src_addr, dst_port, src_port, protocol};
  }

  std::string to_string() const;
};

enum class EncapKind : std::uint8_t { IpTunnel, FiaOverlay };

struct EncapHeader
{
  EncapKind kind = EncapKind::IpTunnel;
  Addr endpoint_src = 0;
  Addr endpoint_dst = 0;
  std::uint8_t fia_path_id = 0;  ///< meaningful for FiaOverlay only

  friend bool operator==(const EncapHeader &, const EncapHeader &) = default;
};

constexpr std::size_t kMaxEncapDepth = 2;

struct SimPacket
{
  FiveTuple tuple;
  std::uint8_t ttl = 64;
  std::uint16_t ipid = 0;
  std::vector<std::uint8_t> payload;
  std::vector<EncapHeader> encap;  ///< innermost first
  std::uint64_t seq_no = 0;        ///< harness bookkeeping only

  friend bool operator==(const SimPacket &, const SimPacket &) = default;
};

inline FiveTuple flow_key(const SimPacket & pkt) noexcept { return pkt.tuple; }

/// Push an outer header. Throws DepthExceeded at depth 2.
SimPacket encapsulate(SimPacket pkt, const EncapHeader & hdr);

/// Pop the outermost header. Throws NotEncapsulated on a plain packet.
std::pair<SimPacket, EncapHeader> decapsulate(SimPacket pkt);

}  // namespace dena

#endif  // DENA_PACKET_HPP_
