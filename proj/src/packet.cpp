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

#include "dena/packet.hpp"

#include "dena/error.hpp"

namespace dena
{

std::string addr_to_string(Addr a)
{
  return std::to_string(a >> 24) + "." + std::to_string((a >> 16) & 0xFF) + "." +
         std::to_string((a >> 8) & 0xFF) + "." + std::to_string(a & 0xFF);
}

std::string FiveTuple::to_string() const
{
  return addr_to_string(src_addr) + ":" + std::to_string(src_port) + "->" +
         addr_to_string(dst_addr) + ":" + std::to_string(dst_port) + "/" +
         std::to_string(protocol);
}

SimPacket encapsulate(SimPacket pkt, const EncapHeader & hdr)
{
  if (pkt.encap.size() >= kMaxEncapDepth) {
    throw DepthExceeded();
  }
  pkt.encap.push_back(hdr);
  return pkt;
}

std::pair<SimPacket, EncapHeader> decapsulate(SimPacket pkt)
{
  if (pkt.encap.empty()) {
    throw NotEncapsulated();
  }
  EncapHeader outer = pkt.encap.back();
  pkt.encap.pop_back();
  return {std::move(pkt), outer};
}

}  // namespace dena
