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

#include "dena/signal_codec.hpp"

#include <cstdlib>

#include "dena/error.hpp"

namespace dena
{

char to_char(Signal s) noexcept
{
  switch (s) {
    case Signal::A: return 'A';
    case Signal::B: return 'B';
    case Signal::C: return 'C';
  }
  return '?';
}

void CodecConfig::validate() const
{
  for (std::size_t i = 1; i < kSignalCount; ++i) {
    if (ttl_values[i] < ttl_values[i - 1] + 64) {
      throw ConfigError("TTL signal values must ascend at least 64 apart");
    }
  }
  if (ttl_values[0] < 1) {
    throw ConfigError("TTL signal values must be positive");
  }
  for (std::size_t i = 0; i < kSignalCount; ++i) {
    if (ipid_msb12[i] == 0 || ipid_msb12[i] > 0xFFF) {
      throw ConfigError("IPID signal classes must be nonzero 12-bit values");
    }
    for (std::size_t j = i + 1; j < kSignalCount; ++j) {
      if (ipid_msb12[i] == ipid_msb12[j]) {
        throw ConfigError("IPID signal classes must be distinct");
      }
    }
  }
}

const CodecConfig & default_codec()
{
  static const CodecConfig cfg{};
  return cfg;
}

std::uint8_t encode_ttl(Signal sig, const CodecConfig & cfg)
{
  return cfg.ttl_values[static_cast<std::size_t>(sig)];
}

std::optional<Signal> decode_ttl(std::uint8_t ttl, const CodecConfig & cfg)
{
  if (ttl == 0) {
    return std::nullopt;
  }
  for (std::size_t i = 0; i < kSignalCount; ++i) {
    if (ttl <= cfg.ttl_values[i]) {
      return static_cast<Signal>(i);
    }
  }
  return std::nullopt;
}

std::uint16_t encode_ipid(Signal sig, std::uint8_t low4, const CodecConfig & cfg)
{
  return static_cast<std::uint16_t>(
    (cfg.ipid_msb12[static_cast<std::size_t>(sig)] << 4) | (low4 & 0x0F));
}

std::optional<Signal> decode_ipid(std::uint16_t ipid, const CodecConfig & cfg)
{
  const std::uint16_t msb = ipid >> 4;
  for (std::size_t i = 0; i < kSignalCount; ++i) {
    if (cfg.ipid_msb12[i] == msb) {
      return static_cast<Signal>(i);
    }
  }
  return std::nullopt;
}

Extracted extract(const SimPacket & pkt, const CodecConfig & cfg)
{
  return Extracted{decode_ttl(pkt.ttl, cfg), decode_ipid(pkt.ipid, cfg)};
}

}  // namespace dena
