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

#ifndef DENA_SIGNAL_CODEC_HPP_
#define DENA_SIGNAL_CODEC_HPP_

#include <array>
#include <cstdint>
#include <optional>

#include "dena/packet.hpp"

namespace dena
{

/// One of the three hidden symbols carried in TTL / IPID.
enum class Signal : std::uint8_t { A = 0, B = 1, C = 2 };

constexpr std::size_t kSignalCount = 3;

char to_char(Signal s) noexcept;

/// Header-field values assigned to each signal, indexed by Signal.
///
/// TTL values must be at least 64 apart so a path shorter than 64 hops never
/// carries one value into the next band. IPID classes are the upper 12 bits;
/// the low 4 bits are free.
struct CodecConfig
{
  std::array<std::uint8_t, kSignalCount> ttl_values{64, 128, 192};
  std::array<std::uint16_t, kSignalCount> ipid_msb12{0x001, 0x7FF, 0xFFF};

  /// Throws ConfigError when the invariants above do not hold.
  void validate() const;
};

const CodecConfig & default_codec();

std::uint8_t encode_ttl(Signal sig, const CodecConfig & cfg = default_codec());

/// Band decode: (0, v_A] -> A, (v_A, v_B] -> B, (v_B, v_C] -> C, above -> none.
std::optional<Signal> decode_ttl(std::uint8_t ttl, const CodecConfig & cfg = default_codec());

std::uint16_t encode_ipid(
  Signal sig, std::uint8_t low4, const CodecConfig & cfg = default_codec());

/// Exact match on the upper 12 bits.
std::optional<Signal> decode_ipid(std::uint16_t ipid, const CodecConfig & cfg = default_codec());

struct Extracted
{
  std::optional<Signal> ttl_sig;
  std::optional<Signal> ipid_sig;

  friend bool operator==(const Extracted &, const Extracted &) = default;
};

Extracted extract(const SimPacket & pkt, const CodecConfig & cfg = default_codec());

}  // namespace dena

#endif  // DENA_SIGNAL_CODEC_HPP_
