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

#ifndef DENA_DISCOVERY_HPP_
#define DENA_DISCOVERY_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dena/packet.hpp"
#include "dena/signal_codec.hpp"

namespace dena
{

constexpr std::size_t kMessageLength = 24;
constexpr std::size_t kBlockLength = 8;

/// ABABABAB CCCCCCCC ABABABAB
inline constexpr std::array<Signal, kMessageLength> kDiscoveryMessage = [] {
  std::array<Signal, kMessageLength> m{};
  for (std::size_t i = 0; i < kMessageLength; ++i) {
    if (i >= kBlockLength && i < 2 * kBlockLength) {
      m[i] = Signal::C;
    } else {
      m[i] = (i % 2 == 0) ? Signal::A : Signal::B;
    }
  }
  return m;
}();

using SignalSeq = std::vector<Signal>;

/// Parse "ABAC..." into signals; any other character throws ConfigError.
SignalSeq signals_from_string(std::string_view text);
std::string signals_to_string(std::span<const Signal> seq);

struct DetectionConfig
{
  std::size_t threshold = 3;      ///< max edit distance accepted as a match
  bool use_prefilter = true;
  std::size_t max_attempts = 5;   ///< announcements before giving up
  std::size_t announce_gap = 8;   ///< unstamped packets between announcements
  std::size_t buffer_capacity = 4 * kMessageLength;

  void validate() const;
};

/// Levenshtein distance (unit insert / delete / replace).
std::size_t edit_distance(std::span<const Signal> a, std::span<const Signal> b);

/// min(edit_distance(a, b), bound + 1), computed on the diagonal band only.
std::size_t bounded_edit_distance(
  std::span<const Signal> a, std::span<const Signal> b, std::size_t bound);

/// Edit distance from `message` to every suffix of `buffer` in one pass:
/// entry L is the distance to the newest L symbols, capped at bound + 1.
/// Suffixes longer than message.size() + bound are not reported.
std::vector<std::size_t> suffix_distances(
  std::span<const Signal> buffer, std::span<const Signal> message, std::size_t bound);

/// Block-structure check on exactly 24 signals: blocks one and three need at
/// least three A and three B each, block two at least six C.
/// Throws WrongLength for any other size.
bool prefilter(std::span<const Signal> window);

/// The same check on a window of any length: the window is cut into three
/// contiguous blocks of near-equal size (n/3 and 2n/3 boundaries, rounded
/// down), which is the 8/8/8 split when n is 24.
bool prefilter_blocks(std::span<const Signal> window);

enum class Verdict : std::uint8_t { Unknown, PeerDetected, GaveUp };

std::string_view to_string(Verdict v) noexcept;

/// Per-flow announce/listen state. One owner mutates it.
class DiscoveryState
{
public:
  DiscoveryState(
    FiveTuple flow, std::uint64_t seed, DetectionConfig cfg = {},
    CodecConfig codec = default_codec());

  const FiveTuple & flow() const noexcept { return flow_; }
  const DetectionConfig & config() const noexcept { return cfg_; }
  Verdict verdict() const noexcept { return verdict_; }
  std::size_t attempts_used() const noexcept { return attempts_used_; }
  std::size_t tx_cursor() const noexcept { return cursor_; }
  const std::deque<Signal> & rx_signals() const noexcept { return rx_; }

  /// Edit distance of the window that produced PeerDetected.
  std::optional<std::size_t> detected_distance() const noexcept { return detected_distance_; }

  /// True while outbound packets of the flow carry the message.
  bool announcing() const noexcept;

  /// Write the next message symbol into TTL and IPID of an outbound packet.
  /// Packets in the gap between announcements, and any packet once the
  /// verdict is settled, pass through unchanged.
  SimPacket stamp(SimPacket pkt);

  /// Decode an inbound packet and run detection. IPID wins when the two
  /// fields disagree; packets where neither field decodes are skipped.
  Verdict ingest(const SimPacket & pkt);

  /// Append one already-decoded signal and run detection.
  Verdict ingest_signal(Signal s);

  /// The peer proved its presence another way (its control packet arrived).
  void mark_peer_detected();

  /// Drop buffered symbols; the verdict is kept.
  void clear_rx() { rx_.clear(); }

private:
  Verdict run_detection();

  FiveTuple flow_;
  DetectionConfig cfg_;
  CodecConfig codec_;
  std::deque<Signal> rx_;
  std::size_t cursor_ = 0;
  std::size_t gap_left_ = 0;
  bool in_gap_ = false;
  std::size_t attempts_used_ = 0;
  std::uint8_t low4_;
  Verdict verdict_ = Verdict::Unknown;
  std::optional<std::size_t> detected_distance_;
};

/// Windows of length 24-threshold .. 24+threshold ending at the newest
/// buffered signal are each compared against the full message; the smallest
/// accepted distance is returned, or nullopt when no window matches.
std::optional<std::size_t> detect_in(
  std::span<const Signal> buffer, const DetectionConfig & cfg);

/// Verdict that detect_in implies for a state's buffer; GaveUp and
/// PeerDetected states report their settled verdict unchanged.
Verdict detect(const DiscoveryState & state, const DetectionConfig & cfg);

}  // namespace dena

#endif  // DENA_DISCOVERY_HPP_
