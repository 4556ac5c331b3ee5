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

#include "dena/discovery.hpp"

#include <algorithm>
#include <limits>

#include "dena/error.hpp"
#include "dena/random.hpp"

namespace dena
{

SignalSeq signals_from_string(std::string_view text)
{
  SignalSeq out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case 'A': out.push_back(Signal::A); break;
      case 'B': out.push_back(Signal::B); break;
      case 'C': out.push_back(Signal::C); break;
      default: throw ConfigError(std::string("not a signal symbol: '") + c + "'");
    }
  }
  return out;
}

std::string signals_to_string(std::span<const Signal> seq)
{
  std::string s;
  s.reserve(seq.size());
  for (auto sig : seq) {
    s.push_back(to_char(sig));
  }
  return s;
}

void DetectionConfig::validate() const
{
  if (max_attempts < 1) {
    throw ConfigError("max_attempts must be at least 1");
  }
  if (buffer_capacity < kMessageLength + threshold) {
    throw ConfigError("signal buffer cannot hold the longest detection window");
  }
}

std::size_t edit_distance(std::span<const Signal> a, std::span<const Signal> b)
{
  std::vector<std::size_t> prev(b.size() + 1);
  std::vector<std::size_t> cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) {
    prev[j] = j;
  }
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t replace = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, replace});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::size_t bounded_edit_distance(
  std::span<const Signal> a, std::span<const Signal> b, std::size_t bound)
{
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  const std::size_t over = bound + 1;
  if ((n > m ? n - m : m - n) > bound) {
    return over;
  }
  // Cells with |i - j| > bound can never come back under the bound.
  constexpr std::size_t kFar = std::numeric_limits<std::size_t>::max() / 2;
  std::vector<std::size_t> prev(m + 1, kFar);
  std::vector<std::size_t> cur(m + 1, kFar);
  for (std::size_t j = 0; j <= std::min(m, bound); ++j) {
    prev[j] = j;
  }
  for (std::size_t i = 1; i <= n; ++i) {
    const std::size_t lo = i > bound ? i - bound : 0;
    const std::size_t hi = std::min(m, i + bound);
    std::fill(cur.begin(), cur.end(), kFar);
    std::size_t row_min = kFar;
    if (lo == 0) {
      cur[0] = i;
      row_min = i;
    }
    for (std::size_t j = std::max<std::size_t>(lo, 1); j <= hi; ++j) {
      const std::size_t replace = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, replace});
      row_min = std::min(row_min, cur[j]);
    }
    if (row_min > bound) {
      return over;
    }
    std::swap(prev, cur);
  }
  return std::min(prev[m], over);
}

std::vector<std::size_t> suffix_distances(
  std::span<const Signal> buffer, std::span<const Signal> message, std::size_t bound)
{
  // Both strings read backwards from their newest symbol, so row m of the
  // table holds the distance to every suffix length at once.
  const std::size_t m = message.size();
  const std::size_t n = std::min(buffer.size(), m + bound);
  const std::size_t over = bound + 1;
  constexpr std::size_t kFar = std::numeric_limits<std::size_t>::max() / 2;
  std::vector<std::size_t> prev(n + 1, kFar);
  std::vector<std::size_t> cur(n + 1, kFar);
  for (std::size_t j = 0; j <= std::min(n, bound); ++j) {
    prev[j] = j;
  }
  for (std::size_t i = 1; i <= m; ++i) {
    const std::size_t lo = i > bound ? i - bound : 0;
    const std::size_t hi = std::min(n, i + bound);
    std::fill(cur.begin(), cur.end(), kFar);
    if (lo == 0) {
      cur[0] = i;
    }
    const Signal want = message[m - i];
    for (std::size_t j = std::max<std::size_t>(lo, 1); j <= hi; ++j) {
      const std::size_t replace = prev[j - 1] + (buffer[buffer.size() - j] == want ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, replace});
    }
    std::swap(prev, cur);
  }
  for (auto & d : prev) {
    d = std::min(d, over);
  }
  return prev;
}

namespace
{

struct Counts
{
  std::size_t a = 0;
  std::size_t b = 0;
  std::size_t c = 0;
};

Counts count(std::span<const Signal> block)
{
  Counts k;
  for (auto s : block) {
    switch (s) {
      case Signal::A: ++k.a; break;
      case Signal::B: ++k.b; break;
      case Signal::C: ++k.c; break;
    }
  }
  return k;
}

}  // namespace

bool prefilter_blocks(std::span<const Signal> window)
{
  const std::size_t n = window.size();
  const std::size_t first = n / 3;
  const std::size_t second = 2 * n / 3;
  const Counts head = count(window.subspan(0, first));
  const Counts middle = count(window.subspan(first, second - first));
  const Counts tail = count(window.subspan(second));
  return head.a >= 3 && head.b >= 3 && tail.a >= 3 && tail.b >= 3 && middle.c >= 6;
}

bool prefilter(std::span<const Signal> window)
{
  if (window.size() != kMessageLength) {
    throw WrongLength(window.size());
  }
  return prefilter_blocks(window);
}

std::string_view to_string(Verdict v) noexcept
{
  switch (v) {
    case Verdict::Unknown: return "unknown";
    case Verdict::PeerDetected: return "peer-detected";
    case Verdict::GaveUp: return "gave-up";
  }
  return "?";
}

std::optional<std::size_t> detect_in(std::span<const Signal> buffer, const DetectionConfig & cfg)
{
  const std::size_t t = cfg.threshold;
  const std::size_t shortest = kMessageLength > t ? kMessageLength - t : 1;
  const auto dist = suffix_distances(buffer, kDiscoveryMessage, t);
  std::optional<std::size_t> best;
  for (std::size_t len = shortest; len < dist.size(); ++len) {
    const std::size_t d = dist[len];
    if (d > t || (best && d >= *best)) {
      continue;
    }
    if (cfg.use_prefilter && !prefilter_blocks(buffer.subspan(buffer.size() - len))) {
      continue;
    }
    best = d;
  }
  return best;
}

Verdict detect(const DiscoveryState & state, const DetectionConfig & cfg)
{
  if (state.verdict() != Verdict::Unknown) {
    return state.verdict();
  }
  const auto & rx = state.rx_signals();
  const std::vector<Signal> buffer(rx.begin(), rx.end());
  return detect_in(buffer, cfg) ? Verdict::PeerDetected : Verdict::Unknown;
}

DiscoveryState::DiscoveryState(
  FiveTuple flow, std::uint64_t seed, DetectionConfig cfg, CodecConfig codec)
: flow_(flow),
  cfg_(cfg),
  codec_(codec),
  low4_(static_cast<std::uint8_t>(mix64(seed) & 0x0F))
{
  cfg_.validate();
  codec_.validate();
}

bool DiscoveryState::announcing() const noexcept
{
  return verdict_ == Verdict::Unknown && attempts_used_ < cfg_.max_attempts;
}

SimPacket DiscoveryState::stamp(SimPacket pkt)
{
  // the gap after the last attempt still has to run out before giving up
  if (verdict_ != Verdict::Unknown || (!in_gap_ && attempts_used_ >= cfg_.max_attempts)) {
    return pkt;
  }
  if (in_gap_) {
    if (gap_left_ > 0) {
      --gap_left_;
    }
    if (gap_left_ == 0) {
      in_gap_ = false;
      if (attempts_used_ >= cfg_.max_attempts && verdict_ == Verdict::Unknown) {
        verdict_ = Verdict::GaveUp;
      }
    }
    return pkt;
  }
  const Signal sym = kDiscoveryMessage[cursor_];
  pkt.ttl = encode_ttl(sym, codec_);
  pkt.ipid = encode_ipid(sym, low4_, codec_);
  low4_ = static_cast<std::uint8_t>((low4_ + 1) & 0x0F);
  if (++cursor_ == kMessageLength) {
    cursor_ = 0;
    ++attempts_used_;
    if (cfg_.announce_gap > 0) {
      in_gap_ = true;
      gap_left_ = cfg_.announce_gap;
    } else if (attempts_used_ >= cfg_.max_attempts) {
      verdict_ = Verdict::GaveUp;
    }
  }
  return pkt;
}

Verdict DiscoveryState::ingest(const SimPacket & pkt)
{
  const Extracted e = extract(pkt, codec_);
  if (e.ipid_sig) {
    return ingest_signal(*e.ipid_sig);
  }
  if (e.ttl_sig) {
    return ingest_signal(*e.ttl_sig);
  }
  return verdict_;
}

Verdict DiscoveryState::ingest_signal(Signal s)
{
  rx_.push_back(s);
  while (rx_.size() > cfg_.buffer_capacity) {
    rx_.pop_front();
  }
  return run_detection();
}

void DiscoveryState::mark_peer_detected()
{
  if (verdict_ == Verdict::Unknown) {
    verdict_ = Verdict::PeerDetected;
  }
}

Verdict DiscoveryState::run_detection()
{
  if (verdict_ != Verdict::Unknown) {
    return verdict_;
  }
  // Only the newest 24 + threshold symbols can take part in a window.
  const std::size_t keep = std::min(rx_.size(), kMessageLength + cfg_.threshold);
  std::array<Signal, 4 * kMessageLength> scratch{};
  std::vector<Signal> heap;
  std::span<Signal> tail;
  if (keep <= scratch.size()) {
    tail = std::span<Signal>(scratch.data(), keep);
  } else {
    heap.resize(keep);
    tail = std::span<Signal>(heap);
  }
  std::copy(rx_.end() - static_cast<std::ptrdiff_t>(keep), rx_.end(), tail.begin());
  if (auto d = detect_in(tail, cfg_)) {
    verdict_ = Verdict::PeerDetected;
    detected_distance_ = d;
  }
  return verdict_;
}

}  // namespace dena
