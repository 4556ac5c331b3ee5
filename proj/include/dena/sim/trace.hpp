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
#ifndef DENA_SIM_TRACE_HPP_
#define DENA_SIM_TRACE_HPP_

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "dena/path.hpp"

namespace dena::sim
{

enum class TraceEvent : std::uint8_t {
  Send,
  Drop,
  Deliver,
  Duplicate,
  Stamp,
  Control,
  Detect,
  GaveUp,
  Bootstrap,
  Switch,
  PathDown,
  PathUp,
};

std::string_view to_string(TraceEvent e) noexcept;

constexpr std::uint8_t kNoPath = 0xFF;

struct TraceRecord
{
  std::int64_t time_ms = 0;
  std::uint64_t seq_no = 0;
  std::uint8_t node = 0;
  TraceEvent event = TraceEvent::Send;
  std::uint8_t path = kNoPath;  ///< path slot, or kNoPath

  friend bool operator==(const TraceRecord &, const TraceRecord &) = default;
};

struct SwitchRecord
{
  std::int64_t time_ms = 0;
  int site = 0;
  PathId from;
  PathId to;

  friend bool operator==(const SwitchRecord &, const SwitchRecord &) = default;
};

struct RunStats
{
  std::uint64_t sends = 0;        ///< channel transmissions
  std::uint64_t duplicates = 0;   ///< extra copies made by channels
  std::uint64_t drops = 0;        ///< channel losses
  std::uint64_t arrivals = 0;     ///< packets that left a channel
  std::uint64_t in_flight = 0;    ///< still inside channels at the end
  std::uint64_t host_sent = 0;
  std::uint64_t host_delivered = 0;
  std::uint64_t nat_drops = 0;
  std::uint64_t gateway_drops = 0;
  std::uint64_t dedup_drops = 0;
  std::uint64_t transparency_violations = 0;
  std::uint64_t control_to_host = 0;
  std::uint64_t protocol_violations = 0;
  std::uint64_t replicas = 0;
  std::uint64_t measurements_done = 0;
  std::uint64_t measurements_aborted = 0;

  friend bool operator==(const RunStats &, const RunStats &) = default;
};

/// Everything a run produced. Packet-level records are optional; decisions,
/// throughput and counters are always kept.
struct Trace
{
  std::vector<std::string> nodes;
  std::vector<TraceRecord> events;
  std::vector<SwitchRecord> switches;
  std::array<std::vector<std::int64_t>, 2> detect_ms;     ///< per site, flow detections
  std::array<std::vector<std::int64_t>, 2> bootstrap_ms;  ///< per site, established flows
  std::vector<std::vector<std::uint64_t>> throughput;     ///< [second][slot] payload bytes
  RunStats stats;

  void write_events_csv(std::ostream & os) const;
  void write_throughput_csv(std::ostream & os) const;

  friend bool operator==(const Trace &, const Trace &) = default;
};

}  // namespace dena::sim

#endif  // DENA_SIM_TRACE_HPP_
