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
#ifndef DENA_SIM_SCENARIO_HPP_
#define DENA_SIM_SCENARIO_HPP_

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dena/control.hpp"
#include "dena/discovery.hpp"
#include "dena/measure.hpp"
#include "dena/sim/channel.hpp"

namespace dena::sim
{

struct HostSpec
{
  std::string name;
  int site = 0;  ///< 0 or 1
  Addr addr = 0;
};

struct FlowSpec
{
  std::string name;
  std::size_t src_host = 0;  ///< index into Scenario::hosts
  std::uint16_t src_port = 0;
  std::size_t dst_host = 0;
  std::uint16_t dst_port = 0;
  double rate_pps = 0.0;
  std::uint8_t protocol = proto::kTcp;
  std::size_t payload_bytes = 100;
  std::int64_t start_ms = 0;
  std::optional<std::int64_t> stop_ms;
};

/// Timed change to a channel knob, e.g. ip.loss = 0.1 at 80 s.
struct ScheduleEvent
{
  std::int64_t at_ms = 0;
  std::string key;  ///< ip.loss | ip.reorder | ip.dup | ip.delay_ms | fia.<same>
  double value = 0.0;
};

/// Two sites joined by the IP path and fia_paths overlay paths. Each site
/// has hosts, optionally a NAT, a DENA and an FIA gateway.
struct Scenario
{
  std::int64_t duration_ms = 10000;
  ChannelModel ip{0.0, 0.0, 0.0, 20, 12, 0};
  ChannelModel fia{0.0, 0.0, 0.0, 30, 0, 0};
  std::size_t fia_paths = 1;
  std::vector<HostSpec> hosts;
  std::vector<FlowSpec> flows;
  std::vector<ScheduleEvent> schedule;
  std::array<std::optional<Addr>, 2> nat_public;
  std::array<Addr, 2> gateway{make_addr(100, 64, 0, 1), make_addr(100, 64, 1, 1)};
  std::array<bool, 2> dena_enabled{true, true};
  std::int64_t nat_idle_timeout_ms = 30000;

  DetectionConfig detect;
  SessionConfig session;
  RetryPolicy retry;
  int keepalive_misses = 3;
  std::int64_t keepalive_interval_ms = 1000;
  std::uint8_t host_ttl = 64;
  bool record_packets = true;

  /// Throws ConfigError.
  void validate() const;

  std::optional<std::size_t> host_index(const std::string & name) const;
};

/// Line-oriented `key = value` text; `#` starts a comment. Keys:
///   duration_ms, fia.paths, record_packets, host_ttl
///   ip.{loss,reorder,dup,delay_ms,hops}, fia.{loss,reorder,dup,delay_ms,hops}
///   host.<name> = <site 1|2> <addr>
///   flow.<name> = <host>:<port> <host>:<port> <rate pps> <tcp|udp> [payload bytes] [start_ms] [stop_ms]
///   event = <time ms> <knob> <value>
///   nat.site<1|2> = <public addr>;  dena.site<1|2> = on|off;  gateway.site<1|2> = <addr>
///   detect.{threshold,prefilter,max_attempts,announce_gap}
///   meas.{period_ms,interval_ms,sample_rate,max_retransmits}; select.threshold
///   bootstrap.{retries,spacing_ms}; keepalive.{misses,interval_ms}
/// Throws ConfigError naming the source and line.
Scenario parse_scenario(std::istream & in, const std::string & source = "<scenario>");

/// Throws ConfigError when the file is missing.
Scenario load_scenario(const std::string & path);

Addr parse_addr(const std::string & text);

}  // namespace dena::sim

#endif  // DENA_SIM_SCENARIO_HPP_
