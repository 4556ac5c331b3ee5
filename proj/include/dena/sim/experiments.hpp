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

#ifndef DENA_SIM_EXPERIMENTS_HPP_
#define DENA_SIM_EXPERIMENTS_HPP_

#include <cstdint>
#include <optional>
#include <vector>

#include "dena/discovery.hpp"
#include "dena/sim/network.hpp"
#include "dena/sim/scenario.hpp"

namespace dena::sim
{

struct FnRow
{
  double loss = 0.0;
  std::uint64_t failures = 0;
  std::uint64_t trials = 0;
  double fn() const { return trials == 0 ? 0.0 : static_cast<double>(failures) / trials; }
};

/// Each trial sends up to cfg.max_attempts announcements of the discovery
/// message through an i.i.d. loss channel, each to a fresh receiver; a trial
/// fails when no attempt is detected. Loss draws depend only on
/// (seed, loss index, trial, attempt), so tables for different configs are
/// paired.
std::vector<FnRow> experiment_fn(const std::vector<double> & loss_rates,
                                 const DetectionConfig & cfg, std::uint64_t trials,
                                 std::uint64_t seed, unsigned workers = 0);

struct FpConfig
{
  std::size_t threshold = 3;
  bool use_prefilter = true;
};

struct FpRow
{
  FpConfig cfg;
  std::uint64_t hits = 0;
  std::uint64_t streams = 0;
  double fp() const { return streams == 0 ? 0.0 : static_cast<double>(hits) / streams; }
};

/// Streams of n_packets with uniform random IPID and a non-signal TTL. Only
/// packets whose IPID falls in a signal code decode to a symbol, so each
/// stream is drawn as its decoded symbol sequence: gaps between signal
/// packets are geometric, symbols uniform over A/B/C. Every config scans the
/// same streams.
std::vector<FpRow> experiment_fp(std::uint64_t n_packets, const std::vector<FpConfig> & cfgs,
                                 std::uint64_t repetitions, std::uint64_t seed,
                                 unsigned workers = 0);

struct SwitchResult
{
  Trace trace;
  int site = 0;  ///< site of the bulk sender
  std::optional<std::int64_t> loss_on_ms;
  std::optional<std::int64_t> loss_off_ms;
  std::optional<std::int64_t> to_fia_ms;  ///< latency after loss_on
  std::optional<std::int64_t> to_ip_ms;   ///< latency after loss_off
  double replica_share = 0.0;             ///< FIA bytes / IP bytes before the switch
};

/// Runs the scenario and measures the DENA decisions at the sending site of
/// the highest-rate flow. The loss window is the first ip.loss event with a
/// positive value and the next ip.loss event back to zero.
SwitchResult experiment_switch(const Scenario & scenario, std::uint64_t seed);

}  // namespace dena::sim

#endif  // DENA_SIM_EXPERIMENTS_HPP_
