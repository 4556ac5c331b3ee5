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
#ifndef DENA_MEASURE_HPP_
#define DENA_MEASURE_HPP_

#include <cstdint>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "dena/control.hpp"
#include "dena/packet.hpp"
#include "dena/path.hpp"
#include "dena/random.hpp"
#include "dena/select.hpp"

namespace dena
{

__extension__ typedef unsigned __int128 WideUint;

/// Non-negative fraction kept exact; den is never zero.
struct Rational
{
  std::uint64_t num = 0;
  std::uint64_t den = 1;

  double value() const noexcept { return static_cast<double>(num) / static_cast<double>(den); }

  /// Divide out the gcd.
  Rational reduced() const noexcept;

  friend bool operator==(const Rational & a, const Rational & b) noexcept
  {
    return static_cast<WideUint>(a.num) * b.den ==
           static_cast<WideUint>(b.num) * a.den;
  }
  friend std::strong_ordering operator<=>(const Rational & a, const Rational & b) noexcept
  {
    return static_cast<WideUint>(a.num) * b.den <=>
           static_cast<WideUint>(b.num) * a.den;
  }
};

/// Counters of one path for one window edge. a is the initiator, b the
/// responder; out and in count data packets exchanged between the pair.
struct CounterSnapshot
{
  std::uint64_t a_out = 0;
  std::uint64_t a_in = 0;
  std::uint64_t b_out = 0;
  std::uint64_t b_in = 0;
  std::int64_t taken_at = 0;  ///< initiator-local time, ms

  friend bool operator==(const CounterSnapshot &, const CounterSnapshot &) = default;
};

struct LossReport
{
  PathId path;
  Rational loss;
  std::uint64_t window_tx = 0;  ///< packets sent in both directions
  std::uint64_t window_rx = 0;  ///< packets counted in by both sides

  friend bool operator==(const LossReport &, const LossReport &) = default;
};

/// max(tx, rx) loss over the window between two snapshots, negative values
/// clamped to 0. nullopt when either direction sent nothing.
/// Throws CounterRegression when a counter went backwards.
std::optional<LossReport> compute_loss(
  const CounterSnapshot & prev, const CounterSnapshot & curr, PathId path = PathId::ip());

/// path_kind(1) fia_index(1) numerator(4) denominator(4), big-endian.
constexpr std::size_t kLossReportBytes = 10;
void append_report(std::vector<std::uint8_t> & out, const LossReport & r);
LossReport read_report(std::span<const std::uint8_t> in);

/// Local packet counters of one path.
struct PathCounters
{
  std::uint64_t out = 0;
  std::uint64_t in = 0;

  friend bool operator==(const PathCounters &, const PathCounters &) = default;
};

enum class MeasState : std::uint8_t { Idle, InitSent, Measuring, StopWait, TimeWait, Done };
enum class Role : std::uint8_t { Initiator, Responder };

std::string_view to_string(MeasState s) noexcept;

/// Decoded measurement control message.
///
/// Stop carries the initiator's out counters. The responder's StopAck
/// echoes them next to its own out/in counters. The initiator answers with
/// a final StopAck carrying the loss reports and the path decision.
struct MeasMessage
{
  MsgType type = MsgType::Start;
  std::uint32_t cycle = 0;
  bool final_ack = false;
  std::vector<std::uint64_t> a_out;
  std::vector<PathCounters> b_counters;
  std::vector<LossReport> reports;
  std::optional<PathId> decision;

  friend bool operator==(const MeasMessage &, const MeasMessage &) = default;
};

ControlMessage encode_meas(const MeasMessage & m);

/// Throws MalformedControl.
MeasMessage decode_meas(const ControlMessage & msg);

bool is_meas_type(MsgType t) noexcept;

struct SessionConfig
{
  std::int64_t period_ms = 1000;    ///< length of the measuring phase
  std::int64_t interval_ms = 1000;  ///< Time_Wait hold before Done
  std::int64_t rto_ms = 50;         ///< control retransmission timeout
  int max_retransmits = 5;
  double sample_rate = 0.1;         ///< fail-over replication probability
  SelectConfig select;

  void validate() const;
};

struct MeasEvent
{
  enum class Kind : std::uint8_t { Timer, Message, KeepAliveFailure };

  Kind kind = Kind::Timer;
  std::int64_t now_ms = 0;
  std::optional<MeasMessage> msg;       ///< set for Message
  std::vector<PathCounters> counters;   ///< local counters at event time, by slot
  PathId active;                        ///< initiator decision input
  std::vector<bool> available;          ///< initiator decision input, by slot
};

struct StepResult
{
  std::vector<MeasMessage> emit;
  bool violation = false;          ///< message illegal here; dropped
  bool entered_time_wait = false;
  bool done = false;
  bool aborted = false;
};

/// One measurement cycle with one peer.
class MeasurementSession
{
public:
  MeasurementSession(
    std::uint64_t peer, Role role, std::uint32_t cycle, std::size_t n_paths, SessionConfig cfg = {},
    std::optional<std::vector<CounterSnapshot>> prev = std::nullopt);

  StepResult step(const MeasEvent & ev);

  std::uint64_t peer() const noexcept { return peer_; }
  Role role() const noexcept { return role_; }
  std::uint32_t cycle() const noexcept { return cycle_; }
  MeasState state() const noexcept { return state_; }
  std::size_t n_paths() const noexcept { return n_paths_; }
  const SessionConfig & config() const noexcept { return cfg_; }

  /// Time of the next timer event; nullopt when nothing is pending.
  std::optional<std::int64_t> deadline() const noexcept;

  /// Combined snapshot per slot, available to the initiator from Time_Wait on.
  const std::optional<std::vector<CounterSnapshot>> & snapshot() const noexcept { return snap_; }
  const std::vector<LossReport> & reports() const noexcept { return reports_; }
  std::optional<PathId> decision() const noexcept { return decision_; }

  /// Start to StartAck round trip seen by the initiator.
  std::optional<std::int64_t> rtt_ms() const noexcept { return rtt_; }

private:
  StepResult step_initiator(const MeasEvent & ev);
  StepResult step_responder(const MeasEvent & ev);
  StepResult abort();
  MeasMessage make(MsgType t) const;
  void finish_initiator(const MeasMessage & ack, const MeasEvent & ev);

  std::uint64_t peer_;
  Role role_;
  std::uint32_t cycle_;
  std::size_t n_paths_;
  SessionConfig cfg_;
  std::optional<std::vector<CounterSnapshot>> prev_;
  MeasState state_ = MeasState::Idle;
  std::int64_t deadline_ = 0;
  int retransmits_ = 0;
  std::int64_t start_sent_at_ = 0;
  std::optional<std::int64_t> rtt_;
  std::vector<std::uint64_t> a_out_;      // initiator: out counters sent in Stop
  std::vector<PathCounters> b_counters_;  // responder: in at Stop arrival, out at send
  std::optional<MeasMessage> final_ack_;
  std::optional<std::vector<CounterSnapshot>> snap_;
  std::vector<LossReport> reports_;
  std::optional<PathId> decision_;
};

/// Pure form of MeasurementSession::step.
std::pair<MeasurementSession, StepResult> step(MeasurementSession session, const MeasEvent & ev);

/// Initiator path decision from one cycle's reports. A path without a report
/// or marked unavailable counts as loss 1.0; without an Ip report the
/// current path is kept.
PathId decide_path(
  const std::vector<LossReport> & reports, std::size_t n_paths, const std::vector<bool> & available,
  PathId current, const SelectConfig & cfg);

/// A copy of pkt wrapped for a fail-over path, with probability sample_rate,
/// while the session is Measuring.
std::optional<SimPacket> replicate_sample(
  const MeasurementSession & session, const SimPacket & pkt, const EncapHeader & failover, Rng & rng);

/// Probe-based liveness of every path to one peer.
class KeepAlive
{
public:
  explicit KeepAlive(std::size_t n_paths, int miss_limit = 3);

  struct Tick
  {
    std::vector<std::size_t> probe_slots;  ///< send one probe on each
    std::vector<std::size_t> went_down;
  };

  /// Once per probe interval: count unanswered probes, then probe again.
  Tick tick();

  /// A probe response arrived on slot. True when the path came back.
  bool on_response(std::size_t slot);

  bool available(std::size_t slot) const { return state_.at(slot).available; }
  std::vector<bool> availability() const;
  int misses(std::size_t slot) const { return state_.at(slot).misses; }

private:
  struct Slot
  {
    bool outstanding = false;
    int misses = 0;
    bool available = true;
  };
  std::vector<Slot> state_;
  int miss_limit_;
};

}  // namespace dena

#endif  // DENA_MEASURE_HPP_
