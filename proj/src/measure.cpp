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

#include "dena/measure.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "dena/error.hpp"

namespace dena
{

Rational Rational::reduced() const noexcept
{
  const std::uint64_t g = std::gcd(num, den);
  return g == 0 ? Rational{0, 1} : Rational{num / g, den / g};
}

std::optional<LossReport> compute_loss(
  const CounterSnapshot & prev, const CounterSnapshot & curr, PathId path)
{
  if (curr.a_out < prev.a_out || curr.a_in < prev.a_in || curr.b_out < prev.b_out ||
      curr.b_in < prev.b_in) {
    throw CounterRegression();
  }
  const std::uint64_t d_a_out = curr.a_out - prev.a_out;
  const std::uint64_t d_a_in = curr.a_in - prev.a_in;
  const std::uint64_t d_b_out = curr.b_out - prev.b_out;
  const std::uint64_t d_b_in = curr.b_in - prev.b_in;
  if (d_a_out == 0 || d_b_out == 0) {
    return std::nullopt;
  }
  // Reordering across a window edge can make more arrive than was sent.
  const Rational tx{d_a_out > d_b_in ? d_a_out - d_b_in : 0, d_a_out};
  const Rational rx{d_b_out > d_a_in ? d_b_out - d_a_in : 0, d_b_out};
  LossReport r;
  r.path = path;
  r.loss = std::max(tx, rx).reduced();
  r.window_tx = d_a_out + d_b_out;
  r.window_rx = d_a_in + d_b_in;
  return r;
}

namespace
{

template<typename T>
void put_be(std::vector<std::uint8_t> & out, T v)
{
  for (int shift = static_cast<int>(sizeof(T) * 8) - 8; shift >= 0; shift -= 8) {
    out.push_back(static_cast<std::uint8_t>(v >> shift));
  }
}

class Reader
{
public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

  template<typename T>
  T get()
  {
    if (pos_ + sizeof(T) > in_.size()) {
      throw MalformedControl("measurement message truncated");
    }
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      v = static_cast<T>((v << 8) | in_[pos_ + i]);
    }
    pos_ += sizeof(T);
    return v;
  }

  std::span<const std::uint8_t> take(std::size_t n)
  {
    if (pos_ + n > in_.size()) {
      throw MalformedControl("measurement message truncated");
    }
    auto s = in_.subspan(pos_, n);
    pos_ += n;
    return s;
  }

  void expect_end() const
  {
    if (pos_ != in_.size()) {
      throw MalformedControl("trailing bytes after measurement message");
    }
  }

private:
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

PathId read_path(std::uint8_t kind, std::uint8_t index)
{
  if (kind == 0) {
    if (index != 0) {
      throw MalformedControl("ip path with nonzero index");
    }
    return PathId::ip();
  }
  if (kind == 1) {
    return PathId::fia(index);
  }
  throw MalformedControl("unknown path kind " + std::to_string(kind));
}

}  // namespace

void append_report(std::vector<std::uint8_t> & out, const LossReport & r)
{
  Rational q = r.loss.reduced();
  // Keep the ratio when a huge window overflows 32 bits.
  while (q.den > 0xFFFFFFFFULL) {
    q.num >>= 1;
    q.den >>= 1;
  }
  out.push_back(static_cast<std::uint8_t>(r.path.kind));
  out.push_back(r.path.index);
  put_be(out, static_cast<std::uint32_t>(q.num));
  put_be(out, static_cast<std::uint32_t>(q.den));
}

LossReport read_report(std::span<const std::uint8_t> in)
{
  Reader rd(in);
  const auto kind = rd.get<std::uint8_t>();
  const auto index = rd.get<std::uint8_t>();
  LossReport r;
  r.path = read_path(kind, index);
  r.loss.num = rd.get<std::uint32_t>();
  r.loss.den = rd.get<std::uint32_t>();
  rd.expect_end();
  if (r.loss.den == 0 || r.loss.num > r.loss.den) {
    throw MalformedControl("loss rate outside [0, 1]");
  }
  return r;
}

std::string_view to_string(MeasState s) noexcept
{
  switch (s) {
    case MeasState::Idle: return "Idle";
    case MeasState::InitSent: return "InitSent";
    case MeasState::Measuring: return "Measuring";
    case MeasState::StopWait: return "StopWait";
    case MeasState::TimeWait: return "TimeWait";
    case MeasState::Done: return "Done";
  }
  return "?";
}

bool is_meas_type(MsgType t) noexcept
{
  return t == MsgType::Start || t == MsgType::StartAck || t == MsgType::Stop ||
         t == MsgType::StopAck;
}

ControlMessage encode_meas(const MeasMessage & m)
{
  if (!is_meas_type(m.type)) {
    throw MalformedControl("not a measurement message type");
  }
  ControlMessage msg{m.type, {}};
  auto & out = msg.payload;
  put_be(out, m.cycle);
  if (m.type == MsgType::Stop) {
    out.push_back(static_cast<std::uint8_t>(m.a_out.size()));
    for (auto v : m.a_out) {
      put_be(out, v);
    }
  } else if (m.type == MsgType::StopAck && !m.final_ack) {
    if (m.a_out.size() != m.b_counters.size()) {
      throw MalformedControl("StopAck counter lists differ in length");
    }
    out.push_back(0);
    out.push_back(static_cast<std::uint8_t>(m.a_out.size()));
    for (std::size_t i = 0; i < m.a_out.size(); ++i) {
      put_be(out, m.a_out[i]);
      put_be(out, m.b_counters[i].out);
      put_be(out, m.b_counters[i].in);
    }
  } else if (m.type == MsgType::StopAck) {
    out.push_back(1);
    out.push_back(m.decision ? 1 : 0);
    out.push_back(m.decision ? static_cast<std::uint8_t>(m.decision->kind) : 0);
    out.push_back(m.decision ? m.decision->index : 0);
    out.push_back(static_cast<std::uint8_t>(m.reports.size()));
    for (const auto & r : m.reports) {
      append_report(out, r);
    }
  }
  return msg;
}

MeasMessage decode_meas(const ControlMessage & msg)
{
  if (!is_meas_type(msg.type)) {
    throw MalformedControl("not a measurement message type");
  }
  Reader rd(msg.payload);
  MeasMessage m;
  m.type = msg.type;
  m.cycle = rd.get<std::uint32_t>();
  if (m.type == MsgType::Stop) {
    const auto n = rd.get<std::uint8_t>();
    for (std::size_t i = 0; i < n; ++i) {
      m.a_out.push_back(rd.get<std::uint64_t>());
    }
  } else if (m.type == MsgType::StopAck) {
    const auto phase = rd.get<std::uint8_t>();
    if (phase == 0) {
      const auto n = rd.get<std::uint8_t>();
      for (std::size_t i = 0; i < n; ++i) {
        m.a_out.push_back(rd.get<std::uint64_t>());
        PathCounters c;
        c.out = rd.get<std::uint64_t>();
        c.in = rd.get<std::uint64_t>();
        m.b_counters.push_back(c);
      }
    } else if (phase == 1) {
      m.final_ack = true;
      const auto has = rd.get<std::uint8_t>();
      const auto kind = rd.get<std::uint8_t>();
      const auto index = rd.get<std::uint8_t>();
      if (has > 1) {
        throw MalformedControl("bad decision flag");
      }
      if (has == 1) {
        m.decision = read_path(kind, index);
      }
      const auto n = rd.get<std::uint8_t>();
      for (std::size_t i = 0; i < n; ++i) {
        m.reports.push_back(read_report(rd.take(kLossReportBytes)));
      }
    } else {
      throw MalformedControl("bad StopAck phase");
    }
  }
  rd.expect_end();
  return m;
}

void SessionConfig::validate() const
{
  if (period_ms <= 0 || interval_ms <= 0 || rto_ms <= 0) {
    throw ConfigError("measurement timers must be positive");
  }
  if (max_retransmits < 0) {
    throw ConfigError("max_retransmits must be non-negative");
  }
  if (!(sample_rate >= 0.0 && sample_rate <= 1.0)) {
    throw ConfigError("sample_rate must lie in [0, 1]");
  }
  select.validate();
}

MeasurementSession::MeasurementSession(
  std::uint64_t peer, Role role, std::uint32_t cycle, std::size_t n_paths, SessionConfig cfg,
  std::optional<std::vector<CounterSnapshot>> prev)
: peer_(peer), role_(role), cycle_(cycle), n_paths_(n_paths), cfg_(cfg), prev_(std::move(prev))
{
  cfg_.validate();
  if (n_paths_ == 0 || n_paths_ > 255) {
    throw ConfigError("a peer needs between 1 and 255 paths");
  }
  if (prev_ && prev_->size() != n_paths_) {
    throw ConfigError("previous snapshot has the wrong number of paths");
  }
}

std::optional<std::int64_t> MeasurementSession::deadline() const noexcept
{
  if (state_ == MeasState::Done) {
    return std::nullopt;
  }
  if (state_ == MeasState::Idle) {
    // An idle initiator starts on its first timer; a responder just waits.
    if (role_ == Role::Initiator) {
      return deadline_;
    }
    return std::nullopt;
  }
  return deadline_;
}

MeasMessage MeasurementSession::make(MsgType t) const
{
  MeasMessage m;
  m.type = t;
  m.cycle = cycle_;
  return m;
}

StepResult MeasurementSession::abort()
{
  StepResult r;
  r.aborted = state_ != MeasState::Idle;
  state_ = MeasState::Idle;
  // An aborted cycle never restarts by itself.
  deadline_ = std::numeric_limits<std::int64_t>::max();
  return r;
}

StepResult MeasurementSession::step(const MeasEvent & ev)
{
  if (ev.kind == MeasEvent::Kind::KeepAliveFailure) {
    if (state_ == MeasState::Done) {
      return {};
    }
    auto r = abort();
    r.aborted = true;
    return r;
  }
  if (ev.kind == MeasEvent::Kind::Message) {
    if (!ev.msg || ev.msg->cycle != cycle_) {
      StepResult r;
      r.violation = true;
      return r;
    }
  }
  if (ev.kind == MeasEvent::Kind::Timer) {
    const auto d = deadline();
    if (!d || ev.now_ms < *d) {
      return {};
    }
  }
  const bool snapshots =
    (ev.kind == MeasEvent::Kind::Timer &&
     (state_ == MeasState::Measuring || state_ == MeasState::StopWait)) ||
    (ev.kind == MeasEvent::Kind::Message &&
     (ev.msg->type == MsgType::Stop || ev.msg->type == MsgType::StopAck));
  if (snapshots && ev.counters.size() != n_paths_) {
    throw ConfigError("event carries counters for the wrong number of paths");
  }
  return role_ == Role::Initiator ? step_initiator(ev) : step_responder(ev);
}

void MeasurementSession::finish_initiator(const MeasMessage & ack, const MeasEvent & ev)
{
  std::vector<CounterSnapshot> snap(n_paths_);
  for (std::size_t s = 0; s < n_paths_; ++s) {
    snap[s].a_out = ack.a_out[s];
    snap[s].a_in = ev.counters[s].in;
    snap[s].b_out = ack.b_counters[s].out;
    snap[s].b_in = ack.b_counters[s].in;
    snap[s].taken_at = ev.now_ms;
  }
  reports_.clear();
  if (prev_) {
    for (std::size_t s = 0; s < n_paths_; ++s) {
      if (auto r = compute_loss((*prev_)[s], snap[s], PathId::from_slot(s))) {
        reports_.push_back(*r);
      }
    }
    std::vector<bool> avail = ev.available;
    avail.resize(n_paths_, true);
    decision_ = decide_path(reports_, n_paths_, avail, ev.active, cfg_.select);
  }
  snap_ = std::move(snap);
  MeasMessage fin = make(MsgType::StopAck);
  fin.final_ack = true;
  fin.reports = reports_;
  fin.decision = decision_;
  final_ack_ = std::move(fin);
}

StepResult MeasurementSession::step_initiator(const MeasEvent & ev)
{
  StepResult r;
  const std::int64_t now = ev.now_ms;
  if (ev.kind == MeasEvent::Kind::Timer) {
    switch (state_) {
      case MeasState::Idle:
        r.emit.push_back(make(MsgType::Start));
        start_sent_at_ = now;
        state_ = MeasState::InitSent;
        deadline_ = now + cfg_.rto_ms;
        retransmits_ = 0;
        break;
      case MeasState::InitSent:
        if (retransmits_ >= cfg_.max_retransmits) {
          return abort();
        }
        ++retransmits_;
        r.emit.push_back(make(MsgType::Start));
        deadline_ = now + cfg_.rto_ms;
        break;
      case MeasState::Measuring:
      case MeasState::StopWait: {
        if (state_ == MeasState::StopWait) {
          if (retransmits_ >= cfg_.max_retransmits) {
            return abort();
          }
          ++retransmits_;
        } else {
          retransmits_ = 0;
        }
        a_out_.assign(n_paths_, 0);
        for (std::size_t s = 0; s < n_paths_; ++s) {
          a_out_[s] = ev.counters[s].out;
        }
        MeasMessage stop = make(MsgType::Stop);
        stop.a_out = a_out_;
        r.emit.push_back(std::move(stop));
        state_ = MeasState::StopWait;
        deadline_ = now + cfg_.rto_ms;
        break;
      }
      case MeasState::TimeWait:
        state_ = MeasState::Done;
        r.done = true;
        break;
      case MeasState::Done:
        break;
    }
    return r;
  }
  const MeasMessage & m = *ev.msg;
  switch (m.type) {
    case MsgType::StartAck:
      if (state_ == MeasState::InitSent) {
        rtt_ = now - start_sent_at_;
        state_ = MeasState::Measuring;
        deadline_ = now + cfg_.period_ms;
      } else if (state_ == MeasState::Idle) {
        r.violation = true;
      }
      break;
    case MsgType::StopAck:
      if (m.final_ack) {
        r.violation = true;
      } else if (state_ == MeasState::StopWait) {
        if (m.a_out.size() != n_paths_ || m.b_counters.size() != n_paths_) {
          r.violation = true;
          break;
        }
        finish_initiator(m, ev);
        r.emit.push_back(*final_ack_);
        state_ = MeasState::TimeWait;
        deadline_ = now + cfg_.interval_ms;
        r.entered_time_wait = true;
      } else if (state_ == MeasState::TimeWait) {
        // The responder missed the final ack.
        r.emit.push_back(*final_ack_);
      } else if (state_ != MeasState::Done) {
        r.violation = true;
      }
      break;
    default:
      r.violation = true;
      break;
  }
  return r;
}

StepResult MeasurementSession::step_responder(const MeasEvent & ev)
{
  StepResult r;
  const std::int64_t now = ev.now_ms;
  auto stop_ack = [&] {
    MeasMessage ack = make(MsgType::StopAck);
    ack.a_out = a_out_;
    ack.b_counters = b_counters_;
    return ack;
  };
  if (ev.kind == MeasEvent::Kind::Timer) {
    switch (state_) {
      case MeasState::Measuring:
        return abort();
      case MeasState::StopWait:
        if (retransmits_ >= cfg_.max_retransmits) {
          return abort();
        }
        ++retransmits_;
        // Fresh out counters so the initiator's in count lines up with them.
        for (std::size_t s = 0; s < n_paths_; ++s) {
          b_counters_[s].out = ev.counters[s].out;
        }
        r.emit.push_back(stop_ack());
        deadline_ = now + cfg_.rto_ms;
        break;
      case MeasState::TimeWait:
        state_ = MeasState::Done;
        r.done = true;
        break;
      default:
        break;
    }
    return r;
  }
  const MeasMessage & m = *ev.msg;
  switch (m.type) {
    case MsgType::Start:
      if (state_ == MeasState::Idle || state_ == MeasState::Measuring) {
        r.emit.push_back(make(MsgType::StartAck));
        if (state_ == MeasState::Idle) {
          state_ = MeasState::Measuring;
          deadline_ = now + 2 * cfg_.period_ms;
        }
      }
      break;
    case MsgType::Stop:
      if (m.a_out.size() != n_paths_) {
        r.violation = true;
      } else if (state_ == MeasState::Measuring) {
        a_out_ = m.a_out;
        b_counters_ = ev.counters;
        r.emit.push_back(stop_ack());
        state_ = MeasState::StopWait;
        deadline_ = now + cfg_.rto_ms;
        retransmits_ = 0;
      } else if (state_ == MeasState::StopWait) {
        for (std::size_t s = 0; s < n_paths_; ++s) {
          b_counters_[s].out = ev.counters[s].out;
        }
        r.emit.push_back(stop_ack());
      } else if (state_ == MeasState::Idle) {
        r.violation = true;
      }
      break;
    case MsgType::StopAck:
      if (!m.final_ack) {
        r.violation = true;
      } else if (state_ == MeasState::StopWait) {
        reports_ = m.reports;
        decision_ = m.decision;
        state_ = MeasState::TimeWait;
        deadline_ = now + cfg_.interval_ms;
        r.entered_time_wait = true;
      } else if (state_ == MeasState::Idle || state_ == MeasState::Measuring) {
        r.violation = true;
      }
      break;
    default:
      r.violation = true;
      break;
  }
  return r;
}

std::pair<MeasurementSession, StepResult> step(MeasurementSession session, const MeasEvent & ev)
{
  StepResult r = session.step(ev);
  return {std::move(session), std::move(r)};
}

PathId decide_path(
  const std::vector<LossReport> & reports, std::size_t n_paths, const std::vector<bool> & available,
  PathId current, const SelectConfig & cfg)
{
  std::vector<double> loss(n_paths, 1.0);
  std::vector<bool> seen(n_paths, false);
  for (const auto & r : reports) {
    const std::size_t s = r.path.slot();
    if (s < n_paths) {
      loss[s] = r.loss.value();
      seen[s] = true;
    }
  }
  const bool ip_up = available.empty() || available[0];
  if (!seen[0] && ip_up) {
    return current;
  }
  for (std::size_t s = 0; s < n_paths && s < available.size(); ++s) {
    if (!available[s]) {
      loss[s] = 1.0;
    }
  }
  return select_path(loss[0], std::span<const double>(loss).subspan(1), cfg);
}

std::optional<SimPacket> replicate_sample(
  const MeasurementSession & session, const SimPacket & pkt, const EncapHeader & failover, Rng & rng)
{
  if (session.state() != MeasState::Measuring) {
    return std::nullopt;
  }
  if (!rng.bernoulli(session.config().sample_rate)) {
    return std::nullopt;
  }
  return encapsulate(pkt, failover);
}

KeepAlive::KeepAlive(std::size_t n_paths, int miss_limit)
: state_(n_paths), miss_limit_(miss_limit)
{
  if (miss_limit_ < 1) {
    throw ConfigError("keep-alive miss limit must be at least 1");
  }
}

KeepAlive::Tick KeepAlive::tick()
{
  Tick t;
  for (std::size_t s = 0; s < state_.size(); ++s) {
    Slot & slot = state_[s];
    if (slot.outstanding) {
      ++slot.misses;
      if (slot.available && slot.misses >= miss_limit_) {
        slot.available = false;
        t.went_down.push_back(s);
      }
    }
    slot.outstanding = true;
    t.probe_slots.push_back(s);
  }
  return t;
}

bool KeepAlive::on_response(std::size_t slot)
{
  Slot & s = state_.at(slot);
  s.outstanding = false;
  s.misses = 0;
  if (!s.available) {
    s.available = true;
    return true;
  }
  return false;
}

std::vector<bool> KeepAlive::availability() const
{
  std::vector<bool> out;
  out.reserve(state_.size());
  for (const auto & s : state_) {
    out.push_back(s.available);
  }
  return out;
}

}  // namespace dena
