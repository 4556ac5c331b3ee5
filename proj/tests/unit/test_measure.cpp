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

#include <gtest/gtest.h>

#include "dena/error.hpp"
#include "dena/measure.hpp"
#include "pair_harness.hpp"

namespace dena
{
namespace
{

CounterSnapshot snap(std::uint64_t a_out, std::uint64_t a_in, std::uint64_t b_out, std::uint64_t b_in)
{
  return CounterSnapshot{a_out, a_in, b_out, b_in, 0};
}

TEST(ComputeLoss, Examples)
{
  const auto r = compute_loss(snap(0, 0, 0, 0), snap(100, 100, 100, 90));
  ASSERT_TRUE(r);
  EXPECT_EQ(r->loss, (Rational{1, 10}));
  EXPECT_EQ(compute_loss(snap(5, 5, 5, 5), snap(50, 50, 50, 50))->loss, (Rational{0, 1}));
  EXPECT_EQ(compute_loss(snap(5, 5, 5, 5), snap(5, 9, 50, 9)), std::nullopt);
  EXPECT_THROW(compute_loss(snap(5, 5, 5, 5), snap(4, 5, 5, 5)), CounterRegression);
}

TEST(ComputeLoss, TakesTheWorseDirectionAndClamps)
{
  const auto r = compute_loss(snap(0, 0, 0, 0), snap(100, 70, 100, 90));
  EXPECT_EQ(r->loss, (Rational{3, 10}));
  // more arrived than was sent in the window: clamp, never negative
  const auto q = compute_loss(snap(0, 0, 0, 0), snap(100, 100, 100, 104));
  EXPECT_EQ(q->loss, (Rational{0, 1}));
}

TEST(ComputeLoss, AlwaysWithinUnitInterval)
{
  Rng rng(9);
  for (int i = 0; i < 10000; ++i) {
    const auto p = snap(rng.below(1000), rng.below(1000), rng.below(1000), rng.below(1000));
    const auto c = snap(p.a_out + rng.below(500), p.a_in + rng.below(500), p.b_out + rng.below(500),
                        p.b_in + rng.below(500));
    if (auto r = compute_loss(p, c)) {
      ASSERT_LE(r->loss, (Rational{1, 1}));
      ASSERT_EQ(r->loss, r->loss.reduced());
    }
  }
}

TEST(MeasMessage, RoundTrip)
{
  MeasMessage stop;
  stop.type = MsgType::Stop;
  stop.cycle = 76;
  stop.a_out = {1, 2};
  EXPECT_EQ(decode_meas(encode_meas(stop)), stop);
  MeasMessage m;
  m.type = MsgType::StopAck;
  m.cycle = 77;
  m.a_out = {1, 2};
  m.b_counters = {{3, 4}, {5, 6}};
  EXPECT_EQ(decode_meas(encode_meas(m)), m);
  MeasMessage fin;
  fin.type = MsgType::StopAck;
  fin.cycle = 77;
  fin.final_ack = true;
  fin.reports = {LossReport{PathId::fia(0), Rational{1, 3}, 0, 0}};
  fin.decision = PathId::fia(0);
  EXPECT_EQ(decode_meas(encode_meas(fin)), fin);
  MeasMessage uneven = m;
  uneven.b_counters.pop_back();
  EXPECT_THROW(encode_meas(uneven), MalformedControl);
  LossReport r{PathId::fia(2), Rational{7, 9}, 0, 0};
  std::vector<std::uint8_t> buf;
  append_report(buf, r);
  EXPECT_EQ(buf.size(), kLossReportBytes);
  EXPECT_EQ(read_report(buf), r);
  EXPECT_THROW(decode_meas(ControlMessage{MsgType::Bootstrap, {}}), MalformedControl);
  auto bad = encode_meas(m);
  bad.payload.pop_back();
  EXPECT_THROW(decode_meas(bad), MalformedControl);
}

MeasEvent timer(std::int64_t t, std::uint64_t out = 0, std::uint64_t in = 0)
{
  MeasEvent ev;
  ev.kind = MeasEvent::Kind::Timer;
  ev.now_ms = t;
  ev.counters = {PathCounters{out, in}};
  ev.available = {true};
  return ev;
}

MeasEvent message(std::int64_t t, const MeasMessage & m, std::uint64_t out = 0, std::uint64_t in = 0)
{
  MeasEvent ev = timer(t, out, in);
  ev.kind = MeasEvent::Kind::Message;
  ev.msg = m;
  return ev;
}

TEST(Session, FullCycle)
{
  MeasurementSession a(2, Role::Initiator, 1, 1);
  MeasurementSession b(1, Role::Responder, 1, 1);
  auto r = a.step(timer(0));
  EXPECT_EQ(a.state(), MeasState::InitSent);
  ASSERT_EQ(r.emit.size(), 1u);
  EXPECT_EQ(r.emit[0].type, MsgType::Start);

  auto rb = b.step(message(10, r.emit[0]));
  EXPECT_EQ(b.state(), MeasState::Measuring);
  ASSERT_EQ(rb.emit[0].type, MsgType::StartAck);
  a.step(message(20, rb.emit[0]));
  EXPECT_EQ(a.state(), MeasState::Measuring);
  EXPECT_EQ(a.rtt_ms(), 20);

  r = a.step(timer(1020, 100, 100));
  EXPECT_EQ(a.state(), MeasState::StopWait);
  ASSERT_EQ(r.emit[0].type, MsgType::Stop);
  rb = b.step(message(1030, r.emit[0], 100, 95));
  EXPECT_EQ(b.state(), MeasState::StopWait);
  ASSERT_EQ(rb.emit[0].type, MsgType::StopAck);
  r = a.step(message(1040, rb.emit[0], 100, 100));
  EXPECT_TRUE(r.entered_time_wait);
  EXPECT_EQ(a.state(), MeasState::TimeWait);
  ASSERT_TRUE(r.emit[0].final_ack);
  rb = b.step(message(1050, r.emit[0]));
  EXPECT_EQ(b.state(), MeasState::TimeWait);
  EXPECT_TRUE(a.step(timer(2040)).done);
  EXPECT_TRUE(b.step(timer(2050)).done);
  EXPECT_EQ(a.state(), MeasState::Done);
  EXPECT_EQ(b.state(), MeasState::Done);
  const auto & s = *a.snapshot();
  EXPECT_EQ(s[0], (CounterSnapshot{100, 100, 100, 95, 1040}));
}

TEST(Session, SecondCycleReportsAndDecides)
{
  SessionConfig cfg;
  const std::vector<CounterSnapshot> prev{CounterSnapshot{0, 0, 0, 0, 0}};
  MeasurementSession a(2, Role::Initiator, 2, 1, cfg, prev);
  MeasurementSession b(1, Role::Responder, 2, 1, cfg);
  auto r = a.step(timer(0));
  auto rb = b.step(message(1, r.emit[0]));
  a.step(message(2, rb.emit[0]));
  r = a.step(timer(1002, 200, 200));
  rb = b.step(message(1003, r.emit[0], 200, 180));
  r = a.step(message(1004, rb.emit[0], 200, 200));
  ASSERT_EQ(a.reports().size(), 1u);
  EXPECT_EQ(a.reports()[0].loss, (Rational{1, 10}));
  // only one path, rule 3 keeps it
  EXPECT_EQ(a.decision(), PathId::ip());
  b.step(message(1005, r.emit[0]));
  EXPECT_EQ(b.reports(), a.reports());
  EXPECT_EQ(b.decision(), a.decision());
}

TEST(Session, KeepAliveFailureAborts)
{
  MeasurementSession a(2, Role::Initiator, 1, 1);
  a.step(timer(0));
  MeasEvent ka;
  ka.kind = MeasEvent::Kind::KeepAliveFailure;
  ka.now_ms = 5;
  EXPECT_TRUE(a.step(ka).aborted);
  EXPECT_EQ(a.state(), MeasState::Idle);
  EXPECT_EQ(a.deadline(), std::numeric_limits<std::int64_t>::max());
}

TEST(Session, IllegalMessagesAreViolations)
{
  MeasurementSession a(2, Role::Initiator, 1, 1);
  MeasMessage stop;
  stop.type = MsgType::Stop;
  stop.cycle = 1;
  stop.a_out = {0};
  EXPECT_TRUE(a.step(message(0, stop)).violation);
  MeasurementSession b(1, Role::Responder, 1, 1);
  EXPECT_TRUE(b.step(message(0, stop)).violation);
  MeasMessage other = stop;
  other.cycle = 9;
  EXPECT_TRUE(b.step(message(0, other)).violation);
  EXPECT_EQ(b.state(), MeasState::Idle);
}

TEST(Session, RandomEventsStayLegal)
{
  Rng rng(31);
  const MsgType types[] = {MsgType::Start, MsgType::StartAck, MsgType::Stop, MsgType::StopAck};
  for (int run = 0; run < 2000; ++run) {
    const Role role = rng.bernoulli(0.5) ? Role::Initiator : Role::Responder;
    MeasurementSession s(1, role, 1, 2, SessionConfig{},
                         rng.bernoulli(0.5) ? std::optional(std::vector<CounterSnapshot>(2)) : std::nullopt);
    std::int64_t t = 0;
    std::uint64_t out = 0;
    std::uint64_t in = 0;
    for (int k = 0; k < 40; ++k) {
      t += static_cast<std::int64_t>(rng.below(700));
      out += rng.below(50);
      in += rng.below(50);
      MeasEvent ev = timer(t, out, in);
      ev.counters.push_back(PathCounters{out, in});
      ev.available = {true, rng.bernoulli(0.8)};
      const auto pick = rng.below(10);
      if (pick < 6) {
        MeasMessage m;
        m.type = types[rng.below(4)];
        m.cycle = rng.bernoulli(0.9) ? 1 : 2;
        m.final_ack = rng.bernoulli(0.5);
        m.a_out = {out, out};
        m.b_counters = {PathCounters{out, in}, PathCounters{out, in}};
        ev.kind = MeasEvent::Kind::Message;
        ev.msg = m;
      } else if (pick == 6) {
        ev.kind = MeasEvent::Kind::KeepAliveFailure;
      }
      ASSERT_NO_THROW(s.step(ev));
      const auto st = static_cast<int>(s.state());
      ASSERT_GE(st, 0);
      ASSERT_LE(st, static_cast<int>(MeasState::Done));
      if (s.state() == MeasState::Done) {
        ASSERT_EQ(s.deadline(), std::nullopt);
      }
    }
  }
}

TEST(Replicate, SampleRates)
{
  SimPacket pkt;
  pkt.payload = {1};
  const EncapHeader fo{EncapKind::FiaOverlay, 1, 2, 0};
  Rng rng(4);
  SessionConfig none;
  none.sample_rate = 0.0;
  MeasurementSession idle(2, Role::Initiator, 1, 2);
  EXPECT_EQ(replicate_sample(idle, pkt, fo, rng), std::nullopt);

  auto measuring = [&](double rate) {
    SessionConfig c;
    c.sample_rate = rate;
    MeasurementSession a(2, Role::Initiator, 1, 2, c);
    MeasEvent ev;
    ev.kind = MeasEvent::Kind::Timer;
    a.step(ev);
    MeasMessage ack;
    ack.type = MsgType::StartAck;
    ack.cycle = 1;
    ev.kind = MeasEvent::Kind::Message;
    ev.msg = ack;
    a.step(ev);
    return a;
  };
  const auto zero = measuring(0.0);
  const auto all = measuring(1.0);
  const auto tenth = measuring(0.1);
  ASSERT_EQ(all.state(), MeasState::Measuring);
  int copies = 0;
  for (int i = 0; i < 10000; ++i) {
    ASSERT_EQ(replicate_sample(zero, pkt, fo, rng), std::nullopt);
    const auto c = replicate_sample(all, pkt, fo, rng);
    ASSERT_TRUE(c);
    ASSERT_EQ(c->encap.back(), fo);
    copies += replicate_sample(tenth, pkt, fo, rng).has_value();
  }
  EXPECT_NEAR(copies / 10000.0, 0.1, 0.01);
}

TEST(KeepAlive, DownAfterThreeMissesUpOnResponse)
{
  KeepAlive ka(2);
  ka.tick();
  ka.on_response(0);
  int intervals = 0;
  std::vector<std::size_t> down;
  while (down.empty()) {
    const auto t = ka.tick();
    ka.on_response(0);
    down = t.went_down;
    ++intervals;
  }
  EXPECT_EQ(intervals, 3);
  EXPECT_EQ(down, std::vector<std::size_t>{1});
  EXPECT_TRUE(ka.available(0));
  EXPECT_FALSE(ka.available(1));
  EXPECT_TRUE(ka.on_response(1));
  EXPECT_TRUE(ka.available(1));
  EXPECT_THROW(KeepAlive(1, 0), ConfigError);
}

TEST(DecidePath, Rules)
{
  const SelectConfig cfg;
  const auto rep = [](PathId p, std::uint64_t n, std::uint64_t d) { return LossReport{p, Rational{n, d}, 0, 0}; };
  EXPECT_EQ(decide_path({rep(PathId::ip(), 1, 10), rep(PathId::fia(0), 0, 1)}, 2, {true, true},
                        PathId::ip(), cfg),
            PathId::fia(0));
  EXPECT_EQ(decide_path({rep(PathId::ip(), 1, 100)}, 2, {true, true}, PathId::fia(0), cfg), PathId::ip());
  // no Ip report: keep the current path
  EXPECT_EQ(decide_path({rep(PathId::fia(0), 1, 2)}, 2, {true, true}, PathId::fia(0), cfg), PathId::fia(0));
  // a silent FIA path counts as fully lossy
  EXPECT_EQ(decide_path({rep(PathId::ip(), 1, 5)}, 2, {true, true}, PathId::ip(), cfg), PathId::ip());
  EXPECT_EQ(decide_path({rep(PathId::ip(), 0, 1), rep(PathId::fia(0), 0, 1)}, 2, {false, true},
                        PathId::ip(), cfg),
            PathId::fia(0));
}

TEST(LossOracle, LossOnlyChannelsAreExact)
{
  std::size_t windows = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Rng rng(seed);
    testing::PairConfig c;
    c.ab = sim::ChannelModel{0.05 + 0.3 * rng.uniform(), 0, 0, 1 + static_cast<std::int64_t>(rng.below(40)), 0, seed};
    c.ba = sim::ChannelModel{0.3 * rng.uniform(), 0, 0, 1 + static_cast<std::int64_t>(rng.below(40)), 0, seed + 100};
    c.session.period_ms = 200;
    c.session.interval_ms = 200;
    c.duration_ms = 5000;
    c.seed = seed;
    const auto res = testing::PairHarness(c).run();
    for (const auto & w : res.windows) {
      if (w.sent_ab == 0 || w.sent_ba == 0) {
        continue;
      }
      ASSERT_TRUE(w.report);
      ASSERT_EQ(w.report->loss, std::max(w.truth_ab, w.truth_ba)) << seed << " cycle " << w.cycle;
      ++windows;
    }
  }
  EXPECT_GT(windows, 30u);
}

TEST(Convergence, LiveChannelsFinishInTime)
{
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Rng rng(seed);
    testing::PairConfig c;
    const auto model = [&](std::uint64_t s) {
      return sim::ChannelModel{0.2 * rng.uniform(), 0.2 * rng.uniform(), 0.1 * rng.uniform(),
                               1 + static_cast<std::int64_t>(rng.below(60)), 0, s};
    };
    c.ab = model(seed);
    c.ba = model(seed + 7);
    c.duration_ms = 12000;
    c.seed = seed;
    const auto res = testing::PairHarness(c).run();
    const std::int64_t limit = 2 * c.session.period_ms + 2 * c.session.interval_ms;
    for (const auto & [cyc, span] : res.cycles) {
      if (span.start + limit > c.duration_ms) {
        continue;
      }
      ASSERT_TRUE(span.initiator_end) << seed << " cycle " << cyc;
      ASSERT_LE(*span.initiator_end - span.start, limit);
      if (span.responder_start) {
        ASSERT_TRUE(span.responder_end) << seed << " cycle " << cyc;
        ASSERT_LE(*span.responder_end - span.start, limit);
      }
    }
  }
}

}  // namespace
}  // namespace dena
