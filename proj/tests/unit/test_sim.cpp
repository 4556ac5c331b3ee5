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

#include <algorithm>
#include <sstream>

#include "dena/error.hpp"
#include "dena/sim/channel.hpp"
#include "dena/sim/nat.hpp"
#include "dena/sim/network.hpp"
#include "dena/sim/scenario.hpp"

namespace dena::sim
{
namespace
{

SimPacket pkt(std::uint64_t seq)
{
  SimPacket p;
  p.tuple = FiveTuple{make_addr(10, 0, 0, 2), make_addr(1, 1, 1, 1), 1234, 80, proto::kTcp};
  p.seq_no = seq;
  return p;
}

TEST(Channel, LosslessKeepsOrderAndDelay)
{
  Channel ch(ChannelModel{0, 0, 0, 25, 3, 1});
  for (std::uint64_t i = 0; i < 100; ++i) {
    const auto out = ch.transmit(pkt(i), static_cast<std::int64_t>(i));
    ASSERT_EQ(out.arrivals.size(), 1u);
    EXPECT_EQ(out.arrivals[0].at, static_cast<std::int64_t>(i) + 25);
    EXPECT_EQ(out.arrivals[0].pkt.seq_no, i);
    EXPECT_EQ(out.arrivals[0].pkt.ttl, 61);
  }
}

TEST(Channel, LossRateAndDuplicates)
{
  Channel lossy(ChannelModel{0.2, 0, 0, 1, 0, 7});
  int dropped = 0;
  for (int i = 0; i < 20000; ++i) {
    dropped += lossy.transmit(pkt(i), i).dropped;
  }
  EXPECT_NEAR(dropped / 20000.0, 0.2, 0.015);
  Channel dupy(ChannelModel{0, 0, 1.0, 1, 0, 7});
  const auto out = dupy.transmit(pkt(1), 0);
  ASSERT_EQ(out.arrivals.size(), 2u);
  EXPECT_TRUE(out.arrivals[1].duplicate);
  Channel dead(ChannelModel{1.0, 0, 0, 1, 0, 7});
  EXPECT_TRUE(dead.transmit(pkt(1), 0).dropped);
}

TEST(Channel, ReorderSwapsWithSuccessorOrFlushes)
{
  Channel ch(ChannelModel{0, 1.0, 0, 10, 0, 3});
  const auto first = ch.transmit(pkt(1), 0);
  EXPECT_TRUE(first.held);
  EXPECT_TRUE(first.arrivals.empty());
  const auto second = ch.transmit(pkt(2), 1);
  ASSERT_EQ(second.arrivals.size(), 2u);
  EXPECT_EQ(second.arrivals[0].pkt.seq_no, 2u);
  EXPECT_EQ(second.arrivals[1].pkt.seq_no, 1u);
  ch.set_reorder(1.0);
  EXPECT_TRUE(ch.transmit(pkt(3), 5).held);
  EXPECT_EQ(ch.flush_due(), 5 + Channel::kHoldLimitMs);
  const auto flushed = ch.flush(10);
  ASSERT_EQ(flushed.size(), 1u);
  EXPECT_EQ(flushed[0].pkt.seq_no, 3u);
  EXPECT_THROW(Channel(ChannelModel{1.5, 0, 0, 0, 0, 0}), ConfigError);
}

TEST(Nat, SharedAddressAndUnsolicitedInbound)
{
  NatState nat(NatConfig{make_addr(5, 5, 5, 5), 40000, 30000});
  SimPacket a = pkt(1);
  SimPacket b = pkt(2);
  b.tuple.src_addr = make_addr(10, 0, 0, 3);
  const auto pa = nat_forward(nat, a, Direction::Outbound, 0);
  const auto pb = nat_forward(nat, b, Direction::Outbound, 0);
  EXPECT_EQ(pa.tuple.src_addr, make_addr(5, 5, 5, 5));
  EXPECT_EQ(pb.tuple.src_addr, make_addr(5, 5, 5, 5));
  EXPECT_NE(pa.tuple.src_port, pb.tuple.src_port);
  EXPECT_EQ(nat.public_of(a.tuple)->src_port, pa.tuple.src_port);

  SimPacket reply = pa;
  reply.tuple = pa.tuple.reversed();
  const auto back = nat_forward(nat, reply, Direction::Inbound, 10);
  EXPECT_EQ(back.tuple.dst_addr, a.tuple.src_addr);
  EXPECT_EQ(back.tuple.dst_port, a.tuple.src_port);

  SimPacket stranger = reply;
  stranger.tuple.src_addr = make_addr(9, 9, 9, 9);
  EXPECT_THROW(nat_forward(nat, stranger, Direction::Inbound, 10), NoMapping);
  // mapping expires after the idle timeout
  EXPECT_THROW(nat_forward(nat, reply, Direction::Inbound, 40000), NoMapping);
}

TEST(Nat, TunnelHolePunch)
{
  NatState nat(NatConfig{make_addr(5, 5, 5, 5), 40000, 30000});
  const Addr dena = make_addr(10, 0, 0, 1);
  const Addr gw = make_addr(100, 64, 0, 1);
  const auto out = nat_forward(nat, encapsulate(pkt(1), EncapHeader{EncapKind::IpTunnel, dena, gw, 0}),
                               Direction::Outbound, 0);
  EXPECT_EQ(out.encap.back().endpoint_src, make_addr(5, 5, 5, 5));
  const auto in = nat_forward(
    nat, encapsulate(pkt(2), EncapHeader{EncapKind::IpTunnel, gw, make_addr(5, 5, 5, 5), 0}),
    Direction::Inbound, 100);
  EXPECT_EQ(in.encap.back().endpoint_dst, dena);
}

TEST(ScenarioParser, ReadsTheBundledFile)
{
  const Scenario sc = load_scenario(std::string(DENA_SOURCE_DIR) + "/scenarios/failover.scenario");
  EXPECT_EQ(sc.duration_ms, 140000);
  EXPECT_EQ(sc.hosts.size(), 2u);
  EXPECT_EQ(sc.flows.size(), 2u);
  ASSERT_EQ(sc.schedule.size(), 2u);
  EXPECT_EQ(sc.schedule[0].at_ms, 80000);
  EXPECT_DOUBLE_EQ(sc.schedule[0].value, 0.10);
  EXPECT_EQ(sc.session.period_ms, 1000);
  EXPECT_EQ(sc.session.interval_ms, 1000);
  EXPECT_DOUBLE_EQ(sc.session.select.switch_threshold, 0.05);
  EXPECT_EQ(sc.detect.threshold, 3u);
  ASSERT_TRUE(sc.nat_public[1]);
  EXPECT_EQ(*sc.nat_public[1], make_addr(5, 5, 5, 5));
}

TEST(ScenarioParser, Errors)
{
  EXPECT_THROW(load_scenario("/nonexistent/x.scenario"), ConfigError);
  std::istringstream unknown("duration_ms = 100\nbogus = 3\n");
  try {
    parse_scenario(unknown, "t.scenario");
    FAIL();
  } catch (const ConfigError & e) {
    EXPECT_NE(std::string(e.what()).find("t.scenario:2"), std::string::npos) << e.what();
  }
  std::istringstream bad_flow("host.a = 1 10.0.0.2\nflow.f = a:1 nobody:2 10 tcp\n");
  EXPECT_THROW(parse_scenario(bad_flow), ConfigError);
  std::istringstream bad_loss("ip.loss = 1.5\n");
  EXPECT_THROW(parse_scenario(bad_loss), ConfigError);
  EXPECT_THROW(parse_addr("1.2.3"), ConfigError);
  EXPECT_EQ(parse_addr("10.0.0.2"), make_addr(10, 0, 0, 2));
}

Scenario two_sites(double loss, std::int64_t duration)
{
  Scenario sc;
  sc.duration_ms = duration;
  sc.ip.loss_prob = loss;
  sc.hosts = {HostSpec{"a", 0, make_addr(10, 1, 0, 2)}, HostSpec{"b", 1, make_addr(10, 2, 0, 2)}};
  sc.flows = {FlowSpec{"f", 0, 1000, 1, 80, 100.0, proto::kTcp, 100, 0, 1000}};
  return sc;
}

TEST(Network, LosslessDeliversEverythingInOrder)
{
  const Trace tr = run(two_sites(0.0, 3000), 1);
  EXPECT_EQ(tr.stats.host_sent, 100u);
  EXPECT_EQ(tr.stats.host_delivered, 100u);
  std::vector<std::uint64_t> sent;
  std::vector<std::uint64_t> got;
  for (const auto & r : tr.events) {
    if (r.event == TraceEvent::Send && r.node == 8) {
      sent.push_back(r.seq_no);
    }
    if (r.event == TraceEvent::Deliver) {
      got.push_back(r.seq_no);
    }
  }
  ASSERT_EQ(sent.size(), 100u);
  EXPECT_EQ(got, sent);
  EXPECT_EQ(tr.stats.transparency_violations, 0u);
  EXPECT_EQ(tr.stats.control_to_host, 0u);
}

TEST(Network, DeadPathDeliversNothing)
{
  const Trace tr = run(two_sites(1.0, 3000), 1);
  EXPECT_EQ(tr.stats.host_delivered, 0u);
  EXPECT_TRUE(tr.switches.empty());
}

TEST(Network, DeterministicAndConserving)
{
  Scenario sc = two_sites(0.05, 4000);
  sc.ip.reorder_prob = 0.05;
  sc.ip.dup_prob = 0.02;
  sc.nat_public[1] = make_addr(5, 5, 5, 5);
  sc.flows.push_back(FlowSpec{"r", 1, 80, 0, 1000, 50.0, proto::kTcp, 40, 0, std::nullopt});
  const Trace a = run(sc, 9);
  const Trace b = run(sc, 9);
  EXPECT_EQ(a, b);
  std::ostringstream ea;
  std::ostringstream eb;
  a.write_events_csv(ea);
  b.write_events_csv(eb);
  EXPECT_EQ(ea.str(), eb.str());
  EXPECT_NE(run(sc, 10).events, a.events);
  for (std::int64_t d : {100, 777, 1500, 4000}) {
    sc.duration_ms = d;
    const auto s = run(sc, 3).stats;
    EXPECT_EQ(s.arrivals + s.drops + s.in_flight, s.sends + s.duplicates) << d;
  }
}

TEST(Network, DetectsBootstrapsAndStaysTransparentBehindNat)
{
  Scenario sc = two_sites(0.0, 6000);
  sc.nat_public[1] = make_addr(5, 5, 5, 5);
  sc.flows[0].stop_ms.reset();
  sc.flows.push_back(FlowSpec{"r", 1, 80, 0, 1000, 50.0, proto::kTcp, 40, 0, std::nullopt});
  const Trace tr = run(sc, 2);
  // one side detects, the bootstrap exchange tells the other
  EXPECT_GE(tr.detect_ms[0].size() + tr.detect_ms[1].size(), 1u);
  EXPECT_FALSE(tr.bootstrap_ms[0].empty());
  EXPECT_FALSE(tr.bootstrap_ms[1].empty());
  EXPECT_GT(tr.stats.measurements_done, 0u);
  EXPECT_EQ(tr.stats.transparency_violations, 0u);
  EXPECT_EQ(tr.stats.control_to_host, 0u);
  EXPECT_EQ(tr.stats.protocol_violations, 0u);
  EXPECT_TRUE(tr.switches.empty());
}

TEST(Network, RejectsBadScenario)
{
  Scenario sc = two_sites(0.0, 1000);
  sc.flows[0].dst_host = 7;
  EXPECT_THROW(run(sc, 1), ConfigError);
}

}  // namespace
}  // namespace dena::sim
