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

#include "dena/sim/network.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <queue>
#include <unordered_map>
#include <unordered_set>

#include "dena/error.hpp"
#include "dena/measure.hpp"
#include "dena/sim/channel.hpp"
#include "dena/sim/nat.hpp"

namespace dena::sim
{

namespace
{

constexpr int kSites = 2;
constexpr std::int64_t kDedupHorizonMs = 10000;

// Trace node indices; hosts follow.
enum Node : std::uint8_t { kDena1, kDena2, kNat1, kNat2, kGw1, kGw2, kIpNode, kFiaNode, kFirstHost };

std::uint8_t dena_node(int site) { return static_cast<std::uint8_t>(kDena1 + site); }
std::uint8_t nat_node(int site) { return static_cast<std::uint8_t>(kNat1 + site); }
std::uint8_t gw_node(int site) { return static_cast<std::uint8_t>(kGw1 + site); }

std::uint64_t tuple_hash(const FiveTuple & t)
{
  return mix64(
    (std::uint64_t{t.src_addr} << 32 | t.dst_addr) ^
    mix64(std::uint64_t{t.src_port} << 24 | std::uint64_t{t.dst_port} << 8 | t.protocol));
}

std::vector<std::uint8_t> make_payload(std::uint64_t seq, std::size_t size)
{
  std::vector<std::uint8_t> p(size, static_cast<std::uint8_t>(seq * 131 + 7));
  for (std::size_t i = 0; i < 8 && i < size; ++i) {
    p[i] = static_cast<std::uint8_t>(seq >> (8 * i));
  }
  return p;
}

struct FlowRec
{
  FiveTuple key;  // local -> remote as seen by this DENA
  DiscoveryState disc;
  std::optional<BootstrapSession> boot;
  bool routed = false;
  bool gave_up_logged = false;
  std::optional<PrivateEndpoint> remote_private;
  std::optional<SimPacket> templ;
};

struct PeerRec
{
  std::uint64_t id = 0;
  bool initiator = false;
  PathId active = PathId::ip();
  std::map<std::uint32_t, MeasurementSession> sessions;
  std::uint32_t next_cycle = 1;
  std::uint32_t max_seen = 0;
  std::optional<std::vector<CounterSnapshot>> last_snap;
  std::vector<LossReport> last_reports;
  KeepAlive ka;
  std::int64_t next_ka = 0;
  std::vector<PathCounters> counters;
  FiveTuple ctrl_flow;
  std::int64_t rtt_ms = 0;
  std::unordered_set<std::uint64_t> seen;
  std::deque<std::pair<std::int64_t, std::uint64_t>> seen_order;
};

struct DenaRt
{
  int site = 0;
  bool enabled = true;
  BootstrapInfo base;
  Addr tunnel_addr = 0;
  std::map<FiveTuple, FlowRec> flows;
  std::map<FiveTuple, FiveTuple> private_form;  // (local -> remote private) -> key
  std::optional<PeerRec> peer;
  Rng rng{0};
};

struct InFlight
{
  std::int64_t at;
  std::uint64_t order;
  int to_site;
  std::uint8_t slot;
  bool duplicate;
  SimPacket pkt;
};

struct Later
{
  bool operator()(const InFlight & a, const InFlight & b) const
  {
    return std::tie(a.at, a.order) > std::tie(b.at, b.order);
  }
};

class Engine
{
public:
  Engine(const Scenario & sc, std::uint64_t seed);
  Trace run();

private:
  std::size_t n_slots() const { return sc_.fia_paths + 1; }
  Channel & channel(int from_site, std::size_t slot)
  {
    return slot == 0 ? ip_[from_site] : fia_[from_site][slot - 1];
  }

  void record(std::int64_t t, std::uint8_t node, TraceEvent ev, std::uint8_t path, std::uint64_t seq)
  {
    if (sc_.record_packets) {
      trace_.events.push_back(TraceRecord{t, seq, node, ev, path});
    }
  }
  void note(std::int64_t t, std::uint8_t node, TraceEvent ev, std::uint8_t path = kNoPath)
  {
    trace_.events.push_back(TraceRecord{t, 0, node, ev, path});
  }

  void apply_schedule(std::int64_t t);
  void emit_flows(std::int64_t t);
  void host_send(std::size_t flow, std::int64_t t);
  void dena_outbound(DenaRt & d, SimPacket pkt, std::int64_t t);
  void route_data(DenaRt & d, FlowRec & rec, SimPacket pkt, std::int64_t t);
  void send_path(int site, std::size_t slot, SimPacket pkt, const FlowRec * rec, std::int64_t t);
  void transmit(int site, std::size_t slot, SimPacket pkt, std::int64_t t);
  void arrive(InFlight item);
  void dena_inbound(DenaRt & d, std::size_t slot, SimPacket pkt, std::int64_t t);
  void deliver_host(int site, const SimPacket & pkt, std::int64_t t);
  void handle_control(DenaRt & d, std::size_t slot, const SimPacket & pkt, std::int64_t t);
  void send_control(DenaRt & d, std::size_t slot, const FiveTuple & key, const ControlMessage & m,
                    std::int64_t t);
  FlowRec & flow_rec(DenaRt & d, const FiveTuple & key);
  void start_bootstrap(DenaRt & d, FlowRec & rec, std::int64_t t);
  void after_bootstrap(DenaRt & d, FlowRec & rec, std::int64_t t);
  void establish(DenaRt & d, FlowRec & rec, std::int64_t t);
  void dena_tick(DenaRt & d, std::int64_t t);
  void start_cycle(DenaRt & d, std::int64_t t);
  MeasEvent meas_event(const DenaRt & d, MeasEvent::Kind kind, std::int64_t t) const;
  void step_session(DenaRt & d, std::uint32_t cycle, const MeasEvent & ev);
  void switch_to(DenaRt & d, PathId to, std::int64_t t);
  bool any_measuring(const PeerRec & p) const;
  void count_throughput(std::size_t slot, const SimPacket & pkt, std::int64_t t);

  const Scenario & sc_;
  std::uint64_t seed_;
  Trace trace_;
  std::array<Channel, kSites> ip_;
  std::array<std::vector<Channel>, kSites> fia_;
  std::array<std::optional<NatState>, kSites> nat_;
  std::array<std::optional<Addr>, kSites> gw_registered_;
  std::array<DenaRt, kSites> dena_;
  std::priority_queue<InFlight, std::vector<InFlight>, Later> queue_;
  std::uint64_t order_ = 0;
  std::uint64_t next_seq_ = 1;
  std::vector<std::uint16_t> host_ipid_;
  std::unordered_map<std::uint64_t, std::uint32_t> sent_;  // seq_no -> flow
  std::vector<std::int64_t> flow_start_;
};

ChannelModel seeded(ChannelModel m, std::uint64_t seed, std::uint64_t a, std::uint64_t b)
{
  m.seed = derive_seed(seed, {0xC4A7, a, b});
  return m;
}

Engine::Engine(const Scenario & sc, std::uint64_t seed)
: sc_(sc),
  seed_(seed),
  ip_{Channel(seeded(sc.ip, seed, 0, 0)), Channel(seeded(sc.ip, seed, 1, 0))}
{
  sc_.validate();
  for (int s = 0; s < kSites; ++s) {
    for (std::size_t i = 0; i < sc_.fia_paths; ++i) {
      fia_[s].emplace_back(seeded(sc_.fia, seed, static_cast<std::uint64_t>(s), i + 1));
    }
    if (sc_.nat_public[s]) {
      nat_[s].emplace(NatConfig{*sc_.nat_public[s], 40000, sc_.nat_idle_timeout_ms});
    }
    DenaRt & d = dena_[s];
    d.site = s;
    d.enabled = sc_.dena_enabled[s];
    d.rng = Rng(derive_seed(seed, {0xDE4A, static_cast<std::uint64_t>(s)}));
    d.base.dena_id = derive_seed(seed, {0x1D, static_cast<std::uint64_t>(s)}) | 1;
    d.base.fia_isd = static_cast<std::uint16_t>(1 + s);
    d.base.fia_aid = 0xFF000000u + static_cast<std::uint32_t>(s);
    d.base.gateway_addr = sc_.gateway[s];
    for (const auto & h : sc_.hosts) {
      if (h.site == s) {
        d.tunnel_addr = h.addr;
        break;
      }
    }
  }
  trace_.nodes = {"dena1", "dena2", "nat1", "nat2", "gw1", "gw2", "ip", "fia"};
  Rng hrng(derive_seed(seed, {0x1F1D}));
  for (const auto & h : sc_.hosts) {
    trace_.nodes.push_back(h.name);
    host_ipid_.push_back(static_cast<std::uint16_t>(hrng.below(0x10000)));
  }
}

void Engine::apply_schedule(std::int64_t t)
{
  for (const auto & e : sc_.schedule) {
    if (e.at_ms != t) {
      continue;
    }
    const auto dot = e.key.find('.');
    const std::string head = e.key.substr(0, dot);
    const std::string knob = e.key.substr(dot + 1);
    std::vector<Channel *> targets;
    for (int s = 0; s < kSites; ++s) {
      if (head == "ip") {
        targets.push_back(&ip_[s]);
      } else {
        for (auto & c : fia_[s]) {
          targets.push_back(&c);
        }
      }
    }
    for (Channel * c : targets) {
      if (knob == "loss") {
        c->set_loss(e.value);
      } else if (knob == "reorder") {
        c->set_reorder(e.value);
      } else if (knob == "dup") {
        c->set_dup(e.value);
      } else {
        c->set_delay(static_cast<std::int64_t>(e.value));
      }
    }
  }
}

void Engine::emit_flows(std::int64_t t)
{
  for (std::size_t f = 0; f < sc_.flows.size(); ++f) {
    const FlowSpec & fs = sc_.flows[f];
    const std::int64_t stop = fs.stop_ms.value_or(sc_.duration_ms);
    if (t < fs.start_ms || t >= stop) {
      continue;
    }
    const double k = static_cast<double>(t - fs.start_ms);
    const auto due = static_cast<std::int64_t>(std::floor((k + 1.0) * fs.rate_pps / 1000.0)) -
                     static_cast<std::int64_t>(std::floor(k * fs.rate_pps / 1000.0));
    for (std::int64_t i = 0; i < due; ++i) {
      host_send(f, t);
    }
  }
}

void Engine::host_send(std::size_t f, std::int64_t t)
{
  const FlowSpec & fs = sc_.flows[f];
  const HostSpec & src = sc_.hosts[fs.src_host];
  const HostSpec & dst = sc_.hosts[fs.dst_host];
  FiveTuple tuple{src.addr, dst.addr, fs.src_port, fs.dst_port, fs.protocol};
  if (nat_[dst.site]) {
    // A host behind a NAT is reachable only through the mapping its own
    // traffic created.
    const FiveTuple back{dst.addr, src.addr, fs.dst_port, fs.src_port, fs.protocol};
    auto pub = nat_[dst.site]->public_of(back);
    if (!pub) {
      return;
    }
    tuple.dst_addr = pub->src_addr;
    tuple.dst_port = pub->src_port;
  }
  SimPacket pkt;
  pkt.tuple = tuple;
  pkt.ttl = sc_.host_ttl;
  pkt.ipid = host_ipid_[fs.src_host]++;
  pkt.seq_no = next_seq_++;
  pkt.payload = make_payload(pkt.seq_no, fs.payload_bytes);
  sent_.emplace(pkt.seq_no, static_cast<std::uint32_t>(f));
  ++trace_.stats.host_sent;
  record(t, static_cast<std::uint8_t>(kFirstHost + fs.src_host), TraceEvent::Send, kNoPath,
         pkt.seq_no);
  DenaRt & d = dena_[src.site];
  if (d.enabled) {
    dena_outbound(d, std::move(pkt), t);
  } else {
    send_path(src.site, 0, std::move(pkt), nullptr, t);
  }
}

FlowRec & Engine::flow_rec(DenaRt & d, const FiveTuple & key)
{
  auto it = d.flows.find(key);
  if (it == d.flows.end()) {
    const std::uint64_t s = derive_seed(seed_, {0xF10, static_cast<std::uint64_t>(d.site),
                                                tuple_hash(key)});
    it = d.flows.emplace(key, FlowRec{key, DiscoveryState(key, s, sc_.detect), {}, false, false,
                                      {}, {}})
           .first;
  }
  return it->second;
}

void Engine::dena_outbound(DenaRt & d, SimPacket pkt, std::int64_t t)
{
  FlowRec & rec = flow_rec(d, pkt.tuple);
  SimPacket templ = pkt;
  templ.payload.clear();
  rec.templ = std::move(templ);
  if (d.peer && rec.routed) {
    route_data(d, rec, std::move(pkt), t);
    return;
  }
  if (rec.disc.announcing()) {
    const auto before = rec.disc.attempts_used();
    SimPacket stamped = rec.disc.stamp(pkt);
    if (stamped.ttl != pkt.ttl || stamped.ipid != pkt.ipid ||
        rec.disc.attempts_used() != before) {
      record(t, dena_node(d.site), TraceEvent::Stamp, 0, pkt.seq_no);
    }
    pkt = std::move(stamped);
  }
  if (rec.disc.verdict() == Verdict::GaveUp && !rec.gave_up_logged) {
    rec.gave_up_logged = true;
    note(t, dena_node(d.site), TraceEvent::GaveUp);
  }
  send_path(d.site, 0, std::move(pkt), &rec, t);
}

bool Engine::any_measuring(const PeerRec & p) const
{
  for (const auto & [c, s] : p.sessions) {
    if (s.state() == MeasState::Measuring) {
      return true;
    }
  }
  return false;
}

void Engine::route_data(DenaRt & d, FlowRec & rec, SimPacket pkt, std::int64_t t)
{
  PeerRec & p = *d.peer;
  const std::size_t active = p.active.slot();
  if (any_measuring(p) && sc_.session.sample_rate > 0.0) {
    for (std::size_t s = 0; s < n_slots(); ++s) {
      if (s == active || !p.ka.available(s)) {
        continue;
      }
      if (d.rng.bernoulli(sc_.session.sample_rate)) {
        ++p.counters[s].out;
        ++trace_.stats.replicas;
        send_path(d.site, s, pkt, &rec, t);
      }
    }
  }
  ++p.counters[active].out;
  send_path(d.site, active, std::move(pkt), &rec, t);
}

void Engine::send_path(int site, std::size_t slot, SimPacket pkt, const FlowRec * rec, std::int64_t t)
{
  if (slot > 0) {
    const DenaRt & d = dena_[site];
    if (rec && rec->remote_private) {
      pkt.tuple.dst_addr = rec->remote_private->addr;
      pkt.tuple.dst_port = rec->remote_private->port;
    }
    pkt = encapsulate(std::move(pkt), EncapHeader{EncapKind::IpTunnel, d.tunnel_addr,
                                                  sc_.gateway[site], 0});
  }
  if (nat_[site]) {
    pkt = nat_[site]->outbound(std::move(pkt), t);
  }
  if (slot > 0) {
    // The local gateway learns where its DENA is reachable.
    gw_registered_[site] = pkt.encap.back().endpoint_src;
    pkt = encapsulate(std::move(pkt),
                      EncapHeader{EncapKind::FiaOverlay, sc_.gateway[site], sc_.gateway[1 - site],
                                  static_cast<std::uint8_t>(slot - 1)});
  }
  transmit(site, slot, std::move(pkt), t);
}

void Engine::transmit(int site, std::size_t slot, SimPacket pkt, std::int64_t t)
{
  const std::uint8_t node = slot == 0 ? kIpNode : kFiaNode;
  const std::uint64_t seq = pkt.seq_no;
  ++trace_.stats.sends;
  auto out = channel(site, slot).transmit(std::move(pkt), t);
  if (out.dropped) {
    ++trace_.stats.drops;
    record(t, node, TraceEvent::Drop, static_cast<std::uint8_t>(slot), seq);
    return;
  }
  for (auto & a : out.arrivals) {
    if (a.duplicate) {
      ++trace_.stats.duplicates;
      record(t, node, TraceEvent::Duplicate, static_cast<std::uint8_t>(slot), a.pkt.seq_no);
    }
    queue_.push(InFlight{a.at, order_++, 1 - site, static_cast<std::uint8_t>(slot), a.duplicate,
                         std::move(a.pkt)});
  }
}

void Engine::arrive(InFlight item)
{
  const int r = item.to_site;
  const std::int64_t t = item.at;
  SimPacket pkt = std::move(item.pkt);
  ++trace_.stats.arrivals;
  if (item.slot > 0) {
    auto [inner, fia_hdr] = decapsulate(std::move(pkt));
    pkt = std::move(inner);
    if (!gw_registered_[r]) {
      ++trace_.stats.gateway_drops;
      record(t, gw_node(r), TraceEvent::Drop, item.slot, pkt.seq_no);
      return;
    }
    auto & tunnel = pkt.encap.back();
    tunnel.endpoint_src = sc_.gateway[r];
    tunnel.endpoint_dst = *gw_registered_[r];
  }
  if (nat_[r]) {
    try {
      pkt = nat_[r]->inbound(std::move(pkt), t);
    } catch (const NoMapping &) {
      ++trace_.stats.nat_drops;
      record(t, nat_node(r), TraceEvent::Drop, item.slot, item.pkt.seq_no);
      return;
    }
  }
  if (item.slot > 0) {
    pkt = decapsulate(std::move(pkt)).first;
  }
  DenaRt & d = dena_[r];
  if (d.enabled) {
    dena_inbound(d, item.slot, std::move(pkt), t);
  } else {
    deliver_host(r, pkt, t);
  }
}

void Engine::count_throughput(std::size_t slot, const SimPacket & pkt, std::int64_t t)
{
  const auto sec = static_cast<std::size_t>(t / 1000);
  if (trace_.throughput.size() <= sec) {
    trace_.throughput.resize(sec + 1, std::vector<std::uint64_t>(n_slots(), 0));
  }
  trace_.throughput[sec][slot] += pkt.payload.size();
}

void Engine::dena_inbound(DenaRt & d, std::size_t slot, SimPacket pkt, std::int64_t t)
{
  if (is_control(pkt)) {
    record(t, dena_node(d.site), TraceEvent::Control, static_cast<std::uint8_t>(slot), pkt.seq_no);
    handle_control(d, slot, pkt, t);
    return;
  }
  count_throughput(slot, pkt, t);
  FiveTuple key = pkt.tuple.reversed();
  if (slot > 0) {
    auto pf = d.private_form.find(key);
    if (pf != d.private_form.end()) {
      key = pf->second;
      pkt.tuple.src_addr = key.dst_addr;
      pkt.tuple.src_port = key.dst_port;
    }
  }
  FlowRec & rec = flow_rec(d, key);
  if (d.peer && (rec.routed || slot > 0)) {
    PeerRec & p = *d.peer;
    ++p.counters[slot].in;
    if (!p.seen.insert(pkt.seq_no).second) {
      ++trace_.stats.dedup_drops;
      return;
    }
    p.seen_order.emplace_back(t, pkt.seq_no);
    while (!p.seen_order.empty() && p.seen_order.front().first < t - kDedupHorizonMs) {
      p.seen.erase(p.seen_order.front().second);
      p.seen_order.pop_front();
    }
    deliver_host(d.site, pkt, t);
    return;
  }
  const Verdict before = rec.disc.verdict();
  rec.disc.ingest(pkt);
  if (before == Verdict::Unknown && rec.disc.verdict() == Verdict::PeerDetected) {
    note(t, dena_node(d.site), TraceEvent::Detect);
    trace_.detect_ms[d.site].push_back(t);
    if (!rec.boot) {
      start_bootstrap(d, rec, t);
    }
  }
  deliver_host(d.site, pkt, t);
}

void Engine::deliver_host(int site, const SimPacket & pkt, std::int64_t t)
{
  if (is_control(pkt)) {
    ++trace_.stats.control_to_host;
    return;
  }
  ++trace_.stats.host_delivered;
  auto it = sent_.find(pkt.seq_no);
  bool ok = it != sent_.end() && pkt.encap.empty();
  std::size_t dst_host = 0;
  if (ok) {
    const FlowSpec & fs = sc_.flows[it->second];
    const HostSpec & src = sc_.hosts[fs.src_host];
    const HostSpec & dst = sc_.hosts[fs.dst_host];
    dst_host = fs.dst_host;
    FiveTuple want{src.addr, dst.addr, fs.src_port, fs.dst_port, fs.protocol};
    if (nat_[src.site]) {
      auto pub = nat_[src.site]->public_of(want);
      if (pub) {
        want.src_addr = pub->src_addr;
        want.src_port = pub->src_port;
      }
    }
    ok = dst.site == site && pkt.tuple == want &&
         pkt.payload == make_payload(pkt.seq_no, fs.payload_bytes);
  }
  if (!ok) {
    ++trace_.stats.transparency_violations;
  }
  record(t, static_cast<std::uint8_t>(kFirstHost + dst_host), TraceEvent::Deliver, kNoPath,
         pkt.seq_no);
}

void Engine::send_control(DenaRt & d, std::size_t slot, const FiveTuple & key,
                          const ControlMessage & m, std::int64_t t)
{
  auto it = d.flows.find(key);
  SimPacket templ;
  if (it != d.flows.end() && it->second.templ) {
    templ = *it->second.templ;
  } else {
    templ.tuple = key;
    templ.ttl = sc_.host_ttl;
  }
  SimPacket pkt = make_control(templ, m);
  pkt.seq_no = next_seq_++;
  record(t, dena_node(d.site), TraceEvent::Control, static_cast<std::uint8_t>(slot), pkt.seq_no);
  send_path(d.site, slot, std::move(pkt), it != d.flows.end() ? &it->second : nullptr, t);
}

void Engine::start_bootstrap(DenaRt & d, FlowRec & rec, std::int64_t t)
{
  BootstrapInfo info = d.base;
  if (nat_[d.site]) {
    info.private_host = PrivateEndpoint{rec.key.src_addr, rec.key.src_port};
  }
  rec.boot.emplace(info, sc_.retry);
  send_control(d, 0, rec.key, rec.boot->start(t), t);
}

void Engine::after_bootstrap(DenaRt & d, FlowRec & rec, std::int64_t t)
{
  if (rec.routed || !rec.boot) {
    return;
  }
  if (rec.boot->status() == BootstrapSession::Status::Established) {
    establish(d, rec, t);
  }
}

void Engine::establish(DenaRt & d, FlowRec & rec, std::int64_t t)
{
  const PeerRecord pr = *rec.boot->peer();
  if (!d.peer) {
    PeerRec p{pr.peer.dena_id, pr.local_is_initiator, PathId::ip(), {}, 1, 0, {}, {},
              KeepAlive(n_slots(), sc_.keepalive_misses), t,
              std::vector<PathCounters>(n_slots()), rec.key, 0, {}, {}};
    d.peer.emplace(std::move(p));
    if (d.peer->initiator) {
      start_cycle(d, t);
    }
  } else if (d.peer->id != pr.peer.dena_id) {
    // One peer per DENA in this simulator; other DENAs stay on plain IP.
    return;
  }
  rec.routed = true;
  rec.remote_private = pr.peer.private_host;
  if (rec.remote_private) {
    FiveTuple pf = rec.key;
    pf.dst_addr = rec.remote_private->addr;
    pf.dst_port = rec.remote_private->port;
    d.private_form[pf] = rec.key;
  }
  note(t, dena_node(d.site), TraceEvent::Bootstrap);
  trace_.bootstrap_ms[d.site].push_back(t);
}

MeasEvent Engine::meas_event(const DenaRt & d, MeasEvent::Kind kind, std::int64_t t) const
{
  MeasEvent ev;
  ev.kind = kind;
  ev.now_ms = t;
  ev.counters = d.peer->counters;
  ev.active = d.peer->active;
  ev.available = d.peer->ka.availability();
  return ev;
}

void Engine::start_cycle(DenaRt & d, std::int64_t t)
{
  PeerRec & p = *d.peer;
  SessionConfig cfg = sc_.session;
  cfg.rto_ms = std::max<std::int64_t>(sc_.session.rto_ms, 2 * p.rtt_ms);
  const std::uint32_t cycle = p.next_cycle++;
  p.sessions.emplace(cycle, MeasurementSession(p.id, Role::Initiator, cycle, n_slots(), cfg,
                                               p.last_snap));
  step_session(d, cycle, meas_event(d, MeasEvent::Kind::Timer, t));
}

void Engine::switch_to(DenaRt & d, PathId to, std::int64_t t)
{
  PeerRec & p = *d.peer;
  if (to == p.active || to.slot() >= n_slots()) {
    return;
  }
  trace_.switches.push_back(SwitchRecord{t, d.site, p.active, to});
  note(t, dena_node(d.site), TraceEvent::Switch, static_cast<std::uint8_t>(to.slot()));
  p.active = to;
}

void Engine::step_session(DenaRt & d, std::uint32_t cycle, const MeasEvent & ev)
{
  PeerRec & p = *d.peer;
  auto it = p.sessions.find(cycle);
  if (it == p.sessions.end()) {
    return;
  }
  StepResult r = it->second.step(ev);
  const std::int64_t t = ev.now_ms;
  if (r.violation) {
    ++trace_.stats.protocol_violations;
  }
  for (const auto & m : r.emit) {
    send_control(d, p.active.slot(), p.ctrl_flow, encode_meas(m), t);
  }
  if (auto rtt = it->second.rtt_ms()) {
    p.rtt_ms = std::max<std::int64_t>(p.rtt_ms / 2, *rtt);
  }
  if (r.entered_time_wait && p.initiator) {
    p.last_snap = it->second.snapshot();
    start_cycle(d, t);
    it = p.sessions.find(cycle);
  }
  if (r.done) {
    ++trace_.stats.measurements_done;
    p.last_reports = it->second.reports();
    const auto decision = it->second.decision();
    p.sessions.erase(it);
    if (decision) {
      switch_to(d, *decision, t);
    }
  } else if (r.aborted) {
    ++trace_.stats.measurements_aborted;
    p.sessions.erase(it);
    if (p.initiator && p.sessions.empty()) {
      start_cycle(d, t);
    }
  }
}

void Engine::handle_control(DenaRt & d, std::size_t slot, const SimPacket & pkt, std::int64_t t)
{
  std::optional<ControlMessage> msg;
  try {
    msg = parse_control(pkt);
  } catch (const MalformedControl &) {
    ++trace_.stats.protocol_violations;
    return;
  }
  if (!msg) {
    return;
  }
  const FiveTuple key = pkt.tuple.reversed();
  switch (msg->type) {
    case MsgType::Bootstrap: {
      FlowRec & rec = flow_rec(d, key);
      if (!rec.boot) {
        rec.disc.mark_peer_detected();
        BootstrapInfo info = d.base;
        if (nat_[d.site]) {
          info.private_host = PrivateEndpoint{rec.key.src_addr, rec.key.src_port};
        }
        rec.boot.emplace(info, sc_.retry);
      }
      std::optional<ControlMessage> reply;
      try {
        reply = rec.boot->on_message(*msg, t);
      } catch (const MalformedControl &) {
        ++trace_.stats.protocol_violations;
        return;
      }
      if (reply) {
        send_control(d, 0, rec.key, *reply, t);
      }
      after_bootstrap(d, rec, t);
      return;
    }
    case MsgType::KeepAliveReq:
      if (d.peer) {
        send_control(d, slot, d.peer->ctrl_flow, ControlMessage{MsgType::KeepAliveResp,
                                                                msg->payload}, t);
      }
      return;
    case MsgType::KeepAliveResp: {
      if (!d.peer || msg->payload.size() != 9) {
        return;
      }
      const std::size_t s = msg->payload[0];
      if (s >= n_slots()) {
        return;
      }
      std::int64_t sent_at = 0;
      for (std::size_t i = 1; i < 9; ++i) {
        sent_at = (sent_at << 8) | msg->payload[i];
      }
      if (d.peer->ka.on_response(s)) {
        note(t, dena_node(d.site), TraceEvent::PathUp, static_cast<std::uint8_t>(s));
      }
      if (s == d.peer->active.slot()) {
        d.peer->rtt_ms = t - sent_at;
      }
      return;
    }
    case MsgType::MeasRequest:
    case MsgType::MeasReply:
      ++trace_.stats.protocol_violations;
      return;
    default:
      break;
  }
  if (!d.peer) {
    return;
  }
  MeasMessage m;
  try {
    m = decode_meas(*msg);
  } catch (const MalformedControl &) {
    ++trace_.stats.protocol_violations;
    return;
  }
  PeerRec & p = *d.peer;
  if (!p.initiator && m.type == MsgType::Start && m.cycle > p.max_seen) {
    SessionConfig cfg = sc_.session;
    cfg.rto_ms = std::max<std::int64_t>(sc_.session.rto_ms, 2 * p.rtt_ms);
    p.sessions.emplace(m.cycle, MeasurementSession(p.id, Role::Responder, m.cycle, n_slots(), cfg));
    p.max_seen = m.cycle;
  }
  MeasEvent ev = meas_event(d, MeasEvent::Kind::Message, t);
  ev.msg = m;
  step_session(d, m.cycle, ev);
}

void Engine::dena_tick(DenaRt & d, std::int64_t t)
{
  for (auto & [key, rec] : d.flows) {
    if (!rec.boot || rec.boot->status() != BootstrapSession::Status::Pending) {
      continue;
    }
    if (rec.boot->deadline() <= t) {
      if (auto m = rec.boot->on_timer(t)) {
        send_control(d, 0, rec.key, *m, t);
      }
    }
  }
  if (!d.peer) {
    return;
  }
  PeerRec & p = *d.peer;
  if (t >= p.next_ka) {
    p.next_ka = t + sc_.keepalive_interval_ms;
    const auto tick = p.ka.tick();
    if (!tick.went_down.empty()) {
      for (auto s : tick.went_down) {
        note(t, dena_node(d.site), TraceEvent::PathDown, static_cast<std::uint8_t>(s));
      }
      const bool active_down =
        std::find(tick.went_down.begin(), tick.went_down.end(), p.active.slot()) !=
        tick.went_down.end();
      if (active_down) {
        // Leave a dead path at once; unknown losses rank just below dead.
        std::vector<double> loss(n_slots(), 0.999);
        for (const auto & r : p.last_reports) {
          if (r.path.slot() < n_slots()) {
            loss[r.path.slot()] = r.loss.value();
          }
        }
        for (std::size_t s = 0; s < n_slots(); ++s) {
          if (!p.ka.available(s)) {
            loss[s] = 1.0;
          }
        }
        switch_to(d, select_path(loss[0], std::span<const double>(loss).subspan(1),
                                 sc_.session.select), t);
      }
      std::vector<std::uint32_t> cycles;
      for (const auto & [c, s] : p.sessions) {
        cycles.push_back(c);
      }
      const MeasEvent fail = meas_event(d, MeasEvent::Kind::KeepAliveFailure, t);
      for (auto c : cycles) {
        step_session(d, c, fail);
      }
      if (p.initiator && p.sessions.empty()) {
        start_cycle(d, t);
      }
    }
    for (auto s : tick.probe_slots) {
      std::vector<std::uint8_t> body{static_cast<std::uint8_t>(s)};
      for (int shift = 56; shift >= 0; shift -= 8) {
        body.push_back(static_cast<std::uint8_t>(static_cast<std::uint64_t>(t) >> shift));
      }
      send_control(d, s, p.ctrl_flow, ControlMessage{MsgType::KeepAliveReq, std::move(body)}, t);
    }
  }
  std::vector<std::uint32_t> due;
  for (const auto & [c, s] : p.sessions) {
    if (auto dl = s.deadline(); dl && *dl <= t) {
      due.push_back(c);
    }
  }
  for (auto c : due) {
    if (d.peer->sessions.count(c) != 0) {
      step_session(d, c, meas_event(d, MeasEvent::Kind::Timer, t));
    }
  }
}

Trace Engine::run()
{
  for (std::int64_t t = 0; t < sc_.duration_ms; ++t) {
    apply_schedule(t);
    for (int s = 0; s < kSites; ++s) {
      for (std::size_t slot = 0; slot < n_slots(); ++slot) {
        Channel & c = channel(s, slot);
        if (auto due = c.flush_due(); due && *due <= t) {
          for (auto & a : c.flush(t)) {
            queue_.push(InFlight{a.at, order_++, 1 - s, static_cast<std::uint8_t>(slot),
                                 a.duplicate, std::move(a.pkt)});
          }
        }
      }
    }
    for (auto & d : dena_) {
      if (d.enabled) {
        dena_tick(d, t);
      }
    }
    emit_flows(t);
    while (!queue_.empty() && queue_.top().at <= t) {
      InFlight item = queue_.top();
      queue_.pop();
      arrive(std::move(item));
    }
  }
  std::uint64_t held = 0;
  for (int s = 0; s < kSites; ++s) {
    for (std::size_t slot = 0; slot < n_slots(); ++slot) {
      held += channel(s, slot).flush_due() ? 1 : 0;
    }
  }
  trace_.stats.in_flight = queue_.size() + held;
  const auto secs = static_cast<std::size_t>((sc_.duration_ms + 999) / 1000);
  if (trace_.throughput.size() < secs) {
    trace_.throughput.resize(secs, std::vector<std::uint64_t>(n_slots(), 0));
  }
  return std::move(trace_);
}

}  // namespace

Trace run(const Scenario & scenario, std::uint64_t seed)
{
  Engine engine(scenario, seed);
  return engine.run();
}

}  // namespace dena::sim
