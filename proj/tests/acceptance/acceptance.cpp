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

// One PASS/FAIL line per acceptance criterion. Arguments pick criteria by
// number; no arguments runs them all. Exit status is 1 when any fails.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <mutex>
#include <numeric>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "dena/bgp/graph.hpp"
#include "dena/bgp/hijack.hpp"
#include "dena/sim/experiments.hpp"
#include "dena/sim/network.hpp"
#include "pair_harness.hpp"
#include "route_oracle.hpp"

namespace
{

using namespace dena;
using Clock = std::chrono::steady_clock;

// tolerances and sizes
constexpr double kFnSingleLo = 0.30;
constexpr double kFnSingleHi = 0.40;
constexpr double kFnFiveLo = 0.001;
constexpr double kFnFiveHi = 0.011;
constexpr std::uint64_t kFnTrials = 100000;
constexpr double kFnBudgetS = 120;
constexpr std::uint64_t kFpStreams = 200000;
constexpr std::uint64_t kFpPackets = 1000000;
constexpr double kFpBudgetS = 600;
constexpr std::size_t kLossWindows = 1000;
constexpr std::int64_t kSwitchLimitMs = 3000;
constexpr double kReplicaShare = 0.10;
constexpr double kReplicaTol = 0.02;
constexpr int kSwitchRuns = 20;
constexpr int kOracleGraphs = 500;
constexpr std::size_t kBgpAses = 2000;
constexpr std::uint64_t kHijackTrials = 1000;
constexpr std::size_t kMaxAdv = 7;
constexpr std::uint64_t kWeakAgreeHits = 20;  // 2 pp of 1000
constexpr double kHijackBudgetS = 900;
constexpr std::uint64_t kReachReps = 1000;
constexpr int kSafetyCases = 10000;
constexpr std::int64_t kSafetyMinPeriodMs = 1000;
constexpr std::int64_t kSafetyPairMs = 9000;

struct Check
{
  bool pass = false;
  std::string detail;
};

std::string fmt(const char * f, double a)
{
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double seconds_since(Clock::time_point t0)
{
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void parallel_for(int n, const std::function<void(int)> & fn)
{
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  const unsigned w = std::max(1u, std::thread::hardware_concurrency());
  for (unsigned i = 0; i < w; ++i) {
    pool.emplace_back([&] {
      for (int k = next++; k < n; k = next++) {
        fn(k);
      }
    });
  }
  for (auto & t : pool) {
    t.join();
  }
}

Check fn_reproduction()
{
  const auto t0 = Clock::now();
  DetectionConfig one;
  one.max_attempts = 1;
  DetectionConfig five;
  five.max_attempts = 5;
  const double single = sim::experiment_fn({0.10}, one, kFnTrials, 1)[0].fn();
  const double multi = sim::experiment_fn({0.10}, five, kFnTrials, 1)[0].fn();
  const double took = seconds_since(t0);
  const bool ok = single >= kFnSingleLo && single <= kFnSingleHi && multi >= kFnFiveLo &&
                  multi <= kFnFiveHi && took <= kFnBudgetS;
  return {ok, "single attempt " + fmt("%.3f%%", 100 * single) + " (want 30-40%), five attempts " +
                fmt("%.3f%%", 100 * multi) + " (want 0.1-1.1%), " + fmt("%.1f s", took)};
}

Check fn_ordering()
{
  std::vector<double> loss;
  for (int i = 0; i <= 10; ++i) {
    loss.push_back(0.01 * i);
  }
  bool ok = true;
  std::size_t checks = 0;
  for (std::size_t attempts : {1, 5}) {
    std::map<std::pair<std::size_t, bool>, std::vector<sim::FnRow>> rows;
    for (std::size_t thr : {3, 5}) {
      for (bool pf : {true, false}) {
        DetectionConfig c;
        c.threshold = thr;
        c.use_prefilter = pf;
        c.max_attempts = attempts;
        rows[{thr, pf}] = sim::experiment_fn(loss, c, 20000, 2);
      }
    }
    for (std::size_t i = 0; i < loss.size(); ++i) {
      for (bool pf : {true, false}) {
        ok = ok && rows[{3, pf}][i].failures >= rows[{5, pf}][i].failures;
        ++checks;
      }
      for (std::size_t thr : {3, 5}) {
        ok = ok && rows[{thr, true}][i].failures >= rows[{thr, false}][i].failures;
        ++checks;
      }
    }
  }
  return {ok, std::to_string(checks) + " paired comparisons over 11 loss rates, 1 and 5 attempts"};
}

Check fp_table()
{
  const auto t0 = Clock::now();
  const std::vector<sim::FpConfig> cfgs{{3, true}, {3, false}, {5, true}, {5, false}};
  const double reference[] = {0.0002, 0.0003, 0.044, 0.118};
  const auto rows = sim::experiment_fp(kFpPackets, cfgs, kFpStreams, 3);
  const double took = seconds_since(t0);
  bool ok = rows[0].hits < rows[1].hits && rows[2].hits < rows[3].hits &&
            rows[0].hits < rows[2].hits && rows[1].hits < rows[3].hits && took <= kFpBudgetS;
  std::string d;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double f = rows[i].fp();
    ok = ok && f > 0 && f / reference[i] >= 0.1 && f / reference[i] <= 10;
    d += "thr" + std::to_string(cfgs[i].threshold) + (cfgs[i].use_prefilter ? "+pf " : " ") +
         fmt("%.4f%%", 100 * f) + ", ";
  }
  return {ok, d + std::to_string(kFpStreams) + " streams, " + fmt("%.1f s", took)};
}

Check loss_oracle()
{
  std::size_t windows = 0;
  std::size_t bad = 0;
  for (std::uint64_t seed = 1; windows < kLossWindows && seed < 5000; ++seed) {
    Rng rng(derive_seed(seed, {0x1055}));
    testing::PairConfig c;
    c.ab = sim::ChannelModel{0.4 * rng.uniform(), 0, 0, 1 + static_cast<std::int64_t>(rng.below(40)), 0, seed};
    c.ba = sim::ChannelModel{0.4 * rng.uniform(), 0, 0, 1 + static_cast<std::int64_t>(rng.below(40)), 0,
                             seed + 1000000};
    c.rate_ab = 0.05 + 0.9 * rng.uniform();
    c.rate_ba = 0.05 + 0.9 * rng.uniform();
    c.session.period_ms = 100 + static_cast<std::int64_t>(rng.below(300));
    c.session.interval_ms = 100 + static_cast<std::int64_t>(rng.below(300));
    c.duration_ms = 6000;
    c.seed = seed;
    for (const auto & w : testing::PairHarness(c).run().windows) {
      if (w.sent_ab == 0 || w.sent_ba == 0) {
        continue;
      }
      ++windows;
      if (!w.report || w.report->loss != std::max(w.truth_ab, w.truth_ba)) {
        ++bad;
      }
    }
  }
  return {bad == 0 && windows >= kLossWindows,
          std::to_string(windows) + " windows, " + std::to_string(bad) + " mismatches"};
}

Check path_switching()
{
  const auto sc = sim::load_scenario(std::string(DENA_SOURCE_DIR) + "/scenarios/failover.scenario");
  std::vector<sim::SwitchResult> res(kSwitchRuns);
  parallel_for(kSwitchRuns, [&](int k) {
    auto r = sim::experiment_switch(sc, static_cast<std::uint64_t>(k + 1));
    r.trace.events.clear();
    res[k] = std::move(r);
  });
  bool ok = true;
  std::int64_t worst_fia = 0;
  std::int64_t worst_ip = 0;
  double lo = 1;
  double hi = 0;
  for (const auto & r : res) {
    ok = ok && r.to_fia_ms && r.to_ip_ms && *r.to_fia_ms <= kSwitchLimitMs && *r.to_ip_ms <= kSwitchLimitMs &&
         std::abs(r.replica_share - kReplicaShare) <= kReplicaTol;
    worst_fia = std::max(worst_fia, r.to_fia_ms.value_or(1 << 30));
    worst_ip = std::max(worst_ip, r.to_ip_ms.value_or(1 << 30));
    lo = std::min(lo, r.replica_share);
    hi = std::max(hi, r.replica_share);
  }
  return {ok, "worst to FIA " + std::to_string(worst_fia) + " ms, worst back to IP " +
                std::to_string(worst_ip) + " ms, replica share " + fmt("%.4f", lo) + "-" + fmt("%.4f", hi) +
                " over " + std::to_string(kSwitchRuns) + " seeds"};
}

Check routing_oracle()
{
  Rng rng(606);
  int prefixes = 0;
  int bad = 0;
  std::string first;
  for (int g = 0; g < kOracleGraphs; ++g) {
    const auto graph = testing::random_small_graph(rng);
    // one honest origin, then the same prefix with up to two bogus origins
    std::vector<std::size_t> who(graph.size());
    std::iota(who.begin(), who.end(), 0);
    rng.shuffle(who);
    const std::size_t extra = std::min<std::size_t>(graph.size() - 1, 1 + rng.below(2));
    for (std::size_t k = 1; k <= 1 + extra; ++k) {
      std::vector<bgp::Announcement> anns;
      for (std::size_t i = 0; i < k; ++i) {
        anns.push_back({bgp::Prefix{graph.id(who[0]), bgp::PrefixLen::Short}, graph.id(who[i]), i == 0});
      }
      ++prefixes;
      const auto diff = testing::compare_with_oracle(graph, anns);
      if (!diff.empty()) {
        ++bad;
        if (first.empty()) {
          first = "; graph " + std::to_string(g) + ": " + diff;
        }
      }
    }
  }
  return {bad == 0, std::to_string(prefixes - bad) + "/" + std::to_string(prefixes) +
                      " prefixes match on " + std::to_string(kOracleGraphs) + " graphs" + first};
}

const bgp::AsGraph & bgp_graph()
{
  static const bgp::AsGraph g = [] {
    bgp::SynthParams p;
    p.n_ases = kBgpAses;
    p.seed = 1;
    return bgp::synthesize_topology(p);
  }();
  return g;
}

Check hijack_properties()
{
  const auto t0 = Clock::now();
  std::vector<bgp::DeploymentParams> sc;
  for (const char * l : {"TN3-TL2-LBGP4", "TN4-TL2-LBGP4", "TN3-TL4-LBGP4", "TN3-TL3-LBGP4",
                         "TN3-TL2-LBGP5", "TN4-TL2-LBGP5", "TN3-TL4-LBGP5", "TN3-TL3-LBGP5"}) {
    sc.push_back(bgp::DeploymentParams::parse(l));
  }
  const auto rows = bgp::experiment_hijack(bgp_graph(), sc, kMaxAdv, kHijackTrials, 7);
  const double took = seconds_since(t0);
  std::map<std::tuple<std::string, bgp::Adversary, std::size_t>, const bgp::HijackRow *> at;
  for (const auto & r : rows) {
    at[{r.scenario, r.model, r.n_adv}] = &r;
  }
  bool a = true;
  bool b = true;
  bool c = true;
  for (const auto & p : sc) {
    for (auto m : {bgp::Adversary::Weak, bgp::Adversary::Strong}) {
      for (std::size_t n = 2; n <= kMaxAdv; ++n) {
        const auto * lo = at[{p.label(), m, n - 1}];
        const auto * hi = at[{p.label(), m, n}];
        a = a && lo->tunnel_hits <= hi->tunnel_hits && lo->bgp_hits <= hi->bgp_hits;
      }
    }
    for (std::size_t n = 1; n <= kMaxAdv; ++n) {
      b = b && at[{p.label(), bgp::Adversary::Weak, n}]->tunnel_hits <=
                 at[{p.label(), bgp::Adversary::Strong, n}]->tunnel_hits;
    }
  }
  double c_gap = 1;
  for (std::size_t n = 1; n <= kMaxAdv; ++n) {
    const auto * r = at[{"TN3-TL2-LBGP4", bgp::Adversary::Weak, n}];
    c = c && r->tunnel_hits < r->bgp_hits;
    c_gap = std::min(c_gap, r->p_bgp() - r->p_tunnel());
  }
  // weak model: same T_L and L_BGP, different tunnel lengths
  bool d = true;
  std::uint64_t d_worst = 0;
  std::string d_where;
  for (const auto & p : sc) {
    for (const auto & q : sc) {
      if (p.tl != q.tl || p.l_bgp != q.l_bgp || p.tn >= q.tn) {
        continue;
      }
      for (std::size_t n = 1; n <= kMaxAdv; ++n) {
        const auto x = at[{p.label(), bgp::Adversary::Weak, n}]->tunnel_hits;
        const auto y = at[{q.label(), bgp::Adversary::Weak, n}]->tunnel_hits;
        const auto gap = x > y ? x - y : y - x;
        if (gap > d_worst) {
          d_worst = gap;
          d_where = p.label() + " vs " + q.label() + " n=" + std::to_string(n);
        }
        d = d && gap <= kWeakAgreeHits;
      }
    }
  }
  const bool ok = a && b && c && d && took <= kHijackBudgetS;
  return {ok, std::string("(a) ") + (a ? "ok" : "broken") + ", (b) " + (b ? "ok" : "broken") + ", (c) " +
                (c ? "ok" : "broken") + " min gap " + fmt("%.3f", c_gap) + ", (d) " + (d ? "ok" : "broken") +
                " worst " + fmt("%.1f pp", d_worst * 100.0 / kHijackTrials) + " at " + d_where + ", " +
                std::to_string(bgp_graph().size()) + " ASes, " + fmt("%.1f s", took)};
}

Check reach_properties()
{
  const auto rows = bgp::experiment_reach(bgp_graph(), {2, 3, 4, 5}, 20, kReachReps, 8);
  std::map<std::pair<std::size_t, std::size_t>, double> f;
  for (const auto & r : rows) {
    f[{r.t_l, r.n_deploying}] = r.mean_fraction;
  }
  bool mono = true;
  for (std::size_t tl = 2; tl <= 5; ++tl) {
    for (std::size_t n = 1; n <= 20; ++n) {
      if (n > 1) {
        mono = mono && f[{tl, n - 1}] <= f[{tl, n}];
      }
      if (tl > 2) {
        mono = mono && f[{tl - 1, n}] <= f[{tl, n}];
      }
    }
  }
  const double one = f[{4, 1}];
  const double many = std::min(f[{4, 20}], f[{5, 20}]);
  return {mono && one > 0.5 && many > 0.95,
          std::string("monotone ") + (mono ? "yes" : "no") + ", n=1 T_L=4 " + fmt("%.3f", one) +
            ", n=20 T_L>=4 " + fmt("%.4f", many)};
}

Check safety()
{
  std::atomic<int> transparency{0};
  std::atomic<int> leaks{0};
  std::atomic<int> proto{0};
  std::atomic<int> slow{0};
  std::atomic<int> errors{0};
  std::atomic<long> cycles{0};
  parallel_for(kSafetyCases, [&](int k) {
    Rng rng(derive_seed(99, {static_cast<std::uint64_t>(k)}));
    const auto model = [&](std::int64_t base) {
      return sim::ChannelModel{0.25 * rng.uniform(), 0.2 * rng.uniform(), 0.1 * rng.uniform(),
                               base + static_cast<std::int64_t>(rng.below(40)),
                               static_cast<int>(rng.below(16)), rng.next()};
    };
    try {
      sim::Scenario sc;
      sc.duration_ms = 2500 + static_cast<std::int64_t>(rng.below(2000));
      sc.ip = model(1);
      sc.fia = model(1);
      sc.record_packets = false;
      // the bound needs period and interval to outlast a full retransmission budget
      sc.session.period_ms = kSafetyMinPeriodMs + static_cast<std::int64_t>(rng.below(kSafetyMinPeriodMs));
      sc.session.interval_ms = kSafetyMinPeriodMs + static_cast<std::int64_t>(rng.below(kSafetyMinPeriodMs));
      sc.hosts = {{"a", 0, make_addr(10, 1, 0, 2)}, {"b", 1, make_addr(10, 2, 0, 2)}};
      if (rng.bernoulli(0.5)) {
        sc.nat_public[1] = make_addr(5, 5, 5, 5);
      }
      sc.flows = {{"f", 0, 1000, 1, 80, 50.0 + 150 * rng.uniform(), proto::kTcp, 200, 0, std::nullopt},
                  {"r", 1, 80, 0, 1000, 20.0 + 80 * rng.uniform(), proto::kUdp, 60, 0, std::nullopt}};
      const auto st = sim::run(sc, rng.next()).stats;
      transparency += st.transparency_violations ? 1 : 0;
      leaks += st.control_to_host ? 1 : 0;
      proto += st.protocol_violations ? 1 : 0;

      testing::PairConfig c;
      c.ab = model(1);
      c.ba = model(1);
      c.session.period_ms = sc.session.period_ms;
      c.session.interval_ms = sc.session.interval_ms;
      c.duration_ms = kSafetyPairMs;
      c.seed = rng.next();
      const auto res = testing::PairHarness(c).run();
      const std::int64_t limit = 2 * c.session.period_ms + 2 * c.session.interval_ms;
      bool late = res.violations != 0;
      for (const auto & [cyc, span] : res.cycles) {
        if (span.start + limit > c.duration_ms) {
          continue;
        }
        ++cycles;
        late = late || !span.initiator_end || *span.initiator_end - span.start > limit ||
               (span.responder_start && (!span.responder_end || *span.responder_end - span.start > limit));
      }
      slow += late ? 1 : 0;
    } catch (const std::exception &) {
      ++errors;
    }
  });
  const bool ok = transparency == 0 && leaks == 0 && proto == 0 && slow == 0 && errors == 0;
  return {ok, std::to_string(kSafetyCases) + " cases: transparency " + std::to_string(transparency.load()) +
                ", control to host " + std::to_string(leaks.load()) + ", protocol " + std::to_string(proto.load()) +
                ", late or stuck " + std::to_string(slow.load()) + " (" + std::to_string(cycles.load()) +
                " cycles), errors " + std::to_string(errors.load())};
}

}  // namespace

int main(int argc, char ** argv)
{
  const std::vector<std::pair<const char *, Check (*)()>> all{
    {"FN reproduction", fn_reproduction}, {"FN ordering", fn_ordering},
    {"FP table", fp_table},               {"loss oracle", loss_oracle},
    {"path switching", path_switching},   {"routing oracle", routing_oracle},
    {"hijack properties", hijack_properties}, {"reach properties", reach_properties},
    {"protocol safety", safety}};
  std::set<int> pick;
  for (int i = 1; i < argc; ++i) {
    pick.insert(std::atoi(argv[i]));
  }
  bool failed = false;
  for (std::size_t i = 0; i < all.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!pick.empty() && !pick.count(id)) {
      continue;
    }
    Check v;
    try {
      v = all[i].second();
    } catch (const std::exception & e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    failed = failed || !v.pass;
    std::printf("criterion %d %s: %s  %s\n", id, all[i].first, v.pass ? "PASS" : "FAIL", v.detail.c_str());
    std::fflush(stdout);
  }
  return failed ? 1 : 0;
}
