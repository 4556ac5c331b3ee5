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

#include "dena/sim/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "dena/error.hpp"
#include "dena/random.hpp"

namespace dena::sim
{

namespace
{

unsigned pick_workers(unsigned requested)
{
  if (requested != 0) {
    return requested;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

// Splits [0, n) into contiguous chunks, one per worker. Each chunk writes
// only its own slot so the reduction is order-free.
template<typename Fn>
void parallel_chunks(std::uint64_t n, unsigned workers, Fn fn)
{
  workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, std::max<std::uint64_t>(n, 1)));
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    const std::uint64_t lo = n * w / workers;
    const std::uint64_t hi = n * (w + 1) / workers;
    pool.emplace_back([=, &fn] { fn(w, lo, hi); });
  }
  for (auto & t : pool) {
    t.join();
  }
}

// Cheap counter-mode draws; one mt19937 per attempt would dominate the run.
class Draws
{
public:
  explicit Draws(std::uint64_t key) : key_(key) {}
  double uniform() { return static_cast<double>(mix64(key_ + ++n_) >> 11) * 0x1.0p-53; }

private:
  std::uint64_t key_;
  std::uint64_t n_ = 0;
};

bool attempt_detected(const DetectionConfig & cfg, double loss, Draws & draws)
{
  DiscoveryState rx(FiveTuple{}, 0, cfg);
  for (Signal s : kDiscoveryMessage) {
    if (draws.uniform() < loss) {
      continue;
    }
    if (rx.ingest_signal(s) == Verdict::PeerDetected) {
      return true;
    }
  }
  return false;
}

bool fp_fires(const std::vector<std::size_t> & dist, std::span<const Signal> buffer,
              const FpConfig & cfg)
{
  const std::size_t t = cfg.threshold;
  const std::size_t shortest = kMessageLength > t ? kMessageLength - t : 1;
  for (std::size_t len = shortest; len < dist.size() && len <= kMessageLength + t; ++len) {
    if (dist[len] > t) {
      continue;
    }
    if (!cfg.use_prefilter || prefilter_blocks(buffer.subspan(buffer.size() - len))) {
      return true;
    }
  }
  return false;
}

}  // namespace

std::vector<FnRow> experiment_fn(const std::vector<double> & loss_rates,
                                 const DetectionConfig & cfg, std::uint64_t trials,
                                 std::uint64_t seed, unsigned workers)
{
  cfg.validate();
  if (trials == 0) {
    throw ConfigError("trials must be at least 1");
  }
  std::vector<FnRow> rows;
  workers = pick_workers(workers);
  for (std::size_t li = 0; li < loss_rates.size(); ++li) {
    const double loss = loss_rates[li];
    if (!(loss >= 0.0 && loss <= 1.0)) {
      throw ConfigError("loss rate outside [0, 1]");
    }
    std::vector<std::uint64_t> failed(workers, 0);
    parallel_chunks(trials, workers, [&](unsigned w, std::uint64_t lo, std::uint64_t hi) {
      for (std::uint64_t trial = lo; trial < hi; ++trial) {
        bool found = false;
        for (std::size_t a = 0; a < cfg.max_attempts && !found; ++a) {
          Draws draws(derive_seed(seed, {0xF7, li, trial, a}));
          found = attempt_detected(cfg, loss, draws);
        }
        failed[w] += found ? 0 : 1;
      }
    });
    FnRow row{loss, 0, trials};
    for (auto f : failed) {
      row.failures += f;
    }
    rows.push_back(row);
  }
  return rows;
}

std::vector<FpRow> experiment_fp(std::uint64_t n_packets, const std::vector<FpConfig> & cfgs,
                                 std::uint64_t repetitions, std::uint64_t seed, unsigned workers)
{
  if (repetitions == 0) {
    throw ConfigError("repetitions must be at least 1");
  }
  std::size_t bound = 0;
  for (const auto & c : cfgs) {
    bound = std::max(bound, c.threshold);
  }
  // Each of the three signal codes covers 2^4 of the 2^16 IPID values.
  const double p_signal = 3.0 * 16.0 / 65536.0;
  const double log_miss = std::log1p(-p_signal);
  const std::size_t keep = kMessageLength + bound;

  workers = pick_workers(workers);
  std::vector<std::vector<std::uint64_t>> hits(workers, std::vector<std::uint64_t>(cfgs.size(), 0));
  parallel_chunks(repetitions, workers, [&](unsigned w, std::uint64_t lo, std::uint64_t hi) {
    std::vector<Signal> buf;
    buf.reserve(2 * keep);
    for (std::uint64_t rep = lo; rep < hi; ++rep) {
      Rng rng(derive_seed(seed, {0xF9, rep}));
      std::vector<bool> fired(cfgs.size(), false);
      std::size_t pending = cfgs.size();
      buf.clear();
      std::uint64_t pos = 0;
      bool first = true;
      while (pending > 0) {
        const double u = rng.uniform();
        const auto gap = static_cast<std::uint64_t>(std::floor(std::log1p(-u) / log_miss));
        pos += gap + (first ? 0 : 1);
        first = false;
        if (pos >= n_packets) {
          break;
        }
        buf.push_back(static_cast<Signal>(rng.below(3)));
        if (buf.size() >= 2 * keep) {
          buf.erase(buf.begin(), buf.end() - static_cast<std::ptrdiff_t>(keep));
        }
        const std::span<const Signal> view(buf);
        const auto dist = suffix_distances(view, kDiscoveryMessage, bound);
        for (std::size_t c = 0; c < cfgs.size(); ++c) {
          if (!fired[c] && fp_fires(dist, view, cfgs[c])) {
            fired[c] = true;
            --pending;
          }
        }
      }
      for (std::size_t c = 0; c < cfgs.size(); ++c) {
        hits[w][c] += fired[c] ? 1 : 0;
      }
    }
  });
  std::vector<FpRow> rows;
  for (std::size_t c = 0; c < cfgs.size(); ++c) {
    FpRow row{cfgs[c], 0, repetitions};
    for (unsigned w = 0; w < workers; ++w) {
      row.hits += hits[w][c];
    }
    rows.push_back(row);
  }
  return rows;
}

SwitchResult experiment_switch(const Scenario & scenario, std::uint64_t seed)
{
  scenario.validate();
  if (scenario.flows.empty()) {
    throw ConfigError("switch experiment needs a flow");
  }
  const auto bulk = std::max_element(
    scenario.flows.begin(), scenario.flows.end(),
    [](const FlowSpec & a, const FlowSpec & b) { return a.rate_pps < b.rate_pps; });
  SwitchResult res;
  res.site = scenario.hosts[bulk->src_host].site;
  for (const auto & e : scenario.schedule) {
    if (e.key != "ip.loss") {
      continue;
    }
    if (!res.loss_on_ms && e.value > 0.0) {
      res.loss_on_ms = e.at_ms;
    } else if (res.loss_on_ms && !res.loss_off_ms && e.value == 0.0 && e.at_ms > *res.loss_on_ms) {
      res.loss_off_ms = e.at_ms;
    }
  }
  res.trace = run(scenario, seed);
  for (const auto & s : res.trace.switches) {
    if (s.site != res.site) {
      continue;
    }
    if (res.loss_on_ms && !res.to_fia_ms && !s.to.is_ip() && s.time_ms >= *res.loss_on_ms) {
      res.to_fia_ms = s.time_ms - *res.loss_on_ms;
    }
    if (res.loss_off_ms && !res.to_ip_ms && s.to.is_ip() && s.time_ms >= *res.loss_off_ms) {
      res.to_ip_ms = s.time_ms - *res.loss_off_ms;
    }
  }
  // Replication share over the 20 s before the loss, skipping start-up.
  const auto & tp = res.trace.throughput;
  const std::size_t end = res.loss_on_ms ? static_cast<std::size_t>(*res.loss_on_ms / 1000)
                                         : tp.size();
  const std::size_t begin = end > 25 ? end - 20 : std::min<std::size_t>(5, end);
  std::uint64_t ip = 0;
  std::uint64_t fia = 0;
  for (std::size_t s = begin; s < end && s < tp.size(); ++s) {
    ip += tp[s][0];
    for (std::size_t k = 1; k < tp[s].size(); ++k) {
      fia += tp[s][k];
    }
  }
  res.replica_share = ip == 0 ? 0.0 : static_cast<double>(fia) / static_cast<double>(ip);
  return res;
}

}  // namespace dena::sim
