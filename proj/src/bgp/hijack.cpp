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

#include "dena/bgp/hijack.hpp"

#include <algorithm>
#include <array>
#include <numeric>
#include <regex>
#include <set>
#include <thread>

#include "dena/error.hpp"

namespace dena::bgp
{

std::shared_ptr<const std::vector<std::uint8_t>> PathLengths::toward(std::size_t dst) const
{
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = cache_.find(dst);
    if (it != cache_.end()) {
      return it->second;
    }
  }
  const Announcement ann{Prefix{graph_.id(dst), PrefixLen::Slash24}, graph_.id(dst), true};
  const PrefixRoutes routes = propagate_prefix(graph_, std::span<const Announcement>(&ann, 1));
  auto out = std::make_shared<std::vector<std::uint8_t>>(routes.size(), kFar);
  for (std::size_t i = 0; i < routes.size(); ++i) {
    if (routes[i].valid() && routes[i].length < kFar) {
      (*out)[i] = static_cast<std::uint8_t>(routes[i].length);
    }
  }
  std::lock_guard<std::mutex> lock(mu_);
  return cache_.emplace(dst, std::move(out)).first->second;
}

void DeploymentParams::validate() const
{
  if (tn < 2) {
    throw ConfigError("a tunnel needs at least two nodes");
  }
  if (tl < 1 || l_bgp < 1) {
    throw ConfigError("segment and path lengths must be positive");
  }
  if (tn == 2 && l_bgp > tl) {
    throw ConfigError("with two tunnel nodes the only segment is the BGP path");
  }
}

std::string DeploymentParams::label() const
{
  return "TN" + std::to_string(tn) + "-TL" + std::to_string(tl) + "-LBGP" + std::to_string(l_bgp);
}

DeploymentParams DeploymentParams::parse(const std::string & label)
{
  static const std::regex re(R"(TN(\d+)-TL(\d+)-LBGP(\d+))");
  std::smatch m;
  if (!std::regex_match(label, m, re)) {
    throw ConfigError("scenario must look like TN4-TL2-LBGP4, got '" + label + "'");
  }
  DeploymentParams p{std::stoul(m[1]), std::stoul(m[2]), std::stoul(m[3])};
  p.validate();
  return p;
}

std::size_t TunnelDeployment::t_l() const
{
  return segment_lengths.empty() ? 0 : *std::max_element(segment_lengths.begin(), segment_lengths.end());
}

std::size_t TunnelDeployment::l_t() const
{
  return std::accumulate(segment_lengths.begin(), segment_lengths.end(), std::size_t{0});
}

TunnelDeployment sample_deployment(const AsGraph & graph, const DeploymentParams & params, Rng & rng,
                                   const PathLengths & lengths, std::size_t max_attempts)
{
  params.validate();
  const auto stubs = graph.multihomed_stubs();
  if (stubs.size() < 2) {
    throw Unsatisfiable("graph has fewer than two multi-homed stubs");
  }
  std::vector<std::size_t> order(graph.size());
  for (std::size_t attempt = 0; attempt < max_attempts; ++attempt) {
    const std::size_t dst = stubs[rng.below(stubs.size())];
    const auto to_dst = lengths.toward(dst);
    std::vector<std::size_t> srcs;
    for (auto s : stubs) {
      if (s != dst && (*to_dst)[s] == params.l_bgp) {
        srcs.push_back(s);
      }
    }
    if (srcs.empty()) {
      continue;
    }
    std::vector<std::size_t> nodes{srcs[rng.below(srcs.size())]};
    std::vector<std::size_t> seg;
    bool ok = true;
    for (std::size_t k = 1; k + 1 < params.tn && ok; ++k) {
      const bool last = k + 2 == params.tn;
      std::iota(order.begin(), order.end(), std::size_t{0});
      rng.shuffle(order);
      ok = false;
      for (auto x : order) {
        if (x == dst || std::find(nodes.begin(), nodes.end(), x) != nodes.end()) {
          continue;
        }
        if (last && (*to_dst)[x] > params.tl) {
          continue;
        }
        const std::uint8_t len = lengths.length(nodes.back(), x);
        if (len > params.tl) {
          continue;
        }
        seg.push_back(len);
        nodes.push_back(x);
        ok = true;
        break;
      }
    }
    if (!ok) {
      continue;
    }
    seg.push_back((*to_dst)[nodes.back()]);
    nodes.push_back(dst);
    TunnelDeployment dep;
    dep.params = params;
    for (auto i : nodes) {
      dep.nodes.push_back(graph.id(i));
    }
    dep.segment_lengths = std::move(seg);
    return dep;
  }
  throw Unsatisfiable("no deployment for " + params.label() + " after " +
                      std::to_string(max_attempts) + " attempts");
}

TunnelDeployment sample_deployment(const AsGraph & graph, const DeploymentParams & params, Rng & rng)
{
  const PathLengths lengths(graph);
  return sample_deployment(graph, params, rng, lengths);
}

const char * to_string(Adversary a) noexcept
{
  return a == Adversary::Weak ? "weak" : "strong";
}

std::vector<std::size_t> adversary_candidates(const AsGraph & graph, const TunnelDeployment & dep)
{
  std::vector<char> banned(graph.size(), 0);
  for (auto as : dep.nodes) {
    banned[graph.index_of(as)] = 1;
  }
  const auto ban_path = [&](AsId from, AsId to) {
    const Announcement ann{Prefix{to, PrefixLen::Short}, to, true};
    const PrefixRoutes routes = propagate_prefix(graph, std::span<const Announcement>(&ann, 1));
    for (auto as : as_path(graph, routes, graph.index_of(from))) {
      banned[graph.index_of(as)] = 1;
    }
  };
  ban_path(dep.nodes.front(), dep.nodes.back());
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < graph.size(); ++i) {
    if (!banned[i]) {
      out.push_back(i);
    }
  }
  return out;
}

namespace
{

bool attacked(const AsGraph & graph, AsId src, AsId target, PrefixLen len,
              std::span<const AsId> adversaries)
{
  std::vector<Announcement> anns{{Prefix{target, len}, target, true}};
  for (auto a : adversaries) {
    anns.push_back({Prefix{target, len}, a, false});
  }
  RoutingState state;
  state.table.emplace(Prefix{target, len}, propagate_prefix(graph, anns));
  return resolve(graph, state, src, target).kind == Resolution::Kind::Hijacked;
}

}  // namespace

TrialOutcome hijack_trial(const AsGraph & graph, const TunnelDeployment & dep,
                          std::span<const AsId> adversaries, Adversary model)
{
  TrialOutcome out;
  if (adversaries.empty() || dep.nodes.size() < 2) {
    return out;
  }
  out.bgp_hijacked =
    attacked(graph, dep.nodes.front(), dep.nodes.back(), PrefixLen::Short, adversaries);
  // Segments toward an AS nobody attacks stay on the legitimate route.
  for (std::size_t j = dep.nodes.size() - 1; j >= 1 && !out.tunnel_hijacked; --j) {
    if (model == Adversary::Weak && j + 1 != dep.nodes.size()) {
      break;
    }
    out.tunnel_hijacked =
      attacked(graph, dep.nodes[j - 1], dep.nodes[j], PrefixLen::Slash24, adversaries);
  }
  return out;
}

TrialOutcome hijack_trial(const AsGraph & graph, const TunnelDeployment & dep, std::size_t n_adv,
                          Adversary model, Rng & rng)
{
  auto cand = adversary_candidates(graph, dep);
  rng.shuffle(cand);
  std::vector<AsId> adv;
  for (std::size_t k = 0; k < n_adv && k < cand.size(); ++k) {
    adv.push_back(graph.id(cand[k]));
  }
  return hijack_trial(graph, dep, adv, model);
}

namespace
{

unsigned pick_workers(unsigned requested)
{
  return requested != 0 ? requested : std::max(1u, std::thread::hardware_concurrency());
}

template<typename Fn>
void parallel_chunks(std::uint64_t n, unsigned workers, Fn fn)
{
  workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, std::max<std::uint64_t>(n, 1)));
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([=, &fn] { fn(w, n * w / workers, n * (w + 1) / workers); });
  }
  for (auto & t : pool) {
    t.join();
  }
}

}  // namespace

std::vector<HijackRow> experiment_hijack(const AsGraph & graph,
                                         const std::vector<DeploymentParams> & scenarios,
                                         std::size_t max_adv, std::uint64_t trials,
                                         std::uint64_t seed, unsigned workers)
{
  if (trials == 0 || max_adv == 0) {
    throw ConfigError("hijack experiment needs trials and adversaries");
  }
  const PathLengths lengths(graph);
  workers = pick_workers(workers);
  std::vector<HijackRow> rows;
  for (const auto & params : scenarios) {
    std::vector<TunnelDeployment> deps;
    std::vector<std::vector<AsId>> advs;
    std::set<std::vector<AsId>> seen;
    for (std::uint64_t t = 0; t < trials; ++t) {
      for (std::uint64_t redraw = 0;; ++redraw) {
        if (redraw > 1000) {
          throw Unsatisfiable("too few distinct deployments for " + params.label());
        }
        Rng rng(derive_seed(seed, {0x41, params.l_bgp, t, redraw}));
        TunnelDeployment dep = sample_deployment(graph, params, rng, lengths);
        if (seen.insert(dep.nodes).second) {
          deps.push_back(std::move(dep));
          break;
        }
      }
      // One shuffle of every AS, filtered, keeps adversary order paired
      // across scenarios that exclude different nodes.
      Rng adv_rng(derive_seed(seed, {0xAD, params.l_bgp, t}));
      std::vector<std::size_t> order(graph.size());
      std::iota(order.begin(), order.end(), std::size_t{0});
      adv_rng.shuffle(order);
      const auto allowed = adversary_candidates(graph, deps.back());
      std::vector<char> ok(graph.size(), 0);
      for (auto i : allowed) {
        ok[i] = 1;
      }
      std::vector<AsId> list;
      for (auto i : order) {
        if (ok[i] && list.size() < max_adv) {
          list.push_back(graph.id(i));
        }
      }
      advs.push_back(std::move(list));
    }
    // hits[worker][n][model] = {tunnel, bgp}
    std::vector<std::vector<std::array<std::array<std::uint64_t, 2>, 2>>> hits(
      workers, std::vector<std::array<std::array<std::uint64_t, 2>, 2>>(max_adv + 1));
    parallel_chunks(trials, workers, [&](unsigned w, std::uint64_t lo, std::uint64_t hi) {
      for (std::uint64_t t = lo; t < hi; ++t) {
        for (std::size_t n = 1; n <= max_adv; ++n) {
          const std::span<const AsId> adv(advs[t].data(), std::min(n, advs[t].size()));
          for (int m = 0; m < 2; ++m) {
            const auto o = hijack_trial(graph, deps[t], adv, m == 0 ? Adversary::Weak : Adversary::Strong);
            hits[w][n][m][0] += o.tunnel_hijacked ? 1 : 0;
            hits[w][n][m][1] += o.bgp_hijacked ? 1 : 0;
          }
        }
      }
    });
    for (int m = 0; m < 2; ++m) {
      for (std::size_t n = 1; n <= max_adv; ++n) {
        HijackRow row{params.label(), n, m == 0 ? Adversary::Weak : Adversary::Strong, 0, 0, trials};
        for (unsigned w = 0; w < workers; ++w) {
          row.tunnel_hits += hits[w][n][m][0];
          row.bgp_hits += hits[w][n][m][1];
        }
        rows.push_back(row);
      }
    }
  }
  return rows;
}

std::vector<ReachRow> experiment_reach(const AsGraph & graph, const std::vector<std::size_t> & t_ls,
                                       std::size_t max_deploying, std::uint64_t reps,
                                       std::uint64_t seed, unsigned workers)
{
  if (reps == 0 || max_deploying == 0) {
    throw ConfigError("reach experiment needs repetitions and deploying ASes");
  }
  const auto stubs = graph.multihomed_stubs();
  if (stubs.empty()) {
    throw Unsatisfiable("graph has no multi-homed stubs");
  }
  const PathLengths lengths(graph);
  workers = pick_workers(workers);
  std::vector<ReachRow> rows;
  for (auto tl : t_ls) {
    std::vector<std::vector<double>> sums(workers, std::vector<double>(max_deploying + 1, 0.0));
    std::vector<std::string> failure(workers);
    parallel_chunks(reps, workers, [&](unsigned w, std::uint64_t lo, std::uint64_t hi) {
      std::vector<std::size_t> order(graph.size());
      for (std::uint64_t rep = lo; rep < hi && failure[w].empty(); ++rep) {
        std::vector<std::size_t> chosen;
        for (std::uint64_t restart = 0; chosen.size() < max_deploying; ++restart) {
          if (restart > 200) {
            failure[w] = "cannot place " + std::to_string(max_deploying) +
                         " deploying ASes within " + std::to_string(tl) + " hops of each other";
            break;
          }
          Rng rng(derive_seed(seed, {0x8EAC, rep, restart}));
          chosen.assign(1, rng.below(graph.size()));
          while (chosen.size() < max_deploying) {
            std::iota(order.begin(), order.end(), std::size_t{0});
            rng.shuffle(order);
            bool placed = false;
            for (auto x : order) {
              if (std::find(chosen.begin(), chosen.end(), x) != chosen.end()) {
                continue;
              }
              bool near = true;
              for (auto d : chosen) {
                if (lengths.length(d, x) > tl || lengths.length(x, d) > tl) {
                  near = false;
                  break;
                }
              }
              if (near) {
                chosen.push_back(x);
                placed = true;
                break;
              }
            }
            if (!placed) {
              break;
            }
          }
        }
        if (!failure[w].empty()) {
          break;
        }
        std::vector<char> reached(stubs.size(), 0);
        std::size_t count = 0;
        for (std::size_t n = 1; n <= max_deploying; ++n) {
          const auto to_d = lengths.toward(chosen[n - 1]);
          for (std::size_t k = 0; k < stubs.size(); ++k) {
            if (!reached[k] && (*to_d)[stubs[k]] <= tl) {
              reached[k] = 1;
              ++count;
            }
          }
          sums[w][n] += static_cast<double>(count) / static_cast<double>(stubs.size());
        }
      }
    });
    for (const auto & f : failure) {
      if (!f.empty()) {
        throw Unsatisfiable(f);
      }
    }
    for (std::size_t n = 1; n <= max_deploying; ++n) {
      double total = 0.0;
      for (unsigned w = 0; w < workers; ++w) {
        total += sums[w][n];
      }
      rows.push_back(ReachRow{tl, n, total / static_cast<double>(reps), reps});
    }
  }
  return rows;
}

}  // namespace dena::bgp
