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

#ifndef DENA_BGP_HIJACK_HPP_
#define DENA_BGP_HIJACK_HPP_

#include <cstdint>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "dena/bgp/graph.hpp"
#include "dena/bgp/routing.hpp"
#include "dena/random.hpp"

namespace dena::bgp
{

inline constexpr std::uint8_t kFar = 0xFF;

/// Memoised BGP path lengths toward each destination: toward(d)[s] is the
/// length of s's best route to d's prefix (kFar when none). Thread safe.
class PathLengths
{
public:
  explicit PathLengths(const AsGraph & graph) : graph_(graph) {}

  std::shared_ptr<const std::vector<std::uint8_t>> toward(std::size_t dst) const;
  std::uint8_t length(std::size_t src, std::size_t dst) const { return (*toward(dst))[src]; }

private:
  const AsGraph & graph_;
  mutable std::mutex mu_;
  mutable std::unordered_map<std::size_t, std::shared_ptr<const std::vector<std::uint8_t>>> cache_;
};

struct DeploymentParams
{
  std::size_t tn = 2;     ///< tunnel nodes
  std::size_t tl = 4;     ///< longest allowed segment
  std::size_t l_bgp = 4;  ///< BGP path length between the endpoints

  void validate() const;
  std::string label() const;  ///< e.g. TN4-TL2-LBGP4
  /// Parses a label; throws ConfigError.
  static DeploymentParams parse(const std::string & label);
};

struct TunnelDeployment
{
  DeploymentParams params;
  std::vector<AsId> nodes;                 ///< AS_1 .. AS_TN
  std::vector<std::size_t> segment_lengths;

  std::size_t t_l() const;
  std::size_t l_t() const;
};

/// Endpoints are distinct multi-homed stubs exactly l_bgp hops apart;
/// intermediates are any other ASes keeping every segment within tl.
/// Throws Unsatisfiable after max_attempts failed draws.
TunnelDeployment sample_deployment(const AsGraph & graph, const DeploymentParams & params, Rng & rng,
                                   const PathLengths & lengths, std::size_t max_attempts = 200);
TunnelDeployment sample_deployment(const AsGraph & graph, const DeploymentParams & params, Rng & rng);

enum class Adversary : std::uint8_t { Weak, Strong };
const char * to_string(Adversary a) noexcept;

struct TrialOutcome
{
  bool bgp_hijacked = false;
  bool tunnel_hijacked = false;
};

/// ASes allowed to attack: everything except the tunnel nodes and the ASes
/// on the direct BGP path between the endpoints. Sorted by node index.
std::vector<std::size_t> adversary_candidates(const AsGraph & graph, const TunnelDeployment & dep);

/// Baseline: the destination's Short prefix. Tunnel: each node's Slash24.
/// Adversaries announce prefixes of the same length as the one they attack:
/// the weak model targets only AS_TN, the strong model every AS_2..AS_TN.
TrialOutcome hijack_trial(const AsGraph & graph, const TunnelDeployment & dep,
                          std::span<const AsId> adversaries, Adversary model);
TrialOutcome hijack_trial(const AsGraph & graph, const TunnelDeployment & dep, std::size_t n_adv,
                          Adversary model, Rng & rng);

struct HijackRow
{
  std::string scenario;
  std::size_t n_adv = 0;
  Adversary model = Adversary::Weak;
  std::uint64_t tunnel_hits = 0;
  std::uint64_t bgp_hits = 0;
  std::uint64_t trials = 0;

  double p_tunnel() const { return trials ? static_cast<double>(tunnel_hits) / trials : 0.0; }
  double p_bgp() const { return trials ? static_cast<double>(bgp_hits) / trials : 0.0; }
};

/// For every scenario, `trials` distinct deployments; each gets one shuffled
/// adversary list whose first n entries attack at n = 1..max_adv under both
/// models. Trial k of every scenario with the same l_bgp draws from the same
/// stream, so scenarios, models and adversary counts are all paired.
std::vector<HijackRow> experiment_hijack(const AsGraph & graph,
                                         const std::vector<DeploymentParams> & scenarios,
                                         std::size_t max_adv, std::uint64_t trials,
                                         std::uint64_t seed, unsigned workers = 0);

struct ReachRow
{
  std::size_t t_l = 0;
  std::size_t n_deploying = 0;
  double mean_fraction = 0.0;
  std::uint64_t reps = 0;
};

/// Each repetition draws max_deploying ASes one at a time, each within t_l
/// hops of every AS already drawn (both directions); the first n of them
/// form the n-AS deployment. A multi-homed stub counts as reached when its
/// route to some deploying AS is at most t_l hops long.
std::vector<ReachRow> experiment_reach(const AsGraph & graph, const std::vector<std::size_t> & t_ls,
                                       std::size_t max_deploying, std::uint64_t reps,
                                       std::uint64_t seed, unsigned workers = 0);

}  // namespace dena::bgp

#endif  // DENA_BGP_HIJACK_HPP_
