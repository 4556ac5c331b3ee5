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

// dena_cli: experiment runner. Every subcommand writes CSV into the output
// directory (--output-dir, else $DENA_OUTPUT_DIR, else .).

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dena/bgp/graph.hpp"
#include "dena/bgp/hijack.hpp"
#include "dena/error.hpp"
#include "dena/sim/experiments.hpp"
#include "dena/sim/scenario.hpp"

namespace fs = std::filesystem;
using namespace dena;

namespace
{

struct Common
{
  std::optional<std::uint64_t> seed;
  std::string output_dir;
  std::string format = "csv";
  unsigned workers = 0;

  std::uint64_t seed_or_default() const { return seed.value_or(1); }
};

struct Range
{
  std::size_t lo = 1;
  std::size_t hi = 1;
};

// "3" or "1..7"
Range parse_range(const std::string & text)
{
  Range r;
  const auto dots = text.find("..");
  try {
    std::size_t used = 0;
    if (dots == std::string::npos) {
      r.lo = r.hi = std::stoul(text, &used);
      if (used != text.size()) {
        throw std::invalid_argument(text);
      }
    } else {
      r.lo = std::stoul(text.substr(0, dots), &used);
      r.hi = std::stoul(text.substr(dots + 2));
    }
  } catch (const std::exception &) {
    throw CLI::ValidationError("range", "expected N or LO..HI, got '" + text + "'");
  }
  if (r.lo == 0 || r.hi < r.lo) {
    throw CLI::ValidationError("range", "empty or zero-based range '" + text + "'");
  }
  return r;
}

std::ofstream open_out(const Common & c, const std::string & name)
{
  fs::create_directories(c.output_dir);
  const fs::path p = fs::path(c.output_dir) / name;
  std::ofstream out(p);
  if (!out) {
    throw ConfigError("cannot write '" + p.string() + "'");
  }
  out << std::setprecision(10);
  std::cout << "wrote " << p.string() << '\n';
  return out;
}

void close_out(std::ofstream & out)
{
  out.close();
  if (!out) {
    throw ConfigError("write failed");
  }
}

// --- detect -----------------------------------------------------------------

struct DetectArgs
{
  double loss_max = 0.10;
  double loss_step = 0.01;
  std::uint64_t trials = 100000;
  std::size_t attempts = 5;
  std::uint64_t fp_streams = 10000;
  std::uint64_t fp_packets = 1000000;
};

const std::vector<sim::FpConfig> kConfigs{{3, true}, {3, false}, {5, true}, {5, false}};

std::string config_name(const sim::FpConfig & c)
{
  return "thr" + std::to_string(c.threshold) + (c.use_prefilter ? "_prefilter" : "_noprefilter");
}

void run_detect(const Common & c, const DetectArgs & a)
{
  std::vector<double> losses;
  for (std::size_t i = 0; static_cast<double>(i) * a.loss_step <= a.loss_max + 1e-9; ++i) {
    losses.push_back(static_cast<double>(i) * a.loss_step);
  }
  std::vector<std::vector<sim::FnRow>> tables;
  for (const auto & cfg : kConfigs) {
    DetectionConfig d;
    d.threshold = cfg.threshold;
    d.use_prefilter = cfg.use_prefilter;
    d.max_attempts = a.attempts;
    tables.push_back(sim::experiment_fn(losses, d, a.trials, c.seed_or_default(), c.workers));
  }
  auto fn = open_out(c, "fn.csv");
  fn << "loss";
  for (const auto & cfg : kConfigs) {
    fn << ",fn_" << config_name(cfg);
  }
  fn << ",attempts,trials\n";
  for (std::size_t i = 0; i < losses.size(); ++i) {
    fn << losses[i];
    for (const auto & t : tables) {
      fn << ',' << t[i].fn();
    }
    fn << ',' << a.attempts << ',' << a.trials << '\n';
  }
  close_out(fn);
  std::cout << "FN at loss " << losses.back() << ", " << a.attempts << " attempt(s):";
  for (std::size_t k = 0; k < kConfigs.size(); ++k) {
    std::cout << ' ' << config_name(kConfigs[k]) << '=' << tables[k].back().fn();
  }
  std::cout << '\n';

  if (a.fp_streams == 0) {
    return;
  }
  const auto rows = sim::experiment_fp(a.fp_packets, kConfigs, a.fp_streams, c.seed_or_default(), c.workers);
  auto fp = open_out(c, "fp.csv");
  fp << "threshold,prefilter,hits,streams,packets,fp\n";
  for (const auto & r : rows) {
    fp << r.cfg.threshold << ',' << (r.cfg.use_prefilter ? 1 : 0) << ',' << r.hits << ',' << r.streams
       << ',' << a.fp_packets << ',' << r.fp() << '\n';
    std::cout << "FP " << config_name(r.cfg) << ' ' << r.fp() << '\n';
  }
  close_out(fp);
}

// --- pathsim ----------------------------------------------------------------

struct PathsimArgs
{
  std::string scenario;
  std::optional<double> loss;
  bool packets = false;
};

void run_pathsim(const Common & c, const PathsimArgs & a)
{
  sim::Scenario sc = sim::load_scenario(a.scenario);
  if (a.loss) {
    for (auto & ev : sc.schedule) {
      if (ev.key == "ip.loss" && ev.value > 0.0) {
        ev.value = *a.loss;
      }
    }
  }
  sc.record_packets = a.packets;
  sc.validate();
  const auto res = sim::experiment_switch(sc, c.seed_or_default());

  auto tp = open_out(c, "throughput.csv");
  res.trace.write_throughput_csv(tp);
  close_out(tp);
  auto sw = open_out(c, "switches.csv");
  sw << "time_ms,site,from,to\n";
  for (const auto & s : res.trace.switches) {
    sw << s.time_ms << ',' << s.site + 1 << ',' << s.from.to_string() << ',' << s.to.to_string() << '\n';
  }
  close_out(sw);
  if (a.packets) {
    auto ev = open_out(c, "events.csv");
    res.trace.write_events_csv(ev);
    close_out(ev);
  }
  const auto ms = [](const std::optional<std::int64_t> & v) {
    return v ? std::to_string(*v) + " ms" : std::string("none");
  };
  std::cout << "switches: " << res.trace.switches.size() << '\n'
            << "to fia after loss: " << ms(res.to_fia_ms) << '\n'
            << "back to ip after recovery: " << ms(res.to_ip_ms) << '\n'
            << "replicated share before switch: " << res.replica_share << '\n';
}

// --- bgp --------------------------------------------------------------------

struct BgpArgs
{
  std::string topology;
  std::size_t synth_ases = 2000;
  std::vector<std::string> scenarios;
  std::string adv = "1..7";
  std::uint64_t trials = 1000;
  std::vector<std::size_t> tls{2, 3, 4, 5};
  std::string deploying = "1..20";
  std::uint64_t reps = 5000;
  std::string out = "synthetic.txt";
};

bgp::AsGraph load_graph(const Common & c, const BgpArgs & a)
{
  if (!a.topology.empty()) {
    return bgp::load_topology_file(a.topology);
  }
  bgp::SynthParams p;
  p.n_ases = a.synth_ases;
  p.seed = c.seed_or_default();
  std::cout << "no --topology: synthetic graph of " << p.n_ases << " ASes\n";
  return bgp::synthesize_topology(p);
}

void run_stats(const Common & c, const BgpArgs & a)
{
  const auto s = bgp::topology_stats(load_graph(c, a));
  auto out = open_out(c, "stats.csv");
  out << "n_ases,n_edges,n_stubs,n_multihomed_stubs\n"
      << s.n_ases << ',' << s.n_edges << ',' << s.n_stubs << ',' << s.n_multihomed_stubs << '\n';
  close_out(out);
  std::cout << "ASes " << s.n_ases << ", links " << s.n_edges << ", stubs " << s.n_stubs
            << ", multi-homed stubs " << s.n_multihomed_stubs << '\n';
}

void run_hijack(const Common & c, const BgpArgs & a)
{
  const auto g = load_graph(c, a);
  std::vector<bgp::DeploymentParams> params;
  for (const auto & s : a.scenarios) {
    params.push_back(bgp::DeploymentParams::parse(s));
  }
  if (params.empty()) {
    for (const char * s : {"TN3-TL2-LBGP4", "TN4-TL2-LBGP4", "TN3-TL3-LBGP4", "TN3-TL4-LBGP4",
                           "TN3-TL2-LBGP5", "TN4-TL2-LBGP5", "TN3-TL3-LBGP5", "TN3-TL4-LBGP5"}) {
      params.push_back(bgp::DeploymentParams::parse(s));
    }
  }
  const Range adv = parse_range(a.adv);
  const auto rows = bgp::experiment_hijack(g, params, adv.hi, a.trials, c.seed_or_default(), c.workers);
  auto out = open_out(c, "hijack.csv");
  out << "scenario,n_adv,model,p_tunnel,p_bgp,trials\n";
  for (const auto & r : rows) {
    if (r.n_adv >= adv.lo) {
      out << r.scenario << ',' << r.n_adv << ',' << bgp::to_string(r.model) << ',' << r.p_tunnel() << ','
          << r.p_bgp() << ',' << r.trials << '\n';
    }
  }
  close_out(out);
}

void run_reach(const Common & c, const BgpArgs & a)
{
  const auto g = load_graph(c, a);
  const Range dep = parse_range(a.deploying);
  const auto rows = bgp::experiment_reach(g, a.tls, dep.hi, a.reps, c.seed_or_default(), c.workers);
  auto out = open_out(c, "reach.csv");
  out << "t_l,n_deploying,mean_fraction,reps\n";
  for (const auto & r : rows) {
    if (r.n_deploying >= dep.lo) {
      out << r.t_l << ',' << r.n_deploying << ',' << r.mean_fraction << ',' << r.reps << '\n';
    }
  }
  close_out(out);
}

void run_synth(const Common & c, const BgpArgs & a)
{
  const auto g = load_graph(c, a);
  auto out = open_out(c, a.out);
  bgp::write_topology(out, g);
  close_out(out);
}

}  // namespace

int main(int argc, char ** argv)
{
  CLI::App app{"DENA protocol and BGP hijack simulator"};
  app.require_subcommand(1);
  app.fallthrough();
  Common common;
  if (const char * env = std::getenv("DENA_OUTPUT_DIR"); env && *env) {
    common.output_dir = env;
  } else {
    common.output_dir = ".";
  }
  app.add_option("--seed", common.seed, "RNG seed (required when CI is set)");
  app.add_option("--output-dir", common.output_dir, "Directory for CSV output");
  app.add_option("--format", common.format, "Output format")->check(CLI::IsMember({"csv"}));
  app.add_option("--workers", common.workers, "Worker threads, 0 = all cores");

  DetectArgs det;
  auto * detect = app.add_subcommand("detect", "False negative and false positive rates of discovery");
  detect->add_option("--loss-max", det.loss_max, "Highest loss rate")->check(CLI::Range(0.0, 1.0));
  detect->add_option("--loss-step", det.loss_step, "Loss increment")->check(CLI::Range(1e-6, 1.0));
  detect->add_option("--trials", det.trials, "Trials per loss rate")->check(CLI::PositiveNumber);
  detect->add_option("--attempts", det.attempts, "Announcements per trial")->check(CLI::PositiveNumber);
  detect->add_option("--fp-streams", det.fp_streams, "Random streams, 0 skips the FP run");
  detect->add_option("--fp-packets", det.fp_packets, "Packets per stream")->check(CLI::PositiveNumber);

  PathsimArgs ps;
  auto * pathsim = app.add_subcommand("pathsim", "Path switching under injected loss");
  pathsim->add_option("scenario,--scenario", ps.scenario, "Scenario file")->required();
  pathsim->add_option("--loss", ps.loss, "Replace the injected IP loss rate")->check(CLI::Range(0.0, 1.0));
  pathsim->add_flag("--packets", ps.packets, "Also write the packet event trace");

  BgpArgs ba;
  auto * bgpc = app.add_subcommand("bgp", "AS-level hijack and reach experiments");
  bgpc->require_subcommand(1);
  bgpc->fallthrough();
  bgpc->add_option("--topology", ba.topology, "AS relationship file (a|b|rel)");
  bgpc->add_option("--synth-ases", ba.synth_ases, "Synthetic graph size without --topology")
    ->check(CLI::Range(16, 10000000));
  auto * stats = bgpc->add_subcommand("stats", "Topology summary");
  auto * hijack = bgpc->add_subcommand("hijack", "Hijack probability of tunnels and BGP paths");
  hijack->add_option("--scenario", ba.scenarios, "e.g. TN4-TL2-LBGP4 (repeatable)");
  hijack->add_option("--adv", ba.adv, "Adversary counts, N or LO..HI");
  hijack->add_option("--trials", ba.trials, "Deployments per scenario")->check(CLI::PositiveNumber);
  auto * reach = bgpc->add_subcommand("reach", "Share of multi-homed stubs near a deployment");
  reach->add_option("--tl", ba.tls, "Segment length limits (repeatable)")->check(CLI::PositiveNumber);
  reach->add_option("--deploying", ba.deploying, "Deploying AS counts, N or LO..HI");
  reach->add_option("--reps", ba.reps, "Repetitions")->check(CLI::PositiveNumber);
  auto * synth = bgpc->add_subcommand("synth", "Write a synthetic topology");
  synth->add_option("--out", ba.out, "File name inside the output directory");

  try {
    app.parse(argc, argv);
    if (const char * ci = std::getenv("CI"); ci && *ci && !common.seed) {
      throw CLI::RequiredError("--seed (mandatory when CI is set)");
    }
    parse_range(ba.adv);
    parse_range(ba.deploying);
  } catch (const CLI::ParseError & e) {
    return app.exit(e);
  }

  try {
    if (*detect) {
      run_detect(common, det);
    } else if (*pathsim) {
      run_pathsim(common, ps);
    } else if (*stats) {
      run_stats(common, ba);
    } else if (*hijack) {
      run_hijack(common, ba);
    } else if (*reach) {
      run_reach(common, ba);
    } else if (*synth) {
      run_synth(common, ba);
    }
  } catch (const std::exception & e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
