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

#include "dena/sim/scenario.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "dena/error.hpp"

namespace dena::sim
{

namespace
{

std::string trim(const std::string & s)
{
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) {
    return {};
  }
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> words(const std::string & s)
{
  std::istringstream is(s);
  std::vector<std::string> out;
  std::string w;
  while (is >> w) {
    out.push_back(w);
  }
  return out;
}

template<typename T>
T number(const std::string & text)
{
  T v{};
  const char * end = text.data() + text.size();
  auto [p, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || p != end) {
    throw ConfigError("not a number: '" + text + "'");
  }
  return v;
}

bool boolean(const std::string & text)
{
  if (text == "true" || text == "on" || text == "1" || text == "yes") {
    return true;
  }
  if (text == "false" || text == "off" || text == "0" || text == "no") {
    return false;
  }
  throw ConfigError("not a boolean: '" + text + "'");
}

int site_of(const std::string & text)
{
  const std::string name = text.rfind("site", 0) == 0 ? text.substr(4) : text;
  const int s = number<int>(name);
  if (s != 1 && s != 2) {
    throw ConfigError("site must be 1 or 2");
  }
  return s - 1;
}

bool set_channel(ChannelModel & ch, const std::string & knob, const std::string & value)
{
  if (knob == "loss") {
    ch.loss_prob = number<double>(value);
  } else if (knob == "reorder") {
    ch.reorder_prob = number<double>(value);
  } else if (knob == "dup") {
    ch.dup_prob = number<double>(value);
  } else if (knob == "delay_ms") {
    ch.delay_ms = number<std::int64_t>(value);
  } else if (knob == "hops") {
    ch.hops = number<int>(value);
  } else {
    return false;
  }
  return true;
}

std::pair<std::string, std::uint16_t> endpoint(const std::string & text)
{
  const auto colon = text.find(':');
  if (colon == std::string::npos) {
    throw ConfigError("endpoint must be <host>:<port>, got '" + text + "'");
  }
  return {text.substr(0, colon), number<std::uint16_t>(text.substr(colon + 1))};
}

struct PendingFlow
{
  std::string name;
  std::vector<std::string> args;
  std::size_t line;
};

void apply(Scenario & sc, const std::string & key, const std::string & value,
           std::vector<PendingFlow> & flows, std::size_t line)
{
  const auto dot = key.find('.');
  const std::string head = key.substr(0, dot);
  const std::string tail = dot == std::string::npos ? std::string() : key.substr(dot + 1);
  if (key == "duration_ms") {
    sc.duration_ms = number<std::int64_t>(value);
  } else if (key == "fia.paths") {
    sc.fia_paths = number<std::size_t>(value);
  } else if (key == "record_packets") {
    sc.record_packets = boolean(value);
  } else if (key == "host_ttl") {
    sc.host_ttl = number<std::uint8_t>(value);
  } else if (head == "ip" && set_channel(sc.ip, tail, value)) {
  } else if (head == "fia" && set_channel(sc.fia, tail, value)) {
  } else if (head == "host" && !tail.empty()) {
    const auto w = words(value);
    if (w.size() != 2) {
      throw ConfigError("host needs <site> <addr>");
    }
    sc.hosts.push_back(HostSpec{tail, site_of(w[0]), parse_addr(w[1])});
  } else if (head == "flow" && !tail.empty()) {
    flows.push_back(PendingFlow{tail, words(value), line});
  } else if (key == "event") {
    const auto w = words(value);
    if (w.size() != 3) {
      throw ConfigError("event needs <time ms> <knob> <value>");
    }
    sc.schedule.push_back(ScheduleEvent{number<std::int64_t>(w[0]), w[1], number<double>(w[2])});
  } else if (key == "nat.idle_timeout_ms") {
    sc.nat_idle_timeout_ms = number<std::int64_t>(value);
  } else if (head == "nat") {
    sc.nat_public[site_of(tail)] = parse_addr(value);
  } else if (head == "dena") {
    sc.dena_enabled[site_of(tail)] = boolean(value);
  } else if (head == "gateway") {
    sc.gateway[site_of(tail)] = parse_addr(value);
  } else if (key == "detect.threshold") {
    sc.detect.threshold = number<std::size_t>(value);
  } else if (key == "detect.prefilter") {
    sc.detect.use_prefilter = boolean(value);
  } else if (key == "detect.max_attempts") {
    sc.detect.max_attempts = number<std::size_t>(value);
  } else if (key == "detect.announce_gap") {
    sc.detect.announce_gap = number<std::size_t>(value);
  } else if (key == "meas.period_ms") {
    sc.session.period_ms = number<std::int64_t>(value);
  } else if (key == "meas.interval_ms") {
    sc.session.interval_ms = number<std::int64_t>(value);
  } else if (key == "meas.sample_rate") {
    sc.session.sample_rate = number<double>(value);
  } else if (key == "meas.max_retransmits") {
    sc.session.max_retransmits = number<int>(value);
  } else if (key == "select.threshold") {
    sc.session.select.switch_threshold = number<double>(value);
  } else if (key == "bootstrap.retries") {
    sc.retry.max_retries = number<int>(value);
  } else if (key == "bootstrap.spacing_ms") {
    sc.retry.spacing_ms = number<std::int64_t>(value);
  } else if (key == "keepalive.misses") {
    sc.keepalive_misses = number<int>(value);
  } else if (key == "keepalive.interval_ms") {
    sc.keepalive_interval_ms = number<std::int64_t>(value);
  } else {
    throw ConfigError("unknown key '" + key + "'");
  }
}

FlowSpec make_flow(const Scenario & sc, const PendingFlow & pf)
{
  const auto & w = pf.args;
  if (w.size() < 4 || w.size() > 7) {
    throw ConfigError(
      "flow needs <host>:<port> <host>:<port> <rate> <tcp|udp> [payload] [start_ms] [stop_ms]");
  }
  FlowSpec f;
  f.name = pf.name;
  const auto [src, sport] = endpoint(w[0]);
  const auto [dst, dport] = endpoint(w[1]);
  const auto si = sc.host_index(src);
  const auto di = sc.host_index(dst);
  if (!si || !di) {
    throw ConfigError("flow names an unknown host");
  }
  f.src_host = *si;
  f.src_port = sport;
  f.dst_host = *di;
  f.dst_port = dport;
  f.rate_pps = number<double>(w[2]);
  if (w[3] == "tcp") {
    f.protocol = proto::kTcp;
  } else if (w[3] == "udp") {
    f.protocol = proto::kUdp;
  } else {
    throw ConfigError("transport must be tcp or udp");
  }
  if (w.size() > 4) {
    f.payload_bytes = number<std::size_t>(w[4]);
  }
  if (w.size() > 5) {
    f.start_ms = number<std::int64_t>(w[5]);
  }
  if (w.size() > 6) {
    f.stop_ms = number<std::int64_t>(w[6]);
  }
  return f;
}

}  // namespace

Addr parse_addr(const std::string & text)
{
  std::array<std::uint32_t, 4> part{};
  std::size_t at = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    const auto end = i < 3 ? text.find('.', at) : text.size();
    if (end == std::string::npos) {
      throw ConfigError("bad address '" + text + "'");
    }
    part[i] = number<std::uint32_t>(text.substr(at, end - at));
    if (part[i] > 255) {
      throw ConfigError("bad address '" + text + "'");
    }
    at = end + 1;
  }
  return (part[0] << 24) | (part[1] << 16) | (part[2] << 8) | part[3];
}

std::optional<std::size_t> Scenario::host_index(const std::string & name) const
{
  for (std::size_t i = 0; i < hosts.size(); ++i) {
    if (hosts[i].name == name) {
      return i;
    }
  }
  return std::nullopt;
}

void Scenario::validate() const
{
  if (duration_ms <= 0) {
    throw ConfigError("duration_ms must be positive");
  }
  if (fia_paths > 254) {
    throw ConfigError("at most 254 FIA paths");
  }
  ip.validate();
  fia.validate();
  detect.validate();
  session.validate();
  if (retry.max_retries < 0 || retry.spacing_ms <= 0) {
    throw ConfigError("bootstrap retry policy out of range");
  }
  if (keepalive_misses < 1 || keepalive_interval_ms <= 0) {
    throw ConfigError("keep-alive settings out of range");
  }
  for (const auto & e : schedule) {
    if (e.at_ms < 0 || e.at_ms > duration_ms) {
      throw ConfigError("scheduled event at " + std::to_string(e.at_ms) + " ms lies outside the run");
    }
    const auto dot = e.key.find('.');
    const std::string head = e.key.substr(0, dot);
    const std::string knob = dot == std::string::npos ? "" : e.key.substr(dot + 1);
    if ((head != "ip" && head != "fia") ||
        (knob != "loss" && knob != "reorder" && knob != "dup" && knob != "delay_ms")) {
      throw ConfigError("unknown schedule knob '" + e.key + "'");
    }
  }
  for (std::size_t i = 0; i < hosts.size(); ++i) {
    for (std::size_t j = i + 1; j < hosts.size(); ++j) {
      if (hosts[i].name == hosts[j].name) {
        throw ConfigError("duplicate host name '" + hosts[i].name + "'");
      }
    }
  }
  for (const auto & f : flows) {
    if (f.src_host >= hosts.size() || f.dst_host >= hosts.size()) {
      throw ConfigError("flow '" + f.name + "' names an unknown host");
    }
    if (hosts[f.src_host].site == hosts[f.dst_host].site) {
      throw ConfigError("flow '" + f.name + "' must cross between the sites");
    }
    if (!(f.rate_pps >= 0.0)) {
      throw ConfigError("flow '" + f.name + "' has a negative rate");
    }
  }
}

Scenario parse_scenario(std::istream & in, const std::string & source)
{
  Scenario sc;
  std::vector<PendingFlow> flows;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string text = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (text.empty()) {
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(source + ":" + std::to_string(line) + ": expected key = value");
    }
    try {
      apply(sc, trim(text.substr(0, eq)), trim(text.substr(eq + 1)), flows, line);
    } catch (const ConfigError & e) {
      throw ConfigError(source + ":" + std::to_string(line) + ": " + e.what());
    }
  }
  for (const auto & pf : flows) {
    try {
      sc.flows.push_back(make_flow(sc, pf));
    } catch (const ConfigError & e) {
      throw ConfigError(source + ":" + std::to_string(pf.line) + ": " + e.what());
    }
  }
  sc.validate();
  return sc;
}

Scenario load_scenario(const std::string & path)
{
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open scenario file '" + path + "'");
  }
  return parse_scenario(in, path);
}

}  // namespace dena::sim
