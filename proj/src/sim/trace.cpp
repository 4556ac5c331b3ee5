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

#include "dena/sim/trace.hpp"

#include <ostream>

namespace dena::sim
{

std::string_view to_string(TraceEvent e) noexcept
{
  switch (e) {
    case TraceEvent::Send: return "send";
    case TraceEvent::Drop: return "drop";
    case TraceEvent::Deliver: return "deliver";
    case TraceEvent::Duplicate: return "duplicate";
    case TraceEvent::Stamp: return "stamp";
    case TraceEvent::Control: return "control";
    case TraceEvent::Detect: return "detect";
    case TraceEvent::GaveUp: return "gave-up";
    case TraceEvent::Bootstrap: return "bootstrap";
    case TraceEvent::Switch: return "switch";
    case TraceEvent::PathDown: return "path-down";
    case TraceEvent::PathUp: return "path-up";
  }
  return "?";
}

void Trace::write_events_csv(std::ostream & os) const
{
  os << "time_ms,node,event,path,seq_no\n";
  for (const auto & r : events) {
    os << r.time_ms << ',' << (r.node < nodes.size() ? nodes[r.node] : std::string("?")) << ','
       << to_string(r.event) << ',';
    if (r.path != kNoPath) {
      os << PathId::from_slot(r.path).to_string();
    }
    os << ',' << r.seq_no << '\n';
  }
}

void Trace::write_throughput_csv(std::ostream & os) const
{
  os << "time_s,path,bytes\n";
  for (std::size_t s = 0; s < throughput.size(); ++s) {
    for (std::size_t p = 0; p < throughput[s].size(); ++p) {
      os << s << ',' << PathId::from_slot(p).to_string() << ',' << throughput[s][p] << '\n';
    }
  }
}

}  // namespace dena::sim
