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
#ifndef DENA_SIM_NETWORK_HPP_
#define DENA_SIM_NETWORK_HPP_

#include <cstdint>

#include "dena/sim/scenario.hpp"
#include "dena/sim/trace.hpp"

namespace dena::sim
{

/// Run a scenario on the virtual millisecond clock. The same scenario and
/// seed always give the same trace. Throws ConfigError.
Trace run(const Scenario & scenario, std::uint64_t seed);

}  // namespace dena::sim

#endif  // DENA_SIM_NETWORK_HPP_
