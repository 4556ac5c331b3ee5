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
#ifndef DENA_SIM_CHANNEL_HPP_
#define DENA_SIM_CHANNEL_HPP_

#include <cstdint>
#include <optional>
#include <vector>

#include "dena/packet.hpp"
#include "dena/random.hpp"

namespace dena::sim
{

struct ChannelModel
{
  double loss_prob = 0.0;
  double reorder_prob = 0.0;  ///< packet swaps places with its successor
  double dup_prob = 0.0;
  std::int64_t delay_ms = 0;
  int hops = 0;               ///< TTL decrement along the channel
  std::uint64_t seed = 0;

  void validate() const;
};

struct Arrival
{
  std::int64_t at = 0;
  SimPacket pkt;
  bool duplicate = false;
};

/// One direction of a link. Loss, duplication and reordering are decided
/// per packet from the channel's own generator.
class Channel
{
public:
  explicit Channel(ChannelModel model);

  struct Outcome
  {
    bool dropped = false;
    bool held = false;             ///< kept back to be released after the next packet
    std::vector<Arrival> arrivals; ///< in delivery order
  };

  Outcome transmit(SimPacket pkt, std::int64_t now);

  /// Release a held packet whose successor never came.
  std::vector<Arrival> flush(std::int64_t now);

  /// Time at which flush() should run if nothing else is sent.
  std::optional<std::int64_t> flush_due() const noexcept;

  const ChannelModel & model() const noexcept { return model_; }
  void set_loss(double p);
  void set_reorder(double p);
  void set_dup(double p);
  void set_delay(std::int64_t ms);

  /// Milliseconds a held packet waits for a successor before flush.
  static constexpr std::int64_t kHoldLimitMs = 5;

private:
  ChannelModel model_;
  Rng rng_;
  std::optional<Arrival> held_;
  std::int64_t held_since_ = 0;
};

}  // namespace dena::sim

#endif  // DENA_SIM_CHANNEL_HPP_
