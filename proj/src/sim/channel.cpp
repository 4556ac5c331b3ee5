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

#include "dena/sim/channel.hpp"

#include <algorithm>

#include "dena/error.hpp"

namespace dena::sim
{

namespace
{

void check_prob(double p, const char * what)
{
  if (!(p >= 0.0 && p <= 1.0)) {
    throw ConfigError(std::string(what) + " must lie in [0, 1]");
  }
}

}  // namespace

void ChannelModel::validate() const
{
  check_prob(loss_prob, "loss probability");
  check_prob(reorder_prob, "reorder probability");
  check_prob(dup_prob, "duplicate probability");
  if (delay_ms < 0) {
    throw ConfigError("channel delay must be non-negative");
  }
  if (hops < 0 || hops > 63) {
    throw ConfigError("channel hop count must lie in [0, 63]");
  }
}

Channel::Channel(ChannelModel model) : model_(model), rng_(model.seed)
{
  model_.validate();
}

void Channel::set_loss(double p)
{
  check_prob(p, "loss probability");
  model_.loss_prob = p;
}

void Channel::set_reorder(double p)
{
  check_prob(p, "reorder probability");
  model_.reorder_prob = p;
}

void Channel::set_dup(double p)
{
  check_prob(p, "duplicate probability");
  model_.dup_prob = p;
}

void Channel::set_delay(std::int64_t ms)
{
  if (ms < 0) {
    throw ConfigError("channel delay must be non-negative");
  }
  model_.delay_ms = ms;
}

Channel::Outcome Channel::transmit(SimPacket pkt, std::int64_t now)
{
  Outcome out;
  // Draw all three decisions for every packet so one knob never shifts the
  // random stream of the others.
  const bool lose = rng_.bernoulli(model_.loss_prob);
  const bool dup = rng_.bernoulli(model_.dup_prob);
  const bool reorder = rng_.bernoulli(model_.reorder_prob);
  if (lose) {
    out.dropped = true;
    return out;
  }
  pkt.ttl = static_cast<std::uint8_t>(std::max(1, pkt.ttl - model_.hops));
  Arrival a{now + model_.delay_ms, std::move(pkt), false};
  std::optional<Arrival> copy;
  if (dup) {
    copy = Arrival{a.at, a.pkt, true};
  }
  if (held_) {
    Arrival prev = std::move(*held_);
    held_.reset();
    prev.at = std::max(prev.at, a.at);
    out.arrivals.push_back(std::move(a));
    if (copy) {
      out.arrivals.push_back(std::move(*copy));
    }
    out.arrivals.push_back(std::move(prev));
    return out;
  }
  if (reorder) {
    held_ = std::move(a);
    held_since_ = now;
    out.held = true;
    if (copy) {
      out.arrivals.push_back(std::move(*copy));
    }
    return out;
  }
  out.arrivals.push_back(std::move(a));
  if (copy) {
    out.arrivals.push_back(std::move(*copy));
  }
  return out;
}

std::optional<std::int64_t> Channel::flush_due() const noexcept
{
  if (!held_) {
    return std::nullopt;
  }
  return held_since_ + kHoldLimitMs;
}

std::vector<Arrival> Channel::flush(std::int64_t now)
{
  std::vector<Arrival> out;
  if (held_) {
    held_->at = std::max(held_->at, now);
    out.push_back(std::move(*held_));
    held_.reset();
  }
  return out;
}

}  // namespace dena::sim
