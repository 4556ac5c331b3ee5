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

#include "dena/control.hpp"

#include <algorithm>
#include <limits>
#include <queue>
#include <tuple>

#include "dena/error.hpp"

namespace dena
{

std::string_view to_string(MsgType t) noexcept
{
  switch (t) {
    case MsgType::Bootstrap: return "Bootstrap";
    case MsgType::MeasRequest: return "MeasRequest";
    case MsgType::MeasReply: return "MeasReply";
    case MsgType::Start: return "Start";
    case MsgType::StartAck: return "StartAck";
    case MsgType::Stop: return "Stop";
    case MsgType::StopAck: return "StopAck";
    case MsgType::KeepAliveReq: return "KeepAliveReq";
    case MsgType::KeepAliveResp: return "KeepAliveResp";
  }
  return "?";
}

std::vector<std::uint8_t> serialize(const ControlMessage & msg)
{
  if (msg.payload.size() > 0xFFFF) {
    throw MalformedControl("control payload longer than 65535 bytes");
  }
  std::vector<std::uint8_t> out(kControlMagic.begin(), kControlMagic.end());
  out.push_back(static_cast<std::uint8_t>(msg.type));
  out.push_back(static_cast<std::uint8_t>(msg.payload.size() >> 8));
  out.push_back(static_cast<std::uint8_t>(msg.payload.size() & 0xFF));
  out.insert(out.end(), msg.payload.begin(), msg.payload.end());
  return out;
}

std::optional<ControlMessage> deserialize(std::span<const std::uint8_t> bytes)
{
  if (bytes.size() < kControlMagic.size() ||
      !std::equal(kControlMagic.begin(), kControlMagic.end(), bytes.begin())) {
    return std::nullopt;
  }
  if (bytes.size() < kControlHeaderSize) {
    throw MalformedControl("control header truncated");
  }
  const std::uint8_t type = bytes[8];
  if (type < static_cast<std::uint8_t>(MsgType::Bootstrap) ||
      type > static_cast<std::uint8_t>(MsgType::KeepAliveResp)) {
    throw MalformedControl("unknown control message type " + std::to_string(type));
  }
  const std::size_t len = (std::size_t{bytes[9]} << 8) | bytes[10];
  if (bytes.size() != kControlHeaderSize + len) {
    throw MalformedControl(
      "control length field says " + std::to_string(len) + ", body has " +
      std::to_string(bytes.size() - kControlHeaderSize));
  }
  ControlMessage msg;
  msg.type = static_cast<MsgType>(type);
  msg.payload.assign(bytes.begin() + kControlHeaderSize, bytes.end());
  return msg;
}

SimPacket make_control(const SimPacket & templ, const ControlMessage & msg)
{
  SimPacket pkt = templ;
  pkt.payload = serialize(msg);
  return pkt;
}

std::optional<ControlMessage> parse_control(const SimPacket & pkt)
{
  return deserialize(pkt.payload);
}

bool is_control(const SimPacket & pkt) noexcept
{
  return pkt.payload.size() >= kControlMagic.size() &&
         std::equal(kControlMagic.begin(), kControlMagic.end(), pkt.payload.begin());
}

namespace
{

template<typename T>
void put_be(std::vector<std::uint8_t> & out, T v)
{
  for (int shift = static_cast<int>(sizeof(T) * 8) - 8; shift >= 0; shift -= 8) {
    out.push_back(static_cast<std::uint8_t>(v >> shift));
  }
}

template<typename T>
T get_be(std::span<const std::uint8_t> in, std::size_t at)
{
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    v = static_cast<T>((v << 8) | in[at + i]);
  }
  return v;
}

constexpr std::size_t kBootstrapFixed = 8 + kFiaAddressBytes + 1;
constexpr std::size_t kPrivateBytes = 4 + 2;

}  // namespace

std::vector<std::uint8_t> encode_bootstrap(const BootstrapInfo & info, BootstrapFlags flags)
{
  if (info.dena_id == 0) {
    throw ConfigError("dena_id must be nonzero");
  }
  std::vector<std::uint8_t> out;
  out.reserve(kBootstrapFixed + kPrivateBytes);
  put_be(out, info.dena_id);
  put_be(out, info.fia_isd);
  put_be(out, info.fia_aid);
  put_be(out, info.gateway_addr);
  std::uint8_t bits = flags.have_peer ? 0x01 : 0x00;
  if (info.private_host) {
    bits |= 0x02;
  }
  if (flags.established) {
    bits |= 0x04;
  }
  out.push_back(bits);
  if (info.private_host) {
    put_be(out, info.private_host->addr);
    put_be(out, info.private_host->port);
  }
  return out;
}

std::pair<BootstrapInfo, BootstrapFlags> decode_bootstrap(std::span<const std::uint8_t> payload)
{
  if (payload.size() < kBootstrapFixed) {
    throw MalformedControl("bootstrap payload truncated");
  }
  BootstrapInfo info;
  info.dena_id = get_be<std::uint64_t>(payload, 0);
  info.fia_isd = get_be<std::uint16_t>(payload, 8);
  info.fia_aid = get_be<std::uint32_t>(payload, 10);
  info.gateway_addr = get_be<std::uint32_t>(payload, 14);
  const std::uint8_t flags = payload[18];
  if ((flags & ~0x07) != 0) {
    throw MalformedControl("bootstrap flags carry unknown bits");
  }
  if (info.dena_id == 0) {
    throw MalformedControl("bootstrap dena_id is zero");
  }
  const bool has_private = (flags & 0x02) != 0;
  const std::size_t want = kBootstrapFixed + (has_private ? kPrivateBytes : 0);
  if (payload.size() != want) {
    throw MalformedControl("bootstrap payload has wrong size");
  }
  if (has_private) {
    info.private_host = PrivateEndpoint{
      get_be<std::uint32_t>(payload, kBootstrapFixed),
      get_be<std::uint16_t>(payload, kBootstrapFixed + 4)};
  }
  return {info, BootstrapFlags{(flags & 0x01) != 0, (flags & 0x04) != 0}};
}

bool is_initiator(std::uint64_t local_id, std::uint64_t peer_id) noexcept
{
  return local_id < peer_id;
}

BootstrapSession::BootstrapSession(BootstrapInfo local, RetryPolicy policy)
: local_(std::move(local)), policy_(policy)
{
  if (local_.dena_id == 0) {
    throw ConfigError("dena_id must be nonzero");
  }
  if (policy_.max_retries < 0 || policy_.spacing_ms <= 0) {
    throw ConfigError("bootstrap retry policy out of range");
  }
}

ControlMessage BootstrapSession::message() const
{
  const BootstrapFlags flags{peer_.has_value(), status_ == Status::Established};
  return ControlMessage{MsgType::Bootstrap, encode_bootstrap(local_, flags)};
}

ControlMessage BootstrapSession::start(std::int64_t now_ms)
{
  started_ = true;
  deadline_ = now_ms + policy_.spacing_ms;
  return message();
}

std::optional<ControlMessage> BootstrapSession::on_timer(std::int64_t now_ms)
{
  if (status_ != Status::Pending || !started_ || now_ms < deadline_) {
    return std::nullopt;
  }
  if (retries_ >= policy_.max_retries) {
    status_ = Status::TimedOut;
    return std::nullopt;
  }
  ++retries_;
  deadline_ = now_ms + policy_.spacing_ms;
  return message();
}

std::optional<ControlMessage> BootstrapSession::on_message(
  const ControlMessage & msg, std::int64_t now_ms)
{
  if (msg.type != MsgType::Bootstrap || status_ == Status::TimedOut) {
    return std::nullopt;
  }
  auto [info, flags] = decode_bootstrap(msg.payload);
  if (info.dena_id == local_.dena_id) {
    return std::nullopt;
  }
  peer_ = info;
  if (flags.have_peer) {
    acked_ = true;
  }
  if (acked_) {
    status_ = Status::Established;
  }
  if (!started_) {
    started_ = true;
    deadline_ = now_ms + policy_.spacing_ms;
  }
  // Answer right away unless the peer is already done.
  if (!flags.established) {
    return message();
  }
  return std::nullopt;
}

std::optional<PeerRecord> BootstrapSession::peer() const
{
  if (status_ == Status::TimedOut) {
    throw Timeout("peer did not answer bootstrap after " + std::to_string(retries_) + " retries");
  }
  if (status_ != Status::Established) {
    return std::nullopt;
  }
  return PeerRecord{*peer_, is_initiator(local_.dena_id, peer_->dena_id)};
}

std::pair<PeerRecord, PeerRecord> bootstrap_exchange(
  const BootstrapInfo & a, const BootstrapInfo & b, double loss, std::int64_t delay_ms, Rng & rng,
  RetryPolicy policy)
{
  std::array<BootstrapSession, 2> side{BootstrapSession(a, policy), BootstrapSession(b, policy)};
  struct Item
  {
    std::int64_t at;
    std::uint64_t order;
    int to;
    ControlMessage msg;
  };
  auto later = [](const Item & x, const Item & y) {
    return std::tie(x.at, x.order) > std::tie(y.at, y.order);
  };
  std::priority_queue<Item, std::vector<Item>, decltype(later)> wire(later);
  std::uint64_t order = 0;
  auto send = [&](int from, std::int64_t now, std::optional<ControlMessage> m) {
    if (m && !rng.bernoulli(loss)) {
      wire.push(Item{now + delay_ms, order++, 1 - from, std::move(*m)});
    }
  };
  send(0, 0, side[0].start(0));
  send(1, 0, side[1].start(0));
  auto pending = [&] {
    return side[0].status() == BootstrapSession::Status::Pending ||
           side[1].status() == BootstrapSession::Status::Pending;
  };
  while (pending()) {
    std::int64_t next_timer = std::numeric_limits<std::int64_t>::max();
    for (const auto & s : side) {
      if (s.status() == BootstrapSession::Status::Pending) {
        next_timer = std::min(next_timer, s.deadline());
      }
    }
    if (!wire.empty() && wire.top().at <= next_timer) {
      Item it = wire.top();
      wire.pop();
      send(it.to, it.at, side[it.to].on_message(it.msg, it.at));
      continue;
    }
    for (int i = 0; i < 2; ++i) {
      if (side[i].status() == BootstrapSession::Status::Pending &&
          side[i].deadline() == next_timer) {
        send(i, next_timer, side[i].on_timer(next_timer));
      }
    }
  }
  auto ra = side[0].peer();
  auto rb = side[1].peer();
  return {*ra, *rb};
}

}  // namespace dena
