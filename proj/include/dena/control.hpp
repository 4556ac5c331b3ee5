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
#ifndef DENA_CONTROL_HPP_
#define DENA_CONTROL_HPP_

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "dena/packet.hpp"
#include "dena/random.hpp"

namespace dena
{

inline constexpr std::array<std::uint8_t, 8> kControlMagic{'D', 'E', 'N', 'A', 'C', 'T', 'L', '1'};

/// Bytes in front of the payload: magic, type, big-endian length.
constexpr std::size_t kControlHeaderSize = 8 + 1 + 2;

enum class MsgType : std::uint8_t {
  Bootstrap = 1,
  MeasRequest,
  MeasReply,
  Start,
  StartAck,
  Stop,
  StopAck,
  KeepAliveReq,
  KeepAliveResp,
};

std::string_view to_string(MsgType t) noexcept;

struct ControlMessage
{
  MsgType type = MsgType::Bootstrap;
  std::vector<std::uint8_t> payload;

  friend bool operator==(const ControlMessage &, const ControlMessage &) = default;
};

std::vector<std::uint8_t> serialize(const ControlMessage & msg);

/// nullopt when the bytes do not start with the magic. Throws
/// MalformedControl when they do but the rest does not decode.
std::optional<ControlMessage> deserialize(std::span<const std::uint8_t> bytes);

/// Clone a data packet of the flow and replace its payload with msg.
SimPacket make_control(const SimPacket & templ, const ControlMessage & msg);

std::optional<ControlMessage> parse_control(const SimPacket & pkt);

/// Cheap magic check; never throws.
bool is_control(const SimPacket & pkt) noexcept;

/// Host endpoint behind a NAT, as seen on the private side.
struct PrivateEndpoint
{
  Addr addr = 0;
  std::uint16_t port = 0;

  friend bool operator==(const PrivateEndpoint &, const PrivateEndpoint &) = default;
};

struct BootstrapInfo
{
  std::uint64_t dena_id = 0;
  std::uint16_t fia_isd = 0;
  std::uint32_t fia_aid = 0;
  Addr gateway_addr = 0;
  std::optional<PrivateEndpoint> private_host;

  friend bool operator==(const BootstrapInfo &, const BootstrapInfo &) = default;
};

/// Size of the FIA addressing portion (isd, aid, gateway).
constexpr std::size_t kFiaAddressBytes = 2 + 4 + 4;

/// Exchange progress carried next to the info.
struct BootstrapFlags
{
  bool have_peer = false;    ///< sender already holds the receiver's info
  bool established = false;  ///< sender needs nothing more

  friend bool operator==(const BootstrapFlags &, const BootstrapFlags &) = default;
};

/// dena_id(8) isd(2) aid(4) gateway(4) flags(1) [private addr(4) port(2)].
/// Flag bits: 0 have_peer, 1 private endpoint present, 2 established.
std::vector<std::uint8_t> encode_bootstrap(const BootstrapInfo & info, BootstrapFlags flags = {});
std::pair<BootstrapInfo, BootstrapFlags> decode_bootstrap(std::span<const std::uint8_t> payload);

struct PeerRecord
{
  BootstrapInfo peer;
  bool local_is_initiator = false;

  friend bool operator==(const PeerRecord &, const PeerRecord &) = default;
};

/// The numerically smaller id initiates measurements.
bool is_initiator(std::uint64_t local_id, std::uint64_t peer_id) noexcept;

struct RetryPolicy
{
  std::int64_t spacing_ms = 1000;
  int max_retries = 3;
};

/// One side of the bootstrap exchange.
///
/// Both sides send their info. A side is established once it holds the
/// peer's info and has seen a message that proves the peer holds its own.
class BootstrapSession
{
public:
  enum class Status : std::uint8_t { Pending, Established, TimedOut };

  BootstrapSession(BootstrapInfo local, RetryPolicy policy = {});

  /// First transmission.
  ControlMessage start(std::int64_t now_ms);

  /// Deadline passed: retransmit, or time out after the last retry.
  std::optional<ControlMessage> on_timer(std::int64_t now_ms);

  /// Handle a Bootstrap from the peer; may produce an immediate reply.
  std::optional<ControlMessage> on_message(const ControlMessage & msg, std::int64_t now_ms);

  Status status() const noexcept { return status_; }
  std::int64_t deadline() const noexcept { return deadline_; }
  int retries_used() const noexcept { return retries_; }
  const BootstrapInfo & local() const noexcept { return local_; }

  /// Throws Timeout when the exchange failed, nullopt while pending.
  std::optional<PeerRecord> peer() const;

private:
  ControlMessage message() const;

  BootstrapInfo local_;
  RetryPolicy policy_;
  std::optional<BootstrapInfo> peer_;
  bool acked_ = false;
  bool started_ = false;
  int retries_ = 0;
  std::int64_t deadline_ = 0;
  Status status_ = Status::Pending;
};

/// Run the exchange between two sessions over a channel that drops each
/// control message independently with probability loss and delays it by
/// delay_ms. Returns the records held by (a, b). Throws Timeout.
std::pair<PeerRecord, PeerRecord> bootstrap_exchange(
  const BootstrapInfo & a, const BootstrapInfo & b, double loss, std::int64_t delay_ms, Rng & rng,
  RetryPolicy policy = {});

}  // namespace dena

#endif  // DENA_CONTROL_HPP_
