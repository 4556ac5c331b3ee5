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
#ifndef DENA_PATH_HPP_
#define DENA_PATH_HPP_

#include <compare>
#include <cstdint>
#include <string>

namespace dena
{

/// Either the plain IP path or one of the peer's FIA overlay paths.
struct PathId
{
  enum class Kind : std::uint8_t { Ip = 0, Fia = 1 };

  Kind kind = Kind::Ip;
  std::uint8_t index = 0;  ///< FIA path index; always 0 for Ip

  static constexpr PathId ip() noexcept { return PathId{Kind::Ip, 0}; }
  static constexpr PathId fia(std::uint8_t i) noexcept { return PathId{Kind::Fia, i}; }

  bool is_ip() const noexcept { return kind == Kind::Ip; }

  /// Dense slot: Ip is 0, Fia(i) is i + 1.
  std::size_t slot() const noexcept { return is_ip() ? 0 : std::size_t{index} + 1; }
  static PathId from_slot(std::size_t slot) noexcept
  {
    return slot == 0 ? ip() : fia(static_cast<std::uint8_t>(slot - 1));
  }

  std::string to_string() const
  {
    return is_ip() ? std::string("ip") : "fia" + std::to_string(index);
  }

  friend auto operator<=>(const PathId &, const PathId &) = default;
};

}  // namespace dena

#endif  // DENA_PATH_HPP_
