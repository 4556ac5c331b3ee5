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
#ifndef DENA_SELECT_HPP_
#define DENA_SELECT_HPP_

#include <optional>
#include <span>

#include "dena/path.hpp"

namespace dena
{

struct SelectConfig
{
  double switch_threshold = 0.05;

  void validate() const;
};

/// Three-rule choice. Unavailable paths are passed as loss 1.0.
///
/// 1. ip_loss < threshold -> Ip.
/// 2. Otherwise the FIA path with the lowest loss below threshold, lowest
///    index on ties.
/// 3. Otherwise the global minimum; Ip wins ties, then the lowest FIA index.
///
/// Throws NoPaths when ip_loss is absent and fia_losses is empty.
PathId select_path(
  std::optional<double> ip_loss, std::span<const double> fia_losses, const SelectConfig & cfg = {});

}  // namespace dena

#endif  // DENA_SELECT_HPP_
