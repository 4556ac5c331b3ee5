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

#include "dena/select.hpp"

#include "dena/error.hpp"

namespace dena
{

void SelectConfig::validate() const
{
  if (!(switch_threshold > 0.0 && switch_threshold < 1.0)) {
    throw ConfigError("switch threshold must lie strictly between 0 and 1");
  }
}

PathId select_path(
  std::optional<double> ip_loss, std::span<const double> fia_losses, const SelectConfig & cfg)
{
  if (!ip_loss && fia_losses.empty()) {
    throw NoPaths();
  }
  const double thr = cfg.switch_threshold;
  if (ip_loss && *ip_loss < thr) {
    return PathId::ip();
  }
  std::optional<std::size_t> best_fia;
  for (std::size_t i = 0; i < fia_losses.size(); ++i) {
    if (!best_fia || fia_losses[i] < fia_losses[*best_fia]) {
      best_fia = i;
    }
  }
  if (best_fia && fia_losses[*best_fia] < thr) {
    return PathId::fia(static_cast<std::uint8_t>(*best_fia));
  }
  if (ip_loss && (!best_fia || *ip_loss <= fia_losses[*best_fia])) {
    return PathId::ip();
  }
  return PathId::fia(static_cast<std::uint8_t>(*best_fia));
}

}  // namespace dena
