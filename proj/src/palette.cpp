/* Copyright 2026 The latentprobe Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <algorithm>
#include <set>
#include <stdexcept>

#include "latentprobe/types.hpp"

namespace latentprobe {

ColorPalette::ColorPalette(std::vector<PaletteEntry> entries) : entries_(std::move(entries)) {
  if (entries_.empty()) throw std::invalid_argument("palette is empty");
  std::set<Rgb> seen;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].id != static_cast<Label>(i)) {
      throw std::invalid_argument("palette label ids must be contiguous from 0");
    }
    if (!seen.insert(entries_[i].color).second) {
      throw std::invalid_argument("palette color for '" + entries_[i].name + "' is duplicated");
    }
  }
}

ColorPalette ColorPalette::isprs() {
  return ColorPalette({
      {0, {0, 0, 255}, "building"},
      {1, {255, 255, 255}, "road"},
      {2, {255, 255, 0}, "car"},
      {3, {0, 255, 0}, "tree"},
      {4, {0, 255, 255}, "low_vegetation"},
      {5, {255, 0, 0}, "clutter"},
  });
}

std::optional<Label> ColorPalette::lookup(const Rgb& color) const {
  const auto it = std::find_if(entries_.begin(), entries_.end(),
                               [&](const PaletteEntry& e) { return e.color == color; });
  if (it == entries_.end()) return std::nullopt;
  return it->id;
}

std::vector<std::string> ColorPalette::names() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.name);
  return out;
}

}  // namespace latentprobe
