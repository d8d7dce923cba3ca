// Copyright 2026 The nerunify Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "nerunify/matcher.h"

#include "nerunify/text.h"

namespace nerunify {

namespace {

std::uint64_t EdgeKey(std::uint32_t node, char32_t c) {
  return (static_cast<std::uint64_t>(node) << 21) | static_cast<std::uint64_t>(c);
}

}  // namespace

SurfaceMatcher::SurfaceMatcher() : terminal_(1, kNone) {}

std::uint32_t SurfaceMatcher::Child(std::uint32_t node, char32_t c) const {
  auto it = edges_.find(EdgeKey(node, c));
  return it == edges_.end() ? kNone : it->second;
}

std::uint32_t SurfaceMatcher::Add(std::u32string_view surface) {
  std::uint32_t node = 0;
  for (char32_t c : surface) {
    std::uint32_t next = Child(node, c);
    if (next == kNone) {
      next = static_cast<std::uint32_t>(terminal_.size());
      terminal_.push_back(kNone);
      edges_.emplace(EdgeKey(node, c), next);
    }
    node = next;
  }
  if (terminal_[node] == kNone) {
    terminal_[node] = static_cast<std::uint32_t>(surface_count_++);
  }
  return terminal_[node];
}

std::optional<std::uint32_t> SurfaceMatcher::Find(
    std::u32string_view surface) const {
  std::uint32_t node = 0;
  for (char32_t c : surface) {
    node = Child(node, c);
    if (node == kNone) return std::nullopt;
  }
  if (terminal_[node] == kNone) return std::nullopt;
  return terminal_[node];
}

std::vector<SurfaceMatcher::Match> SurfaceMatcher::FindAll(
    std::u32string_view text) const {
  std::vector<Match> out;
  for (std::size_t start = 0; start < text.size(); ++start) {
    if (start > 0 && IsWordChar(text[start - 1]) && IsWordChar(text[start])) {
      continue;
    }
    std::uint32_t node = 0;
    for (std::size_t i = start; i < text.size(); ++i) {
      node = Child(node, text[i]);
      if (node == kNone) break;
      if (terminal_[node] != kNone && OnWordBoundary(text, start, i + 1)) {
        out.push_back({start, i + 1, terminal_[node]});
      }
    }
  }
  return out;
}

std::vector<SurfaceMatcher::Match> SurfaceMatcher::FindLongest(
    std::u32string_view text) const {
  std::vector<Match> out;
  std::size_t start = 0;
  while (start < text.size()) {
    std::optional<Match> best;
    if (start == 0 || !IsWordChar(text[start - 1]) || !IsWordChar(text[start])) {
      std::uint32_t node = 0;
      for (std::size_t i = start; i < text.size(); ++i) {
        node = Child(node, text[i]);
        if (node == kNone) break;
        if (terminal_[node] != kNone && OnWordBoundary(text, start, i + 1)) {
          best = Match{start, i + 1, terminal_[node]};
        }
      }
    }
    if (best) {
      out.push_back(*best);
      start = best->end;
    } else {
      ++start;
    }
  }
  return out;
}

}  // namespace nerunify
