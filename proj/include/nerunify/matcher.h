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

#ifndef NERUNIFY_MATCHER_H_
#define NERUNIFY_MATCHER_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace nerunify {

// Code point trie over a set of surface strings. Matches never cut through
// a word of a space-delimited script (see OnWordBoundary).
class SurfaceMatcher {
 public:
  struct Match {
    std::size_t start;
    std::size_t end;
    std::uint32_t id;
  };

  SurfaceMatcher();

  // Inserts a surface and returns its id. Re-adding returns the same id.
  std::uint32_t Add(std::u32string_view surface);

  std::optional<std::uint32_t> Find(std::u32string_view surface) const;

  std::size_t size() const { return surface_count_; }

  // Every occurrence of every surface, ordered by (start, end).
  std::vector<Match> FindAll(std::u32string_view text) const;

  // Greedy left-to-right scan taking the longest surface at each position;
  // matches do not overlap.
  std::vector<Match> FindLongest(std::u32string_view text) const;

 private:
  static constexpr std::uint32_t kNone = UINT32_MAX;

  std::uint32_t Child(std::uint32_t node, char32_t c) const;

  std::unordered_map<std::uint64_t, std::uint32_t> edges_;
  std::vector<std::uint32_t> terminal_;  // surface id per node, or kNone
  std::size_t surface_count_ = 0;
};

}  // namespace nerunify

#endif  // NERUNIFY_MATCHER_H_
