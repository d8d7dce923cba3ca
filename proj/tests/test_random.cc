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


#include <set>
#include <vector>

#include "doctest.h"
#include "nerunify/random.h"

namespace nerunify {
namespace {

TEST_CASE("same seed replays the same stream") {
  Rng a(42), b(42), c(43);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    std::uint64_t x = a.NextU64();
    CHECK(x == b.NextU64());
    differs = differs || x != c.NextU64();
  }
  CHECK(differs);
}

TEST_CASE("draws stay in range") {
  Rng rng(7);
  for (int i = 0; i < 10000; ++i) {
    double d = rng.NextDouble();
    CHECK(d >= 0.0);
    CHECK(d < 1.0);
    CHECK(rng.Below(3) < 3);
    std::uint64_t v = rng.Between(2, 4);
    CHECK(v >= 2);
    CHECK(v <= 4);
  }
}

TEST_CASE("sample indices are distinct and cover small ranges") {
  Rng rng(1);
  auto idx = rng.SampleIndices(1000, 50);
  CHECK(idx.size() == 50);
  CHECK(std::set<std::size_t>(idx.begin(), idx.end()).size() == 50);
  for (std::size_t i : idx) CHECK(i < 1000);
  auto all = rng.SampleIndices(5, 9);
  CHECK(std::set<std::size_t>(all.begin(), all.end()) == std::set<std::size_t>{0, 1, 2, 3, 4});
  CHECK(rng.SampleIndices(10, 0).empty());
}

TEST_CASE("sample indices are uniform over positions") {
  Rng rng(3);
  std::vector<int> hits(10, 0);
  for (int t = 0; t < 20000; ++t) {
    for (std::size_t i : rng.SampleIndices(10, 3)) ++hits[i];
  }
  // Expected 6000 each.
  for (int h : hits) {
    CHECK(h > 5600);
    CHECK(h < 6400);
  }
}

TEST_CASE("derived seeds separate labels") {
  CHECK(DeriveSeed(1, "a") == DeriveSeed(1, "a"));
  CHECK(DeriveSeed(1, "a") != DeriveSeed(1, "b"));
  CHECK(DeriveSeed(1, "a") != DeriveSeed(2, "a"));
}

TEST_CASE("shuffle is a permutation") {
  Rng rng(9);
  std::vector<int> v{1, 2, 3, 4, 5, 6};
  rng.Shuffle(v);
  CHECK(std::multiset<int>(v.begin(), v.end()) == std::multiset<int>{1, 2, 3, 4, 5, 6});
}

}  // namespace
}  // namespace nerunify
