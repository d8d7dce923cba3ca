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


#include <sstream>

#include "doctest.h"
#include "nerunify/common.h"
#include "nerunify/corpus.h"
#include "test_util.h"

namespace nerunify {
namespace {

using testing::MakeDataset;
using testing::MakeSample;

TEST_CASE("universal labels") {
  UniversalLabel l = UniversalLabel::Parse("location->scene");
  CHECK(l.depth() == 2);
  CHECK(l.segments() == std::vector<std::string>{"location", "scene"});
  REQUIRE(l.parent().has_value());
  CHECK(l.parent()->str() == "location");
  CHECK_FALSE(UniversalLabel::Parse("person").parent().has_value());
  CHECK_THROWS_AS(UniversalLabel::Parse("a->"), DataError);
  CHECK_THROWS_AS(UniversalLabel::Parse(""), DataError);
  CHECK(UniversalLabel::FromSegments({"person", "artist"}).str() == "person->artist");
}

TEST_CASE("well-formed sample has no violations") {
  Sample s = MakeSample("s", "d", "Paris is big", {{"geo-political entity", 0, 5}});
  CHECK(s.mentions[0].surface == "Paris");
  CHECK(ValidateSample(s, false).empty());
}

TEST_CASE("empty span is one violation") {
  Sample s = MakeSample("s", "d", "Paris is big", {{"location", 3, 3}});
  auto v = ValidateSample(s, false);
  REQUIRE(v.size() == 1);
  CHECK(v[0].rule == rules::kEmptySpan);
  CHECK(v[0].mention_index == 0);
}

TEST_CASE("partial overlap in a flat dataset is one violation") {
  Sample s = MakeSample("s", "d", "abcdefghijklmnop", {{"x", 0, 9}, {"y", 4, 12}});
  auto v = ValidateSample(s, false);
  REQUIRE(v.size() == 1);
  CHECK(v[0].rule == rules::kPartialOverlap);
  CHECK(ValidateSample(s, true).size() == 1);  // crossing is never nesting
}

TEST_CASE("nesting is allowed only in nested datasets") {
  Sample s = MakeSample("s", "d", "New York City", {{"location", 0, 13}, {"location", 0, 8}});
  CHECK(ValidateSample(s, true).empty());
  auto v = ValidateSample(s, false);
  REQUIRE(v.size() == 1);
  CHECK(v[0].rule == rules::kNestedInFlat);
}

TEST_CASE("out of bounds and surface mismatch") {
  Sample s = MakeSample("s", "d", "short", {{"x", 0, 5}});
  s.mentions[0].end = 9;
  CHECK(ValidateSample(s, false).at(0).rule == rules::kOutOfBounds);
  Sample t = MakeSample("t", "d", "short", {{"x", 0, 5}});
  t.mentions[0].surface = "other";
  CHECK(ValidateSample(t, false).at(0).rule == rules::kSurfaceMismatch);
}

Corpus StatsFixture() {
  std::vector<Sample> a, b;
  for (int i = 0; i < 5; ++i) {
    a.push_back(MakeSample("a" + std::to_string(i), "A", "Ann in Rome",
                           {{"person", 0, 3}, {"location", 7, 11}}));
    b.push_back(MakeSample("b" + std::to_string(i), "B", "Rome hosts Acme",
                           {{"location", 0, 4}, {"organization", 11, 15}}));
  }
  Corpus c;
  c.datasets.push_back(MakeDataset("A", a));
  c.datasets.push_back(MakeDataset("B", b));
  return c;
}

TEST_CASE("stats of the two-dataset fixture") {
  CorpusStats st = ComputeStats(StatsFixture());
  CHECK(st.datasets == 2);
  CHECK(st.types == 3);
  CHECK(st.samples == 10);
  CHECK(st.dataset_types == 4);
  CHECK(st.mentions == 20);
  REQUIRE(st.groups.size() == 1);
  CHECK(st.groups[0].types == 3);
}

TEST_CASE("stats of an empty corpus are zero") {
  CorpusStats st = ComputeStats(Corpus{});
  CHECK(st.datasets == 0);
  CHECK(st.types == 0);
  CHECK(st.samples == 0);
  CHECK(st.mentions == 0);
  CHECK(st.groups.empty());
}

TEST_CASE("jsonl round trip") {
  Corpus c = StatsFixture();
  c.datasets[0].samples[0].text = "Ann in Rome \xf0\x9f\x98\x80";
  std::stringstream ss;
  WriteSamplesJsonl(c, ss);
  std::string first;
  std::getline(ss, first);
  CHECK(first.find("\"surface\"") == std::string::npos);
  CHECK(first.rfind("{\"id\":\"a0\",\"dataset_id\":\"A\",\"language\":\"en\",\"text\":", 0) == 0);
  ss.seekg(0);
  Corpus back = ReadCorpus(DatasetsToJson(c), ss);
  CHECK(back == c);
}

TEST_CASE("corpus reader rejects duplicate ids and unknown datasets") {
  Corpus c = StatsFixture();
  std::stringstream dup;
  WriteSamplesJsonl(c, dup);
  std::string text = dup.str();
  std::string line = text.substr(0, text.find('\n') + 1);
  std::stringstream twice(text + line);
  CHECK_THROWS_AS(ReadCorpus(DatasetsToJson(c), twice), DataError);
  std::stringstream unknown(
      "{\"id\":\"z\",\"dataset_id\":\"Z\",\"language\":\"en\",\"text\":\"x\",\"mentions\":[]}\n");
  CHECK_THROWS_AS(ReadCorpus(DatasetsToJson(c), unknown), DataError);
  std::stringstream broken("{not json\n");
  CHECK_THROWS_AS(ReadCorpus(DatasetsToJson(c), broken), ParseError);
}

}  // namespace
}  // namespace nerunify
