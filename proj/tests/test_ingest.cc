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
#include "nerunify/ingest.h"
#include "test_util.h"

namespace nerunify {
namespace {

RawLabelTable Table() {
  return RawLabelTable({{"PER", "person"}, {"LOC", "location"}, {"ORG", "organization"}});
}

TaggedOptions Options(bool strict = false) {
  TaggedOptions o;
  o.info.id = "d";
  o.info.language = "en";
  o.strict = strict;
  return o;
}

TEST_CASE("bio sentence to spans") {
  std::istringstream in("John B-PER\nSmith I-PER\nruns O\n");
  Diagnostics diag;
  Dataset d = ParseTagged(in, TagScheme::kBio, Table(), Options(), &diag);
  REQUIRE(d.samples.size() == 1);
  const Sample &s = d.samples[0];
  CHECK(s.text == "John Smith runs");
  CHECK(s.id == "d:0");
  REQUIRE(s.mentions.size() == 1);
  CHECK(s.mentions[0].start == 0);
  CHECK(s.mentions[0].end == 10);
  CHECK(s.mentions[0].surface == "John Smith");
  CHECK(s.mentions[0].label.str() == "person");
  CHECK(diag.empty());
}

TEST_CASE("dangling inside tag is repaired with a warning") {
  std::istringstream in("Smith I-PER\nruns O\n");
  Diagnostics diag;
  Dataset d = ParseTagged(in, TagScheme::kBio, Table(), Options(), &diag);
  REQUIRE(d.samples.at(0).mentions.size() == 1);
  CHECK(d.samples[0].mentions[0].surface == "Smith");
  CHECK(diag.warnings().size() == 1);
  std::istringstream again("Smith I-PER\nruns O\n");
  CHECK_THROWS_AS(ParseTagged(again, TagScheme::kBio, Table(), Options(true)), ParseError);
}

TEST_CASE("bioes single and multi token mentions") {
  std::istringstream in("Paris S-LOC\nand O\nNew B-LOC\nYork E-LOC\n");
  Dataset d = ParseTagged(in, TagScheme::kBioes, Table(), Options());
  const Sample &s = d.samples.at(0);
  REQUIRE(s.mentions.size() == 2);
  CHECK(s.mentions[0].surface == "Paris");
  CHECK(s.mentions[1].surface == "New York");
}

TEST_CASE("docstart lines, columns and sentence breaks") {
  std::istringstream in("-DOCSTART- -X- O O\n\nEU NNP B-NP B-ORG\nrejects VBZ B-VP O\n\n"
                        "Peter NNP B-NP B-PER\n");
  Dataset d = ParseTagged(in, TagScheme::kBio, Table(), Options());
  REQUIRE(d.samples.size() == 2);
  CHECK(d.samples[0].mentions.at(0).label.str() == "organization");
  CHECK(d.samples[1].id == "d:1");
}

TEST_CASE("unknown raw label aborts the dataset") {
  std::istringstream in("x B-MISC\n");
  CHECK_THROWS_AS(ParseTagged(in, TagScheme::kBio, Table(), Options()), DataError);
}

TEST_CASE("unknown tag prefix is a parse error with a line number") {
  std::istringstream in("a O\nb X-PER\n");
  try {
    ParseTagged(in, TagScheme::kBio, Table(), Options());
    FAIL("expected a parse error");
  } catch (const ParseError &e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("no-space join for chinese") {
  TaggedOptions o = Options();
  o.no_space_join = true;
  std::istringstream in("张 B-PER\n伟 I-PER\n在 O\n北 B-LOC\n京 I-LOC\n");
  Dataset d = ParseTagged(in, TagScheme::kBio, Table(), o);
  const Sample &s = d.samples.at(0);
  CHECK(s.text == "张伟在北京");
  REQUIRE(s.mentions.size() == 2);
  CHECK(s.mentions[1].start == 3);
  CHECK(s.mentions[1].end == 5);
  CHECK(s.mentions[1].surface == "北京");
}

TEST_CASE("render tagged inverts parse") {
  std::string input = "John B-person\nSmith I-person\nvisited O\nParis B-location\n";
  RawLabelTable identity({{"person", "person"}, {"location", "location"}});
  for (TagScheme scheme : {TagScheme::kBio, TagScheme::kBioes}) {
    std::istringstream in(input);
    Dataset d = ParseTagged(in, TagScheme::kBio, identity, Options());
    std::vector<std::string> lines = RenderTagged(d.samples.at(0), scheme, false);
    std::string joined;
    for (const std::string &l : lines) joined += l + "\n";
    std::istringstream back(joined);
    Dataset again = ParseTagged(back, scheme, identity, Options());
    CHECK(again.samples.at(0).mentions == d.samples[0].mentions);
    CHECK(again.samples[0].text == d.samples[0].text);
  }
}

DatasetInfo SpanInfo() {
  DatasetInfo info;
  info.id = "s";
  info.language = "en";
  return info;
}

TEST_CASE("span jsonl: translation, rejection and mismatch") {
  std::istringstream in(
      "{\"id\":\"a\",\"text\":\"Ann met Bob\",\"mentions\":[{\"start\":0,\"end\":3,\"label\":\"PER\"}]}\n"
      "{\"id\":\"b\",\"text\":\"Ann met Bob\",\"mentions\":[{\"start\":5,\"end\":2,\"label\":\"PER\"}]}\n"
      "{\"id\":\"c\",\"text\":\"Ann met Bob\",\"mentions\":[{\"start\":8,\"end\":11,\"label\":\"PER\","
      "\"surface\":\"Rob\"}]}\n");
  Diagnostics diag;
  SpanIngestResult r = ParseSpanJsonl(in, Table(), SpanInfo(), &diag);
  REQUIRE(r.dataset.samples.size() == 1);
  CHECK(r.dataset.samples[0].mentions.at(0).label.str() == "person");
  REQUIRE(r.rejected.size() == 2);
  CHECK(r.rejected[0].sample_id == "b");
  CHECK(r.rejected[0].violations.at(0).rule == "empty or inverted span");
  CHECK(r.rejected[1].violations.at(0).rule == rules::kSurfaceMismatch);
  CHECK(diag.warnings().size() == 2);
}

TEST_CASE("span jsonl: malformed line reports its number") {
  std::istringstream in("{\"id\":\"a\",\"text\":\"x\"}\n{oops\n");
  try {
    ParseSpanJsonl(in, Table(), SpanInfo());
    FAIL("expected a parse error");
  } catch (const ParseError &e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("manifest ingest of the bundled fixtures") {
  auto entries = LoadManifest(std::string(NERUNIFY_FIXTURE_DIR) + "/manifest.json");
  REQUIRE(entries.size() == 6);
  Diagnostics diag;
  Corpus c = IngestManifest(entries, false, 2, &diag);
  REQUIRE(c.datasets.size() == 6);
  CHECK(c.datasets[0].info.id == "conll_en");
  CHECK(c.datasets[0].samples.size() == 12);
  CHECK(c.datasets[0].info.label_set ==
        std::set<std::string>{"location", "miscellaneous", "organization", "person"});
  CHECK(c.datasets[2].info.label_set.count("geopolitical entity") == 1);
  const Dataset *zh = c.Find("msra_zh");
  REQUIRE(zh != nullptr);
  CHECK(zh->samples[0].text == "张伟在北京工作。");
  for (const Dataset &d : c.datasets) {
    for (const Sample &s : d.samples) CHECK(ValidateSample(s, d.info.nested).empty());
  }
}

TEST_CASE("duplicate sample ids across datasets are fatal") {
  testing::TempDir dir("dup-ids");
  testing::WriteFile(dir.path() / "a.jsonl", "{\"id\":\"x\",\"text\":\"a\"}\n");
  testing::WriteFile(dir.path() / "m.json",
                     "{\"datasets\":[{\"id\":\"a\",\"language\":\"en\",\"format\":\"jsonl\","
                     "\"path\":\"a.jsonl\"},{\"id\":\"b\",\"language\":\"en\",\"format\":\"jsonl\","
                     "\"path\":\"a.jsonl\"}]}");
  auto entries = LoadManifest((dir.path() / "m.json").string());
  CHECK_THROWS_AS(IngestManifest(entries, false, 1), DataError);
}

}  // namespace
}  // namespace nerunify
