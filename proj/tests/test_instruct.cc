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

#include "doctest.h"
#include "nerunify/common.h"
#include "nerunify/instruct.h"
#include "test_util.h"

namespace nerunify {
namespace {

using testing::MakeSampleBySurface;

const std::set<std::string> kUniverse{"person", "location", "organization", "date",
                                      "event",  "product",  "work of art"};

Sample Query() {
  return MakeSampleBySurface("q", "d", "Ann moved to Oslo with Bob",
                             {{"person", "Ann"}, {"location", "Oslo"}, {"person", "Bob"}});
}

RegularizationConfig Off() {
  RegularizationConfig cfg;
  cfg.dropout_prob = 0.0;
  cfg.min_extra = 0;
  cfg.max_extra = 0;
  return cfg;
}

std::string PromptLabels(const std::string &prompt) {
  std::size_t at = prompt.find("Label Set: [");
  return prompt.substr(at, prompt.find('\n', at) - at);
}

TEST_CASE("regularization off lists exactly the gold labels") {
  InstructionSample r = Render(Query(), kUniverse, Off(), nullptr);
  CHECK(std::set<std::string>(r.prompted_labels.begin(), r.prompted_labels.end()) ==
        std::set<std::string>{"location", "person"});
  auto answer = nlohmann::json::parse(r.answer);
  CHECK(answer["person"] == nlohmann::json({"Ann", "Bob"}));
  CHECK(answer["location"] == nlohmann::json({"Oslo"}));
  CHECK(r.prompt.rfind(std::string(kTaskDescription), 0) == 0);
  CHECK(r.prompt.find("Text: Ann moved to Oslo with Bob\nAnswer:") != std::string::npos);
  CHECK(r.dropped_labels.empty());
}

TEST_CASE("forced dropout empties the answer") {
  Sample s = MakeSampleBySurface("s", "d", "Ann slept", {{"person", "Ann"}});
  RegularizationConfig cfg = Off();
  cfg.dropout_prob = 0.999999;
  InstructionSample r = Render(s, kUniverse, cfg, nullptr);
  CHECK(r.dropped_labels == std::vector<std::string>{"person"});
  CHECK(r.answer == "{}");
  CHECK(PromptLabels(r.prompt).find("person") == std::string::npos);
}

TEST_CASE("distractors are added and replay exactly") {
  RegularizationConfig cfg = Off();
  cfg.min_extra = 2;
  cfg.max_extra = 2;
  cfg.seed = 11;
  InstructionSample a = Render(Query(), kUniverse, cfg, nullptr);
  CHECK(a.prompted_labels.size() == 4);
  std::set<std::string> prompted(a.prompted_labels.begin(), a.prompted_labels.end());
  CHECK(prompted.count("person") == 1);
  CHECK(prompted.count("location") == 1);
  InstructionSample b = Render(Query(), kUniverse, cfg, nullptr);
  CHECK(a.prompt == b.prompt);
  CHECK(a.answer == b.answer);
}

TEST_CASE("too few distractors warns and uses all") {
  RegularizationConfig cfg = Off();
  cfg.min_extra = 50;
  cfg.max_extra = 50;
  Diagnostics diag;
  InstructionSample r = Render(Query(), kUniverse, cfg, &diag);
  CHECK(r.prompted_labels.size() == kUniverse.size());
  CHECK_FALSE(diag.empty());
}

TEST_CASE("static label set lists the universe in sorted order") {
  RegularizationConfig cfg = Off();
  cfg.dynamic_labels = false;
  InstructionSample r = Render(Query(), kUniverse, cfg, nullptr);
  CHECK(r.prompted_labels == std::vector<std::string>(kUniverse.begin(), kUniverse.end()));
}

TEST_CASE("gold labels outside the universe are rejected") {
  Sample s = MakeSampleBySurface("s", "d", "Ann", {{"weapon", "Ann"}});
  CHECK_THROWS_AS(Render(s, kUniverse, Off(), nullptr), DataError);
}

TEST_CASE("answer closure and dispersion over many renders") {
  RegularizationConfig on;
  on.dropout_prob = 0.3;
  on.max_extra = 3;
  RegularizationConfig off = on;
  off.dynamic_labels = false;
  int together_on = 0, together_off = 0;
  const int renders = 1000;
  for (int i = 0; i < renders; ++i) {
    on.seed = off.seed = static_cast<std::uint64_t>(i);
    for (const RegularizationConfig *cfg : {&on, &off}) {
      InstructionSample r = Render(Query(), kUniverse, *cfg, nullptr);
      std::set<std::string> prompted(r.prompted_labels.begin(), r.prompted_labels.end());
      nlohmann::json answer = nlohmann::json::parse(r.answer);
      for (const auto &[label, surfaces] : answer.items()) {
        CHECK(prompted.count(label) == 1);
      }
      for (const std::string &d : r.dropped_labels) CHECK(prompted.count(d) == 0);
      bool both = prompted.count("date") && prompted.count("event");
      (cfg == &on ? together_on : together_off) += both;
    }
  }
  CHECK(together_off == renders);
  CHECK(together_on < together_off);
}

TEST_CASE("guideline template") {
  Guidelines g{{"person", "A named human."}, {"location", "A named place."}};
  InstructionSample r = RenderGuideline(Query(), kUniverse, g, Off(), nullptr);
  CHECK(r.prompt.find("Guidelines:\n") != std::string::npos);
  CHECK(r.prompt.find("person: A named human.\n") != std::string::npos);
  CHECK(r.prompt.find("location: A named place.\n") != std::string::npos);

  Diagnostics diag;
  InstructionSample empty = RenderGuideline(Query(), kUniverse, {}, Off(), &diag);
  InstructionSample plain = Render(Query(), kUniverse, Off(), nullptr);
  std::size_t split = plain.prompt.find("Text: ");
  CHECK(empty.prompt == plain.prompt.substr(0, split) + "Guidelines:\n" + plain.prompt.substr(split));
  CHECK(diag.warnings().size() == 2);

  CHECK_THROWS_AS(ParseGuidelines(nlohmann::json{{"Person", "x"}, {"person", "y"}}), ConfigError);
}

TEST_CASE("few-shot template") {
  std::vector<Sample> pool{
      MakeSampleBySurface("e0", "d", "Eve in Rome", {{"person", "Eve"}, {"location", "Rome"}}),
      MakeSampleBySurface("e1", "d", "Max left", {{"person", "Max"}}),
      MakeSampleBySurface("e2", "d", "Lima is far", {{"location", "Lima"}}),
      MakeSampleBySurface("e3", "d", "quiet day", {})};
  RegularizationConfig cfg = Off();
  cfg.seed = 5;
  InstructionSample zero = RenderFewshot(Query(), kUniverse, std::span<const Sample>(pool), 0, cfg, nullptr);
  CHECK(zero.prompt == Render(Query(), kUniverse, cfg, nullptr).prompt);

  InstructionSample a = RenderFewshot(Query(), kUniverse, std::span<const Sample>(pool), 3, cfg, nullptr);
  InstructionSample b = RenderFewshot(Query(), kUniverse, std::span<const Sample>(pool), 3, cfg, nullptr);
  CHECK(a.prompt == b.prompt);
  CHECK(a.prompt.find("Examples:\n") != std::string::npos);
  std::size_t shots = 0;
  for (std::size_t at = a.prompt.find("\nAnswer: {"); at != std::string::npos;
       at = a.prompt.find("\nAnswer: {", at + 1)) {
    ++shots;
  }
  CHECK(shots == 3);

  Diagnostics diag;
  RenderFewshot(Query(), kUniverse, std::span<const Sample>(pool), 9, cfg, &diag);
  CHECK_FALSE(diag.empty());

  std::vector<Sample> with_query = pool;
  with_query.push_back(Query());
  CHECK_THROWS_AS(RenderFewshot(Query(), kUniverse, std::span<const Sample>(with_query), 2, cfg, nullptr),
                  ConfigError);
}

TEST_CASE("instruction json layout") {
  auto j = InstructionToJson(Render(Query(), kUniverse, Off(), nullptr));
  CHECK(j.contains("prompt"));
  CHECK(j.contains("answer"));
  CHECK(j["meta"]["sample_id"] == "q");
  CHECK(j["meta"]["dataset_id"] == "d");
}

TEST_CASE("regularization config validation") {
  RegularizationConfig cfg;
  cfg.dropout_prob = 1.0;
  CHECK_THROWS_AS(cfg.Validate(), ConfigError);
  cfg.dropout_prob = 0.1;
  cfg.min_extra = 4;
  cfg.max_extra = 2;
  CHECK_THROWS_AS(cfg.Validate(), ConfigError);
  CHECK(ParseTemplateKind("fewshot") == TemplateKind::kFewshot);
}

}  // namespace
}  // namespace nerunify
