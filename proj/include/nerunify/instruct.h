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


// Instruction rendering. A prompt lists a label set and the input text;
// the answer maps each prompted label with mentions to its surfaces:
//
//   <task description>
//   Label Set: [person, location]
//   Text: Ann moved to Oslo.
//   Answer:
//
//   {"person":["Ann"],"location":["Oslo"]}
//
// Regularization drops gold labels from both sides and pads the label set
// with shuffled distractors.

#ifndef NERUNIFY_INSTRUCT_H_
#define NERUNIFY_INSTRUCT_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "nerunify/common.h"
#include "nerunify/corpus.h"

namespace nerunify {

inline constexpr std::string_view kTaskDescription =
    "Given a label set of entity types, extract every entity mention in the "
    "text that belongs to one of the listed types. Answer with a JSON object "
    "mapping each type to the list of its mentions; leave out types without "
    "mentions.";

enum class TemplateKind { kPlain, kGuideline, kFewshot };

std::string_view TemplateKindName(TemplateKind kind);
TemplateKind ParseTemplateKind(std::string_view name);

struct RegularizationConfig {
  bool dynamic_labels = true;
  std::size_t min_extra = 0;
  std::size_t max_extra = 10;
  double dropout_prob = 0.1;
  std::uint64_t seed = 0;
  // Longest rendered label list; distractors are cut to fit. 0 = no limit.
  std::size_t max_label_chars = 0;

  // Throws ConfigError.
  void Validate() const;
};

struct InstructionSample {
  std::string prompt;
  std::string answer;
  std::string sample_id;
  std::string dataset_id;
  std::vector<std::string> prompted_labels;  // prompt order
  std::vector<std::string> dropped_labels;   // sorted
};

// Label -> guideline prose. Keys equal after case folding are rejected.
using Guidelines = std::map<std::string, std::string>;

Guidelines ParseGuidelines(const nlohmann::json &doc);
Guidelines LoadGuidelines(const std::string &path);

// Compact JSON object, labels in `labels` order, mentions in text order.
// Labels without mentions are left out; no mentions at all gives "{}".
std::string SerializeAnswer(const Sample &sample, std::span<const std::string> labels);

// With dynamic labels off the prompt lists the whole universe, minus
// dropped labels, in sorted order.
InstructionSample Render(const Sample &sample, const std::set<std::string> &universe,
                         const RegularizationConfig &config, Diagnostics *diag);

// As Render, plus a "Guidelines:" section with one line per prompted label
// that has a guideline.
InstructionSample RenderGuideline(const Sample &sample,
                                  const std::set<std::string> &universe,
                                  const Guidelines &guidelines,
                                  const RegularizationConfig &config,
                                  Diagnostics *diag);

// As Render, plus n exemplars chosen with the seeded RNG and answered under
// the same label set. Throws ConfigError if an exemplar is the query.
InstructionSample RenderFewshot(const Sample &sample,
                                const std::set<std::string> &universe,
                                std::span<const Sample *const> exemplars, std::size_t n,
                                const RegularizationConfig &config, Diagnostics *diag);
InstructionSample RenderFewshot(const Sample &sample,
                                const std::set<std::string> &universe,
                                std::span<const Sample> exemplars, std::size_t n,
                                const RegularizationConfig &config, Diagnostics *diag);

nlohmann::ordered_json InstructionToJson(const InstructionSample &sample);

}  // namespace nerunify

#endif  // NERUNIFY_INSTRUCT_H_
