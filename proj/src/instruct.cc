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


#include "nerunify/instruct.h"

#include <algorithm>
#include <fstream>
#include <utility>

#include "nerunify/random.h"
#include "nerunify/text.h"

namespace nerunify {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view TemplateKindName(TemplateKind kind) {
  switch (kind) {
    case TemplateKind::kPlain:
      return "plain";
    case TemplateKind::kGuideline:
      return "guideline";
    case TemplateKind::kFewshot:
      return "fewshot";
  }
  return "unknown";
}

TemplateKind ParseTemplateKind(std::string_view name) {
  for (TemplateKind k : {TemplateKind::kPlain, TemplateKind::kGuideline, TemplateKind::kFewshot}) {
    if (TemplateKindName(k) == name) return k;
  }
  throw ConfigError("unknown template '" + std::string(name) + "'");
}

void RegularizationConfig::Validate() const {
  if (min_extra > max_extra) throw ConfigError("min_extra exceeds max_extra");
  if (!(dropout_prob >= 0.0 && dropout_prob < 1.0)) {
    throw ConfigError("dropout probability must be in [0, 1)");
  }
}

Guidelines ParseGuidelines(const json &doc) {
  if (!doc.is_object()) throw ConfigError("guidelines must be a JSON object");
  Guidelines out;
  std::map<std::string, std::string> folded;
  for (const auto &[label, text] : doc.items()) {
    if (!text.is_string()) throw ConfigError("guideline for '" + label + "' is not a string");
    auto [it, inserted] = folded.emplace(CaseFold(label), label);
    if (!inserted) {
      throw ConfigError("guideline keys '" + it->second + "' and '" + label +
                        "' differ only by case");
    }
    out[label] = text.get<std::string>();
  }
  return out;
}

Guidelines LoadGuidelines(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read guidelines file " + path);
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw ConfigError("malformed guidelines file " + path);
  return ParseGuidelines(doc);
}

std::string SerializeAnswer(const Sample &sample, std::span<const std::string> labels) {
  ordered_json answer = ordered_json::object();
  for (const std::string &label : labels) {
    ordered_json surfaces = ordered_json::array();
    for (const EntityMention &m : sample.mentions) {
      if (m.label.str() == label) surfaces.push_back(m.surface);
    }
    if (!surfaces.empty()) answer[label] = std::move(surfaces);
  }
  return answer.dump();
}

namespace {

struct LabelPlan {
  std::vector<std::string> prompted;
  std::vector<std::string> dropped;
};

std::size_t ListChars(const std::vector<std::string> &labels) {
  std::size_t n = 0;
  for (const std::string &l : labels) n += CodepointLength(l);
  return n + (labels.empty() ? 0 : 2 * (labels.size() - 1));
}

LabelPlan PlanLabels(const Sample &sample, const std::set<std::string> &universe,
                     const RegularizationConfig &config, Diagnostics *diag) {
  config.Validate();
  std::set<std::string> gold;
  for (const EntityMention &m : sample.mentions) gold.insert(m.label.str());
  for (const std::string &g : gold) {
    if (!universe.count(g)) {
      throw DataError("sample " + sample.id + " has label '" + g +
                      "' outside the label universe");
    }
  }
  Rng rng(DeriveSeed(config.seed, "instruct/" + sample.id));
  LabelPlan plan;
  std::vector<std::string> kept;
  for (const std::string &g : gold) {
    if (rng.NextDouble() < config.dropout_prob) {
      plan.dropped.push_back(g);
    } else {
      kept.push_back(g);
    }
  }

  if (!config.dynamic_labels) {
    std::set<std::string> dropped(plan.dropped.begin(), plan.dropped.end());
    for (const std::string &l : universe) {
      if (!dropped.count(l)) plan.prompted.push_back(l);
    }
    return plan;
  }

  std::vector<std::string> candidates;
  for (const std::string &l : universe) {
    if (!gold.count(l)) candidates.push_back(l);
  }
  std::size_t extra = static_cast<std::size_t>(rng.Between(config.min_extra, config.max_extra));
  if (extra > candidates.size()) {
    Warn(diag, "sample " + sample.id + ": requested " + std::to_string(extra) +
                   " distractors but only " + std::to_string(candidates.size()) +
                   " are available");
    extra = candidates.size();
  }
  std::vector<std::string> distractors;
  for (std::size_t j : rng.SampleIndices(candidates.size(), extra)) {
    distractors.push_back(candidates[j]);
  }
  if (config.max_label_chars > 0) {
    std::vector<std::string> all = kept;
    all.insert(all.end(), distractors.begin(), distractors.end());
    while (!distractors.empty() && ListChars(all) > config.max_label_chars) {
      distractors.pop_back();
      all.pop_back();
    }
  }
  plan.prompted = std::move(kept);
  plan.prompted.insert(plan.prompted.end(), distractors.begin(), distractors.end());
  rng.Shuffle(plan.prompted);
  return plan;
}

std::string LabelLine(const std::vector<std::string> &labels) {
  std::string out = "Label Set: [";
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (i > 0) out += ", ";
    out += labels[i];
  }
  return out + "]\n";
}

std::string QueryLines(const Sample &sample) {
  return "Text: " + sample.text + "\nAnswer:";
}

InstructionSample Assemble(const Sample &sample, const LabelPlan &plan,
                           const std::string &middle) {
  InstructionSample out;
  out.prompt = std::string(kTaskDescription) + "\n" + LabelLine(plan.prompted) + middle +
               QueryLines(sample);
  out.answer = SerializeAnswer(sample, plan.prompted);
  out.sample_id = sample.id;
  out.dataset_id = sample.dataset_id;
  out.prompted_labels = plan.prompted;
  out.dropped_labels = plan.dropped;
  return out;
}

}  // namespace

InstructionSample Render(const Sample &sample, const std::set<std::string> &universe,
                         const RegularizationConfig &config, Diagnostics *diag) {
  return Assemble(sample, PlanLabels(sample, universe, config, diag), "");
}

InstructionSample RenderGuideline(const Sample &sample,
                                  const std::set<std::string> &universe,
                                  const Guidelines &guidelines,
                                  const RegularizationConfig &config,
                                  Diagnostics *diag) {
  LabelPlan plan = PlanLabels(sample, universe, config, diag);
  std::string section = "Guidelines:\n";
  for (const std::string &label : plan.prompted) {
    auto it = guidelines.find(label);
    if (it == guidelines.end()) {
      Warn(diag, "no guideline for label '" + label + "'");
      continue;
    }
    section += label + ": " + it->second + "\n";
  }
  return Assemble(sample, plan, section);
}

InstructionSample RenderFewshot(const Sample &sample,
                                const std::set<std::string> &universe,
                                std::span<const Sample *const> exemplars, std::size_t n,
                                const RegularizationConfig &config, Diagnostics *diag) {
  for (const Sample *e : exemplars) {
    if (e->id == sample.id || *e == sample) {
      throw ConfigError("exemplar " + e->id + " is the query sample itself");
    }
  }
  LabelPlan plan = PlanLabels(sample, universe, config, diag);
  if (n == 0) return Assemble(sample, plan, "");
  if (n > exemplars.size()) {
    Warn(diag, "requested " + std::to_string(n) + " exemplars but only " +
                   std::to_string(exemplars.size()) + " are available");
    n = exemplars.size();
  }
  Rng rng(DeriveSeed(config.seed, "fewshot/" + sample.id));
  std::string section = "Examples:\n";
  for (std::size_t j : rng.SampleIndices(exemplars.size(), n)) {
    const Sample &e = *exemplars[j];
    section += QueryLines(e) + " " + SerializeAnswer(e, plan.prompted) + "\n\n";
  }
  return Assemble(sample, plan, section);
}

InstructionSample RenderFewshot(const Sample &sample,
                                const std::set<std::string> &universe,
                                std::span<const Sample> exemplars, std::size_t n,
                                const RegularizationConfig &config, Diagnostics *diag) {
  std::vector<const Sample *> pointers;
  pointers.reserve(exemplars.size());
  for (const Sample &e : exemplars) pointers.push_back(&e);
  return RenderFewshot(sample, universe, std::span<const Sample *const>(pointers), n,
                       config, diag);
}

ordered_json InstructionToJson(const InstructionSample &sample) {
  ordered_json meta;
  meta["sample_id"] = sample.sample_id;
  meta["dataset_id"] = sample.dataset_id;
  meta["prompted_labels"] = sample.prompted_labels;
  meta["dropped_labels"] = sample.dropped_labels;
  ordered_json j;
  j["prompt"] = sample.prompt;
  j["answer"] = sample.answer;
  j["meta"] = std::move(meta);
  return j;
}

}  // namespace nerunify
