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

#ifndef NERUNIFY_TAXONOMY_H_
#define NERUNIFY_TAXONOMY_H_

#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "nerunify/corpus.h"

namespace nerunify {

enum class MappingAction { kRename, kDrop };

// Per-dataset relabeling decision for one raw label.
struct MappingRule {
  std::string dataset_id;
  std::string raw_label;
  MappingAction action = MappingAction::kRename;
  std::optional<UniversalLabel> target;  // set for renames
  std::string note;
  bool lint_waiver = false;
};

// Reads a JSON array of {dataset_id, raw_label, action: "rename"|"drop",
// target?, note?, lint_waiver?}. Throws DataError on malformed records and
// on a second rule for the same (dataset_id, raw_label).
std::vector<MappingRule> ParseMappingRules(const nlohmann::json &doc);
std::vector<MappingRule> LoadMappingRules(const std::string &path);
nlohmann::ordered_json MappingRulesToJson(std::span<const MappingRule> rules);

// Identity renames for every (dataset, label) in the corpus.
std::vector<MappingRule> IdentityRules(const Corpus &corpus);

struct MappingStats {
  std::size_t renamed = 0;
  std::size_t dropped = 0;
};

// Relabels every mention through its rule and drops mentions under drop
// rules. Samples and texts are kept as they are; label sets are rebuilt.
// Throws DataError listing every (dataset, label) without a rule.
Corpus ApplyMapping(const Corpus &corpus, std::span<const MappingRule> rules,
                    MappingStats *stats = nullptr);

enum class LintCode { kAcronym, kDuplicate, kMissingParent, kBlankSegment };

std::string_view LintCodeName(LintCode code);

struct LintFinding {
  LintCode code;
  std::string label;
  std::string message;
  bool waived = false;
};

// Checks one label against the naming rules: no acronym segments (2-4
// capitals), no case-insensitive duplicate in `taxonomy`, parent path
// present in `taxonomy`, no blank segments.
std::vector<LintFinding> LintLabel(const UniversalLabel &label,
                                   const std::set<std::string> &taxonomy);

// Lints every rename target. Findings on labels waived by a rule or listed
// in `waivers` are kept but marked waived.
std::vector<LintFinding> LintTaxonomy(std::span<const MappingRule> rules,
                                      const std::set<std::string> &waivers);

struct TaxonomyNode {
  std::string segment;
  std::string path;
  bool implicit = false;  // created only as the parent of another label
  std::vector<TaxonomyNode> children;
};

struct TaxonomyTree {
  std::vector<TaxonomyNode> roots;
  std::size_t node_count() const;
};

// Forest keyed by first segment, children sorted. Missing ancestors are
// created and flagged implicit. Throws DataError on siblings that differ
// only by case.
TaxonomyTree BuildTree(std::span<const UniversalLabel> labels);

std::string TreeToText(const TaxonomyTree &tree);
nlohmann::ordered_json TreeToJson(const TaxonomyTree &tree);

}  // namespace nerunify

#endif  // NERUNIFY_TAXONOMY_H_
