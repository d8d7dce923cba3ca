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

#include "nerunify/taxonomy.h"

#include <algorithm>
#include <fstream>
#include <map>
#include <utility>

#include "nerunify/common.h"
#include "nerunify/text.h"

namespace nerunify {

using nlohmann::json;
using nlohmann::ordered_json;

std::vector<MappingRule> ParseMappingRules(const json &doc) {
  if (!doc.is_array()) throw DataError("mapping file must be a JSON array");
  std::vector<MappingRule> rules;
  std::set<std::pair<std::string, std::string>> seen;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const json &j = doc[i];
    MappingRule r;
    try {
      r.dataset_id = j.at("dataset_id").get<std::string>();
      r.raw_label = j.at("raw_label").get<std::string>();
      std::string action = j.at("action").get<std::string>();
      if (action == "rename") {
        r.action = MappingAction::kRename;
        r.target = UniversalLabel::Parse(j.at("target").get<std::string>());
      } else if (action == "drop") {
        r.action = MappingAction::kDrop;
      } else {
        throw DataError("unknown action '" + action + "'");
      }
      r.note = j.value("note", "");
      r.lint_waiver = j.value("lint_waiver", false);
    } catch (const json::exception &e) {
      throw DataError("mapping rule " + std::to_string(i) + ": " + e.what());
    } catch (const DataError &e) {
      throw DataError("mapping rule " + std::to_string(i) + ": " + e.what());
    }
    if (!seen.emplace(r.dataset_id, r.raw_label).second) {
      throw DataError("duplicate mapping rule for (" + r.dataset_id + ", " +
                      r.raw_label + ")");
    }
    rules.push_back(std::move(r));
  }
  return rules;
}

std::vector<MappingRule> LoadMappingRules(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read mapping file " + path);
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw DataError("malformed mapping file " + path);
  return ParseMappingRules(doc);
}

ordered_json MappingRulesToJson(std::span<const MappingRule> rules) {
  ordered_json out = ordered_json::array();
  for (const MappingRule &r : rules) {
    ordered_json j;
    j["dataset_id"] = r.dataset_id;
    j["raw_label"] = r.raw_label;
    j["action"] = r.action == MappingAction::kRename ? "rename" : "drop";
    if (r.target) j["target"] = r.target->str();
    if (!r.note.empty()) j["note"] = r.note;
    if (r.lint_waiver) j["lint_waiver"] = true;
    out.push_back(std::move(j));
  }
  return out;
}

std::vector<MappingRule> IdentityRules(const Corpus &corpus) {
  std::vector<MappingRule> rules;
  for (const Dataset &d : corpus.datasets) {
    for (const std::string &label : d.info.label_set) {
      rules.push_back({d.info.id, label, MappingAction::kRename,
                       UniversalLabel::Parse(label), "", false});
    }
  }
  return rules;
}

Corpus ApplyMapping(const Corpus &corpus, std::span<const MappingRule> rules,
                    MappingStats *stats) {
  std::map<std::pair<std::string, std::string>, const MappingRule *> index;
  for (const MappingRule &r : rules) {
    if (!index.emplace(std::make_pair(r.dataset_id, r.raw_label), &r).second) {
      throw DataError("duplicate mapping rule for (" + r.dataset_id + ", " +
                      r.raw_label + ")");
    }
  }
  std::set<std::pair<std::string, std::string>> uncovered;
  for (const Dataset &d : corpus.datasets) {
    for (const Sample &s : d.samples) {
      for (const EntityMention &m : s.mentions) {
        if (!index.count({d.info.id, m.label.str()})) uncovered.emplace(d.info.id, m.label.str());
      }
    }
  }
  if (!uncovered.empty()) {
    std::string list;
    for (const auto &[ds, label] : uncovered) {
      list += (list.empty() ? "" : ", ") + ("(" + ds + ", " + label + ")");
    }
    throw DataError("no mapping rule for: " + list);
  }

  MappingStats local;
  Corpus out;
  out.datasets.reserve(corpus.datasets.size());
  for (const Dataset &d : corpus.datasets) {
    Dataset nd;
    nd.info = d.info;
    nd.samples.reserve(d.samples.size());
    for (const Sample &s : d.samples) {
      Sample ns = s;
      ns.mentions.clear();
      for (const EntityMention &m : s.mentions) {
        const MappingRule &r = *index.at({d.info.id, m.label.str()});
        if (r.action == MappingAction::kDrop) {
          ++local.dropped;
          continue;
        }
        EntityMention nm = m;
        nm.label = *r.target;
        ns.mentions.push_back(std::move(nm));
        ++local.renamed;
      }
      std::sort(ns.mentions.begin(), ns.mentions.end(), MentionLess);
      nd.samples.push_back(std::move(ns));
    }
    nd.RebuildLabelSet();
    out.datasets.push_back(std::move(nd));
  }
  if (stats != nullptr) *stats = local;
  return out;
}

std::string_view LintCodeName(LintCode code) {
  switch (code) {
    case LintCode::kAcronym:
      return "acronym";
    case LintCode::kDuplicate:
      return "duplicate";
    case LintCode::kMissingParent:
      return "missing_parent";
    case LintCode::kBlankSegment:
      return "blank_segment";
  }
  return "unknown";
}

namespace {

bool IsAcronym(const std::string &segment) {
  if (segment.size() < 2 || segment.size() > 4) return false;
  return std::all_of(segment.begin(), segment.end(),
                     [](char c) { return c >= 'A' && c <= 'Z'; });
}

}  // namespace

std::vector<LintFinding> LintLabel(const UniversalLabel &label,
                                   const std::set<std::string> &taxonomy) {
  std::vector<LintFinding> out;
  const std::string &name = label.str();
  for (const std::string &segment : label.segments()) {
    if (Trim(segment).empty()) {
      out.push_back({LintCode::kBlankSegment, name, "blank segment", false});
    } else if (IsAcronym(segment)) {
      out.push_back({LintCode::kAcronym, name,
                     "segment '" + segment + "' looks like an acronym", false});
    }
  }
  const std::string folded = CaseFold(name);
  for (const std::string &other : taxonomy) {
    if (other != name && CaseFold(other) == folded) {
      out.push_back({LintCode::kDuplicate, name,
                     "differs from '" + other + "' only by case", false});
    }
  }
  if (auto parent = label.parent(); parent && taxonomy.count(parent->str()) == 0) {
    out.push_back({LintCode::kMissingParent, name,
                   "parent '" + parent->str() + "' is not in the taxonomy", false});
  }
  return out;
}

std::vector<LintFinding> LintTaxonomy(std::span<const MappingRule> rules,
                                      const std::set<std::string> &waivers) {
  std::set<std::string> taxonomy;
  std::set<std::string> waived = waivers;
  for (const MappingRule &r : rules) {
    if (!r.target) continue;
    taxonomy.insert(r.target->str());
    if (r.lint_waiver) waived.insert(r.target->str());
  }
  std::vector<LintFinding> out;
  for (const std::string &name : taxonomy) {
    for (LintFinding &f : LintLabel(UniversalLabel::Parse(name), taxonomy)) {
      f.waived = waived.count(name) > 0;
      out.push_back(std::move(f));
    }
  }
  return out;
}

std::size_t TaxonomyTree::node_count() const {
  std::size_t n = 0;
  std::vector<const TaxonomyNode *> stack;
  for (const TaxonomyNode &r : roots) stack.push_back(&r);
  while (!stack.empty()) {
    const TaxonomyNode *node = stack.back();
    stack.pop_back();
    ++n;
    for (const TaxonomyNode &c : node->children) stack.push_back(&c);
  }
  return n;
}

namespace {

struct BuildNode {
  bool implicit = true;
  std::map<std::string, BuildNode> children;
};

void CheckSiblings(const std::map<std::string, BuildNode> &siblings,
                   const std::string &parent_path) {
  std::map<std::string, std::string> folded;
  for (const auto &[segment, node] : siblings) {
    auto [it, inserted] = folded.emplace(CaseFold(segment), segment);
    if (!inserted) {
      throw DataError("duplicate sibling under '" + parent_path + "': '" +
                      it->second + "' and '" + segment + "'");
    }
    CheckSiblings(node.children,
                  parent_path.empty() ? segment
                                      : parent_path + std::string(UniversalLabel::kSeparator) + segment);
  }
}

std::vector<TaxonomyNode> Freeze(const std::map<std::string, BuildNode> &nodes,
                                 const std::string &parent_path) {
  std::vector<TaxonomyNode> out;
  for (const auto &[segment, node] : nodes) {
    TaxonomyNode t;
    t.segment = segment;
    t.path = parent_path.empty()
                 ? segment
                 : parent_path + std::string(UniversalLabel::kSeparator) + segment;
    t.implicit = node.implicit;
    t.children = Freeze(node.children, t.path);
    out.push_back(std::move(t));
  }
  return out;
}

void RenderText(const std::vector<TaxonomyNode> &nodes, int depth, std::string &out) {
  for (const TaxonomyNode &n : nodes) {
    out += std::string(static_cast<std::size_t>(depth) * 2, ' ') + n.segment +
           (n.implicit ? " (implicit)" : "") + "\n";
    RenderText(n.children, depth + 1, out);
  }
}

ordered_json RenderJson(const std::vector<TaxonomyNode> &nodes) {
  ordered_json out = ordered_json::array();
  for (const TaxonomyNode &n : nodes) {
    out.push_back({{"segment", n.segment},
                   {"path", n.path},
                   {"implicit", n.implicit},
                   {"children", RenderJson(n.children)}});
  }
  return out;
}

}  // namespace

TaxonomyTree BuildTree(std::span<const UniversalLabel> labels) {
  std::map<std::string, BuildNode> roots;
  for (const UniversalLabel &label : labels) {
    std::map<std::string, BuildNode> *level = &roots;
    BuildNode *node = nullptr;
    for (const std::string &segment : label.segments()) {
      node = &(*level)[segment];
      level = &node->children;
    }
    node->implicit = false;
  }
  CheckSiblings(roots, "");
  return TaxonomyTree{Freeze(roots, "")};
}

std::string TreeToText(const TaxonomyTree &tree) {
  std::string out;
  RenderText(tree.roots, 0, out);
  return out;
}

ordered_json TreeToJson(const TaxonomyTree &tree) { return RenderJson(tree.roots); }

}  // namespace nerunify
