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

// Cross-dataset annotation conflicts.
//
// Rule-based screening: for a label shared by datasets A and B, every
// surface annotated with it in A is looked up in B's texts, and each
// occurrence is classified by how B annotated it:
//
//   same span, same label        consistent
//   same span, other label       wrong_category
//   inside a larger B mention    excluded (part of another entity)
//   overlapping B mention        partially_extracted
//   no B mention                 not_extracted
//
// Model-based cross-validation trains a tagger on one dataset, tags
// another and scores one label with strict span F1.

#ifndef NERUNIFY_CONFLICT_H_
#define NERUNIFY_CONFLICT_H_

#include <array>
#include <cstddef>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "nerunify/corpus.h"
#include "nerunify/eval.h"
#include "nerunify/matcher.h"

namespace nerunify {

enum class ConflictType { kWrongCategory = 0, kNotExtracted = 1, kPartiallyExtracted = 2 };

std::string_view ConflictTypeName(ConflictType type);

// Directed pair: surfaces of `label_a` in A are looked up in B and compared
// against `label_b`.
struct LabelPair {
  std::string dataset_a;
  std::string label_a;
  std::string dataset_b;
  std::string label_b;

  friend bool operator==(const LabelPair &, const LabelPair &) = default;
};

struct ConflictCase {
  std::string surface;
  std::string label_name;  // label_a of the pair
  std::string dataset_a;
  std::string dataset_b;
  ConflictType type = ConflictType::kNotExtracted;
  // What B did instead: the other label for wrong_category, the
  // overlapping mention for partially_extracted, empty otherwise.
  std::string observed;
  std::size_t count = 0;
  std::vector<std::string> sample_ids;  // up to three B samples
};

struct PairReport {
  LabelPair pair;
  std::size_t shared = 0;  // classified occurrences, excluded ones aside
  std::size_t consistent = 0;
  std::size_t excluded = 0;
  std::array<std::size_t, 3> by_type{};  // indexed by ConflictType
  bool low_confidence = false;           // shared < min_support
  std::vector<ConflictCase> top_cases;

  std::size_t conflicts() const { return by_type[0] + by_type[1] + by_type[2]; }
  double conflict_rate() const {
    return shared == 0 ? 0.0
                       : static_cast<double>(conflicts()) / static_cast<double>(shared);
  }
};

struct ConflictReport {
  std::vector<PairReport> pairs;
};

struct ScreenOptions {
  // Groups of label names treated as the same label.
  std::vector<std::vector<std::string>> synonyms;
  std::size_t min_support = 20;
  std::size_t top_n = 10;
};

// Label names compared by NFC + case folding; synonym groups merge names.
std::string NormalizeLabelName(std::string_view label);

// All directed pairs (A, B) of same-language datasets with different
// names whose labels match by normalized name or synonym group.
std::vector<LabelPair> FindSharedLabelPairs(const Corpus &corpus,
                                            const ScreenOptions &options);

// Throws ConfigError for pairs naming unknown datasets or labels.
ConflictReport ScreenConflicts(const Corpus &corpus, std::span<const LabelPair> pairs,
                               const ScreenOptions &options);

nlohmann::ordered_json ConflictReportToJson(const ConflictReport &report);
std::string ConflictReportToTable(const ConflictReport &report);

// Tagger contract used by cross-validation.
class TaggerModel {
 public:
  virtual ~TaggerModel() = default;
};

class Tagger {
 public:
  virtual ~Tagger() = default;

  virtual std::unique_ptr<TaggerModel> Train(const Dataset &dataset) = 0;

  // Mentions per input sample. An empty `allowed` set admits every label.
  virtual std::vector<std::vector<EntityMention>> Predict(
      const TaggerModel &model, std::span<const Sample> samples,
      const std::set<std::string> &allowed) = 0;
};

// Gazetteer of training surfaces, each with its majority label (ties go to
// the lexicographically smaller label). Tags text by greedy longest match.
class MemorizationModel : public TaggerModel {
 public:
  static MemorizationModel Train(const Dataset &dataset);

  std::optional<std::string> LabelFor(std::string_view surface) const;

  std::vector<EntityMention> Tag(std::string_view text,
                                 const std::set<std::string> &allowed) const;

  nlohmann::json ToJson() const;
  static MemorizationModel FromJson(const nlohmann::json &doc);

  std::size_t size() const { return labels_.size(); }

 private:
  void Insert(const std::string &surface, const std::string &label);

  SurfaceMatcher matcher_;
  std::vector<std::string> surfaces_;  // by matcher id
  std::vector<std::string> labels_;    // by matcher id
};

class MemorizationTagger : public Tagger {
 public:
  std::unique_ptr<TaggerModel> Train(const Dataset &dataset) override;
  std::vector<std::vector<EntityMention>> Predict(
      const TaggerModel &model, std::span<const Sample> samples,
      const std::set<std::string> &allowed) override;
};

// Runs an external tagger through `/bin/sh -c command`. Each call feeds one
// request on stdin: a header line {"cmd":"train"} or
// {"cmd":"predict","model":<handle>,"labels":[...]}, followed by samples in
// corpus JSONL. A train call answers {"model":<handle>}; a predict call
// answers corpus JSONL with the predicted mentions.
class SubprocessTagger : public Tagger {
 public:
  explicit SubprocessTagger(std::string command) : command_(std::move(command)) {}

  std::unique_ptr<TaggerModel> Train(const Dataset &dataset) override;
  std::vector<std::vector<EntityMention>> Predict(
      const TaggerModel &model, std::span<const Sample> samples,
      const std::set<std::string> &allowed) override;

 private:
  std::string command_;
};

// Implements the subprocess protocol with a memorization model; used by
// the bundled tagger tool. Returns the process exit status.
int ServeMemorizationProtocol(std::istream &in, std::ostream &out);

struct F1Cell {
  MatchCounts counts;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct F1Matrix {
  std::string target_label;
  std::vector<std::string> train_ids;
  std::vector<std::string> test_ids;
  // cells[row][col]; nullopt where a self-pair has no held-out split.
  std::vector<std::vector<std::optional<F1Cell>>> cells;
};

struct CrossValidateOptions {
  // Self-pairs evaluate on the dataset's test split, or are omitted.
  bool disjoint_self_eval = true;
  unsigned jobs = 1;
};

// Trains on each listed dataset and tests on every listed dataset (its test
// split when one exists under the same name). Only `target_label` is
// scored; other labels are filtered out after prediction.
F1Matrix CrossValidate(const Corpus &corpus, Tagger &tagger,
                       std::span<const std::string> dataset_ids,
                       const std::string &target_label,
                       const CrossValidateOptions &options);

std::string F1MatrixToCsv(const F1Matrix &matrix);
nlohmann::ordered_json F1MatrixToJson(const F1Matrix &matrix);

}  // namespace nerunify

#endif  // NERUNIFY_CONFLICT_H_
