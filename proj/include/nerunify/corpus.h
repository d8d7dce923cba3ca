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

// Corpus data model: samples with code point span annotations, datasets,
// validation, statistics and JSONL persistence.

#ifndef NERUNIFY_CORPUS_H_
#define NERUNIFY_CORPUS_H_

#include <compare>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace nerunify {

// Hierarchical natural-language entity type, rendered as segments joined
// by "->", e.g. "location->scene".
class UniversalLabel {
 public:
  static constexpr std::string_view kSeparator = "->";

  // Throws DataError if any segment is empty.
  static UniversalLabel Parse(std::string_view rendered);
  static UniversalLabel FromSegments(const std::vector<std::string> &segments);

  const std::string &str() const { return rendered_; }
  std::vector<std::string> segments() const;
  std::size_t depth() const;

  // Label made of all segments but the last; nullopt for roots.
  std::optional<UniversalLabel> parent() const;

  friend bool operator==(const UniversalLabel &, const UniversalLabel &) =
      default;
  friend auto operator<=>(const UniversalLabel &, const UniversalLabel &) =
      default;

 private:
  explicit UniversalLabel(std::string rendered)
      : rendered_(std::move(rendered)) {}

  std::string rendered_;
};

struct EntityMention {
  UniversalLabel label;
  std::size_t start = 0;  // code point offset, inclusive
  std::size_t end = 0;    // code point offset, exclusive
  std::string surface;    // derived from the sample text

  friend bool operator==(const EntityMention &, const EntityMention &) =
      default;
};

// Ordering used for mention lists: (start, end, label).
bool MentionLess(const EntityMention &a, const EntityMention &b);

struct Sample {
  std::string id;
  std::string dataset_id;
  std::string language;
  std::string text;
  std::vector<EntityMention> mentions;

  friend bool operator==(const Sample &, const Sample &) = default;
};

// Sorts mentions and fills in each surface from the text.
void FinalizeMentions(Sample &sample);

enum class Split { kTrain, kTest };

std::string_view SplitName(Split split);
Split ParseSplit(std::string_view name);

struct DatasetInfo {
  std::string id;
  std::string name;
  std::string language;
  std::string domain;
  Split split = Split::kTrain;
  bool nested = false;
  // Label vocabulary of the dataset at the current pipeline stage.
  std::set<std::string> label_set;

  friend bool operator==(const DatasetInfo &, const DatasetInfo &) = default;
};

struct Dataset {
  DatasetInfo info;
  std::vector<Sample> samples;

  // Recomputes info.label_set from the mentions.
  void RebuildLabelSet();

  friend bool operator==(const Dataset &, const Dataset &) = default;
};

struct Corpus {
  std::vector<Dataset> datasets;

  const Dataset *Find(std::string_view dataset_id) const;
  std::size_t sample_count() const;

  friend bool operator==(const Corpus &, const Corpus &) = default;
};

// A broken sample invariant. mention_index is set for mention-level rules.
struct Violation {
  std::string rule;
  std::optional<std::size_t> mention_index;
  std::string detail;
};

// Rule names reported by ValidateSample.
namespace rules {
inline constexpr std::string_view kEmptySpan = "empty span";
inline constexpr std::string_view kInvertedSpan = "inverted span";
inline constexpr std::string_view kOutOfBounds = "out of bounds";
inline constexpr std::string_view kSurfaceMismatch = "surface mismatch";
inline constexpr std::string_view kUnsorted = "unsorted mentions";
inline constexpr std::string_view kPartialOverlap = "partial overlap";
inline constexpr std::string_view kNestedInFlat = "nested mention in flat dataset";
inline constexpr std::string_view kInvalidUtf8 = "invalid utf-8";
}  // namespace rules

std::vector<Violation> ValidateSample(const Sample &sample, bool nested);

struct DatasetStats {
  std::string id;
  std::string language;
  Split split = Split::kTrain;
  std::size_t types = 0;
  std::size_t samples = 0;
  std::size_t mentions = 0;
};

// One (split, language) row, as in a corpus statistics table.
struct GroupStats {
  Split split = Split::kTrain;
  std::string language;
  std::size_t datasets = 0;
  std::size_t types = 0;  // distinct labels within the group
  std::size_t samples = 0;
  std::size_t mentions = 0;
};

struct CorpusStats {
  std::vector<DatasetStats> per_dataset;  // sorted by id
  std::vector<GroupStats> groups;         // sorted by (split, language)
  std::size_t datasets = 0;
  std::size_t types = 0;          // sum of per-group distinct labels
  std::size_t dataset_types = 0;  // distinct (dataset, label) pairs
  std::size_t samples = 0;
  std::size_t mentions = 0;
};

CorpusStats ComputeStats(const Corpus &corpus);

nlohmann::ordered_json StatsToJson(const CorpusStats &stats);

// JSONL persistence. One sample per line with exactly the fields
// {id, dataset_id, language, text, mentions:[{start, end, label}]}.
nlohmann::ordered_json SampleToJson(const Sample &sample);
void WriteSamplesJsonl(const Corpus &corpus, std::ostream &out);

// Dataset metadata document: {"datasets": [...]}, samples excluded.
nlohmann::ordered_json DatasetsToJson(const Corpus &corpus);

// Rebuilds a corpus from its metadata document and sample lines. Throws
// ParseError for malformed lines and DataError for unknown datasets or
// duplicate sample ids.
Corpus ReadCorpus(const nlohmann::json &datasets_doc, std::istream &samples);

// File-level helpers: <stem>.corpus.jsonl plus <stem>.datasets.json.
void SaveCorpus(const Corpus &corpus, const std::string &stem);
Corpus LoadCorpus(const std::string &stem);

}  // namespace nerunify

#endif  // NERUNIFY_CORPUS_H_
