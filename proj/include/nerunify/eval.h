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

// Strict span micro-F1: a prediction counts only when its label, start and
// end all equal a gold mention's. Counts are summed before P/R/F1 are
// derived, so empty samples are neutral.

#ifndef NERUNIFY_EVAL_H_
#define NERUNIFY_EVAL_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "nerunify/common.h"
#include "nerunify/corpus.h"

namespace nerunify {

struct MatchCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  double precision() const;
  double recall() const;
  double f1() const;

  MatchCounts &operator+=(const MatchCounts &other) {
    tp += other.tp;
    fp += other.fp;
    fn += other.fn;
    return *this;
  }

  friend bool operator==(const MatchCounts &, const MatchCounts &) = default;
};

// Harmonic mean; 0 when p + r == 0. Scale-agnostic (fractions or percent).
double F1FromPrecisionRecall(double precision, double recall);

struct ScoreResult {
  MatchCounts counts;
  std::size_t duplicates_removed = 0;  // repeated predicted triples
};

// One-to-one exact (label, start, end) matching. Duplicate predicted
// triples are collapsed first.
ScoreResult MicroF1(std::span<const EntityMention> gold,
                    std::span<const EntityMention> predicted);

// label -> surfaces, in answer order.
using LabelSurfaces = std::vector<std::pair<std::string, std::vector<std::string>>>;

struct ParsedResponse {
  LabelSurfaces labels;
  std::vector<std::string> fixes;
  bool parse_failed = false;
};

// Extracts the answer object from a generated response. Fixes are applied
// in order: strip code fences, trim surrounding prose, repair single
// quotes, drop labels that were not prompted. Never throws.
ParsedResponse ParseResponse(std::string_view response,
                             std::span<const std::string> prompted_labels);

struct ResolvedSpans {
  std::vector<EntityMention> mentions;  // sorted
  // (label, surface) pairs with no occurrence left in the text.
  std::vector<std::pair<std::string, std::string>> unresolved;
};

// Maps surfaces back to spans. Each surface takes the leftmost occurrence
// that does not overlap a span already claimed for the same label; failing
// that, the leftmost occurrence not identical to a claimed span.
ResolvedSpans ResolveSpans(std::string_view text, const LabelSurfaces &surfaces);

// One line of a predictions file: either a raw response or mentions.
struct Prediction {
  std::string sample_id;
  std::optional<std::string> response_text;
  std::vector<EntityMention> mentions;
};

// Reads {sample_id, response_text} or {sample_id, mentions:[...]} lines.
std::vector<Prediction> ReadPredictions(std::istream &in);

struct RunReport {
  std::uint64_t seed = 0;
  std::map<std::string, MatchCounts> per_dataset;
  // dataset id -> label -> counts
  std::map<std::string, std::map<std::string, MatchCounts>> per_label;
  MatchCounts aggregate;
  std::size_t parse_failures = 0;
  std::size_t unresolved = 0;
  std::size_t duplicates_removed = 0;
};

// Scores predictions against every gold dataset that has at least one
// prediction. Responses are parsed against the dataset's label set.
// Unresolved surfaces count as false positives.
RunReport EvaluateRun(const Corpus &gold, const std::vector<Prediction> &predictions,
                      std::uint64_t seed, Diagnostics *diag = nullptr);

nlohmann::ordered_json RunReportToJson(const RunReport &report);

struct DatasetAggregate {
  std::string dataset_id;
  std::vector<double> runs;  // per-run F1
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation
};

struct AggregateReport {
  std::vector<DatasetAggregate> datasets;
  std::vector<double> run_averages;  // mean per-dataset F1 of each run
  double average = 0.0;
  std::size_t runs = 0;
  bool sd_defined = true;  // false for a single run (sd reported as 0)
};

// Averages per-dataset F1 across runs. Throws DataError when the runs do
// not cover the same datasets.
AggregateReport AggregateRuns(std::span<const RunReport> reports);

nlohmann::ordered_json AggregateToJson(const AggregateReport &report);

// Result-table CSV: one row per run plus a mean row, one column per
// dataset and an average column, F1 in percent with two decimals.
std::string AggregateToCsv(const AggregateReport &report);

}  // namespace nerunify

#endif  // NERUNIFY_EVAL_H_
