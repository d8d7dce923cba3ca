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


// Diversity-aware pruning. Each (dataset, label) pool holds at most k
// samples. Samples are visited in a seeded shuffle; for every label of a
// sample whose pool is not full, a uniform draw u admits the sample iff
// u < clamp(1 - max_sim + b, 0, 1), where max_sim is the largest cosine
// similarity to the pool's members (0 for an empty pool). A sample admitted
// to any pool is kept with all its mentions. Up to floor(k/5) samples
// without mentions are added afterwards as negatives.

#ifndef NERUNIFY_PRUNE_H_
#define NERUNIFY_PRUNE_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "nerunify/common.h"
#include "nerunify/corpus.h"
#include "nerunify/embedding.h"

namespace nerunify {

enum class PruneStrategy {
  kDiversity,
  kRandomPerType,
  kRandomDownsample,
  kThresholdFilter,
};

std::string_view PruneStrategyName(PruneStrategy strategy);
PruneStrategy ParsePruneStrategy(std::string_view name);

struct PruneConfig {
  std::size_t k = 400;
  double b = 0.0;
  std::uint64_t seed = 0;
  PruneStrategy strategy = PruneStrategy::kDiversity;
  double tau = 0.5;
  // random_downsample size; when unset the size of a diversity run.
  std::optional<std::size_t> downsample_size;

  std::size_t negative_cap() const { return k / 5; }

  // Throws ConfigError.
  void Validate() const;
};

// clamp(1 - max_sim + b, 0, 1); an empty pool counts as max_sim = 0.
double AcceptProbability(std::optional<double> max_sim, double b);

// One pool decision. u is unset for deterministic strategies.
struct TraceEntry {
  std::string sample_id;
  std::string pool_key;  // "<dataset_id>/<label>"
  std::optional<double> max_sim;
  double p = 0.0;
  std::optional<double> u;
  bool accepted = false;
};

std::string PoolKey(std::string_view dataset_id, std::string_view label);

struct PruneResult {
  std::string dataset_id;
  std::vector<std::size_t> selected;  // indices into samples, ascending
  std::size_t negatives = 0;
  std::map<std::string, std::vector<std::string>> pools;  // key -> member ids
  std::vector<TraceEntry> trace;
};

// Runs cfg.strategy on one dataset. The embedder is used by diversity,
// threshold_filter and matched-size random_downsample.
PruneResult PruneDataset(const Dataset &dataset, const EmbeddingProvider &embedder,
                         const PruneConfig &config, Diagnostics *diag);

struct CorpusPruneResult {
  Corpus selected;
  std::vector<PruneResult> per_dataset;
};

// Prunes datasets concurrently; results keep corpus order.
CorpusPruneResult PruneCorpus(const Corpus &corpus, const EmbeddingProvider &embedder,
                              const PruneConfig &config, unsigned jobs,
                              Diagnostics *diag);

nlohmann::ordered_json TraceEntryToJson(const TraceEntry &entry);
void WriteTrace(std::ostream &out, const std::vector<PruneResult> &results);
nlohmann::ordered_json SelectionToJson(const std::vector<PruneResult> &results,
                                       const Corpus &corpus);

}  // namespace nerunify

#endif  // NERUNIFY_PRUNE_H_
