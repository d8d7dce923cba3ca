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


#include "nerunify/prune.h"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>
#include <utility>

#include "nerunify/parallel.h"
#include "nerunify/random.h"

namespace nerunify {

using nlohmann::ordered_json;

std::string_view PruneStrategyName(PruneStrategy strategy) {
  switch (strategy) {
    case PruneStrategy::kDiversity:
      return "diversity";
    case PruneStrategy::kRandomPerType:
      return "random_per_type";
    case PruneStrategy::kRandomDownsample:
      return "random_downsample";
    case PruneStrategy::kThresholdFilter:
      return "threshold_filter";
  }
  return "unknown";
}

PruneStrategy ParsePruneStrategy(std::string_view name) {
  for (PruneStrategy s : {PruneStrategy::kDiversity, PruneStrategy::kRandomPerType,
                          PruneStrategy::kRandomDownsample,
                          PruneStrategy::kThresholdFilter}) {
    if (PruneStrategyName(s) == name) return s;
  }
  throw ConfigError("unknown prune strategy '" + std::string(name) + "'");
}

void PruneConfig::Validate() const {
  if (k < 1) throw ConfigError("k must be at least 1");
  if (!(tau >= 0.0 && tau <= 1.0)) throw ConfigError("tau must be in [0, 1]");
  if (!std::isfinite(b)) throw ConfigError("b must be finite");
}

double AcceptProbability(std::optional<double> max_sim, double b) {
  double p = 1.0 - max_sim.value_or(0.0) + b;
  return std::clamp(p, 0.0, 1.0);
}

std::string PoolKey(std::string_view dataset_id, std::string_view label) {
  std::string key(dataset_id);
  key += '/';
  key += label;
  return key;
}

namespace {

// Embeddings computed on first use.
class EmbeddingCache {
 public:
  EmbeddingCache(const Dataset &dataset, const EmbeddingProvider &embedder,
                 Diagnostics *diag)
      : dataset_(dataset), embedder_(embedder), diag_(diag),
        rows_(dataset.samples.size(), kMissing) {}

  const float *Get(std::size_t index) {
    if (rows_[index] == kMissing) {
      const Sample &s = dataset_.samples[index];
      std::vector<float> v;
      try {
        v = embedder_.Embed(s.text, diag_);
      } catch (const std::exception &e) {
        throw DataError("embedding failed for sample " + s.id + ": " + e.what());
      }
      if (v.size() != embedder_.dim()) {
        throw DataError("embedding for sample " + s.id + " has the wrong dimension");
      }
      rows_[index] = data_.size() / embedder_.dim();
      data_.insert(data_.end(), v.begin(), v.end());
    }
    return data_.data() + rows_[index] * embedder_.dim();
  }

 private:
  static constexpr std::size_t kMissing = static_cast<std::size_t>(-1);

  const Dataset &dataset_;
  const EmbeddingProvider &embedder_;
  Diagnostics *diag_;
  std::vector<std::size_t> rows_;
  std::vector<float> data_;
};

struct Pool {
  std::string key;
  std::vector<std::size_t> members;  // sample indices
  std::vector<float> vectors;        // member embeddings, row-major
  std::vector<double> norms;         // squared norms of the members
};

// Sorted distinct labels per sample.
std::vector<std::vector<std::string>> SampleLabels(const Dataset &dataset) {
  std::vector<std::vector<std::string>> out(dataset.samples.size());
  for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
    std::set<std::string> labels;
    for (const EntityMention &m : dataset.samples[i].mentions) labels.insert(m.label.str());
    out[i].assign(labels.begin(), labels.end());
  }
  return out;
}

class PoolSet {
 public:
  PoolSet(const Dataset &dataset, std::size_t dim) : dataset_(dataset), dim_(dim) {}

  Pool &Get(const std::string &label) {
    auto it = pools_.find(label);
    if (it == pools_.end()) {
      it = pools_.emplace(label, Pool{PoolKey(dataset_.info.id, label), {}, {}, {}}).first;
    }
    return it->second;
  }

  // Largest cosine against the members; nullopt for an empty pool.
  std::optional<double> MaxSim(const Pool &pool, const float *x) const {
    if (pool.members.empty()) return std::nullopt;
    double xx = Dot(x, x, dim_);
    double best = -1.0;
    for (std::size_t r = 0; r < pool.members.size(); ++r) {
      const float *y = pool.vectors.data() + r * dim_;
      double yy = pool.norms[r];
      double c = (xx == 0.0 || yy == 0.0) ? 0.0 : Dot(x, y, dim_) / std::sqrt(xx * yy);
      c = std::clamp(c, -1.0, 1.0);
      if (c > best) best = c;
    }
    return best;
  }

  void Admit(Pool &pool, std::size_t index, const float *x) {
    pool.members.push_back(index);
    pool.vectors.insert(pool.vectors.end(), x, x + dim_);
    pool.norms.push_back(Dot(x, x, dim_));
  }

  void Export(PruneResult &result) const {
    for (const auto &[label, pool] : pools_) {
      std::vector<std::string> &ids = result.pools[pool.key];
      for (std::size_t i : pool.members) ids.push_back(dataset_.samples[i].id);
    }
  }

 private:
  const Dataset &dataset_;
  std::size_t dim_;
  std::map<std::string, Pool> pools_;
};

std::vector<std::size_t> ShuffledOrder(std::size_t n, Rng &rng) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  rng.Shuffle(order);
  return order;
}

// Labels whose pools can still take members: any label seen in the
// dataset, used to stop once every pool is full.
std::size_t CountLabels(const std::vector<std::vector<std::string>> &labels) {
  std::set<std::string> all;
  for (const auto &ls : labels) all.insert(ls.begin(), ls.end());
  return all.size();
}

void AddNegatives(const Dataset &dataset, const PruneConfig &config,
                  std::set<std::size_t> &selected, PruneResult &result) {
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
    if (dataset.samples[i].mentions.empty() && !selected.count(i)) candidates.push_back(i);
  }
  Rng rng(DeriveSeed(config.seed, "negatives/" + dataset.info.id));
  std::size_t count = std::min(candidates.size(), config.negative_cap());
  for (std::size_t j : rng.SampleIndices(candidates.size(), count)) {
    selected.insert(candidates[j]);
    ++result.negatives;
  }
}

// Sequential pool filling shared by diversity and threshold_filter.
PruneResult FillPools(const Dataset &dataset, const EmbeddingProvider &embedder,
                      const PruneConfig &config, bool threshold, Diagnostics *diag) {
  PruneResult result;
  result.dataset_id = dataset.info.id;
  auto labels = SampleLabels(dataset);
  std::size_t open = CountLabels(labels);
  Rng rng(DeriveSeed(config.seed, "prune/" + dataset.info.id));
  std::vector<std::size_t> order = ShuffledOrder(dataset.samples.size(), rng);

  EmbeddingCache cache(dataset, embedder, diag);
  PoolSet pools(dataset, embedder.dim());
  std::set<std::size_t> selected;
  for (std::size_t index : order) {
    if (open == 0) break;
    for (const std::string &label : labels[index]) {
      Pool &pool = pools.Get(label);
      if (pool.members.size() >= config.k) continue;
      const float *x = cache.Get(index);
      std::optional<double> max_sim = pools.MaxSim(pool, x);
      TraceEntry entry;
      entry.sample_id = dataset.samples[index].id;
      entry.pool_key = pool.key;
      entry.max_sim = max_sim;
      if (threshold) {
        entry.accepted = !max_sim || *max_sim < config.tau;
        entry.p = entry.accepted ? 1.0 : 0.0;
      } else {
        entry.p = AcceptProbability(max_sim, config.b);
        entry.u = rng.NextDouble();
        entry.accepted = *entry.u < entry.p;
      }
      if (entry.accepted) {
        pools.Admit(pool, index, x);
        selected.insert(index);
        if (pool.members.size() == config.k) --open;
      }
      result.trace.push_back(std::move(entry));
    }
  }
  pools.Export(result);
  AddNegatives(dataset, config, selected, result);
  result.selected.assign(selected.begin(), selected.end());
  return result;
}

PruneResult RandomPerType(const Dataset &dataset, const PruneConfig &config) {
  PruneResult result;
  result.dataset_id = dataset.info.id;
  auto labels = SampleLabels(dataset);
  std::map<std::string, std::vector<std::size_t>> holders;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    for (const std::string &label : labels[i]) holders[label].push_back(i);
  }
  Rng rng(DeriveSeed(config.seed, "prune/" + dataset.info.id));
  std::set<std::size_t> selected;
  for (const auto &[label, indices] : holders) {
    std::vector<std::string> &ids = result.pools[PoolKey(dataset.info.id, label)];
    std::size_t count = std::min(indices.size(), config.k);
    for (std::size_t j : rng.SampleIndices(indices.size(), count)) {
      selected.insert(indices[j]);
      ids.push_back(dataset.samples[indices[j]].id);
    }
  }
  AddNegatives(dataset, config, selected, result);
  result.selected.assign(selected.begin(), selected.end());
  return result;
}

PruneResult RandomDownsample(const Dataset &dataset, const EmbeddingProvider &embedder,
                             const PruneConfig &config, Diagnostics *diag) {
  std::size_t size;
  if (config.downsample_size) {
    size = *config.downsample_size;
  } else {
    PruneConfig diversity = config;
    diversity.strategy = PruneStrategy::kDiversity;
    size = FillPools(dataset, embedder, diversity, false, diag).selected.size();
  }
  std::size_t n = dataset.samples.size();
  if (size > n) {
    Warn(diag, "downsample size " + std::to_string(size) + " exceeds dataset " +
                   dataset.info.id + " (" + std::to_string(n) + " samples); taking all");
    size = n;
  }
  PruneResult result;
  result.dataset_id = dataset.info.id;
  Rng rng(DeriveSeed(config.seed, "downsample/" + dataset.info.id));
  result.selected = rng.SampleIndices(n, size);
  std::sort(result.selected.begin(), result.selected.end());
  for (std::size_t i : result.selected) {
    if (dataset.samples[i].mentions.empty()) ++result.negatives;
  }
  return result;
}

}  // namespace

PruneResult PruneDataset(const Dataset &dataset, const EmbeddingProvider &embedder,
                         const PruneConfig &config, Diagnostics *diag) {
  config.Validate();
  switch (config.strategy) {
    case PruneStrategy::kDiversity:
      return FillPools(dataset, embedder, config, false, diag);
    case PruneStrategy::kThresholdFilter:
      return FillPools(dataset, embedder, config, true, diag);
    case PruneStrategy::kRandomPerType:
      return RandomPerType(dataset, config);
    case PruneStrategy::kRandomDownsample:
      return RandomDownsample(dataset, embedder, config, diag);
  }
  throw ConfigError("unknown prune strategy");
}

CorpusPruneResult PruneCorpus(const Corpus &corpus, const EmbeddingProvider &embedder,
                              const PruneConfig &config, unsigned jobs,
                              Diagnostics *diag) {
  config.Validate();
  std::size_t n = corpus.datasets.size();
  std::vector<PruneResult> results(n);
  std::vector<Diagnostics> local(n);
  ParallelFor(n, jobs, [&](std::size_t i) {
    results[i] = PruneDataset(corpus.datasets[i], embedder, config, &local[i]);
  });
  for (const Diagnostics &d : local) {
    for (const std::string &w : d.warnings()) Warn(diag, w);
  }
  CorpusPruneResult out;
  for (std::size_t i = 0; i < n; ++i) {
    const Dataset &src = corpus.datasets[i];
    Dataset d;
    d.info = src.info;
    d.samples.reserve(results[i].selected.size());
    for (std::size_t index : results[i].selected) d.samples.push_back(src.samples[index]);
    d.RebuildLabelSet();
    out.selected.datasets.push_back(std::move(d));
  }
  out.per_dataset = std::move(results);
  return out;
}

ordered_json TraceEntryToJson(const TraceEntry &entry) {
  ordered_json j;
  j["sample_id"] = entry.sample_id;
  j["pool_key"] = entry.pool_key;
  j["max_sim"] = entry.max_sim ? ordered_json(*entry.max_sim) : ordered_json(nullptr);
  j["p"] = entry.p;
  j["u"] = entry.u ? ordered_json(*entry.u) : ordered_json(nullptr);
  j["accepted"] = entry.accepted;
  return j;
}

void WriteTrace(std::ostream &out, const std::vector<PruneResult> &results) {
  for (const PruneResult &r : results) {
    for (const TraceEntry &e : r.trace) out << TraceEntryToJson(e).dump() << '\n';
  }
}

ordered_json SelectionToJson(const std::vector<PruneResult> &results,
                             const Corpus &corpus) {
  ordered_json datasets = ordered_json::array();
  for (std::size_t i = 0; i < results.size(); ++i) {
    const PruneResult &r = results[i];
    const Dataset *d = corpus.Find(r.dataset_id);
    ordered_json pools = ordered_json::object();
    for (const auto &[key, ids] : r.pools) pools[key] = ids.size();
    datasets.push_back({{"dataset_id", r.dataset_id},
                        {"input", d != nullptr ? d->samples.size() : 0},
                        {"selected", r.selected.size()},
                        {"negatives", r.negatives},
                        {"pools", pools}});
  }
  return {{"datasets", datasets}};
}

}  // namespace nerunify
