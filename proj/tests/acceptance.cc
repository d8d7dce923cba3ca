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


// Acceptance runner. Each criterion prints one [PASS] or [FAIL] line with
// its wall time and budget; the exit status is nonzero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "nerunify/conflict.h"
#include "nerunify/embedding.h"
#include "nerunify/eval.h"
#include "nerunify/instruct.h"
#include "nerunify/pipeline.h"
#include "nerunify/prune.h"
#include "nerunify/random.h"
#include "test_util.h"

namespace nerunify {
namespace {

namespace fs = std::filesystem;
using testing::BasisEmbedder;
using testing::MakeDataset;
using testing::MakeSample;
using testing::MakeSampleBySurface;
using testing::ReadFile;
using testing::TempDir;
using testing::WriteFile;

// Failure detail collected by a criterion; empty means pass.
class Check {
 public:
  void Expect(bool ok, const std::string &what) {
    if (!ok && failures_.size() < 5) failures_.push_back(what);
    if (!ok) ++count_;
  }
  bool ok() const { return count_ == 0; }
  std::string detail() const {
    std::string out;
    for (const std::string &f : failures_) out += "\n    " + f;
    if (count_ > failures_.size()) {
      out += "\n    ... " + std::to_string(count_ - failures_.size()) + " more";
    }
    return out;
  }

 private:
  std::vector<std::string> failures_;
  std::size_t count_ = 0;
};

void F1Arithmetic(Check &c) {
  double f1 = F1FromPrecisionRecall(4.64, 65.05);
  c.Expect(std::abs(f1 - 8.66) <= 0.01, "F1(4.64, 65.05) = " + std::to_string(f1));
}

void FormulaGrid(Check &c) {
  c.Expect(AcceptProbability(1.0, 0.0) == 0.0, "duplicate not rejected");
  c.Expect(AcceptProbability(std::nullopt, 0.0) == 1.0, "empty pool not accepted");
  for (int i = -20; i <= 20; ++i) {
    double sim = i * 0.05;
    double previous = -1.0;
    for (int j = -20; j <= 20; ++j) {
      double b = j * 0.05;
      double p = AcceptProbability(sim, b);
      double raw = 1.0 - sim + b;
      double expected = raw < 0.0 ? 0.0 : (raw > 1.0 ? 1.0 : raw);
      std::string at = "sim=" + std::to_string(sim) + " b=" + std::to_string(b);
      c.Expect(p >= 0.0 && p <= 1.0, "out of range at " + at);
      c.Expect(p == expected, "not the clamped formula at " + at);
      c.Expect(p >= previous, "not monotone in b at " + at);
      previous = p;
    }
  }
}

void DuplicateCluster(Check &c) {
  std::vector<Sample> s;
  const char *texts[] = {"A", "A", "A", "B"};
  for (int i = 0; i < 4; ++i) {
    s.push_back(MakeSample("s" + std::to_string(i), "d", texts[i], {{"thing", 0, 1}}));
  }
  Dataset d = MakeDataset("d", s);
  BasisEmbedder embedder(2, {{"A", 0}, {"B", 1}});
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    PruneConfig cfg;
    cfg.k = 2;
    cfg.seed = seed;
    PruneResult r = PruneDataset(d, embedder, cfg, nullptr);
    std::multiset<std::string> got;
    for (std::size_t i : r.selected) got.insert(d.samples[i].text);
    c.Expect(got == std::multiset<std::string>{"A", "B"}, "seed " + std::to_string(seed));
  }
}

std::string RandomWord(Rng &rng, std::size_t len) {
  static const std::string kLetters = "abcdefghijklmnopqrstuvwxyz";
  std::string w;
  for (std::size_t i = 0; i < len; ++i) w += kLetters[rng.Below(kLetters.size())];
  return w;
}

void CapacityAndBudget(Check &c) {
  Rng rng(2024);
  std::vector<Sample> samples;
  const std::size_t kTypes = 20;
  for (std::size_t i = 0; i < 10000; ++i) {
    std::string text;
    std::vector<testing::MentionSpec> mentions;
    std::size_t words = 4 + rng.Below(6);
    bool negative = rng.Below(10) == 0;
    for (std::size_t w = 0; w < words; ++w) {
      if (!text.empty()) text += ' ';
      std::string word = RandomWord(rng, 3 + rng.Below(5));
      if (!negative && (w == 0 || rng.Below(3) == 0)) {
        mentions.emplace_back("type" + std::to_string(rng.Below(kTypes)), text.size(),
                              text.size() + word.size());
      }
      text += word;
    }
    samples.push_back(MakeSample("s" + std::to_string(i), "d", text, mentions));
  }
  Dataset d = MakeDataset("d", samples);
  HashedNgramEmbedder embedder;
  PruneConfig cfg;
  cfg.k = 50;
  cfg.seed = 1;
  Corpus corpus;
  corpus.datasets.push_back(d);
  CorpusPruneResult result = PruneCorpus(corpus, embedder, cfg, 1, nullptr);
  const PruneResult &r = result.per_dataset.at(0);
  c.Expect(r.pools.size() == kTypes, "pool count " + std::to_string(r.pools.size()));
  for (const auto &[key, members] : r.pools) {
    c.Expect(members.size() <= 50, key + " holds " + std::to_string(members.size()));
    std::set<std::string> unique(members.begin(), members.end());
    c.Expect(unique.size() == members.size(), key + " has repeated members");
  }
  c.Expect(r.negatives <= 10, "negatives " + std::to_string(r.negatives));
  std::map<std::string, const Sample *> by_id;
  for (const Sample &s : d.samples) by_id[s.id] = &s;
  std::set<std::string> seen;
  std::size_t negatives = 0;
  for (const Sample &s : result.selected.datasets.at(0).samples) {
    auto it = by_id.find(s.id);
    c.Expect(it != by_id.end(), "selected sample not in input: " + s.id);
    c.Expect(seen.insert(s.id).second, "selected twice: " + s.id);
    if (it != by_id.end()) c.Expect(*it->second == s, "mentions changed on " + s.id);
    negatives += s.mentions.empty();
  }
  c.Expect(negatives <= 10, "negative samples selected " + std::to_string(negatives));
}

int Cli(const std::vector<std::string> &args) {
  std::ostringstream out, err;
  int code = RunCli(args, out, err);
  if (code != 0) std::cerr << err.str();
  return code;
}

void Determinism(Check &c) {
  const std::string pipeline = std::string(NERUNIFY_FIXTURE_DIR) + "/pipeline.json";
  TempDir a("accept-det-a"), b("accept-det-b"), other("accept-det-c");
  auto run = [&](const TempDir &dir, const std::string &seed) {
    for (const char *stage : {"ingest", "remap", "prune", "gen-instructions"}) {
      if (Cli({"--manifest", pipeline, "--output-dir", dir.str(), "--seed", seed, "-q", stage}) !=
          0) {
        return false;
      }
    }
    return true;
  };
  c.Expect(run(a, "7") && run(b, "7") && run(other, "8"), "pipeline stage failed");
  for (const char *name : {"07-prune.trace.jsonl", "08-instructions.jsonl"}) {
    std::string x = ReadFile(a.path() / name);
    c.Expect(!x.empty(), std::string(name) + " is empty");
    c.Expect(x == ReadFile(b.path() / name), std::string(name) + " differs under one seed");
    c.Expect(x != ReadFile(other.path() / name), std::string(name) + " equal across seeds");
  }
}

void MatchedSizeDiversity(Check &c) {
  const std::size_t kClusters = 10;
  std::vector<Sample> samples;
  std::map<std::string, std::size_t> index;
  for (std::size_t k = 0; k < kClusters; ++k) {
    std::string text = "cluster" + std::to_string(k);
    index[text] = k;
    for (int j = 0; j < 20; ++j) {
      samples.push_back(MakeSample(text + "-" + std::to_string(j), "d", text, {{"thing", 0, 8}}));
    }
  }
  Dataset d = MakeDataset("d", samples);
  BasisEmbedder embedder(kClusters, index);
  auto clusters = [&](const PruneResult &r) {
    std::set<std::string> hit;
    for (std::size_t i : r.selected) hit.insert(d.samples[i].text);
    return hit.size();
  };
  PruneConfig cfg;
  cfg.k = 50;
  std::size_t full = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    cfg.seed = seed;
    full += clusters(PruneDataset(d, embedder, cfg, nullptr)) == kClusters;
  }
  c.Expect(full == 100, "diversity covered all clusters in " + std::to_string(full) + "/100");
  cfg.strategy = PruneStrategy::kRandomDownsample;
  std::size_t missed = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    cfg.seed = seed;
    PruneResult r = PruneDataset(d, embedder, cfg, nullptr);
    c.Expect(r.selected.size() == kClusters, "downsample size is not matched");
    missed += clusters(r) < kClusters;
  }
  c.Expect(missed * 20 > 200, "downsample missed a cluster in only " + std::to_string(missed) +
                                  "/200 seeds");
}

void ConflictScreening(Check &c) {
  Corpus corpus;
  corpus.datasets.push_back(MakeDataset(
      "conll", {MakeSampleBySurface("c0", "conll", "Belgium beat France",
                                    {{"location", "Belgium"}, {"location", "France"}}),
                MakeSampleBySurface("c1", "conll", "Talks in New York", {{"location", "New York"}}),
                MakeSampleBySurface("c2", "conll", "Rain over Lima", {{"location", "Lima"}}),
                MakeSampleBySurface("c3", "conll", "Fog over Bay Area", {{"location", "Bay Area"}}),
                MakeSampleBySurface("c4", "conll", "the Jordan river", {{"location", "Jordan"}})},
      Split::kTrain, "conll"));
  corpus.datasets.push_back(MakeDataset(
      "onto",
      {MakeSampleBySurface("o0", "onto", "Belgium and France signed",
                           {{"geopolitical entity", "Belgium"}, {"geopolitical entity", "France"}}),
       MakeSampleBySurface("o1", "onto", "Belgium again", {{"geopolitical entity", "Belgium"}}),
       MakeSampleBySurface("o2", "onto", "the New York Times said", {{"organization", "New York Times"}}),
       MakeSampleBySurface("o3", "onto", "Lima grew", {{"location", "Lima"}}),
       MakeSampleBySurface("o4", "onto", "in the Bay Area today", {{"location", "the Bay"}}),
       MakeSampleBySurface("o5", "onto", "Jordan scored", {})},
      Split::kTrain, "ontonotes"));
  std::vector<LabelPair> pairs{{"conll", "location", "onto", "location"}};
  ConflictReport report = ScreenConflicts(corpus, pairs, ScreenOptions{});
  const PairReport &p = report.pairs.at(0);

  // Hand classification of every occurrence of a conll location surface in
  // onto texts.
  struct Expected {
    std::string surface;
    ConflictType type;
    std::string observed;
    std::size_t count;
  };
  std::vector<Expected> oracle{
      {"Belgium", ConflictType::kWrongCategory, "geopolitical entity", 2},
      {"France", ConflictType::kWrongCategory, "geopolitical entity", 1},
      {"Bay Area", ConflictType::kPartiallyExtracted, "the Bay (location)", 1},
      {"Jordan", ConflictType::kNotExtracted, "", 1}};
  c.Expect(p.excluded == 1, "excluded " + std::to_string(p.excluded));  // New York in the Times
  c.Expect(p.consistent == 1, "consistent " + std::to_string(p.consistent));  // Lima
  c.Expect(p.shared == 6, "shared " + std::to_string(p.shared));
  c.Expect(p.by_type == std::array<std::size_t, 3>{3, 1, 1}, "per-type counts differ");
  c.Expect(p.top_cases.size() == oracle.size(),
           "case count " + std::to_string(p.top_cases.size()));
  for (const Expected &e : oracle) {
    bool found = false;
    for (const ConflictCase &cc : p.top_cases) {
      if (cc.surface != e.surface) continue;
      found = true;
      c.Expect(cc.type == e.type, e.surface + " classified " +
                                      std::string(ConflictTypeName(cc.type)));
      c.Expect(cc.observed == e.observed, e.surface + " observed '" + cc.observed + "'");
      c.Expect(cc.count == e.count, e.surface + " count " + std::to_string(cc.count));
    }
    c.Expect(found, "no case for " + e.surface);
  }
  for (const ConflictCase &cc : p.top_cases) {
    c.Expect(cc.surface != "New York", "excluded surface reported as a conflict");
  }
}

Corpus CrossvalCorpus(bool relabel) {
  Rng rng(77);
  std::vector<Sample> a, b;
  for (int i = 0; i < 60; ++i) {
    std::string place = "Place" + RandomWord(rng, 6);
    std::string text = "We travelled to " + place + " last year";
    a.push_back(MakeSampleBySurface("a" + std::to_string(i), "A", text, {{"location", place}}));
    std::string text_b = place + " is lovely";
    b.push_back(MakeSampleBySurface("b" + std::to_string(i), "B", text_b,
                                    {{relabel ? "geopolitical entity" : "location", place}}));
  }
  for (int i = 0; i < 10; ++i) {
    std::string peak = "Mount" + RandomWord(rng, 5);
    b.push_back(MakeSampleBySurface("m" + std::to_string(i), "B", "Climbing " + peak,
                                    {{"location", peak}}));
  }
  Corpus c;
  c.datasets.push_back(MakeDataset("A", a));
  c.datasets.push_back(MakeDataset("B", b));
  return c;
}

void CrossValidation(Check &c) {
  MemorizationTagger tagger;
  std::vector<std::string> ids{"A", "B"};
  CrossValidateOptions options;
  options.disjoint_self_eval = false;
  F1Matrix bad = CrossValidate(CrossvalCorpus(true), tagger, ids, "location", options);
  F1Matrix good = CrossValidate(CrossvalCorpus(false), tagger, ids, "location", options);
  double f1_bad = bad.cells[0][1]->f1;
  double f1_good = good.cells[0][1]->f1;
  c.Expect(f1_bad < 0.2, "relabeled pair F1 " + std::to_string(f1_bad));
  c.Expect(f1_good > 0.9, "consistent pair F1 " + std::to_string(f1_good));
}

void InstructionRegularization(Check &c) {
  Rng rng(5);
  std::vector<std::string> labels;
  for (int i = 0; i < 12; ++i) labels.push_back("label " + std::to_string(i));
  std::set<std::string> universe(labels.begin(), labels.end());
  for (int i = 0; i < 1000; ++i) {
    std::vector<std::pair<std::string, std::string>> mentions;
    std::string text;
    std::size_t n = rng.Below(5);
    for (std::size_t m = 0; m < n; ++m) {
      std::string word = "Word" + RandomWord(rng, 4);
      text += (text.empty() ? "" : " and ") + word;
      mentions.emplace_back(labels[rng.Below(labels.size())], word);
    }
    if (text.empty()) text = "nothing";
    Sample s = MakeSampleBySurface("s" + std::to_string(i), "d", text, mentions);
    std::set<std::string> gold;
    for (const EntityMention &m : s.mentions) gold.insert(m.label.str());

    RegularizationConfig cfg;
    cfg.seed = static_cast<std::uint64_t>(i);
    cfg.dropout_prob = i % 2 ? 0.0 : 0.4;
    cfg.max_extra = 5;
    InstructionSample r = Render(s, universe, cfg, nullptr);
    std::set<std::string> prompted(r.prompted_labels.begin(), r.prompted_labels.end());
    std::string at = " in render " + std::to_string(i);
    std::string label_line = r.prompt.substr(r.prompt.find("Label Set: ["));
    label_line = label_line.substr(0, label_line.find('\n'));
    nlohmann::json answer = nlohmann::json::parse(r.answer);
    if (cfg.dropout_prob == 0.0) {
      for (const std::string &g : gold) c.Expect(prompted.count(g) == 1, g + " lost" + at);
    }
    for (const std::string &d : r.dropped_labels) {
      c.Expect(prompted.count(d) == 0, d + " dropped yet prompted" + at);
      c.Expect(!answer.contains(d), d + " dropped yet answered" + at);
      c.Expect(label_line.find(d + ",") == std::string::npos &&
                   label_line.find(d + "]") == std::string::npos,
               d + " dropped yet in the label set" + at);
    }
    for (const auto &[label, surfaces] : answer.items()) {
      c.Expect(prompted.count(label) == 1, label + " answered but not prompted" + at);
    }
  }
}

// Brute-force strict span matching: distinct predicted triples found in
// the gold set are true positives.
MatchCounts BruteForce(const std::vector<EntityMention> &gold,
                       const std::vector<EntityMention> &pred) {
  std::vector<std::tuple<std::string, std::size_t, std::size_t>> g, p;
  for (const EntityMention &m : gold) g.emplace_back(m.label.str(), m.start, m.end);
  for (const EntityMention &m : pred) {
    auto t = std::make_tuple(m.label.str(), m.start, m.end);
    if (std::find(p.begin(), p.end(), t) == p.end()) p.push_back(t);
  }
  MatchCounts out;
  for (const auto &t : p) {
    if (std::find(g.begin(), g.end(), t) != g.end()) {
      ++out.tp;
    } else {
      ++out.fp;
    }
  }
  out.fn = g.size() - out.tp;
  return out;
}

void EvalOracle(Check &c) {
  Rng rng(99);
  const char *labels[] = {"person", "location", "organization"};
  auto random_mention = [&] {
    std::size_t start = rng.Below(8);
    return EntityMention{UniversalLabel::Parse(labels[rng.Below(3)]), start,
                         start + 1 + rng.Below(3), ""};
  };
  for (int i = 0; i < 500; ++i) {
    std::vector<EntityMention> gold, pred;
    std::size_t ng = rng.Below(11), np = rng.Below(11);
    while (gold.size() < ng) {
      EntityMention m = random_mention();
      bool fresh = std::none_of(gold.begin(), gold.end(), [&](const EntityMention &x) {
        return x.label == m.label && x.start == m.start && x.end == m.end;
      });
      if (fresh) gold.push_back(m);
    }
    for (std::size_t j = 0; j < np; ++j) {
      pred.push_back(j > 0 && rng.Below(4) == 0 ? pred[rng.Below(j)]
                     : !gold.empty() && rng.Below(2) ? gold[rng.Below(gold.size())]
                                                     : random_mention());
    }
    MatchCounts want = BruteForce(gold, pred);
    MatchCounts got = MicroF1(gold, pred).counts;
    c.Expect(got == want, "instance " + std::to_string(i));
  }
}

void ScaleSmoke(Check &c) {
  TempDir dir("accept-scale");
  Rng rng(31337);
  const char *types[] = {"person", "location", "organization", "date", "product",
                         "event",  "disease",  "chemical",     "work of art", "facility"};
  std::vector<std::string> filler;
  for (int i = 0; i < 2000; ++i) filler.push_back(RandomWord(rng, 2 + rng.Below(7)));
  std::vector<std::vector<std::string>> names(10);
  for (auto &list : names) {
    for (int i = 0; i < 3000; ++i) {
      std::string n = RandomWord(rng, 4 + rng.Below(6));
      n[0] = static_cast<char>(n[0] - 'a' + 'A');
      list.push_back(n);
    }
  }
  nlohmann::ordered_json manifest;
  manifest["datasets"] = nlohmann::ordered_json::array();
  std::ofstream mapping_out;
  nlohmann::ordered_json mapping = nlohmann::ordered_json::array();
  std::size_t total = 0;
  for (int ds = 0; ds < 4; ++ds) {
    for (const char *split : {"train", "test"}) {
      bool train = std::string(split) == "train";
      std::string id = "synth" + std::to_string(ds) + (train ? "" : "_test");
      std::ofstream out(dir.path() / (id + ".jsonl"));
      std::size_t count = train ? 24000 : 1000;
      std::set<std::string> used;
      for (std::size_t i = 0; i < count; ++i) {
        std::string text;
        nlohmann::ordered_json mentions = nlohmann::ordered_json::array();
        std::size_t words = 6 + rng.Below(12);
        bool negative = rng.Below(8) == 0;
        std::size_t cp = 0;
        for (std::size_t w = 0; w < words; ++w) {
          if (!text.empty()) {
            text += ' ';
            ++cp;
          }
          if (!negative && rng.Below(5) == 0) {
            std::size_t t = (static_cast<std::size_t>(ds) * 3 + rng.Below(6)) % 10;
            const std::string &name = names[t][rng.Below(names[t].size())];
            mentions.push_back({{"start", cp}, {"end", cp + name.size()}, {"label", types[t]}});
            used.insert(types[t]);
            text += name;
            cp += name.size();
          } else {
            const std::string &word = filler[rng.Below(filler.size())];
            text += word;
            cp += word.size();
          }
        }
        nlohmann::ordered_json line;
        line["id"] = id + ":" + std::to_string(i);
        line["text"] = text;
        line["mentions"] = mentions;
        out << line.dump() << '\n';
      }
      total += count;
      for (const std::string &label : used) {
        mapping.push_back({{"dataset_id", id}, {"raw_label", label}, {"action", "rename"},
                           {"target", label}});
      }
      manifest["datasets"].push_back({{"id", id},
                                      {"name", "synth" + std::to_string(ds)},
                                      {"language", "en"},
                                      {"split", split},
                                      {"format", "jsonl"},
                                      {"path", id + ".jsonl"}});
    }
  }
  WriteFile(dir.path() / "manifest.json", manifest.dump(2));
  WriteFile(dir.path() / "mapping.json", mapping.dump(2));
  nlohmann::ordered_json pipeline;
  pipeline["corpus_manifest"] = "manifest.json";
  pipeline["mapping"] = "mapping.json";
  pipeline["seed"] = 1;
  pipeline["prune"] = {{"k", 400}, {"b", 0.0}, {"strategy", "diversity"}};
  WriteFile(dir.path() / "pipeline.json", pipeline.dump(2));
  c.Expect(total == 100000, "generated " + std::to_string(total) + " samples");

  auto start = std::chrono::steady_clock::now();
  int code = Cli({"--manifest", (dir.path() / "pipeline.json").string(), "--output-dir",
                  (dir.path() / "out").string(), "-q", "run"});
  double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  c.Expect(code == 0, "pipeline exit code " + std::to_string(code));
  c.Expect(seconds < 60.0, "pipeline took " + std::to_string(seconds) + " s");
  c.Expect(fs::exists(dir.path() / "out" / "10-report.txt"), "no report written");
}

struct Criterion {
  std::string name;
  double budget_seconds;
  std::function<void(Check &)> run;
};

}  // namespace
}  // namespace nerunify

int main() {
  using nerunify::Check;
  using nerunify::Criterion;
  std::vector<Criterion> criteria{
      {"F1 arithmetic: P=4.64, R=65.05 gives 8.66 within 0.01", 1.0, nerunify::F1Arithmetic},
      {"pruning formula invariants over the (sim, b) grid", 1.0, nerunify::FormulaGrid},
      {"duplicate cluster {A,A,A,B}, k=2 selects {A,B} for 200 seeds", 1.0,
       nerunify::DuplicateCluster},
      {"capacity and budget: 20 types, 10000 samples, k=50", 10.0, nerunify::CapacityAndBudget},
      {"determinism of prune trace and instructions", 10.0, nerunify::Determinism},
      {"matched-size diversity on a 10-cluster corpus", 30.0, nerunify::MatchedSizeDiversity},
      {"conflict screening matches the hand-classified fixture", 1.0,
       nerunify::ConflictScreening},
      {"cross-validation contrast: relabeled < 0.2, consistent > 0.9", 5.0,
       nerunify::CrossValidation},
      {"instruction regularization over 1000 renders", 10.0,
       nerunify::InstructionRegularization},
      {"micro F1 equals the brute-force oracle on 500 instances", 10.0, nerunify::EvalOracle},
      {"scale: full pipeline on 100000 samples under 60 s", 60.0, nerunify::ScaleSmoke},
  };
  int failed = 0;
  for (const Criterion &criterion : criteria) {
    Check check;
    auto start = std::chrono::steady_clock::now();
    std::string error;
    try {
      criterion.run(check);
    } catch (const std::exception &e) {
      check.Expect(false, std::string("exception: ") + e.what());
    }
    double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (seconds > criterion.budget_seconds) {
      check.Expect(false, "over budget of " + std::to_string(criterion.budget_seconds) + " s");
    }
    bool ok = check.ok();
    failed += !ok;
    std::printf("[%s] %s (%.2f s)%s\n", ok ? "PASS" : "FAIL", criterion.name.c_str(), seconds,
                check.detail().c_str());
    std::fflush(stdout);
  }
  std::printf("%zu criteria, %d failed\n", criteria.size(), failed);
  return failed == 0 ? 0 : 1;
}
