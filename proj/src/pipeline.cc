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


#include "nerunify/pipeline.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <utility>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "nerunify/common.h"
#include "nerunify/corpus.h"
#include "nerunify/embedding.h"
#include "nerunify/eval.h"
#include "nerunify/ingest.h"
#include "nerunify/taxonomy.h"
#include "nerunify/text.h"

namespace nerunify {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

json PipelineConfig::Canonical() const {
  json j;
  j["corpus_manifest"] = corpus_manifest;
  j["mapping"] = mapping;
  j["seed"] = seed;
  j["ingest"] = {{"strict", strict_ingest}};
  j["conflict"] = {{"synonyms", conflict.synonyms},
                   {"min_support", conflict.min_support},
                   {"top_n", conflict.top_n}};
  j["cross_validate"] = {{"label", crossval_label},
                         {"datasets", crossval_datasets},
                         {"tagger", crossval_tagger},
                         {"disjoint_self_eval", crossval_disjoint}};
  j["lint"] = {{"strict", lint_strict}, {"waivers", lint_waivers}};
  j["prune"] = {{"k", prune.k},
                {"b", prune.b},
                {"strategy", PruneStrategyName(prune.strategy)},
                {"tau", prune.tau},
                {"downsample_size", prune.downsample_size ? json(*prune.downsample_size)
                                                          : json(nullptr)}};
  j["instruct"] = {{"template", TemplateKindName(instruct_template)},
                   {"dynamic_labels", instruct.dynamic_labels},
                   {"extra_min", instruct.min_extra},
                   {"extra_max", instruct.max_extra},
                   {"dropout", instruct.dropout_prob},
                   {"max_label_chars", instruct.max_label_chars},
                   {"guidelines", guidelines},
                   {"fewshot_n", fewshot_n}};
  j["evaluate"] = {{"predictions", predictions}};
  return j;
}

std::string PipelineConfig::Digest() const {
  return fmt::format("{:016x}", Fnv1a64(Canonical().dump()));
}

namespace {

std::string ResolvePath(const std::string &base_dir, const std::string &path) {
  if (path.empty() || base_dir.empty()) return path;
  fs::path p(path);
  if (p.is_absolute()) return path;
  return (fs::path(base_dir) / p).lexically_normal().string();
}

// Rejects keys outside `allowed`, which usually are typos.
void CheckKeys(const json &obj, const std::string &where,
               std::initializer_list<const char *> allowed) {
  if (!obj.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto &[key, value] : obj.items()) {
    bool known = false;
    for (const char *a : allowed) known = known || key == a;
    if (!known) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
void Get(const json &obj, const char *key, T &out) {
  if (obj.contains(key)) out = obj.at(key).get<T>();
}

}  // namespace

void ApplyPipelineJson(const json &doc, const std::string &base_dir,
                       PipelineConfig &c) {
  try {
    CheckKeys(doc, "pipeline manifest",
              {"corpus_manifest", "mapping", "output_dir", "seed", "jobs", "ingest",
               "conflict", "cross_validate", "lint", "prune", "instruct", "evaluate"});
    if (doc.contains("corpus_manifest")) {
      c.corpus_manifest = ResolvePath(base_dir, doc["corpus_manifest"].get<std::string>());
    }
    if (doc.contains("mapping")) c.mapping = ResolvePath(base_dir, doc["mapping"].get<std::string>());
    if (doc.contains("output_dir")) {
      c.output_dir = ResolvePath(base_dir, doc["output_dir"].get<std::string>());
    }
    Get(doc, "seed", c.seed);
    Get(doc, "jobs", c.jobs);
    if (doc.contains("ingest")) {
      const json &s = doc["ingest"];
      CheckKeys(s, "ingest", {"strict"});
      Get(s, "strict", c.strict_ingest);
    }
    if (doc.contains("conflict")) {
      const json &s = doc["conflict"];
      CheckKeys(s, "conflict", {"synonyms", "min_support", "top_n"});
      Get(s, "synonyms", c.conflict.synonyms);
      Get(s, "min_support", c.conflict.min_support);
      Get(s, "top_n", c.conflict.top_n);
    }
    if (doc.contains("cross_validate")) {
      const json &s = doc["cross_validate"];
      CheckKeys(s, "cross_validate", {"label", "datasets", "tagger", "disjoint_self_eval"});
      Get(s, "label", c.crossval_label);
      Get(s, "datasets", c.crossval_datasets);
      Get(s, "tagger", c.crossval_tagger);
      Get(s, "disjoint_self_eval", c.crossval_disjoint);
    }
    if (doc.contains("lint")) {
      const json &s = doc["lint"];
      CheckKeys(s, "lint", {"strict", "waivers"});
      Get(s, "strict", c.lint_strict);
      Get(s, "waivers", c.lint_waivers);
    }
    if (doc.contains("prune")) {
      const json &s = doc["prune"];
      CheckKeys(s, "prune", {"k", "b", "strategy", "tau", "downsample_size"});
      Get(s, "k", c.prune.k);
      Get(s, "b", c.prune.b);
      Get(s, "tau", c.prune.tau);
      if (s.contains("strategy")) {
        c.prune.strategy = ParsePruneStrategy(s["strategy"].get<std::string>());
      }
      if (s.contains("downsample_size") && !s["downsample_size"].is_null()) {
        c.prune.downsample_size = s["downsample_size"].get<std::size_t>();
      }
    }
    if (doc.contains("instruct")) {
      const json &s = doc["instruct"];
      CheckKeys(s, "instruct",
                {"template", "dynamic_labels", "dropout", "extra_min", "extra_max",
                 "max_label_chars", "guidelines", "fewshot_n"});
      if (s.contains("template")) {
        c.instruct_template = ParseTemplateKind(s["template"].get<std::string>());
      }
      Get(s, "dynamic_labels", c.instruct.dynamic_labels);
      Get(s, "dropout", c.instruct.dropout_prob);
      Get(s, "extra_min", c.instruct.min_extra);
      Get(s, "extra_max", c.instruct.max_extra);
      Get(s, "max_label_chars", c.instruct.max_label_chars);
      Get(s, "fewshot_n", c.fewshot_n);
      if (s.contains("guidelines")) {
        c.guidelines = ResolvePath(base_dir, s["guidelines"].get<std::string>());
      }
    }
    if (doc.contains("evaluate")) {
      const json &s = doc["evaluate"];
      CheckKeys(s, "evaluate", {"predictions"});
      std::vector<std::string> paths;
      Get(s, "predictions", paths);
      c.predictions.clear();
      for (const std::string &p : paths) c.predictions.push_back(ResolvePath(base_dir, p));
    }
  } catch (const json::exception &e) {
    throw ConfigError(std::string("pipeline manifest: ") + e.what());
  }
}

PipelineConfig LoadPipelineConfig(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read pipeline manifest " + path);
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw ConfigError("malformed pipeline manifest " + path);
  PipelineConfig config;
  ApplyPipelineJson(doc, fs::path(path).parent_path().string(), config);
  return config;
}

namespace {

class Logger {
 public:
  Logger(std::ostream &err, bool json_mode, bool quiet)
      : err_(err), json_(json_mode), quiet_(quiet) {}

  void Log(std::string_view level, std::string_view stage, const std::string &message) {
    if (quiet_ && level == "info") return;
    if (json_) {
      ordered_json j;
      j["level"] = level;
      j["stage"] = stage;
      j["message"] = message;
      err_ << j.dump() << '\n';
    } else {
      err_ << level << " [" << stage << "] " << message << '\n';
    }
  }

  void Info(std::string_view stage, const std::string &m) { Log("info", stage, m); }

  void Drain(std::string_view stage, Diagnostics &diag) {
    for (const std::string &w : diag.warnings()) Log("warning", stage, w);
    diag.Clear();
  }

 private:
  std::ostream &err_;
  bool json_;
  bool quiet_;
};

// Writes to a temporary sibling, renamed into place on Commit.
class ArtifactWriter {
 public:
  explicit ArtifactWriter(fs::path path)
      : path_(std::move(path)), tmp_(path_.string() + ".tmp"), out_(tmp_, std::ios::binary) {
    if (!out_) throw DataError("cannot write " + path_.string());
  }

  std::ostream &stream() { return out_; }

  void Commit() {
    out_.close();
    if (!out_) throw DataError("failed writing " + path_.string());
    fs::rename(tmp_, path_);
  }

 private:
  fs::path path_;
  fs::path tmp_;
  std::ofstream out_;
};

void WriteArtifact(const fs::path &path, std::string_view text) {
  ArtifactWriter w(path);
  w.stream() << text;
  w.Commit();
}

struct Stage {
  const char *stamp;  // file prefix
  const char *command;
};

constexpr Stage kIngest{"01-ingest", "ingest"};
constexpr Stage kStats{"02-stats", "stats"};
constexpr Stage kConflicts{"03-conflicts", "detect-conflicts"};
constexpr Stage kCrossval{"04-crossval", "cross-validate"};
constexpr Stage kRemap{"05-remap", "remap"};
constexpr Stage kTaxonomy{"06-taxonomy", "lint-taxonomy"};
constexpr Stage kPrune{"07-prune", "prune"};
constexpr Stage kInstructions{"08-instructions", "gen-instructions"};
constexpr Stage kEval{"09-eval", "evaluate"};
constexpr Stage kReport{"10-report", "report"};

constexpr Stage kAllStages[] = {kIngest, kStats, kConflicts, kCrossval, kRemap,
                                kTaxonomy, kPrune, kInstructions, kEval, kReport};

struct Context {
  PipelineConfig config;
  fs::path dir;
  std::string digest;
  Logger *log;
  std::ostream *out;
  Diagnostics diag;

  fs::path Path(const Stage &stage, std::string_view suffix) const {
    return dir / (std::string(stage.stamp) + std::string(suffix));
  }
  std::string Stem(const Stage &stage) const { return (dir / stage.stamp).string(); }
};

bool StageDone(const Context &ctx, const Stage &stage) {
  return fs::exists(ctx.Path(stage, ".meta.json"));
}

void WriteMeta(Context &ctx, const Stage &stage, const std::vector<std::string> &outputs,
               const std::string &digest) {
  ordered_json j;
  j["stage"] = stage.command;
  j["config_digest"] = digest;
  j["outputs"] = outputs;
  WriteArtifact(ctx.Path(stage, ".meta.json"), j.dump(2) + "\n");
}

void WriteMeta(Context &ctx, const Stage &stage, const std::vector<std::string> &outputs) {
  WriteMeta(ctx, stage, outputs, ctx.digest);
}

std::string ReadMetaDigest(const Context &ctx, const Stage &stage) {
  std::ifstream in(ctx.Path(stage, ".meta.json"), std::ios::binary);
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded() || !doc.contains("config_digest")) {
    throw DataError("malformed " + ctx.Path(stage, ".meta.json").string());
  }
  return doc["config_digest"].get<std::string>();
}

void Require(const Context &ctx, const Stage &stage) {
  if (!StageDone(ctx, stage)) {
    throw PrerequisiteError(fmt::format("missing {} artifacts in {}; run `nerunify {}` first",
                                        stage.stamp, ctx.dir.string(), stage.command));
  }
}

Corpus LoadStageCorpus(const Context &ctx, const Stage &stage) {
  Require(ctx, stage);
  return LoadCorpus(ctx.Stem(stage));
}

// Stage whose corpus a read-only command works on.
const Stage &CorpusStage(const std::string &from) {
  if (from == "ingest") return kIngest;
  if (from == "remap") return kRemap;
  if (from == "prune") return kPrune;
  throw ConfigError("--from must be ingest, remap or prune, not '" + from + "'");
}

std::string StatsTable(const CorpusStats &stats) {
  std::string out = fmt::format("{:<6} {:<8} {:>8} {:>6} {:>9} {:>9}\n", "split", "language",
                                "datasets", "types", "samples", "mentions");
  for (const GroupStats &g : stats.groups) {
    out += fmt::format("{:<6} {:<8} {:>8} {:>6} {:>9} {:>9}\n", SplitName(g.split), g.language,
                       g.datasets, g.types, g.samples, g.mentions);
  }
  out += fmt::format("{:<6} {:<8} {:>8} {:>6} {:>9} {:>9}\n", "total", "", stats.datasets,
                     stats.types, stats.samples, stats.mentions);
  return out;
}

void RunIngest(Context &ctx) {
  const PipelineConfig &c = ctx.config;
  if (c.corpus_manifest.empty()) {
    throw ConfigError("no corpus manifest; pass --corpus-manifest or set corpus_manifest");
  }
  if (!fs::exists(c.corpus_manifest)) {
    throw ConfigError("corpus manifest " + c.corpus_manifest + " does not exist");
  }
  std::vector<ManifestEntry> entries = LoadManifest(c.corpus_manifest);
  Corpus corpus = IngestManifest(entries, c.strict_ingest, c.jobs, &ctx.diag);
  ctx.log->Drain(kIngest.command, ctx.diag);
  SaveCorpus(corpus, ctx.Stem(kIngest));
  WriteMeta(ctx, kIngest, {"01-ingest.corpus.jsonl", "01-ingest.datasets.json"});
  ctx.log->Info(kIngest.command, fmt::format("{} datasets, {} samples", corpus.datasets.size(),
                                             corpus.sample_count()));
}

void RunStats(Context &ctx, const std::string &from) {
  const Stage &source = CorpusStage(from);
  Corpus corpus = LoadStageCorpus(ctx, source);
  CorpusStats stats = ComputeStats(corpus);
  ordered_json j;
  j["config_digest"] = ctx.digest;
  j["source"] = source.stamp;
  j["stats"] = StatsToJson(stats);
  std::string table = StatsTable(stats);
  WriteArtifact(ctx.Path(kStats, ".json"), j.dump(2) + "\n");
  WriteArtifact(ctx.Path(kStats, ".txt"), table);
  WriteMeta(ctx, kStats, {"02-stats.json", "02-stats.txt"});
  *ctx.out << table;
}

void RunConflicts(Context &ctx, const std::string &from) {
  Corpus corpus = LoadStageCorpus(ctx, CorpusStage(from));
  std::vector<LabelPair> pairs = FindSharedLabelPairs(corpus, ctx.config.conflict);
  ConflictReport report = ScreenConflicts(corpus, pairs, ctx.config.conflict);
  ordered_json j;
  j["config_digest"] = ctx.digest;
  j["report"] = ConflictReportToJson(report);
  WriteArtifact(ctx.Path(kConflicts, ".json"), j.dump(2) + "\n");
  WriteArtifact(ctx.Path(kConflicts, ".txt"), ConflictReportToTable(report));
  WriteMeta(ctx, kConflicts, {"03-conflicts.json", "03-conflicts.txt"});
  ctx.log->Info(kConflicts.command, fmt::format("{} label pairs screened", pairs.size()));
}

void RunCrossval(Context &ctx, const std::string &from) {
  const PipelineConfig &c = ctx.config;
  if (c.crossval_label.empty()) {
    throw ConfigError("cross-validate needs a target label (--label)");
  }
  Corpus corpus = LoadStageCorpus(ctx, CorpusStage(from));
  std::vector<std::string> ids = c.crossval_datasets;
  if (ids.empty()) {
    for (const Dataset &d : corpus.datasets) {
      if (d.info.split == Split::kTrain && d.info.label_set.count(c.crossval_label)) {
        ids.push_back(d.info.id);
      }
    }
  }
  if (ids.empty()) {
    throw DataError("no train dataset carries label '" + c.crossval_label + "'");
  }
  std::unique_ptr<Tagger> tagger;
  if (c.crossval_tagger.empty()) {
    tagger = std::make_unique<MemorizationTagger>();
  } else {
    tagger = std::make_unique<SubprocessTagger>(c.crossval_tagger);
  }
  CrossValidateOptions options;
  options.disjoint_self_eval = c.crossval_disjoint;
  options.jobs = c.jobs;
  F1Matrix matrix = CrossValidate(corpus, *tagger, ids, c.crossval_label, options);
  ordered_json j;
  j["config_digest"] = ctx.digest;
  j["matrix"] = F1MatrixToJson(matrix);
  WriteArtifact(ctx.Path(kCrossval, ".csv"), F1MatrixToCsv(matrix));
  WriteArtifact(ctx.Path(kCrossval, ".json"), j.dump(2) + "\n");
  WriteMeta(ctx, kCrossval, {"04-crossval.csv", "04-crossval.json"});
}

std::vector<MappingRule> RequireMapping(const Context &ctx) {
  if (ctx.config.mapping.empty()) {
    throw ConfigError("no mapping file; pass --mapping or set mapping");
  }
  if (!fs::exists(ctx.config.mapping)) {
    throw ConfigError("mapping file " + ctx.config.mapping + " does not exist");
  }
  return LoadMappingRules(ctx.config.mapping);
}

void RunRemap(Context &ctx) {
  std::vector<MappingRule> rules = RequireMapping(ctx);
  Corpus corpus = LoadStageCorpus(ctx, kIngest);
  MappingStats stats;
  Corpus mapped = ApplyMapping(corpus, rules, &stats);
  SaveCorpus(mapped, ctx.Stem(kRemap));
  ordered_json j;
  j["config_digest"] = ctx.digest;
  j["renamed"] = stats.renamed;
  j["dropped"] = stats.dropped;
  j["rules"] = MappingRulesToJson(rules);
  WriteArtifact(ctx.Path(kRemap, ".rules.json"), j.dump(2) + "\n");
  WriteMeta(ctx, kRemap,
            {"05-remap.corpus.jsonl", "05-remap.datasets.json", "05-remap.rules.json"});
  ctx.log->Info(kRemap.command, fmt::format("{} mentions relabeled, {} dropped", stats.renamed,
                                            stats.dropped));
}

void RunLint(Context &ctx) {
  std::vector<MappingRule> rules = RequireMapping(ctx);
  std::set<std::string> waivers(ctx.config.lint_waivers.begin(), ctx.config.lint_waivers.end());
  std::vector<LintFinding> findings = LintTaxonomy(rules, waivers);
  std::set<std::string> targets;
  for (const MappingRule &r : rules) {
    if (r.target) targets.insert(r.target->str());
  }
  std::vector<UniversalLabel> labels;
  for (const std::string &t : targets) labels.push_back(UniversalLabel::Parse(t));
  TaxonomyTree tree = BuildTree(labels);

  ordered_json jf = ordered_json::array();
  std::size_t open = 0;
  for (const LintFinding &f : findings) {
    jf.push_back({{"code", LintCodeName(f.code)},
                  {"label", f.label},
                  {"message", f.message},
                  {"waived", f.waived}});
    if (!f.waived) {
      ++open;
      ctx.log->Log("warning", kTaxonomy.command,
                   fmt::format("{}: {} ({})", f.label, f.message, LintCodeName(f.code)));
    }
  }
  ordered_json lint;
  lint["config_digest"] = ctx.digest;
  lint["findings"] = jf;
  ordered_json tj;
  tj["config_digest"] = ctx.digest;
  tj["tree"] = TreeToJson(tree);
  WriteArtifact(ctx.Path(kTaxonomy, ".txt"), TreeToText(tree));
  WriteArtifact(ctx.Path(kTaxonomy, ".json"), tj.dump(2) + "\n");
  WriteArtifact(ctx.dir / "06-lint.json", lint.dump(2) + "\n");
  WriteMeta(ctx, kTaxonomy, {"06-taxonomy.txt", "06-taxonomy.json", "06-lint.json"});
  ctx.log->Info(kTaxonomy.command, fmt::format("{} labels, {} open findings", targets.size(), open));
  if (ctx.config.lint_strict && open > 0) {
    throw DataError(fmt::format("{} unwaived lint findings", open));
  }
}

void RunPrune(Context &ctx) {
  PruneConfig config = ctx.config.prune;
  config.Validate();
  Corpus corpus = LoadStageCorpus(ctx, kRemap);
  Corpus train;
  for (const Dataset &d : corpus.datasets) {
    if (d.info.split == Split::kTrain) train.datasets.push_back(d);
  }
  HashedNgramEmbedder embedder;
  CorpusPruneResult result = PruneCorpus(train, embedder, config, ctx.config.jobs, &ctx.diag);
  ctx.log->Drain(kPrune.command, ctx.diag);

  std::size_t kept = result.selected.sample_count();
  // Test splits pass through untouched; corpus order is kept.
  Corpus out;
  std::size_t next = 0;
  for (const Dataset &d : corpus.datasets) {
    if (d.info.split == Split::kTrain) {
      out.datasets.push_back(std::move(result.selected.datasets[next++]));
    } else {
      out.datasets.push_back(d);
    }
  }
  SaveCorpus(out, ctx.Stem(kPrune));
  {
    ArtifactWriter trace(ctx.Path(kPrune, ".trace.jsonl"));
    WriteTrace(trace.stream(), result.per_dataset);
    trace.Commit();
  }
  ordered_json j;
  j["config_digest"] = ctx.digest;
  j["strategy"] = PruneStrategyName(config.strategy);
  j["selection"] = SelectionToJson(result.per_dataset, train);
  WriteArtifact(ctx.Path(kPrune, ".selection.json"), j.dump(2) + "\n");
  WriteMeta(ctx, kPrune,
            {"07-prune.corpus.jsonl", "07-prune.datasets.json", "07-prune.trace.jsonl",
             "07-prune.selection.json"});
  ctx.log->Info(kPrune.command, fmt::format("{} of {} train samples kept", kept,
                                            train.sample_count()));
}

// Few-shot exemplars come from the first samples of the same dataset.
constexpr std::size_t kExemplarPool = 64;

void RunInstructions(Context &ctx) {
  const PipelineConfig &c = ctx.config;
  RegularizationConfig reg = c.instruct;
  reg.Validate();
  Guidelines guidelines;
  if (c.instruct_template == TemplateKind::kGuideline) {
    if (c.guidelines.empty()) throw ConfigError("the guideline template needs --guidelines");
    guidelines = LoadGuidelines(c.guidelines);
  }
  Corpus corpus = LoadStageCorpus(ctx, kPrune);

  std::map<std::string, std::set<std::string>> universe;  // language -> labels
  for (const Dataset &d : corpus.datasets) {
    if (d.info.split == Split::kTrain) {
      universe[d.info.language].insert(d.info.label_set.begin(), d.info.label_set.end());
    }
  }

  ArtifactWriter train_out(ctx.Path(kInstructions, ".jsonl"));
  ArtifactWriter test_out(ctx.Path(kInstructions, ".test.jsonl"));
  std::size_t train_count = 0;
  std::size_t test_count = 0;
  for (const Dataset &d : corpus.datasets) {
    if (d.info.split == Split::kTest) {
      RegularizationConfig plain;
      plain.dynamic_labels = false;
      plain.dropout_prob = 0.0;
      plain.seed = reg.seed;
      for (const Sample &s : d.samples) {
        InstructionSample is = Render(s, d.info.label_set, plain, &ctx.diag);
        test_out.stream() << InstructionToJson(is).dump() << '\n';
        ++test_count;
      }
      continue;
    }
    const std::set<std::string> &labels = universe[d.info.language];
    std::vector<const Sample *> pool;
    for (std::size_t i = 0; i < d.samples.size() && i <= kExemplarPool; ++i) {
      pool.push_back(&d.samples[i]);
    }
    for (std::size_t i = 0; i < d.samples.size(); ++i) {
      const Sample &s = d.samples[i];
      InstructionSample is;
      switch (c.instruct_template) {
        case TemplateKind::kPlain:
          is = Render(s, labels, reg, &ctx.diag);
          break;
        case TemplateKind::kGuideline:
          is = RenderGuideline(s, labels, guidelines, reg, &ctx.diag);
          break;
        case TemplateKind::kFewshot: {
          std::vector<const Sample *> exemplars;
          for (const Sample *e : pool) {
            if (e != &s && exemplars.size() < kExemplarPool) exemplars.push_back(e);
          }
          is = RenderFewshot(s, labels, std::span<const Sample *const>(exemplars), c.fewshot_n,
                             reg, &ctx.diag);
          break;
        }
      }
      train_out.stream() << InstructionToJson(is).dump() << '\n';
      ++train_count;
    }
  }
  train_out.Commit();
  test_out.Commit();
  ctx.log->Drain(kInstructions.command, ctx.diag);
  WriteMeta(ctx, kInstructions, {"08-instructions.jsonl", "08-instructions.test.jsonl"});
  ctx.log->Info(kInstructions.command,
                fmt::format("{} train and {} test instructions", train_count, test_count));
}

// Memorization baseline: each test set is tagged by a gazetteer built from
// the train set of the same name.
std::vector<Prediction> BaselinePredictions(const Corpus &corpus, const Corpus &gold,
                                            Diagnostics *diag) {
  std::vector<Prediction> out;
  for (const Dataset &test : gold.datasets) {
    const Dataset *train = nullptr;
    for (const Dataset &d : corpus.datasets) {
      if (d.info.split == Split::kTrain && d.info.name == test.info.name) train = &d;
    }
    if (train == nullptr) {
      Warn(diag, "no train split named '" + test.info.name + "' for the baseline");
      continue;
    }
    MemorizationModel model = MemorizationModel::Train(*train);
    for (const Sample &s : test.samples) {
      out.push_back({s.id, std::nullopt, model.Tag(s.text, test.info.label_set)});
    }
  }
  return out;
}

void RunEvaluate(Context &ctx) {
  Require(ctx, kRemap);
  const Stage &source = StageDone(ctx, kPrune) ? kPrune : kRemap;
  Corpus corpus = LoadCorpus(ctx.Stem(source));
  Corpus gold;
  for (const Dataset &d : corpus.datasets) {
    if (d.info.split == Split::kTest) gold.datasets.push_back(d);
  }
  if (gold.datasets.empty()) throw DataError("the corpus has no test datasets to evaluate on");

  std::vector<RunReport> runs;
  std::string mode;
  if (ctx.config.predictions.empty()) {
    mode = "memorization-baseline";
    std::vector<Prediction> preds = BaselinePredictions(corpus, gold, &ctx.diag);
    runs.push_back(EvaluateRun(gold, preds, ctx.config.seed, &ctx.diag));
  } else {
    mode = "predictions";
    for (std::size_t i = 0; i < ctx.config.predictions.size(); ++i) {
      const std::string &path = ctx.config.predictions[i];
      std::ifstream in(path, std::ios::binary);
      if (!in) throw ConfigError("cannot read predictions " + path);
      std::vector<Prediction> preds = ReadPredictions(in);
      runs.push_back(EvaluateRun(gold, preds, ctx.config.seed + i, &ctx.diag));
    }
  }
  ctx.log->Drain(kEval.command, ctx.diag);
  AggregateReport aggregate = AggregateRuns(runs);
  ordered_json jr = ordered_json::array();
  for (const RunReport &r : runs) jr.push_back(RunReportToJson(r));
  ordered_json j;
  j["config_digest"] = ctx.digest;
  j["mode"] = mode;
  j["runs"] = jr;
  j["aggregate"] = AggregateToJson(aggregate);
  WriteArtifact(ctx.Path(kEval, ".json"), j.dump(2) + "\n");
  WriteArtifact(ctx.Path(kEval, ".csv"), AggregateToCsv(aggregate));
  WriteMeta(ctx, kEval, {"09-eval.json", "09-eval.csv"});
  ctx.log->Info(kEval.command, fmt::format("average F1 {:.2f} over {} run(s)",
                                           aggregate.average * 100.0, aggregate.runs));
}

void RunReportStage(Context &ctx) {
  Require(ctx, kIngest);
  std::map<std::string, std::vector<std::string>> by_digest;
  for (const Stage &stage : kAllStages) {
    if (&stage == &kAllStages[9] || !StageDone(ctx, stage)) continue;
    by_digest[ReadMetaDigest(ctx, stage)].push_back(stage.command);
  }
  if (by_digest.size() > 1) {
    std::string detail;
    for (const auto &[digest, stages] : by_digest) {
      detail += fmt::format(" {}: {}", digest, fmt::join(stages, ","));
    }
    throw DataError("artifacts come from different configurations;" + detail +
                    "; re-run the pipeline with one configuration");
  }
  std::string digest = by_digest.begin()->first;

  const Stage &raw_stage = StageDone(ctx, kRemap) ? kRemap : kIngest;
  Corpus raw = LoadCorpus(ctx.Stem(raw_stage));
  CorpusStats raw_stats = ComputeStats(raw);
  CorpusStats final_stats = raw_stats;
  bool pruned = StageDone(ctx, kPrune);
  if (pruned) final_stats = ComputeStats(LoadCorpus(ctx.Stem(kPrune)));

  std::map<std::pair<Split, std::string>, std::size_t> raw_num;
  for (const GroupStats &g : raw_stats.groups) raw_num[{g.split, g.language}] = g.samples;

  std::string text = fmt::format("{:<6} {:<8} {:>8} {:>6} {:>9} {:>9}\n", "split", "language",
                                 "datasets", "types", "num", "raw num");
  ordered_json rows = ordered_json::array();
  for (const GroupStats &g : final_stats.groups) {
    std::size_t raw_count = raw_num[{g.split, g.language}];
    text += fmt::format("{:<6} {:<8} {:>8} {:>6} {:>9} {:>9}\n", SplitName(g.split),
                        g.language, g.datasets, g.types, g.samples, raw_count);
    rows.push_back({{"split", SplitName(g.split)},
                    {"language", g.language},
                    {"datasets", g.datasets},
                    {"types", g.types},
                    {"num", g.samples},
                    {"raw_num", raw_count}});
  }
  text += fmt::format("{:<6} {:<8} {:>8} {:>6} {:>9} {:>9}\n", "total", "",
                      final_stats.datasets, final_stats.types, final_stats.samples,
                      raw_stats.samples);
  ordered_json j;
  j["config_digest"] = digest;
  j["corpus"] = pruned ? kPrune.stamp : raw_stage.stamp;
  j["rows"] = rows;
  if (StageDone(ctx, kEval)) {
    std::ifstream in(ctx.Path(kEval, ".json"), std::ios::binary);
    json ev = json::parse(in, nullptr, false);
    if (!ev.is_discarded() && ev.contains("aggregate")) {
      double avg = ev["aggregate"].value("average", 0.0);
      j["average_f1"] = avg;
      text += fmt::format("average F1: {:.2f}\n", avg * 100.0);
    }
  }
  WriteArtifact(ctx.Path(kReport, ".txt"), text);
  WriteArtifact(ctx.Path(kReport, ".json"), j.dump(2) + "\n");
  WriteMeta(ctx, kReport, {"10-report.txt", "10-report.json"}, digest);
  *ctx.out << text;
}

// Command line values applied on top of the manifest, only when given.
class Overrides {
 public:
  template <typename T>
  CLI::Option *Add(CLI::App *app, const std::string &name, const std::string &help,
                   std::function<void(PipelineConfig &, const T &)> apply) {
    auto value = std::make_shared<T>();
    CLI::Option *opt = app->add_option(name, *value, help);
    items_.push_back([opt, value, apply](PipelineConfig &c) {
      if (opt->count() > 0) apply(c, *value);
    });
    return opt;
  }

  CLI::Option *Flag(CLI::App *app, const std::string &name, const std::string &help,
                    std::function<void(PipelineConfig &)> apply) {
    CLI::Option *opt = app->add_flag(name, help);
    items_.push_back([opt, apply](PipelineConfig &c) {
      if (opt->count() > 0) apply(c);
    });
    return opt;
  }

  void Apply(PipelineConfig &c) const {
    for (const auto &f : items_) f(c);
  }

 private:
  std::vector<std::function<void(PipelineConfig &)>> items_;
};

int ExitCode(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kUsage:
      return 1;
    case ErrorKind::kData:
      return 2;
    case ErrorKind::kPrerequisite:
      return 3;
  }
  return 2;
}

}  // namespace

int RunCli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
  CLI::App app{"Normalize, screen, prune and render NER corpora", "nerunify"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string manifest_path;
  std::string from = "ingest";
  bool log_json = false;
  bool quiet = false;
  app.add_option("--manifest", manifest_path, "Pipeline manifest (JSON)");
  app.add_flag("--log-json", log_json, "Write log lines as JSON objects");
  app.add_flag("-q,--quiet", quiet, "Only log warnings and errors");

  Overrides ov;
  ov.Add<std::string>(&app, "--output-dir", "Artifact directory (overrides $" +
                                               std::string(kOutputDirEnv) + ")",
                      [](PipelineConfig &c, const std::string &v) { c.output_dir = v; });
  ov.Add<std::uint64_t>(&app, "--seed", "Seed for every randomized stage",
                        [](PipelineConfig &c, const std::uint64_t &v) { c.seed = v; });
  ov.Add<unsigned>(&app, "--jobs", "Worker threads",
                   [](PipelineConfig &c, const unsigned &v) { c.jobs = v; })
      ->check(CLI::Range(1u, 1024u));

  std::map<std::string, CLI::App *> subs;
  auto sub = [&](const char *name, const char *help) {
    CLI::App *s = app.add_subcommand(name, help);
    s->fallthrough();
    subs[name] = s;
    return s;
  };

  CLI::App *ingest = sub("ingest", "Convert the datasets of a corpus manifest");
  ov.Add<std::string>(ingest, "--corpus-manifest", "Dataset manifest",
                      [](PipelineConfig &c, const std::string &v) { c.corpus_manifest = v; });
  ov.Flag(ingest, "--strict", "Fail on repaired tag sequences",
          [](PipelineConfig &c) { c.strict_ingest = true; });

  CLI::App *stats = sub("stats", "Corpus statistics");
  stats->add_option("--from", from, "Corpus stage: ingest, remap or prune");

  CLI::App *conflicts = sub("detect-conflicts", "Screen shared labels for conflicts");
  conflicts->add_option("--from", from, "Corpus stage: ingest, remap or prune");
  ov.Add<std::size_t>(conflicts, "--min-support", "Shared occurrences for a confident rate",
                      [](PipelineConfig &c, const std::size_t &v) { c.conflict.min_support = v; });
  ov.Add<std::size_t>(conflicts, "--top-n", "Cases listed per pair",
                      [](PipelineConfig &c, const std::size_t &v) { c.conflict.top_n = v; });
  ov.Add<std::vector<std::string>>(
      conflicts, "--synonyms", "Comma-separated label names treated as one (repeatable)",
      [](PipelineConfig &c, const std::vector<std::string> &v) {
        c.conflict.synonyms.clear();
        for (const std::string &group : v) {
          std::vector<std::string> names;
          std::stringstream ss(group);
          std::string name;
          while (std::getline(ss, name, ',')) names.push_back(Trim(name));
          c.conflict.synonyms.push_back(names);
        }
      });

  CLI::App *crossval = sub("cross-validate", "Train-on-A, test-on-B F1 matrix for one label");
  crossval->add_option("--from", from, "Corpus stage: ingest, remap or prune");
  ov.Add<std::string>(crossval, "--label", "Target label",
                      [](PipelineConfig &c, const std::string &v) { c.crossval_label = v; });
  ov.Add<std::vector<std::string>>(
      crossval, "--datasets", "Dataset ids (default: train datasets with the label)",
      [](PipelineConfig &c, const std::vector<std::string> &v) { c.crossval_datasets = v; });
  ov.Add<std::string>(crossval, "--tagger-command", "External tagger run through /bin/sh",
                      [](PipelineConfig &c, const std::string &v) { c.crossval_tagger = v; });
  ov.Flag(crossval, "--self-eval-on-train", "Score self-pairs without a test split on train data",
          [](PipelineConfig &c) { c.crossval_disjoint = false; });

  CLI::App *remap = sub("remap", "Apply the label mapping");
  ov.Add<std::string>(remap, "--mapping", "Mapping rules (JSON)",
                      [](PipelineConfig &c, const std::string &v) { c.mapping = v; });

  CLI::App *lint = sub("lint-taxonomy", "Check label names and export the taxonomy tree");
  ov.Add<std::string>(lint, "--mapping", "Mapping rules (JSON)",
                      [](PipelineConfig &c, const std::string &v) { c.mapping = v; });
  ov.Flag(lint, "--strict", "Fail on unwaived findings",
          [](PipelineConfig &c) { c.lint_strict = true; });
  ov.Add<std::vector<std::string>>(
      lint, "--waive", "Label exempt from lint findings (repeatable)",
      [](PipelineConfig &c, const std::vector<std::string> &v) { c.lint_waivers = v; });

  CLI::App *prune = sub("prune", "Select diverse samples per label pool");
  ov.Add<std::size_t>(prune, "--k", "Pool capacity",
                      [](PipelineConfig &c, const std::size_t &v) { c.prune.k = v; });
  ov.Add<double>(prune, "--b", "Similarity offset",
                 [](PipelineConfig &c, const double &v) { c.prune.b = v; });
  ov.Add<std::string>(prune, "--strategy",
                      "diversity, random_per_type, random_downsample or threshold_filter",
                      [](PipelineConfig &c, const std::string &v) {
                        c.prune.strategy = ParsePruneStrategy(v);
                      });
  ov.Add<double>(prune, "--tau", "Similarity threshold for threshold_filter",
                 [](PipelineConfig &c, const double &v) { c.prune.tau = v; });
  ov.Add<std::size_t>(prune, "--downsample-size", "Explicit random_downsample size",
                      [](PipelineConfig &c, const std::size_t &v) { c.prune.downsample_size = v; });

  CLI::App *instr = sub("gen-instructions", "Render instruction samples");
  ov.Add<std::string>(instr, "--template", "plain, guideline or fewshot",
                      [](PipelineConfig &c, const std::string &v) {
                        c.instruct_template = ParseTemplateKind(v);
                      });
  ov.Add<double>(instr, "--dropout", "Per-label dropout probability",
                 [](PipelineConfig &c, const double &v) { c.instruct.dropout_prob = v; });
  ov.Add<std::size_t>(instr, "--extra-min", "Fewest distractor labels",
                      [](PipelineConfig &c, const std::size_t &v) { c.instruct.min_extra = v; });
  ov.Add<std::size_t>(instr, "--extra-max", "Most distractor labels",
                      [](PipelineConfig &c, const std::size_t &v) { c.instruct.max_extra = v; });
  ov.Flag(instr, "--no-dynamic-labels", "List the whole label universe in sorted order",
          [](PipelineConfig &c) { c.instruct.dynamic_labels = false; });
  ov.Add<std::size_t>(instr, "--max-label-chars", "Label list budget in characters",
                      [](PipelineConfig &c, const std::size_t &v) {
                        c.instruct.max_label_chars = v;
                      });
  ov.Add<std::string>(instr, "--guidelines", "Label guidelines (JSON object)",
                      [](PipelineConfig &c, const std::string &v) { c.guidelines = v; });
  ov.Add<std::size_t>(instr, "--fewshot-n", "Exemplars per few-shot prompt",
                      [](PipelineConfig &c, const std::size_t &v) { c.fewshot_n = v; });

  CLI::App *evaluate = sub("evaluate", "Score predictions on the test datasets");
  ov.Add<std::vector<std::string>>(
      evaluate, "--predictions", "Predictions JSONL, one file per run (repeatable)",
      [](PipelineConfig &c, const std::vector<std::string> &v) { c.predictions = v; });

  sub("report", "Summarize the corpus and results");
  sub("run", "Run every stage in order");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError &e) {
    int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  Logger log(err, log_json, quiet);
  std::string command = app.get_subcommands().front()->get_name();
  try {
    PipelineConfig config;
    if (!manifest_path.empty()) config = LoadPipelineConfig(manifest_path);
    if (const char *env = std::getenv(kOutputDirEnv); env != nullptr && *env != '\0') {
      config.output_dir = env;
    }
    ov.Apply(config);
    config.prune.seed = config.seed;
    config.instruct.seed = config.seed;

    Context ctx;
    ctx.config = config;
    ctx.dir = config.output_dir;
    ctx.digest = config.Digest();
    ctx.log = &log;
    ctx.out = &out;
    fs::create_directories(ctx.dir);

    auto run = [&](const std::string &name) {
      if (name == "ingest") RunIngest(ctx);
      else if (name == "stats") RunStats(ctx, from);
      else if (name == "detect-conflicts") RunConflicts(ctx, from);
      else if (name == "cross-validate") RunCrossval(ctx, from);
      else if (name == "remap") RunRemap(ctx);
      else if (name == "lint-taxonomy") RunLint(ctx);
      else if (name == "prune") RunPrune(ctx);
      else if (name == "gen-instructions") RunInstructions(ctx);
      else if (name == "evaluate") RunEvaluate(ctx);
      else if (name == "report") RunReportStage(ctx);
    };
    if (command == "run") {
      for (const Stage &stage : kAllStages) {
        if (std::string_view(stage.command) == "cross-validate" && config.crossval_label.empty()) {
          log.Info(stage.command, "skipped: no target label configured");
          continue;
        }
        log.Info(stage.command, "running");
        run(stage.command);
      }
    } else {
      run(command);
    }
    return 0;
  } catch (const Error &e) {
    log.Log("error", command, e.what());
    return ExitCode(e.kind());
  } catch (const json::exception &e) {
    log.Log("error", command, e.what());
    return 2;
  } catch (const std::exception &e) {
    log.Log("error", command, e.what());
    return 2;
  }
}

int RunCli(int argc, char **argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return RunCli(args, std::cout, std::cerr);
}

}  // namespace nerunify
