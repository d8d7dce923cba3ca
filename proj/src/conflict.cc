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

#include "nerunify/conflict.h"

#include <fcntl.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <tuple>
#include <unordered_map>

#include <fmt/format.h>

#include "nerunify/common.h"
#include "nerunify/parallel.h"
#include "nerunify/text.h"

extern char **environ;

namespace nerunify {

using nlohmann::json;
using nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string_view ConflictTypeName(ConflictType type) {
  switch (type) {
    case ConflictType::kWrongCategory:
      return "wrong_category";
    case ConflictType::kNotExtracted:
      return "not_extracted";
    case ConflictType::kPartiallyExtracted:
      return "partially_extracted";
  }
  return "unknown";
}

std::string NormalizeLabelName(std::string_view label) {
  return CaseFold(NormalizeNfc(Trim(label)));
}

namespace {

// Canonical key per label name, merging synonym groups.
class LabelKeys {
 public:
  explicit LabelKeys(const ScreenOptions &options) {
    for (const auto &group : options.synonyms) {
      if (group.empty()) continue;
      std::string canon = NormalizeLabelName(group.front());
      for (const std::string &name : group) alias_[NormalizeLabelName(name)] = canon;
    }
  }

  std::string Key(std::string_view label) const {
    std::string n = NormalizeLabelName(label);
    auto it = alias_.find(n);
    return it == alias_.end() ? n : it->second;
  }

 private:
  std::map<std::string, std::string> alias_;
};

}  // namespace

std::vector<LabelPair> FindSharedLabelPairs(const Corpus &corpus,
                                            const ScreenOptions &options) {
  LabelKeys keys(options);
  std::vector<LabelPair> pairs;
  for (const Dataset &a : corpus.datasets) {
    for (const Dataset &b : corpus.datasets) {
      if (a.info.id == b.info.id || a.info.name == b.info.name) continue;
      if (a.info.language != b.info.language) continue;
      for (const std::string &la : a.info.label_set) {
        std::string ka = keys.Key(la);
        for (const std::string &lb : b.info.label_set) {
          if (keys.Key(lb) == ka) pairs.push_back({a.info.id, la, b.info.id, lb});
        }
      }
    }
  }
  return pairs;
}

namespace {

struct CaseKey {
  std::string surface;
  ConflictType type;
  std::string observed;

  friend bool operator<(const CaseKey &x, const CaseKey &y) {
    return std::tie(x.surface, x.type, x.observed) <
           std::tie(y.surface, y.type, y.observed);
  }
};

struct PairState {
  PairReport report;
  std::map<CaseKey, ConflictCase> cases;
};

enum class Outcome { kConsistent, kExcluded, kConflict };

// Classifies one occurrence [start, end) of a source surface in a B sample.
Outcome Classify(const Sample &b, std::size_t start, std::size_t end,
                 const std::string &label_b, ConflictType *type,
                 std::string *observed) {
  std::vector<std::string> exact_labels;
  for (const EntityMention &m : b.mentions) {
    if (m.start == start && m.end == end) exact_labels.push_back(m.label.str());
  }
  if (!exact_labels.empty()) {
    if (std::find(exact_labels.begin(), exact_labels.end(), label_b) !=
        exact_labels.end()) {
      return Outcome::kConsistent;
    }
    *type = ConflictType::kWrongCategory;
    *observed = exact_labels.front();
    for (std::size_t i = 1; i < exact_labels.size(); ++i) *observed += "|" + exact_labels[i];
    return Outcome::kConflict;
  }
  for (const EntityMention &m : b.mentions) {
    if (m.start <= start && end <= m.end) return Outcome::kExcluded;
  }
  for (const EntityMention &m : b.mentions) {
    if (m.start < end && start < m.end) {
      *type = ConflictType::kPartiallyExtracted;
      *observed = m.surface + " (" + m.label.str() + ")";
      return Outcome::kConflict;
    }
  }
  *type = ConflictType::kNotExtracted;
  observed->clear();
  return Outcome::kConflict;
}

}  // namespace

ConflictReport ScreenConflicts(const Corpus &corpus, std::span<const LabelPair> pairs,
                               const ScreenOptions &options) {
  for (const LabelPair &p : pairs) {
    const Dataset *a = corpus.Find(p.dataset_a);
    const Dataset *b = corpus.Find(p.dataset_b);
    if (a == nullptr || b == nullptr) {
      throw ConfigError("label pair references unknown dataset '" +
                        (a == nullptr ? p.dataset_a : p.dataset_b) + "'");
    }
    if (a->info.label_set.count(p.label_a) == 0) {
      throw ConfigError("dataset '" + p.dataset_a + "' has no label '" + p.label_a + "'");
    }
    if (b->info.label_set.count(p.label_b) == 0) {
      throw ConfigError("dataset '" + p.dataset_b + "' has no label '" + p.label_b + "'");
    }
  }

  std::vector<PairState> states(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) states[i].report.pair = pairs[i];

  // Group pairs by target dataset so each B is scanned once.
  std::map<std::string, std::vector<std::size_t>> by_target;
  for (std::size_t i = 0; i < pairs.size(); ++i) by_target[pairs[i].dataset_b].push_back(i);

  for (const auto &[b_id, pair_indices] : by_target) {
    const Dataset &b = *corpus.Find(b_id);
    SurfaceMatcher matcher;
    std::vector<std::vector<std::size_t>> pairs_by_surface;
    std::vector<std::string> surface_text;
    for (std::size_t pi : pair_indices) {
      const LabelPair &p = pairs[pi];
      std::set<std::string> surfaces;
      for (const Sample &s : corpus.Find(p.dataset_a)->samples) {
        for (const EntityMention &m : s.mentions) {
          if (m.label.str() == p.label_a) surfaces.insert(NormalizeNfc(m.surface));
        }
      }
      for (const std::string &surface : surfaces) {
        std::uint32_t id = matcher.Add(DecodeUtf8(surface));
        if (id >= pairs_by_surface.size()) {
          pairs_by_surface.resize(id + 1);
          surface_text.resize(id + 1);
        }
        surface_text[id] = surface;
        pairs_by_surface[id].push_back(pi);
      }
    }
    if (matcher.size() == 0) continue;

    for (const Sample &s : b.samples) {
      NfcText nfc(DecodeUtf8(s.text));
      for (const SurfaceMatcher::Match &match : matcher.FindAll(nfc.text())) {
        std::size_t start = nfc.OriginalOffset(match.start);
        std::size_t end = nfc.OriginalOffset(match.end);
        if (start == NfcText::kNoOffset || end == NfcText::kNoOffset) continue;
        for (std::size_t pi : pairs_by_surface[match.id]) {
          PairState &st = states[pi];
          ConflictType type{};
          std::string observed;
          Outcome outcome = Classify(s, start, end, pairs[pi].label_b, &type, &observed);
          if (outcome == Outcome::kExcluded) {
            ++st.report.excluded;
            continue;
          }
          ++st.report.shared;
          if (outcome == Outcome::kConsistent) {
            ++st.report.consistent;
            continue;
          }
          ++st.report.by_type[static_cast<std::size_t>(type)];
          CaseKey key{surface_text[match.id], type, observed};
          ConflictCase &c = st.cases[key];
          if (c.count == 0) {
            c.surface = key.surface;
            c.label_name = pairs[pi].label_a;
            c.dataset_a = pairs[pi].dataset_a;
            c.dataset_b = pairs[pi].dataset_b;
            c.type = type;
            c.observed = observed;
          }
          ++c.count;
          if (c.sample_ids.size() < 3 &&
              (c.sample_ids.empty() || c.sample_ids.back() != s.id)) {
            c.sample_ids.push_back(s.id);
          }
        }
      }
    }
  }

  ConflictReport report;
  for (PairState &st : states) {
    st.report.low_confidence = st.report.shared < options.min_support;
    std::vector<ConflictCase> cases;
    for (auto &[key, c] : st.cases) cases.push_back(std::move(c));
    std::stable_sort(cases.begin(), cases.end(),
                     [](const ConflictCase &x, const ConflictCase &y) {
                       return x.count > y.count;
                     });
    if (cases.size() > options.top_n) cases.resize(options.top_n);
    st.report.top_cases = std::move(cases);
    report.pairs.push_back(std::move(st.report));
  }
  return report;
}

ordered_json ConflictReportToJson(const ConflictReport &report) {
  ordered_json pairs = ordered_json::array();
  for (const PairReport &p : report.pairs) {
    ordered_json cases = ordered_json::array();
    for (const ConflictCase &c : p.top_cases) {
      cases.push_back({{"surface", c.surface},
                       {"label_name", c.label_name},
                       {"dataset_a", c.dataset_a},
                       {"dataset_b", c.dataset_b},
                       {"error_type", ConflictTypeName(c.type)},
                       {"observed", c.observed},
                       {"count", c.count},
                       {"sample_ids", c.sample_ids}});
    }
    pairs.push_back({{"dataset_a", p.pair.dataset_a},
                     {"label_a", p.pair.label_a},
                     {"dataset_b", p.pair.dataset_b},
                     {"label_b", p.pair.label_b},
                     {"shared", p.shared},
                     {"consistent", p.consistent},
                     {"excluded", p.excluded},
                     {"wrong_category", p.by_type[0]},
                     {"not_extracted", p.by_type[1]},
                     {"partially_extracted", p.by_type[2]},
                     {"conflict_rate", p.conflict_rate()},
                     {"low_confidence", p.low_confidence},
                     {"cases", std::move(cases)}});
  }
  return ordered_json{{"pairs", std::move(pairs)}};
}

std::string ConflictReportToTable(const ConflictReport &report) {
  std::string out = fmt::format("{:<18} {:<20} {:<18} {:<20} {:>6} {:>6} {:>6} {:>6} {:>7}\n",
                                "dataset_a", "label_a", "dataset_b", "label_b", "shared",
                                "wrong", "missed", "partial", "rate");
  for (const PairReport &p : report.pairs) {
    out += fmt::format("{:<18} {:<20} {:<18} {:<20} {:>6} {:>6} {:>6} {:>6} {:>6.1f}%{}\n",
                       p.pair.dataset_a, p.pair.label_a, p.pair.dataset_b, p.pair.label_b,
                       p.shared, p.by_type[0], p.by_type[1], p.by_type[2],
                       100.0 * p.conflict_rate(), p.low_confidence ? " (low support)" : "");
    for (const ConflictCase &c : p.top_cases) {
      out += fmt::format("    {:<20} {:<20} x{:<4} {}{}\n", c.surface, ConflictTypeName(c.type),
                         c.count, c.observed.empty() ? "" : "-> " + c.observed,
                         c.sample_ids.empty() ? "" : "  e.g. " + c.sample_ids.front());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Memorization tagger.

void MemorizationModel::Insert(const std::string &surface, const std::string &label) {
  std::uint32_t id = matcher_.Add(DecodeUtf8(surface));
  if (id >= labels_.size()) {
    labels_.resize(id + 1);
    surfaces_.resize(id + 1);
  }
  surfaces_[id] = surface;
  labels_[id] = label;
}

MemorizationModel MemorizationModel::Train(const Dataset &dataset) {
  std::map<std::string, std::map<std::string, std::size_t>> votes;
  for (const Sample &s : dataset.samples) {
    for (const EntityMention &m : s.mentions) {
      ++votes[NormalizeNfc(m.surface)][m.label.str()];
    }
  }
  MemorizationModel model;
  for (const auto &[surface, counts] : votes) {
    // std::map iterates labels in order, so the first maximum wins ties.
    const std::string *best = nullptr;
    std::size_t best_count = 0;
    for (const auto &[label, count] : counts) {
      if (count > best_count) {
        best = &label;
        best_count = count;
      }
    }
    model.Insert(surface, *best);
  }
  return model;
}

std::optional<std::string> MemorizationModel::LabelFor(std::string_view surface) const {
  auto id = matcher_.Find(DecodeUtf8(NormalizeNfc(surface)));
  if (!id) return std::nullopt;
  return labels_[*id];
}

std::vector<EntityMention> MemorizationModel::Tag(
    std::string_view text, const std::set<std::string> &allowed) const {
  std::u32string original = DecodeUtf8(text);
  NfcText nfc(original);
  std::vector<EntityMention> out;
  for (const SurfaceMatcher::Match &m : matcher_.FindLongest(nfc.text())) {
    const std::string &label = labels_[m.id];
    if (!allowed.empty() && allowed.count(label) == 0) continue;
    std::size_t start = nfc.OriginalOffset(m.start);
    std::size_t end = nfc.OriginalOffset(m.end);
    if (start == NfcText::kNoOffset || end == NfcText::kNoOffset) continue;
    out.push_back({UniversalLabel::Parse(label), start, end,
                   SliceCodepoints(original, start, end)});
  }
  return out;
}

json MemorizationModel::ToJson() const {
  json entries = json::object();
  for (std::size_t i = 0; i < labels_.size(); ++i) entries[surfaces_[i]] = labels_[i];
  return entries;
}

MemorizationModel MemorizationModel::FromJson(const json &doc) {
  if (!doc.is_object()) throw DataError("memorization model must be an object");
  MemorizationModel model;
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    model.Insert(it.key(), it.value().get<std::string>());
  }
  return model;
}

std::unique_ptr<TaggerModel> MemorizationTagger::Train(const Dataset &dataset) {
  return std::make_unique<MemorizationModel>(MemorizationModel::Train(dataset));
}

std::vector<std::vector<EntityMention>> MemorizationTagger::Predict(
    const TaggerModel &model, std::span<const Sample> samples,
    const std::set<std::string> &allowed) {
  const auto &m = dynamic_cast<const MemorizationModel &>(model);
  std::vector<std::vector<EntityMention>> out;
  out.reserve(samples.size());
  for (const Sample &s : samples) out.push_back(m.Tag(s.text, allowed));
  return out;
}

// ---------------------------------------------------------------------------
// Subprocess tagger.

namespace {

class SubprocessModel : public TaggerModel {
 public:
  explicit SubprocessModel(json handle) : handle(std::move(handle)) {}
  json handle;
};

class TempDir {
 public:
  TempDir() {
    static std::atomic<unsigned> counter{0};
    path_ = fs::temp_directory_path() /
            fmt::format("nerunify-tagger-{}-{}", ::getpid(), counter.fetch_add(1));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir &) = delete;
  TempDir &operator=(const TempDir &) = delete;

  fs::path operator/(const std::string &name) const { return path_ / name; }

 private:
  fs::path path_;
};

// Runs `command` with stdin/stdout redirected to files; returns its output.
std::string RunCommand(const std::string &command, const std::string &input) {
  TempDir dir;
  const std::string in_path = (dir / "request.jsonl").string();
  const std::string out_path = (dir / "response.jsonl").string();
  {
    std::ofstream f(in_path, std::ios::binary);
    f << input;
  }
  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_addopen(&actions, STDIN_FILENO, in_path.c_str(), O_RDONLY, 0);
  posix_spawn_file_actions_addopen(&actions, STDOUT_FILENO, out_path.c_str(),
                                   O_WRONLY | O_CREAT | O_TRUNC, 0644);
  std::string sh = "/bin/sh", dash_c = "-c", cmd = command;
  char *argv[] = {sh.data(), dash_c.data(), cmd.data(), nullptr};
  pid_t pid;
  int rc = posix_spawn(&pid, "/bin/sh", &actions, nullptr, argv, environ);
  posix_spawn_file_actions_destroy(&actions);
  if (rc != 0) throw DataError("cannot start tagger command '" + command + "'");
  int status = 0;
  waitpid(pid, &status, 0);
  if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
    throw DataError("tagger command '" + command + "' failed with status " +
                    std::to_string(WIFEXITED(status) ? WEXITSTATUS(status) : -1));
  }
  std::ifstream f(out_path, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::string SamplesPayload(std::span<const Sample> samples, bool strip_mentions) {
  std::string payload;
  for (const Sample &s : samples) {
    ordered_json j = SampleToJson(s);
    if (strip_mentions) j["mentions"] = ordered_json::array();
    payload += j.dump(-1, ' ', false) + "\n";
  }
  return payload;
}

}  // namespace

std::unique_ptr<TaggerModel> SubprocessTagger::Train(const Dataset &dataset) {
  std::string request = json{{"cmd", "train"}}.dump() + "\n" +
                        SamplesPayload(dataset.samples, false);
  std::istringstream response(RunCommand(command_, request));
  std::string line;
  while (std::getline(response, line)) {
    if (Trim(line).empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("model")) {
      throw DataError("tagger train response lacks a model handle");
    }
    return std::make_unique<SubprocessModel>(j["model"]);
  }
  throw DataError("tagger train response is empty");
}

std::vector<std::vector<EntityMention>> SubprocessTagger::Predict(
    const TaggerModel &model, std::span<const Sample> samples,
    const std::set<std::string> &allowed) {
  const auto &m = dynamic_cast<const SubprocessModel &>(model);
  json header{{"cmd", "predict"}, {"model", m.handle}, {"labels", allowed}};
  std::string request = header.dump() + "\n" + SamplesPayload(samples, true);
  std::istringstream response(RunCommand(command_, request));

  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < samples.size(); ++i) index[samples[i].id] = i;
  std::vector<std::vector<EntityMention>> out(samples.size());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(response, line)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("id")) {
      throw ParseError(line_no, "malformed tagger prediction");
    }
    auto it = index.find(j["id"].get<std::string>());
    if (it == index.end()) throw ParseError(line_no, "prediction for unknown sample");
    Sample predicted = samples[it->second];
    predicted.mentions.clear();
    for (const json &mj : j.value("mentions", json::array())) {
      predicted.mentions.push_back({UniversalLabel::Parse(mj.at("label").get<std::string>()),
                                    mj.at("start").get<std::size_t>(),
                                    mj.at("end").get<std::size_t>(), ""});
    }
    FinalizeMentions(predicted);
    auto violations = ValidateSample(predicted, true);
    if (!violations.empty()) {
      throw DataError("tagger returned invalid mentions for '" + predicted.id +
                      "': " + violations.front().rule);
    }
    out[it->second] = std::move(predicted.mentions);
  }
  return out;
}

int ServeMemorizationProtocol(std::istream &in, std::ostream &out) {
  std::string line;
  if (!std::getline(in, line)) return 2;
  json header = json::parse(line, nullptr, false);
  if (header.is_discarded() || !header.contains("cmd")) return 2;
  json datasets{{"datasets", json::array({{{"id", "request"}, {"language", "und"}}})}};
  std::stringstream rest;
  std::string sample_line;
  while (std::getline(in, sample_line)) {
    json j = json::parse(sample_line, nullptr, false);
    if (j.is_discarded()) continue;
    j["dataset_id"] = "request";
    rest << j.dump() << "\n";
  }
  Corpus corpus = ReadCorpus(datasets, rest);
  const Dataset &dataset = corpus.datasets.front();
  const std::string cmd = header["cmd"].get<std::string>();
  if (cmd == "train") {
    out << json{{"model", MemorizationModel::Train(dataset).ToJson()}}.dump() << "\n";
    return 0;
  }
  if (cmd == "predict") {
    MemorizationModel model = MemorizationModel::FromJson(header.at("model"));
    std::set<std::string> allowed = header.value("labels", std::set<std::string>{});
    for (Sample s : dataset.samples) {
      s.mentions = model.Tag(s.text, allowed);
      out << SampleToJson(s).dump(-1, ' ', false) << "\n";
    }
    return 0;
  }
  return 2;
}

// ---------------------------------------------------------------------------
// Cross-validation.

namespace {

// Test split with the same dataset name, if any.
const Dataset *HeldOutSplit(const Corpus &corpus, const Dataset &d) {
  for (const Dataset &other : corpus.datasets) {
    if (other.info.name == d.info.name && other.info.split == Split::kTest &&
        other.info.id != d.info.id) {
      return &other;
    }
  }
  return nullptr;
}

std::vector<EntityMention> OnlyLabel(const std::vector<EntityMention> &mentions,
                                     const std::string &label) {
  std::vector<EntityMention> out;
  for (const EntityMention &m : mentions) {
    if (m.label.str() == label) out.push_back(m);
  }
  return out;
}

}  // namespace

F1Matrix CrossValidate(const Corpus &corpus, Tagger &tagger,
                       std::span<const std::string> dataset_ids,
                       const std::string &target_label,
                       const CrossValidateOptions &options) {
  std::vector<const Dataset *> datasets;
  for (const std::string &id : dataset_ids) {
    const Dataset *d = corpus.Find(id);
    if (d == nullptr) throw ConfigError("unknown dataset '" + id + "'");
    if (d->info.label_set.count(target_label) == 0) {
      throw ConfigError("dataset '" + id + "' has no label '" + target_label + "'");
    }
    datasets.push_back(d);
  }
  F1Matrix matrix;
  matrix.target_label = target_label;
  matrix.train_ids.assign(dataset_ids.begin(), dataset_ids.end());
  matrix.test_ids = matrix.train_ids;
  const std::size_t n = datasets.size();
  matrix.cells.assign(n, std::vector<std::optional<F1Cell>>(n));

  std::vector<std::unique_ptr<TaggerModel>> models(n);
  ParallelFor(n, options.jobs, [&](std::size_t i) {
    try {
      models[i] = tagger.Train(*datasets[i]);
    } catch (const std::exception &e) {
      throw DataError("training on '" + datasets[i]->info.id + "' failed: " + e.what());
    }
  });

  ParallelFor(n * n, options.jobs, [&](std::size_t cell) {
    std::size_t row = cell / n, col = cell % n;
    const Dataset *test = HeldOutSplit(corpus, *datasets[col]);
    if (row == col && options.disjoint_self_eval && test == nullptr) return;
    if (test == nullptr || (row == col && !options.disjoint_self_eval)) {
      test = datasets[col];
    }
    std::vector<std::vector<EntityMention>> predicted;
    try {
      predicted = tagger.Predict(*models[row], test->samples, {});
    } catch (const std::exception &e) {
      throw DataError("pair train='" + datasets[row]->info.id + "' test='" +
                      test->info.id + "': " + e.what());
    }
    MatchCounts counts;
    for (std::size_t s = 0; s < test->samples.size(); ++s) {
      auto gold = OnlyLabel(test->samples[s].mentions, target_label);
      auto pred = OnlyLabel(predicted[s], target_label);
      counts += MicroF1(gold, pred).counts;
    }
    matrix.cells[row][col] = F1Cell{counts, counts.precision(), counts.recall(), counts.f1()};
  });
  return matrix;
}

std::string F1MatrixToCsv(const F1Matrix &matrix) {
  std::string out = "train\\test";
  for (const std::string &id : matrix.test_ids) out += "," + id;
  out += "\n";
  for (std::size_t r = 0; r < matrix.train_ids.size(); ++r) {
    out += matrix.train_ids[r];
    for (const auto &cell : matrix.cells[r]) {
      out += cell ? fmt::format(",{:.2f}", 100.0 * cell->f1) : std::string(",");
    }
    out += "\n";
  }
  return out;
}

ordered_json F1MatrixToJson(const F1Matrix &matrix) {
  ordered_json cells = ordered_json::array();
  for (std::size_t r = 0; r < matrix.train_ids.size(); ++r) {
    for (std::size_t c = 0; c < matrix.test_ids.size(); ++c) {
      const auto &cell = matrix.cells[r][c];
      if (!cell) continue;
      cells.push_back({{"train", matrix.train_ids[r]},
                       {"test", matrix.test_ids[c]},
                       {"tp", cell->counts.tp},
                       {"fp", cell->counts.fp},
                       {"fn", cell->counts.fn},
                       {"precision", cell->precision},
                       {"recall", cell->recall},
                       {"f1", cell->f1}});
    }
  }
  return ordered_json{{"target_label", matrix.target_label},
                      {"train_ids", matrix.train_ids},
                      {"test_ids", matrix.test_ids},
                      {"cells", std::move(cells)}};
}

}  // namespace nerunify
