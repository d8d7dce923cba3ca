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

#include "nerunify/corpus.h"

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <tuple>
#include <unordered_map>
#include <unordered_set>

#include "nerunify/common.h"
#include "nerunify/text.h"

namespace nerunify {

using nlohmann::json;
using nlohmann::ordered_json;

UniversalLabel UniversalLabel::Parse(std::string_view rendered) {
  std::size_t pos = 0;
  while (true) {
    std::size_t next = rendered.find(kSeparator, pos);
    std::size_t end = next == std::string_view::npos ? rendered.size() : next;
    if (end == pos) {
      throw DataError("label '" + std::string(rendered) +
                      "' has an empty segment");
    }
    if (next == std::string_view::npos) break;
    pos = next + kSeparator.size();
  }
  return UniversalLabel(std::string(rendered));
}

UniversalLabel UniversalLabel::FromSegments(
    const std::vector<std::string> &segments) {
  if (segments.empty()) throw DataError("label has no segments");
  std::string rendered;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    if (i > 0) rendered += kSeparator;
    rendered += segments[i];
  }
  return Parse(rendered);
}

std::vector<std::string> UniversalLabel::segments() const {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    std::size_t next = rendered_.find(kSeparator, pos);
    if (next == std::string::npos) {
      out.push_back(rendered_.substr(pos));
      return out;
    }
    out.push_back(rendered_.substr(pos, next - pos));
    pos = next + kSeparator.size();
  }
}

std::size_t UniversalLabel::depth() const { return segments().size(); }

std::optional<UniversalLabel> UniversalLabel::parent() const {
  std::size_t cut = rendered_.rfind(kSeparator);
  if (cut == std::string::npos) return std::nullopt;
  return UniversalLabel(rendered_.substr(0, cut));
}

bool MentionLess(const EntityMention &a, const EntityMention &b) {
  return std::tie(a.start, a.end, a.label) < std::tie(b.start, b.end, b.label);
}

void FinalizeMentions(Sample &sample) {
  std::sort(sample.mentions.begin(), sample.mentions.end(), MentionLess);
  std::u32string text = DecodeUtf8(sample.text);
  for (EntityMention &m : sample.mentions) {
    m.surface = SliceCodepoints(text, m.start, m.end);
  }
}

std::string_view SplitName(Split split) {
  return split == Split::kTrain ? "train" : "test";
}

Split ParseSplit(std::string_view name) {
  if (name == "train") return Split::kTrain;
  if (name == "test") return Split::kTest;
  throw DataError("unknown split '" + std::string(name) + "'");
}

void Dataset::RebuildLabelSet() {
  info.label_set.clear();
  for (const Sample &s : samples) {
    for (const EntityMention &m : s.mentions) info.label_set.insert(m.label.str());
  }
}

const Dataset *Corpus::Find(std::string_view dataset_id) const {
  for (const Dataset &d : datasets) {
    if (d.info.id == dataset_id) return &d;
  }
  return nullptr;
}

std::size_t Corpus::sample_count() const {
  std::size_t n = 0;
  for (const Dataset &d : datasets) n += d.samples.size();
  return n;
}

std::vector<Violation> ValidateSample(const Sample &sample, bool nested) {
  std::vector<Violation> out;
  std::u32string text;
  try {
    text = DecodeUtf8(sample.text);
  } catch (const DataError &e) {
    out.push_back({std::string(rules::kInvalidUtf8), std::nullopt, e.what()});
    return out;
  }
  const auto &ms = sample.mentions;
  for (std::size_t i = 0; i < ms.size(); ++i) {
    const EntityMention &m = ms[i];
    std::string where = "(" + std::to_string(m.start) + "," +
                        std::to_string(m.end) + ")";
    if (m.start == m.end) {
      out.push_back({std::string(rules::kEmptySpan), i, where});
      continue;
    }
    if (m.start > m.end) {
      out.push_back({std::string(rules::kInvertedSpan), i, where});
      continue;
    }
    if (m.end > text.size()) {
      out.push_back({std::string(rules::kOutOfBounds), i,
                     where + " exceeds text length " +
                         std::to_string(text.size())});
      continue;
    }
    std::string slice = SliceCodepoints(text, m.start, m.end);
    if (slice != m.surface) {
      out.push_back({std::string(rules::kSurfaceMismatch), i,
                     "'" + m.surface + "' vs text '" + slice + "'"});
    }
    if (i > 0 && MentionLess(m, ms[i - 1])) {
      out.push_back({std::string(rules::kUnsorted), i, where});
    }
  }
  // Overlap rules. Degenerate spans were already reported.
  for (std::size_t i = 0; i < ms.size(); ++i) {
    if (ms[i].start >= ms[i].end) continue;
    for (std::size_t j = i + 1; j < ms.size(); ++j) {
      if (ms[j].start >= ms[j].end) continue;
      const EntityMention &a = ms[i];
      const EntityMention &b = ms[j];
      bool overlap = a.start < b.end && b.start < a.end;
      if (!overlap) continue;
      bool contains = (a.start <= b.start && b.end <= a.end) ||
                      (b.start <= a.start && a.end <= b.end);
      std::string detail = "mentions " + std::to_string(i) + " and " +
                           std::to_string(j);
      if (!contains) {
        out.push_back({std::string(rules::kPartialOverlap), j, detail});
      } else if (!nested) {
        out.push_back({std::string(rules::kNestedInFlat), j, detail});
      }
    }
  }
  return out;
}

CorpusStats ComputeStats(const Corpus &corpus) {
  CorpusStats stats;
  using GroupKey = std::pair<Split, std::string>;
  std::map<GroupKey, GroupStats> groups;
  std::map<GroupKey, std::set<std::string>> group_labels;
  for (const Dataset &d : corpus.datasets) {
    DatasetStats ds;
    ds.id = d.info.id;
    ds.language = d.info.language;
    ds.split = d.info.split;
    std::set<std::string> labels;
    for (const Sample &s : d.samples) {
      ds.mentions += s.mentions.size();
      for (const EntityMention &m : s.mentions) labels.insert(m.label.str());
    }
    ds.samples = d.samples.size();
    ds.types = labels.size();

    GroupKey key{d.info.split, d.info.language};
    GroupStats &g = groups[key];
    g.split = d.info.split;
    g.language = d.info.language;
    g.datasets += 1;
    g.samples += ds.samples;
    g.mentions += ds.mentions;
    group_labels[key].insert(labels.begin(), labels.end());

    stats.datasets += 1;
    stats.dataset_types += ds.types;
    stats.samples += ds.samples;
    stats.mentions += ds.mentions;
    stats.per_dataset.push_back(std::move(ds));
  }
  for (auto &[key, g] : groups) {
    g.types = group_labels[key].size();
    stats.types += g.types;
    stats.groups.push_back(g);
  }
  std::sort(stats.per_dataset.begin(), stats.per_dataset.end(),
            [](const DatasetStats &a, const DatasetStats &b) {
              return a.id < b.id;
            });
  return stats;
}

ordered_json StatsToJson(const CorpusStats &stats) {
  ordered_json out;
  out["datasets"] = stats.datasets;
  out["types"] = stats.types;
  out["dataset_types"] = stats.dataset_types;
  out["samples"] = stats.samples;
  out["mentions"] = stats.mentions;
  ordered_json groups = ordered_json::array();
  for (const GroupStats &g : stats.groups) {
    groups.push_back({{"split", SplitName(g.split)},
                      {"language", g.language},
                      {"datasets", g.datasets},
                      {"types", g.types},
                      {"samples", g.samples},
                      {"mentions", g.mentions}});
  }
  out["groups"] = std::move(groups);
  ordered_json per = ordered_json::array();
  for (const DatasetStats &d : stats.per_dataset) {
    per.push_back({{"id", d.id},
                   {"language", d.language},
                   {"split", SplitName(d.split)},
                   {"types", d.types},
                   {"samples", d.samples},
                   {"mentions", d.mentions}});
  }
  out["per_dataset"] = std::move(per);
  return out;
}

ordered_json SampleToJson(const Sample &sample) {
  ordered_json mentions = ordered_json::array();
  for (const EntityMention &m : sample.mentions) {
    mentions.push_back(
        {{"start", m.start}, {"end", m.end}, {"label", m.label.str()}});
  }
  ordered_json out;
  out["id"] = sample.id;
  out["dataset_id"] = sample.dataset_id;
  out["language"] = sample.language;
  out["text"] = sample.text;
  out["mentions"] = std::move(mentions);
  return out;
}

void WriteSamplesJsonl(const Corpus &corpus, std::ostream &out) {
  for (const Dataset &d : corpus.datasets) {
    for (const Sample &s : d.samples) {
      out << SampleToJson(s).dump(-1, ' ', false) << '\n';
    }
  }
}

ordered_json DatasetsToJson(const Corpus &corpus) {
  ordered_json list = ordered_json::array();
  for (const Dataset &d : corpus.datasets) {
    const DatasetInfo &i = d.info;
    list.push_back({{"id", i.id},
                    {"name", i.name},
                    {"language", i.language},
                    {"domain", i.domain},
                    {"split", SplitName(i.split)},
                    {"nested", i.nested},
                    {"label_set", i.label_set}});
  }
  return ordered_json{{"datasets", std::move(list)}};
}

namespace {

template <typename T>
T Field(const json &obj, const char *key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw ParseError(line, std::string("missing field '") + key + "'");
  }
  try {
    return it->get<T>();
  } catch (const json::exception &) {
    throw ParseError(line, std::string("field '") + key + "' has wrong type");
  }
}

DatasetInfo DatasetInfoFromJson(const json &j) {
  DatasetInfo info;
  try {
    info.id = j.at("id").get<std::string>();
    info.name = j.value("name", info.id);
    info.language = j.at("language").get<std::string>();
    info.domain = j.value("domain", "");
    info.split = ParseSplit(j.value("split", "train"));
    info.nested = j.value("nested", false);
    if (j.contains("label_set")) {
      info.label_set = j.at("label_set").get<std::set<std::string>>();
    }
  } catch (const json::exception &e) {
    throw DataError(std::string("bad dataset record: ") + e.what());
  }
  return info;
}

}  // namespace

Corpus ReadCorpus(const json &datasets_doc, std::istream &samples) {
  Corpus corpus;
  std::unordered_map<std::string, std::size_t> index;
  if (!datasets_doc.contains("datasets") ||
      !datasets_doc["datasets"].is_array()) {
    throw DataError("dataset document lacks a 'datasets' array");
  }
  for (const json &j : datasets_doc["datasets"]) {
    Dataset d;
    d.info = DatasetInfoFromJson(j);
    if (!index.emplace(d.info.id, corpus.datasets.size()).second) {
      throw DataError("duplicate dataset id '" + d.info.id + "'");
    }
    corpus.datasets.push_back(std::move(d));
  }
  std::unordered_set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(samples, line)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      throw ParseError(line_no, "malformed JSON");
    }
    Sample s;
    s.id = Field<std::string>(j, "id", line_no);
    s.dataset_id = Field<std::string>(j, "dataset_id", line_no);
    s.language = Field<std::string>(j, "language", line_no);
    s.text = Field<std::string>(j, "text", line_no);
    for (const json &m : Field<json>(j, "mentions", line_no)) {
      EntityMention em{UniversalLabel::Parse(Field<std::string>(m, "label", line_no)),
                       Field<std::size_t>(m, "start", line_no),
                       Field<std::size_t>(m, "end", line_no), ""};
      s.mentions.push_back(std::move(em));
    }
    FinalizeMentions(s);
    auto it = index.find(s.dataset_id);
    if (it == index.end()) {
      throw ParseError(line_no, "unknown dataset '" + s.dataset_id + "'");
    }
    if (!ids.insert(s.id).second) {
      throw ParseError(line_no, "duplicate sample id '" + s.id + "'");
    }
    corpus.datasets[it->second].samples.push_back(std::move(s));
  }
  return corpus;
}

void SaveCorpus(const Corpus &corpus, const std::string &stem) {
  std::ofstream samples(stem + ".corpus.jsonl", std::ios::binary);
  if (!samples) throw DataError("cannot write " + stem + ".corpus.jsonl");
  WriteSamplesJsonl(corpus, samples);
  std::ofstream meta(stem + ".datasets.json", std::ios::binary);
  if (!meta) throw DataError("cannot write " + stem + ".datasets.json");
  meta << DatasetsToJson(corpus).dump(2, ' ', false) << '\n';
}

Corpus LoadCorpus(const std::string &stem) {
  std::ifstream meta(stem + ".datasets.json", std::ios::binary);
  if (!meta) throw DataError("cannot read " + stem + ".datasets.json");
  json doc = json::parse(meta, nullptr, false);
  if (doc.is_discarded()) throw DataError("malformed " + stem + ".datasets.json");
  std::ifstream samples(stem + ".corpus.jsonl", std::ios::binary);
  if (!samples) throw DataError("cannot read " + stem + ".corpus.jsonl");
  return ReadCorpus(doc, samples);
}

}  // namespace nerunify
