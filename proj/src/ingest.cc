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

#include "nerunify/ingest.h"

#include <filesystem>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>
#include <unordered_set>

#include "nerunify/parallel.h"
#include "nerunify/text.h"

namespace nerunify {

using nlohmann::json;
namespace fs = std::filesystem;

TagScheme ParseTagScheme(std::string_view name) {
  if (name == "bio") return TagScheme::kBio;
  if (name == "bioes") return TagScheme::kBioes;
  throw ConfigError("unknown tag scheme '" + std::string(name) + "'");
}

RawLabelTable::RawLabelTable(std::map<std::string, std::string> entries)
    : entries_(std::move(entries)) {}

RawLabelTable RawLabelTable::FromJson(const json &doc) {
  if (!doc.is_object()) throw DataError("label table must be a JSON object");
  std::map<std::string, std::string> entries;
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    if (!it.value().is_string()) {
      throw DataError("label table entry '" + it.key() + "' is not a string");
    }
    entries[it.key()] = it.value().get<std::string>();
  }
  return RawLabelTable(std::move(entries));
}

RawLabelTable RawLabelTable::Load(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read label table " + path);
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw DataError("malformed label table " + path);
  return FromJson(doc);
}

std::optional<std::string> RawLabelTable::Translate(std::string_view raw) const {
  auto it = entries_.find(std::string(raw));
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

namespace {

struct TagParts {
  char prefix = 'O';
  std::string type;
};

TagParts SplitTag(const std::string &tag, TagScheme scheme, std::size_t line) {
  if (tag == "O") return {};
  if (tag.size() < 3 || tag[1] != '-') {
    throw ParseError(line, "unknown tag '" + tag + "'");
  }
  char p = tag[0];
  bool ok = p == 'B' || p == 'I' ||
            (scheme == TagScheme::kBioes && (p == 'E' || p == 'S'));
  if (!ok) throw ParseError(line, "unknown tag prefix in '" + tag + "'");
  return {p, tag.substr(2)};
}

struct PendingMention {
  std::string raw;
  std::size_t start = 0;
  std::size_t end = 0;
};

class SentenceBuilder {
 public:
  SentenceBuilder(const TaggedOptions &options, TagScheme scheme,
                  Diagnostics *diag)
      : options_(options), scheme_(scheme), diag_(diag) {}

  void AddToken(const std::string &token, const std::string &tag,
                std::size_t line) {
    TagParts parts = SplitTag(tag, scheme_, line);
    if (!tokens_.empty() && !options_.no_space_join) text_ += U' ';
    std::size_t start = text_.size();
    text_ += DecodeUtf8(token);
    std::size_t end = text_.size();
    tokens_.push_back(token);

    switch (parts.prefix) {
      case 'O':
        Close();
        break;
      case 'B':
        Close();
        Open(parts.type, start, end);
        break;
      case 'S':
        Close();
        Open(parts.type, start, end);
        Close();
        break;
      case 'I':
      case 'E':
        if (open_ && open_->raw == parts.type) {
          open_->end = end;
        } else {
          std::string why = open_ ? "follows a different type"
                                  : "opens a mention";
          if (options_.strict) {
            throw ParseError(line, "dangling tag '" + tag + "' " + why);
          }
          Warn(diag_, options_.info.id + " line " + std::to_string(line) +
                          ": dangling tag '" + tag + "' " + why +
                          ", repaired as B-" + parts.type);
          Close();
          Open(parts.type, start, end);
        }
        if (parts.prefix == 'E') Close();
        break;
    }
  }

  bool empty() const { return tokens_.empty(); }

  // Emits the sentence with its raw mentions and resets.
  Sample Finish(std::size_t index, std::vector<PendingMention> &mentions) {
    Close();
    Sample s;
    s.id = options_.info.id + ":" + std::to_string(index);
    s.dataset_id = options_.info.id;
    s.language = options_.info.language;
    s.text = EncodeUtf8(text_);
    mentions = std::move(done_);
    done_.clear();
    text_.clear();
    tokens_.clear();
    return s;
  }

 private:
  void Open(const std::string &raw, std::size_t start, std::size_t end) {
    open_ = PendingMention{raw, start, end};
  }

  void Close() {
    if (open_) done_.push_back(*open_);
    open_.reset();
  }

  const TaggedOptions &options_;
  TagScheme scheme_;
  Diagnostics *diag_;
  std::u32string text_;
  std::vector<std::string> tokens_;
  std::optional<PendingMention> open_;
  std::vector<PendingMention> done_;
};

std::vector<std::string> SplitColumns(const std::string &line) {
  std::vector<std::string> cols;
  std::istringstream ss(line);
  std::string col;
  while (ss >> col) cols.push_back(col);
  return cols;
}

// Raw labels without an entry are collected in `missing`.
EntityMention Translate(const RawLabelTable &table, const std::string &raw,
                        std::size_t start, std::size_t end,
                        std::set<std::string> &missing) {
  auto label = table.Translate(raw);
  if (!label) {
    missing.insert(raw);
    return {UniversalLabel::Parse("unknown"), start, end, ""};
  }
  return {UniversalLabel::Parse(*label), start, end, ""};
}

void ThrowIfMissing(const std::set<std::string> &missing,
                    const std::string &dataset_id) {
  if (missing.empty()) return;
  std::string list;
  for (const std::string &m : missing) list += (list.empty() ? "" : ", ") + m;
  throw DataError("dataset '" + dataset_id +
                  "': raw labels missing from label table: " + list);
}

}  // namespace

Dataset ParseTagged(std::istream &in, TagScheme scheme,
                    const RawLabelTable &table, const TaggedOptions &options,
                    Diagnostics *diag) {
  Dataset dataset;
  dataset.info = options.info;
  SentenceBuilder builder(options, scheme, diag);
  std::set<std::string> missing;
  auto flush = [&]() {
    if (builder.empty()) return;
    std::vector<PendingMention> pending;
    Sample s = builder.Finish(dataset.samples.size(), pending);
    for (const PendingMention &p : pending) {
      s.mentions.push_back(Translate(table, p.raw, p.start, p.end, missing));
    }
    FinalizeMentions(s);
    dataset.samples.push_back(std::move(s));
  };

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> cols = SplitColumns(line);
    if (cols.empty()) {
      flush();
      continue;
    }
    if (cols[0] == "-DOCSTART-") continue;
    if (cols.size() < 2) throw ParseError(line_no, "missing tag column");
    builder.AddToken(cols.front(), cols.back(), line_no);
  }
  flush();
  ThrowIfMissing(missing, options.info.id);
  dataset.RebuildLabelSet();
  return dataset;
}

std::vector<std::string> RenderTagged(const Sample &sample, TagScheme scheme,
                                      bool no_space_join) {
  std::u32string text = DecodeUtf8(sample.text);
  struct Token {
    std::size_t start, end;
  };
  std::vector<Token> tokens;
  if (no_space_join) {
    for (std::size_t i = 0; i < text.size(); ++i) tokens.push_back({i, i + 1});
  } else {
    std::size_t i = 0;
    while (i < text.size()) {
      std::size_t j = text.find(U' ', i);
      if (j == std::u32string::npos) j = text.size();
      tokens.push_back({i, j});
      i = j + 1;
    }
  }
  std::vector<std::string> lines;
  for (const Token &t : tokens) {
    std::string tag = "O";
    for (const EntityMention &m : sample.mentions) {
      if (t.start < m.start || t.end > m.end) continue;
      bool first = t.start == m.start;
      bool last = t.end == m.end;
      char prefix = first ? 'B' : 'I';
      if (scheme == TagScheme::kBioes) {
        prefix = first && last ? 'S' : first ? 'B' : last ? 'E' : 'I';
      }
      tag = std::string(1, prefix) + "-" + m.label.str();
      break;
    }
    lines.push_back(EncodeUtf8(std::u32string_view(text).substr(
                        t.start, t.end - t.start)) +
                    " " + tag);
  }
  return lines;
}

SpanIngestResult ParseSpanJsonl(std::istream &in, const RawLabelTable &table,
                                const DatasetInfo &info, Diagnostics *diag) {
  SpanIngestResult result;
  result.dataset.info = info;
  std::set<std::string> missing;
  std::unordered_set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      throw ParseError(line_no, "malformed JSON");
    }
    if (!j.contains("text") || !j["text"].is_string()) {
      throw ParseError(line_no, "missing string field 'text'");
    }
    Sample s;
    s.id = j.contains("id") && j["id"].is_string()
               ? j["id"].get<std::string>()
               : info.id + ":" + std::to_string(line_no - 1);
    s.dataset_id = info.id;
    s.language = info.language;
    s.text = j["text"].get<std::string>();
    std::u32string text;
    try {
      text = DecodeUtf8(s.text);
    } catch (const DataError &e) {
      throw ParseError(line_no, e.what());
    }
    if (!ids.insert(s.id).second) {
      throw ParseError(line_no, "duplicate sample id '" + s.id + "'");
    }
    const json mentions = j.value("mentions", json::array());
    if (!mentions.is_array()) throw ParseError(line_no, "'mentions' is not an array");

    std::vector<Violation> violations;
    for (std::size_t i = 0; i < mentions.size(); ++i) {
      const json &m = mentions[i];
      if (!m.is_object() || !m.contains("start") || !m.contains("end") ||
          !m.contains("label") || !m["start"].is_number_integer() ||
          !m["end"].is_number_integer() || !m["label"].is_string()) {
        throw ParseError(line_no, "mention " + std::to_string(i) +
                                      " needs integer start/end and a label");
      }
      auto start = m["start"].get<std::int64_t>();
      auto end = m["end"].get<std::int64_t>();
      if (start < 0 || end <= start) {
        violations.push_back({"empty or inverted span", i,
                              "(" + std::to_string(start) + "," +
                                  std::to_string(end) + ")"});
        continue;
      }
      EntityMention em = Translate(table, m["label"].get<std::string>(),
                                   static_cast<std::size_t>(start),
                                   static_cast<std::size_t>(end), missing);
      if (m.contains("surface") && m["surface"].is_string()) {
        std::string given = m["surface"].get<std::string>();
        std::string actual = SliceCodepoints(text, em.start, em.end);
        if (given != actual) {
          violations.push_back({std::string(rules::kSurfaceMismatch), i,
                                "'" + given + "' vs text '" + actual + "'"});
        }
      }
      s.mentions.push_back(std::move(em));
    }
    FinalizeMentions(s);
    if (violations.empty()) violations = ValidateSample(s, info.nested);
    if (!violations.empty()) {
      Warn(diag, info.id + " line " + std::to_string(line_no) + ": sample '" +
                     s.id + "' rejected: " + violations.front().rule);
      result.rejected.push_back({line_no, s.id, std::move(violations)});
      continue;
    }
    result.dataset.samples.push_back(std::move(s));
  }
  ThrowIfMissing(missing, info.id);
  result.dataset.RebuildLabelSet();
  return result;
}

std::vector<ManifestEntry> LoadManifest(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read manifest " + path);
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw DataError("malformed manifest " + path);
  const fs::path base = fs::path(path).parent_path();
  auto resolve = [&](const std::string &p) {
    if (p.empty()) return p;
    fs::path fp(p);
    return (fp.is_absolute() ? fp : base / fp).lexically_normal().string();
  };
  std::vector<ManifestEntry> entries;
  std::unordered_set<std::string> ids;
  try {
    for (const json &j : doc.at("datasets")) {
      ManifestEntry e;
      e.info.id = j.at("id").get<std::string>();
      e.info.name = j.value("name", e.info.id);
      e.info.language = j.at("language").get<std::string>();
      e.info.domain = j.value("domain", "");
      e.info.split = ParseSplit(j.value("split", "train"));
      e.info.nested = j.value("nested", false);
      e.format = j.at("format").get<std::string>();
      e.path = resolve(j.at("path").get<std::string>());
      e.labels_path = resolve(j.value("labels", ""));
      e.no_space_join = j.value("no_space_join", false);
      if (e.format != "bio" && e.format != "bioes" && e.format != "jsonl") {
        throw DataError("dataset '" + e.info.id + "': unknown format '" +
                        e.format + "'");
      }
      if (!ids.insert(e.info.id).second) {
        throw DataError("duplicate dataset id '" + e.info.id + "' in manifest");
      }
      entries.push_back(std::move(e));
    }
  } catch (const json::exception &e) {
    throw DataError("bad manifest " + path + ": " + e.what());
  }
  return entries;
}

namespace {

// Identity table over every raw label appearing in a tagged file.
RawLabelTable IdentityTableForTagged(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  std::map<std::string, std::string> entries;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cols = SplitColumns(line);
    if (cols.size() < 2) continue;
    const std::string &tag = cols.back();
    if (tag.size() > 2 && tag[1] == '-') entries[tag.substr(2)] = tag.substr(2);
  }
  return RawLabelTable(std::move(entries));
}

RawLabelTable IdentityTableForJsonl(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  std::map<std::string, std::string> entries;
  std::string line;
  while (std::getline(in, line)) {
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("mentions")) continue;
    for (const json &m : j["mentions"]) {
      if (m.is_object() && m.contains("label") && m["label"].is_string()) {
        std::string l = m["label"].get<std::string>();
        entries[l] = l;
      }
    }
  }
  return RawLabelTable(std::move(entries));
}

}  // namespace

Corpus IngestManifest(const std::vector<ManifestEntry> &entries, bool strict,
                      unsigned jobs, Diagnostics *diag) {
  Corpus corpus;
  corpus.datasets.resize(entries.size());
  std::vector<Diagnostics> local(entries.size());
  ParallelFor(entries.size(), jobs, [&](std::size_t i) {
    const ManifestEntry &e = entries[i];
    std::ifstream in(e.path, std::ios::binary);
    if (!in) throw DataError("cannot read dataset file " + e.path);
    RawLabelTable table;
    if (!e.labels_path.empty()) table = RawLabelTable::Load(e.labels_path);
    try {
      if (e.format == "jsonl") {
        if (e.labels_path.empty()) table = IdentityTableForJsonl(e.path);
        SpanIngestResult r = ParseSpanJsonl(in, table, e.info, &local[i]);
        corpus.datasets[i] = std::move(r.dataset);
      } else {
        if (e.labels_path.empty()) table = IdentityTableForTagged(e.path);
        TaggedOptions opts{e.info, e.no_space_join, strict};
        corpus.datasets[i] =
            ParseTagged(in, ParseTagScheme(e.format), table, opts, &local[i]);
      }
    } catch (const ParseError &err) {
      throw DataError(e.path + ": " + err.what());
    }
  });
  std::unordered_set<std::string> ids;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    for (const std::string &w : local[i].warnings()) Warn(diag, w);
    for (const Sample &s : corpus.datasets[i].samples) {
      if (!ids.insert(s.id).second) {
        throw DataError("duplicate sample id '" + s.id + "' across datasets");
      }
    }
  }
  return corpus;
}

}  // namespace nerunify
