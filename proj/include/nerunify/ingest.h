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

// Readers for external NER formats: token-per-line BIO/BIOES files and
// span JSONL. Raw label symbols are translated to natural-language labels
// on the way in.

#ifndef NERUNIFY_INGEST_H_
#define NERUNIFY_INGEST_H_

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "nerunify/common.h"
#include "nerunify/corpus.h"

namespace nerunify {

enum class TagScheme { kBio, kBioes };

TagScheme ParseTagScheme(std::string_view name);

// Raw label symbol -> natural-language label, e.g. "PER" -> "person".
class RawLabelTable {
 public:
  RawLabelTable() = default;
  explicit RawLabelTable(std::map<std::string, std::string> entries);

  // Reads a JSON object {raw: label}.
  static RawLabelTable FromJson(const nlohmann::json &doc);
  static RawLabelTable Load(const std::string &path);

  std::optional<std::string> Translate(std::string_view raw) const;
  const std::map<std::string, std::string> &entries() const { return entries_; }

 private:
  std::map<std::string, std::string> entries_;
};

struct TaggedOptions {
  DatasetInfo info;
  // Concatenate tokens without spaces (Chinese and similar scripts).
  bool no_space_join = false;
  // Fail on dangling I-/E- tags instead of repairing them.
  bool strict = false;
};

// Parses token-per-line input: whitespace-separated columns, token first,
// tag last, blank lines between sentences. Lines starting with -DOCSTART-
// are skipped. Throws ParseError on unknown tag prefixes (and on dangling
// tags in strict mode) and DataError when a raw label is missing from the
// table.
Dataset ParseTagged(std::istream &in, TagScheme scheme,
                    const RawLabelTable &table, const TaggedOptions &options,
                    Diagnostics *diag = nullptr);

// Inverse of ParseTagged for flat samples whose mentions align with token
// boundaries. Labels are written verbatim as tag types.
std::vector<std::string> RenderTagged(const Sample &sample, TagScheme scheme,
                                      bool no_space_join);

struct RejectedSample {
  std::size_t line = 0;
  std::string sample_id;
  std::vector<Violation> violations;
};

struct SpanIngestResult {
  Dataset dataset;
  std::vector<RejectedSample> rejected;
};

// Parses span JSONL lines {id, text, mentions:[{start, end, label,
// surface?}]}. Samples breaking span invariants are rejected and reported;
// malformed lines throw ParseError.
SpanIngestResult ParseSpanJsonl(std::istream &in, const RawLabelTable &table,
                                const DatasetInfo &info,
                                Diagnostics *diag = nullptr);

// One dataset entry of a corpus manifest. Paths are resolved against the
// manifest's directory.
struct ManifestEntry {
  DatasetInfo info;
  std::string format;  // "bio", "bioes" or "jsonl"
  std::string path;
  std::string labels_path;  // RawLabelTable; empty means identity
  bool no_space_join = false;
};

std::vector<ManifestEntry> LoadManifest(const std::string &path);

// Ingests every manifest entry, up to `jobs` datasets at a time. Dataset
// order follows the manifest.
Corpus IngestManifest(const std::vector<ManifestEntry> &entries, bool strict,
                      unsigned jobs, Diagnostics *diag = nullptr);

}  // namespace nerunify

#endif  // NERUNIFY_INGEST_H_
