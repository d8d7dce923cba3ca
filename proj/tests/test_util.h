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


#ifndef NERUNIFY_TESTS_TEST_UTIL_H_
#define NERUNIFY_TESTS_TEST_UTIL_H_

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "nerunify/corpus.h"
#include "nerunify/embedding.h"
#include "nerunify/text.h"

namespace nerunify::testing {

using MentionSpec = std::tuple<std::string, std::size_t, std::size_t>;

inline Sample MakeSample(const std::string &id, const std::string &dataset,
                         const std::string &text, const std::vector<MentionSpec> &mentions,
                         const std::string &language = "en") {
  Sample s;
  s.id = id;
  s.dataset_id = dataset;
  s.language = language;
  s.text = text;
  for (const auto &[label, start, end] : mentions) {
    s.mentions.push_back({UniversalLabel::Parse(label), start, end, ""});
  }
  FinalizeMentions(s);
  return s;
}

// Sample whose mentions are found by surface: {label, surface}, first
// occurrence.
inline Sample MakeSampleBySurface(const std::string &id, const std::string &dataset,
                                  const std::string &text,
                                  const std::vector<std::pair<std::string, std::string>> &ms) {
  std::vector<MentionSpec> specs;
  for (const auto &[label, surface] : ms) {
    std::size_t byte = text.find(surface);
    if (byte == std::string::npos) throw std::logic_error("surface not in text: " + surface);
    std::size_t start = CodepointLength(text.substr(0, byte));
    specs.emplace_back(label, start, start + CodepointLength(surface));
  }
  return MakeSample(id, dataset, text, specs);
}

inline Dataset MakeDataset(const std::string &id, std::vector<Sample> samples,
                           Split split = Split::kTrain, const std::string &name = "",
                           const std::string &language = "en") {
  Dataset d;
  d.info.id = id;
  d.info.name = name.empty() ? id : name;
  d.info.language = language;
  d.info.split = split;
  d.samples = std::move(samples);
  d.RebuildLabelSet();
  return d;
}

class TempDir {
 public:
  explicit TempDir(const std::string &name)
      : path_(std::filesystem::temp_directory_path() /
              ("nerunify-" + name + "-" + std::to_string(::getpid()))) {
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }

  const std::filesystem::path &path() const { return path_; }
  std::string str() const { return path_.string(); }

 private:
  std::filesystem::path path_;
};

inline std::string ReadFile(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void WriteFile(const std::filesystem::path &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

// Maps each known text to its own basis vector; texts sharing an index are
// exact duplicates and different indices are orthogonal.
class BasisEmbedder : public EmbeddingProvider {
 public:
  BasisEmbedder(std::size_t dim, std::map<std::string, std::size_t> index)
      : dim_(dim), index_(std::move(index)) {}

  std::size_t dim() const override { return dim_; }
  std::string name() const override { return "basis"; }
  std::vector<float> Embed(std::string_view text, Diagnostics *) const override {
    auto it = index_.find(std::string(text));
    if (it == index_.end()) throw std::runtime_error("unknown text");
    std::vector<float> v(dim_, 0.0f);
    v[it->second] = 1.0f;
    return v;
  }

 private:
  std::size_t dim_;
  std::map<std::string, std::size_t> index_;
};

}  // namespace nerunify::testing

#endif  // NERUNIFY_TESTS_TEST_UTIL_H_
