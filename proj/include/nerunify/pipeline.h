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


// Manifest-driven command line front end. Every stage reads the artifacts
// of earlier stages from the output directory and writes its own under a
// stage-stamped name (01-ingest.*, 05-remap.*, ...), next to a
// NN-stage.meta.json sidecar carrying the digest of the resolved
// configuration.

#ifndef NERUNIFY_PIPELINE_H_
#define NERUNIFY_PIPELINE_H_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "nerunify/conflict.h"
#include "nerunify/instruct.h"
#include "nerunify/prune.h"

namespace nerunify {

inline constexpr const char *kOutputDirEnv = "NERUNIFY_OUTPUT_DIR";

struct PipelineConfig {
  std::string corpus_manifest;
  std::string mapping;
  std::string output_dir = "nerunify-out";
  std::uint64_t seed = 0;
  unsigned jobs = 1;

  bool strict_ingest = false;

  ScreenOptions conflict;

  std::string crossval_label;
  std::vector<std::string> crossval_datasets;  // empty: every train dataset
  std::string crossval_tagger;                 // empty: built-in memorization
  bool crossval_disjoint = true;

  bool lint_strict = false;
  std::vector<std::string> lint_waivers;

  PruneConfig prune;

  TemplateKind instruct_template = TemplateKind::kPlain;
  RegularizationConfig instruct;
  std::string guidelines;
  std::size_t fewshot_n = 3;

  std::vector<std::string> predictions;

  // Canonical JSON of every setting that affects artifact contents.
  nlohmann::json Canonical() const;
  // 16 hex digits.
  std::string Digest() const;
};

// Reads a pipeline manifest. Relative paths resolve against its directory.
PipelineConfig LoadPipelineConfig(const std::string &path);
void ApplyPipelineJson(const nlohmann::json &doc, const std::string &base_dir,
                       PipelineConfig &config);

// Runs one command line; returns the process exit status (0 ok, 1 usage,
// 2 data, 3 missing prerequisite).
int RunCli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);
int RunCli(int argc, char **argv);

}  // namespace nerunify

#endif  // NERUNIFY_PIPELINE_H_
