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


#ifndef NERUNIFY_EMBEDDING_H_
#define NERUNIFY_EMBEDDING_H_

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nerunify/common.h"

namespace nerunify {

// Maps a text to a unit-norm vector of fixed dimension. Implementations
// must be deterministic and safe to call from several threads.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;

  virtual std::size_t dim() const = 0;
  virtual std::string name() const = 0;
  virtual std::vector<float> Embed(std::string_view text,
                                   Diagnostics *diag) const = 0;
};

// Signed feature hashing of overlapping character 3-grams (code points),
// L2-normalized. Texts shorter than three code points hash as one gram.
// Empty text maps to the first basis vector, with a warning.
class HashedNgramEmbedder : public EmbeddingProvider {
 public:
  static constexpr std::size_t kDefaultDim = 256;
  static constexpr std::size_t kGram = 3;

  explicit HashedNgramEmbedder(std::size_t dim = kDefaultDim);

  std::size_t dim() const override { return dim_; }
  std::string name() const override;
  std::vector<float> Embed(std::string_view text,
                           Diagnostics *diag) const override;

  // Unnormalized signed counts.
  std::vector<double> Counts(std::string_view text) const;

 private:
  std::size_t dim_;
};

double Dot(const float *x, const float *y, std::size_t n);

// dot / sqrt(|x|^2 |y|^2), every term through Dot; identical vectors give
// exactly 1.
double Cosine(std::span<const float> x, std::span<const float> y);

}  // namespace nerunify

#endif  // NERUNIFY_EMBEDDING_H_
