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


#include "nerunify/embedding.h"

#include <cmath>

#include "nerunify/text.h"

namespace nerunify {

HashedNgramEmbedder::HashedNgramEmbedder(std::size_t dim) : dim_(dim) {
  if (dim == 0) throw ConfigError("embedding dimension must be positive");
}

std::string HashedNgramEmbedder::name() const {
  return "hashed-3gram-" + std::to_string(dim_);
}

std::vector<double> HashedNgramEmbedder::Counts(std::string_view text) const {
  std::vector<double> counts(dim_, 0.0);
  // Byte offset of every code point start, plus the end.
  std::vector<std::size_t> starts;
  starts.reserve(text.size() + 1);
  for (std::size_t i = 0; i < text.size(); ++i) {
    if ((static_cast<unsigned char>(text[i]) & 0xC0) != 0x80) starts.push_back(i);
  }
  std::size_t n = starts.size();
  starts.push_back(text.size());
  auto add = [&](std::string_view gram) {
    std::uint64_t h = Fnv1a64(gram);
    double sign = (h >> 63) != 0 ? -1.0 : 1.0;
    counts[h % dim_] += sign;
  };
  if (n == 0) return counts;
  if (n < kGram) {
    add(text);
    return counts;
  }
  for (std::size_t i = 0; i + kGram <= n; ++i) {
    add(text.substr(starts[i], starts[i + kGram] - starts[i]));
  }
  return counts;
}

std::vector<float> HashedNgramEmbedder::Embed(std::string_view text,
                                              Diagnostics *diag) const {
  std::vector<double> counts = Counts(text);
  double norm2 = 0.0;
  for (double c : counts) norm2 += c * c;
  std::vector<float> out(dim_, 0.0f);
  if (norm2 == 0.0) {
    // Empty text, or every gram cancelled out in a shared bucket.
    Warn(diag, text.empty() ? "empty text embedded as a basis vector"
                            : "zero embedding replaced by a basis vector");
    out[0] = 1.0f;
    return out;
  }
  double inv = 1.0 / std::sqrt(norm2);
  for (std::size_t i = 0; i < dim_; ++i) out[i] = static_cast<float>(counts[i] * inv);
  return out;
}

double Dot(const float *x, const float *y, std::size_t n) {
  double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    a0 += static_cast<double>(x[i]) * y[i];
    a1 += static_cast<double>(x[i + 1]) * y[i + 1];
    a2 += static_cast<double>(x[i + 2]) * y[i + 2];
    a3 += static_cast<double>(x[i + 3]) * y[i + 3];
  }
  for (; i < n; ++i) a0 += static_cast<double>(x[i]) * y[i];
  return (a0 + a1) + (a2 + a3);
}

double Cosine(std::span<const float> x, std::span<const float> y) {
  if (x.size() != y.size()) throw DataError("embedding dimensions differ");
  double xx = Dot(x.data(), x.data(), x.size());
  double yy = Dot(y.data(), y.data(), y.size());
  if (xx == 0.0 || yy == 0.0) return 0.0;
  double c = Dot(x.data(), y.data(), x.size()) / std::sqrt(xx * yy);
  return c > 1.0 ? 1.0 : (c < -1.0 ? -1.0 : c);
}

}  // namespace nerunify
