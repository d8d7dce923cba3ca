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

// Unicode helpers. All span offsets in this project count code points.

#ifndef NERUNIFY_TEXT_H_
#define NERUNIFY_TEXT_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace nerunify {

// Decodes UTF-8. Throws DataError on malformed input.
std::u32string DecodeUtf8(std::string_view text);

std::string EncodeUtf8(std::u32string_view text);

// Number of code points in a UTF-8 string.
std::size_t CodepointLength(std::string_view text);

// UTF-8 substring over the code point range [start, end).
std::string SliceCodepoints(std::u32string_view text, std::size_t start,
                            std::size_t end);

// True for letters and digits of space-delimited scripts. CJK ideographs,
// kana and hangul are excluded: those scripts have no word boundaries.
bool IsWordChar(char32_t c);

// Returns true if [start, end) in `text` does not cut through a word of a
// space-delimited script.
bool OnWordBoundary(std::u32string_view text, std::size_t start,
                    std::size_t end);

std::string NormalizeNfc(std::string_view text);

// Full Unicode case folding.
std::string CaseFold(std::string_view text);

// NFC view of a text that remembers where every normalized code point
// boundary falls in the original text. Boundaries inside a combining
// sequence that normalization rewrote map to kNoOffset.
class NfcText {
 public:
  static constexpr std::size_t kNoOffset = static_cast<std::size_t>(-1);

  explicit NfcText(std::u32string_view original);

  const std::u32string &text() const { return text_; }

  // Original offset of normalized boundary i, for 0 <= i <= text().size().
  std::size_t OriginalOffset(std::size_t i) const { return offsets_[i]; }

 private:
  std::u32string text_;
  std::vector<std::size_t> offsets_;
};

std::string Trim(std::string_view text);

// 64-bit FNV-1a.
std::uint64_t Fnv1a64(std::string_view bytes,
                      std::uint64_t seed = 0xcbf29ce484222325ULL);

}  // namespace nerunify

#endif  // NERUNIFY_TEXT_H_
