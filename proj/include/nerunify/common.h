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

#ifndef NERUNIFY_COMMON_H_
#define NERUNIFY_COMMON_H_

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace nerunify {

// Error categories. The CLI maps them onto process exit codes.
enum class ErrorKind {
  kUsage,         // bad flags or configuration
  kData,          // malformed or inconsistent input data
  kPrerequisite,  // an earlier pipeline stage has not been run
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string &message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

class DataError : public Error {
 public:
  explicit DataError(const std::string &message)
      : Error(ErrorKind::kData, message) {}
};

// Parse failure at a known 1-based input line.
class ParseError : public DataError {
 public:
  ParseError(std::size_t line, const std::string &message)
      : DataError("line " + std::to_string(line) + ": " + message),
        line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string &message)
      : Error(ErrorKind::kUsage, message) {}
};

class PrerequisiteError : public Error {
 public:
  explicit PrerequisiteError(const std::string &message)
      : Error(ErrorKind::kPrerequisite, message) {}
};

// Collects non-fatal warnings raised while processing data.
class Diagnostics {
 public:
  void Warn(std::string message) { warnings_.push_back(std::move(message)); }

  const std::vector<std::string> &warnings() const { return warnings_; }
  bool empty() const { return warnings_.empty(); }
  void Clear() { warnings_.clear(); }

 private:
  std::vector<std::string> warnings_;
};

// Warns through an optional sink.
inline void Warn(Diagnostics *diag, std::string message) {
  if (diag != nullptr) diag->Warn(std::move(message));
}

}  // namespace nerunify

#endif  // NERUNIFY_COMMON_H_
