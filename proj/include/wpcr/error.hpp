// Copyright 2026 The wpcr Authors
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

#pragma once

#include <stdexcept>
#include <string>

namespace wpcr {

enum class ErrorKind {
  kInvalidParameter,
  kInvalidInput,
  kNumericFailure,
  kHypothesisViolated,
  kUnsupportedMeasure,
  kDegenerateWeights,
  kInvalidSamplePlan,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidParameter: return "invalid-parameter";
    case ErrorKind::kInvalidInput: return "invalid-input";
    case ErrorKind::kNumericFailure: return "numeric-failure";
    case ErrorKind::kHypothesisViolated: return "hypothesis-violated";
    case ErrorKind::kUnsupportedMeasure: return "unsupported-measure";
    case ErrorKind::kDegenerateWeights: return "degenerate-weights";
    case ErrorKind::kInvalidSamplePlan: return "invalid-sample-plan";
  }
  return "unknown";
}

/// Base of every exception thrown by the library. `kind()` lets callers map
/// failures to exit codes without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what),
        kind_(kind),
        message_(what) {}

  ErrorKind kind() const noexcept { return kind_; }
  /// The message without the kind prefix.
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorKind kind_;
  std::string message_;
};

class InvalidParameter : public Error {
 public:
  explicit InvalidParameter(const std::string& what)
      : Error(ErrorKind::kInvalidParameter, what) {}
};

class InvalidInput : public Error {
 public:
  explicit InvalidInput(const std::string& what)
      : Error(ErrorKind::kInvalidInput, what) {}
};

class NumericFailure : public Error {
 public:
  explicit NumericFailure(const std::string& what)
      : Error(ErrorKind::kNumericFailure, what) {}
};

class HypothesisViolated : public Error {
 public:
  explicit HypothesisViolated(const std::string& what)
      : Error(ErrorKind::kHypothesisViolated, what) {}
};

class UnsupportedMeasure : public Error {
 public:
  explicit UnsupportedMeasure(const std::string& what)
      : Error(ErrorKind::kUnsupportedMeasure, what) {}
};

class DegenerateWeights : public Error {
 public:
  explicit DegenerateWeights(const std::string& what)
      : Error(ErrorKind::kDegenerateWeights, what) {}
};

class InvalidSamplePlan : public Error {
 public:
  explicit InvalidSamplePlan(const std::string& what)
      : Error(ErrorKind::kInvalidSamplePlan, what) {}
};

}  // namespace wpcr
