// Copyright 2026 The mixpsro Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MIXPSRO_ERRORS_HPP_
#define MIXPSRO_ERRORS_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace mixpsro {

enum class ErrorCode {
  kMissingEntry,
  kOutOfBounds,
  kIncompleteGame,
  kNoEquilibriumFound,
  kIllegalAction,
  kPrecondition,
  kBudgetZero,
  kWrongEnvironment,
  kMissingResponse,
  kNotValueBased,
  kPlayerCountUnsupported,
  kCorruptCheckpoint,
  kEmptyDeviationSet,
  kEmptyCorpus,
  kConfigError,
  kEnvironmentMismatch,
};

inline std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMissingEntry: return "MissingEntry";
    case ErrorCode::kOutOfBounds: return "OutOfBounds";
    case ErrorCode::kIncompleteGame: return "IncompleteGame";
    case ErrorCode::kNoEquilibriumFound: return "NoEquilibriumFound";
    case ErrorCode::kIllegalAction: return "IllegalAction";
    case ErrorCode::kPrecondition: return "PreconditionViolation";
    case ErrorCode::kBudgetZero: return "BudgetZero";
    case ErrorCode::kWrongEnvironment: return "WrongEnvironment";
    case ErrorCode::kMissingResponse: return "MissingResponse";
    case ErrorCode::kNotValueBased: return "NotValueBased";
    case ErrorCode::kPlayerCountUnsupported: return "PlayerCountUnsupported";
    case ErrorCode::kCorruptCheckpoint: return "CorruptCheckpoint";
    case ErrorCode::kEmptyDeviationSet: return "EmptyDeviationSet";
    case ErrorCode::kEmptyCorpus: return "EmptyCorpus";
    case ErrorCode::kConfigError: return "ConfigError";
    case ErrorCode::kEnvironmentMismatch: return "EnvironmentMismatch";
  }
  return "Unknown";
}

// All library failures are reported through this one exception type; callers
// dispatch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) fail(code, message);
}

}  // namespace mixpsro

#endif  // MIXPSRO_ERRORS_HPP_
