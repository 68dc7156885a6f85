// Copyright 2026 The gecprobe Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace gecprobe {

// Every failure raised by the library carries a kind so the CLI can map it
// onto an exit code without string matching.
enum class ErrorKind {
  kInvalidArgument,
  kMissingForm,
  kGrammarSyntax,
  kGrammarIncomplete,
  kNonFiniteGrammar,
  kCapacityExceeded,
  kMalformedM2,
  kMalformedCorpus,
  kInfeasibleSplit,
  kInsufficientDonors,
  kLengthMismatch,
  kDivergenceDetected,
  kGradientMismatch,
  kPreconditionViolation,
  kIo,
};

inline const char* ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return "InvalidArgument";
    case ErrorKind::kMissingForm: return "MissingForm";
    case ErrorKind::kGrammarSyntax: return "GrammarSyntax";
    case ErrorKind::kGrammarIncomplete: return "GrammarIncomplete";
    case ErrorKind::kNonFiniteGrammar: return "NonFiniteGrammar";
    case ErrorKind::kCapacityExceeded: return "CapacityExceeded";
    case ErrorKind::kMalformedM2: return "MalformedM2";
    case ErrorKind::kMalformedCorpus: return "MalformedCorpus";
    case ErrorKind::kInfeasibleSplit: return "InfeasibleSplit";
    case ErrorKind::kInsufficientDonors: return "InsufficientDonors";
    case ErrorKind::kLengthMismatch: return "LengthMismatch";
    case ErrorKind::kDivergenceDetected: return "DivergenceDetected";
    case ErrorKind::kGradientMismatch: return "GradientMismatch";
    case ErrorKind::kPreconditionViolation: return "PreconditionViolation";
    case ErrorKind::kIo: return "Io";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(ErrorKindName(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void Fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace gecprobe
