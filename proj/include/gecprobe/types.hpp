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

#include <algorithm>
#include <array>
#include <cctype>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "gecprobe/error.hpp"

namespace gecprobe {

using Tokens = std::vector<std::string>;

enum class ErrorType { kVerbSva, kVerbForm, kWordOrder, kMorph, kNounNum };

inline constexpr std::array<ErrorType, 5> kAllErrorTypes = {
    ErrorType::kVerbSva, ErrorType::kVerbForm, ErrorType::kWordOrder,
    ErrorType::kMorph, ErrorType::kNounNum};

inline std::string_view ToString(ErrorType type) {
  switch (type) {
    case ErrorType::kVerbSva: return "VERB:SVA";
    case ErrorType::kVerbForm: return "VERB:FORM";
    case ErrorType::kWordOrder: return "WO";
    case ErrorType::kMorph: return "MORPH";
    case ErrorType::kNounNum: return "NOUN:NUM";
  }
  return "?";
}

inline std::optional<ErrorType> ParseErrorType(std::string_view text) {
  for (ErrorType t : kAllErrorTypes) {
    if (ToString(t) == text) return t;
  }
  return std::nullopt;
}

inline ErrorType ErrorTypeOrThrow(std::string_view text) {
  auto t = ParseErrorType(text);
  if (!t) {
    Fail(ErrorKind::kInvalidArgument,
         "unknown error type '" + std::string(text) +
             "' (expected VERB:SVA, VERB:FORM, WO, MORPH or NOUN:NUM)");
  }
  return *t;
}

/// Strips an ERRANT operation prefix ("R:", "M:", "U:") from an M2 type.
inline std::string_view BaseTypeLabel(std::string_view label) {
  if (label.size() > 2 && label[1] == ':' &&
      (label[0] == 'R' || label[0] == 'M' || label[0] == 'U')) {
    return label.substr(2);
  }
  return label;
}

inline bool LabelMatches(std::string_view label, ErrorType type) {
  return BaseTypeLabel(label) == ToString(type);
}

enum class Origin { kSynthetic, kReal };

inline std::string_view ToString(Origin o) {
  return o == Origin::kSynthetic ? "synthetic" : "real";
}

/// A correction of the half-open source token interval [start, end).
struct Edit {
  size_t start = 0;
  size_t end = 0;
  Tokens correction;
  std::string type_label;

  bool IsInsertion() const { return start == end; }
  bool IsDeletion() const { return start < end && correction.empty(); }

  friend bool operator==(const Edit&, const Edit&) = default;
};

/// The (target term, correction term) identity of an edit. Compared
/// case-sensitively, token by token.
struct ErrorCorrectionPattern {
  Tokens target;
  Tokens correction;

  friend bool operator==(const ErrorCorrectionPattern&,
                         const ErrorCorrectionPattern&) = default;
  friend bool operator<(const ErrorCorrectionPattern& a,
                        const ErrorCorrectionPattern& b) {
    return std::tie(a.target, a.correction) < std::tie(b.target, b.correction);
  }
};

struct SentencePair {
  Tokens source;
  Tokens reference;
  std::optional<ErrorType> error_type;
  std::vector<Edit> gold_edits;
  bool noisy = false;
  Origin origin = Origin::kSynthetic;

  friend bool operator==(const SentencePair&, const SentencePair&) = default;
};

using Corpus = std::vector<SentencePair>;

// ---------------------------------------------------------------------------
// Token helpers.

inline Tokens SplitTokens(std::string_view text) {
  Tokens out;
  size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && (text[i] == ' ' || text[i] == '\t')) ++i;
    size_t j = i;
    while (j < text.size() && text[j] != ' ' && text[j] != '\t') ++j;
    if (j > i) out.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return out;
}

inline std::string JoinTokens(const Tokens& tokens, std::string_view sep = " ") {
  std::string out;
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += sep;
    out += tokens[i];
  }
  return out;
}

inline std::string Capitalize(std::string word) {
  if (!word.empty()) {
    word[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(word[0])));
  }
  return word;
}

inline std::string Decapitalize(std::string word) {
  if (!word.empty()) {
    word[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(word[0])));
  }
  return word;
}

/// Applies edits (sorted or not) to `source`. Edits are applied from the
/// rightmost start leftwards so earlier spans keep their indices.
inline Tokens ApplyEdits(const Tokens& source, std::vector<Edit> edits) {
  std::stable_sort(edits.begin(), edits.end(), [](const Edit& a, const Edit& b) {
    return std::tie(a.start, a.end) > std::tie(b.start, b.end);
  });
  Tokens out = source;
  size_t bound = source.size();
  for (const Edit& e : edits) {
    if (e.start > e.end || e.end > source.size()) {
      Fail(ErrorKind::kInvalidArgument, "edit span out of range");
    }
    if (e.end > bound) {
      Fail(ErrorKind::kInvalidArgument, "overlapping edits");
    }
    out.erase(out.begin() + static_cast<std::ptrdiff_t>(e.start),
              out.begin() + static_cast<std::ptrdiff_t>(e.end));
    out.insert(out.begin() + static_cast<std::ptrdiff_t>(e.start),
               e.correction.begin(), e.correction.end());
    bound = e.start;
  }
  return out;
}

}  // namespace gecprobe
