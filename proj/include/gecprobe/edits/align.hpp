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
#include <string>
#include <vector>

#include "gecprobe/types.hpp"

namespace gecprobe::edits {

enum class Op { kMatch, kSubstitute, kDelete, kInsert };

/// One column of a token alignment. Source index `src` is consumed by
/// match/substitute/delete, reference index `ref` by match/substitute/insert.
struct Column {
  Op op;
  size_t src;
  size_t ref;
};

inline int ColumnCost(Op op) { return op == Op::kMatch ? 0 : 1; }

/// Minimal-cost alignment with unit substitution, insertion and deletion
/// costs. Among optimal paths the backtrace prefers diagonal moves, so
/// swapped neighbours become adjacent substitutions.
inline std::vector<Column> AlignColumns(const Tokens& source, const Tokens& reference) {
  const size_t n = source.size(), m = reference.size();
  std::vector<std::vector<int>> d(n + 1, std::vector<int>(m + 1, 0));
  for (size_t i = 0; i <= n; ++i) d[i][0] = static_cast<int>(i);
  for (size_t j = 0; j <= m; ++j) d[0][j] = static_cast<int>(j);
  for (size_t i = 1; i <= n; ++i) {
    for (size_t j = 1; j <= m; ++j) {
      const int diag = d[i - 1][j - 1] + (source[i - 1] == reference[j - 1] ? 0 : 1);
      d[i][j] = std::min({diag, d[i - 1][j] + 1, d[i][j - 1] + 1});
    }
  }
  std::vector<Column> cols;
  size_t i = n, j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0) {
      const bool same = source[i - 1] == reference[j - 1];
      if (d[i][j] == d[i - 1][j - 1] + (same ? 0 : 1)) {
        cols.push_back({same ? Op::kMatch : Op::kSubstitute, i - 1, j - 1});
        --i;
        --j;
        continue;
      }
    }
    const bool can_delete = i > 0 && d[i][j] == d[i - 1][j] + 1;
    const bool can_insert = j > 0 && d[i][j] == d[i][j - 1] + 1;
    // Breaking del/ins ties on the token pair keeps the path mirror-symmetric
    // when source and reference swap roles.
    const bool prefer_delete = !can_insert || (can_delete && source[i - 1] > reference[j - 1]);
    if (prefer_delete) {
      cols.push_back({Op::kDelete, i - 1, j});
      --i;
    } else {
      cols.push_back({Op::kInsert, i, j - 1});
      --j;
    }
  }
  std::reverse(cols.begin(), cols.end());
  return cols;
}

inline int AlignmentCost(const std::vector<Column>& cols) {
  int cost = 0;
  for (const Column& c : cols) cost += ColumnCost(c.op);
  return cost;
}

/// Merges maximal runs of adjacent non-match columns into edits.
inline std::vector<Edit> MergeColumns(const std::vector<Column>& cols, const Tokens& reference,
                                      const std::string& type_label = {}) {
  std::vector<Edit> out;
  size_t k = 0;
  size_t src_pos = 0;
  while (k < cols.size()) {
    if (cols[k].op == Op::kMatch) {
      src_pos = cols[k].src + 1;
      ++k;
      continue;
    }
    Edit e;
    e.start = src_pos;
    e.end = src_pos;
    e.type_label = type_label;
    while (k < cols.size() && cols[k].op != Op::kMatch) {
      const Column& c = cols[k];
      if (c.op != Op::kInsert) e.end = c.src + 1;
      if (c.op != Op::kDelete) e.correction.push_back(reference[c.ref]);
      ++k;
    }
    src_pos = e.end;
    out.push_back(std::move(e));
  }
  return out;
}

/// Token-level edits turning `source` into `reference`.
inline std::vector<Edit> Align(const Tokens& source, const Tokens& reference,
                               const std::string& type_label = {}) {
  return MergeColumns(AlignColumns(source, reference), reference, type_label);
}

/// The pattern an edit expresses on `source`.
inline ErrorCorrectionPattern ExtractPattern(const Edit& edit, const Tokens& source) {
  if (edit.start > edit.end || edit.end > source.size()) {
    Fail(ErrorKind::kInvalidArgument, "edit does not apply to source");
  }
  return {Tokens(source.begin() + static_cast<std::ptrdiff_t>(edit.start),
                 source.begin() + static_cast<std::ptrdiff_t>(edit.end)),
          edit.correction};
}

/// Pattern of a pair that carries a single gold edit.
inline ErrorCorrectionPattern PatternOf(const SentencePair& pair) {
  if (pair.gold_edits.size() != 1) {
    Fail(ErrorKind::kInvalidArgument, "pattern identity needs exactly one gold edit, pair has " +
                                          std::to_string(pair.gold_edits.size()));
  }
  return ExtractPattern(pair.gold_edits.front(), pair.source);
}

inline std::string ToString(const ErrorCorrectionPattern& p) {
  return JoinTokens(p.target) + " => " + JoinTokens(p.correction);
}

/// Parses "target => correction" (either side may be empty).
inline ErrorCorrectionPattern ParsePattern(const std::string& text) {
  const auto at = text.find("=>");
  if (at == std::string::npos) {
    Fail(ErrorKind::kInvalidArgument, "pattern must look like 'target => correction': " + text);
  }
  ErrorCorrectionPattern p{SplitTokens(text.substr(0, at)), SplitTokens(text.substr(at + 2))};
  if (p.target == p.correction) {
    Fail(ErrorKind::kInvalidArgument, "pattern target and correction are identical: " + text);
  }
  return p;
}

}  // namespace gecprobe::edits
