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

// Word-level vocabulary shared by source and target sides.

#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "gecprobe/error.hpp"
#include "gecprobe/types.hpp"

namespace gecprobe::seq2seq {

inline constexpr int kPad = 0;
inline constexpr int kBos = 1;
inline constexpr int kEos = 2;
inline constexpr int kUnk = 3;
inline constexpr int kNumReserved = 4;

class Vocab {
 public:
  Vocab() : tokens_{"<pad>", "<s>", "</s>", "<unk>"} { Reindex(); }

  explicit Vocab(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
    if (tokens_.size() < kNumReserved || tokens_[kPad] != "<pad>" || tokens_[kBos] != "<s>" ||
        tokens_[kEos] != "</s>" || tokens_[kUnk] != "<unk>") {
      Fail(ErrorKind::kInvalidArgument, "vocabulary must start with <pad> <s> </s> <unk>");
    }
    Reindex();
  }

  size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  int Id(const std::string& token) const {
    auto it = index_.find(token);
    return it == index_.end() ? kUnk : it->second;
  }

  const std::string& Token(int id) const { return tokens_.at(static_cast<size_t>(id)); }

  std::vector<int> Encode(const Tokens& tokens) const {
    std::vector<int> out;
    out.reserve(tokens.size());
    for (const auto& t : tokens) out.push_back(Id(t));
    return out;
  }

  /// Maps ids back to tokens, dropping reserved ids other than <unk>.
  Tokens Decode(const std::vector<int>& ids) const {
    Tokens out;
    for (int id : ids) {
      if (id == kPad || id == kBos || id == kEos) continue;
      out.push_back(Token(id));
    }
    return out;
  }

  nlohmann::json ToJson() const { return tokens_; }
  static Vocab FromJson(const nlohmann::json& j) { return Vocab(j.get<std::vector<std::string>>()); }

 private:
  void Reindex() {
    index_.clear();
    for (size_t i = 0; i < tokens_.size(); ++i) {
      if (!index_.emplace(tokens_[i], static_cast<int>(i)).second) {
        Fail(ErrorKind::kInvalidArgument, "duplicate vocabulary token " + tokens_[i]);
      }
    }
  }

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

/// Tokens of both sides of `train`, ordered by descending frequency then
/// lexicographically; tokens seen fewer than `min_count` times are left out
/// and map to <unk>.
inline Vocab BuildVocab(const Corpus& train, size_t min_count = 1) {
  if (train.empty()) Fail(ErrorKind::kInvalidArgument, "cannot build a vocabulary from no pairs");
  std::map<std::string, size_t> freq;
  for (const auto& p : train) {
    for (const auto& t : p.source) ++freq[t];
    for (const auto& t : p.reference) ++freq[t];
  }
  std::vector<std::pair<std::string, size_t>> items(freq.begin(), freq.end());
  std::stable_sort(items.begin(), items.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> tokens = Vocab().tokens();
  for (const auto& [tok, n] : items) {
    if (n >= min_count) tokens.push_back(tok);
  }
  return Vocab(std::move(tokens));
}

}  // namespace gecprobe::seq2seq
