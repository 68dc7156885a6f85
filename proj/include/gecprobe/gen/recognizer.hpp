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
#include <cstdint>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "gecprobe/gen/grammar.hpp"
#include "gecprobe/types.hpp"

namespace gecprobe::gen {

/// Chart recognizer over a finite paired grammar. For a token sequence it
/// reports how many error-rule applications a parse from the start symbol
/// can use: none, exactly one, or two and more.
class Recognizer {
 public:
  static constexpr uint8_t kNoError = 1;
  static constexpr uint8_t kOneError = 2;
  static constexpr uint8_t kManyErrors = 4;

  Recognizer(const Grammar& grammar, ErrorType type) : grammar_(grammar), type_(type) {
    grammar_.RequireFinite();
  }

  uint8_t Parse(const Tokens& tokens) {
    auto it = grammar_.starts.find(type_);
    if (it == grammar_.starts.end() || tokens.empty()) return 0;
    tokens_ = tokens;
    tokens_[0] = Decapitalize(tokens_[0]);
    chart_.clear();
    return Derives(it->second, 0, tokens_.size(), false);
  }

  /// Parses under the grammatical rules alone.
  bool IsGrammatical(const Tokens& tokens) { return Parse(tokens) & kNoError; }

  /// Parses with exactly one error-rule application and not without one.
  bool IsSingleError(const Tokens& tokens) {
    const uint8_t m = Parse(tokens);
    return (m & kOneError) && !(m & kNoError);
  }

 private:
  static uint8_t Combine(uint8_t a, uint8_t b) {
    uint8_t out = 0;
    for (int x = 0; x < 3; ++x) {
      if (!(a & (1 << x))) continue;
      for (int y = 0; y < 3; ++y) {
        if (b & (1 << y)) out |= static_cast<uint8_t>(1 << std::min(x + y, 2));
      }
    }
    return out;
  }

  static uint8_t Shift(uint8_t m) {
    return static_cast<uint8_t>(((m << 1) & 0x6) | ((m & kManyErrors) ? kManyErrors : 0));
  }

  uint8_t Derives(const Instance& inst, size_t i, size_t j, bool strict) {
    const auto key = std::make_tuple(inst, i, j, strict);
    if (auto it = chart_.find(key); it != chart_.end()) return it->second;
    uint8_t mask = 0;
    if (auto category = CategoryFromSymbol(inst.name)) {
      if (j == i + 1) {
        const FeatureBundle f = ToFeatures(inst.values);
        for (const LexicalEntry* e : grammar_.lexicon.OfCategory(*category)) {
          auto surface = TryInflect(*e, f, strict);
          if (surface && *surface == tokens_[i]) {
            mask = kNoError;
            break;
          }
        }
      }
    } else {
      for (size_t ri : grammar_.RulesFor(inst.name)) {
        const GrammarRule& rule = grammar_.rules[ri];
        if (rule.IsError() && rule.error != type_) continue;
        Bindings b;
        if (!Unify(rule.lhs.args, inst.values, b)) continue;
        ForEachAssignment(FreeVariables(rule, b), b, [&](const Bindings& full) {
          std::vector<Instance> rhs;
          for (const Symbol& s : rule.rhs) rhs.push_back(Resolve(s, full));
          uint8_t m = Sequence(rule, rhs, 0, i, j);
          if (rule.IsError()) m = Shift(m);
          mask |= m;
        });
      }
    }
    chart_[key] = mask;
    return mask;
  }

  // Error counts for rhs[k..] covering tokens [i, j), one or more tokens per
  // symbol.
  uint8_t Sequence(const GrammarRule& rule, const std::vector<Instance>& rhs, size_t k, size_t i,
                   size_t j) {
    const size_t remaining = rhs.size() - k;
    if (remaining == 0) return i == j ? kNoError : 0;
    if (j - i < remaining) return 0;
    const bool strict = rule.IsError() && rule.rhs[k].IsTerminal();
    uint8_t out = 0;
    const size_t last = remaining == 1 ? j : j - (remaining - 1);
    for (size_t mid = remaining == 1 ? j : i + 1; mid <= last; ++mid) {
      const uint8_t head = Derives(rhs[k], i, mid, strict);
      if (!head) continue;
      out |= Combine(head, Sequence(rule, rhs, k + 1, mid, j));
    }
    return out;
  }

  const Grammar& grammar_;
  ErrorType type_;
  Tokens tokens_;
  std::map<std::tuple<Instance, size_t, size_t, bool>, uint8_t> chart_;
};

}  // namespace gecprobe::gen
