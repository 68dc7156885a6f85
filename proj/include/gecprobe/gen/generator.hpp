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

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <tuple>
#include <unordered_set>
#include <utility>
#include <vector>

#include "gecprobe/error.hpp"
#include "gecprobe/gen/grammar.hpp"
#include "gecprobe/rng.hpp"
#include "gecprobe/types.hpp"

namespace gecprobe::gen {

/// Counts and realizes paired derivations for one error type.
///
/// A paired derivation is a single tree of rule and lexeme choices in which
/// exactly one node expands an error rule. Realizing the tree once yields the
/// source; realizing it with that node swapped for its grammatical
/// counterpart (same lexemes, counterpart features and order) yields the
/// reference. Derivations are numbered 0..DerivationCount()-1 in a canonical
/// order, so sampling without replacement reduces to drawing distinct
/// indices.
class PairedGenerator {
 public:
  PairedGenerator(const Grammar& grammar, ErrorType type) : grammar_(grammar), type_(type) {
    grammar_.RequireFinite();
    if (!grammar_.HasErrorRule(type)) {
      Fail(ErrorKind::kGrammarIncomplete,
           "grammar has no error rule for " + std::string(gecprobe::ToString(type)));
    }
    auto it = grammar_.starts.find(type);
    if (it == grammar_.starts.end()) {
      Fail(ErrorKind::kGrammarIncomplete,
           "grammar has no start symbol for " + std::string(gecprobe::ToString(type)));
    }
    root_ = Key{it->second, it->second, true, false};
  }

  uint64_t DerivationCount() { return Count(root_); }

  /// Source and reference tokens of derivation `index`, first token
  /// capitalized.
  std::pair<Tokens, Tokens> Realize(uint64_t index) {
    if (index >= DerivationCount()) Fail(ErrorKind::kInvalidArgument, "derivation index out of range");
    Tokens src, ref;
    Unrank(root_, index, src, ref);
    if (!src.empty()) src[0] = Capitalize(src[0]);
    if (!ref.empty()) ref[0] = Capitalize(ref[0]);
    return {std::move(src), std::move(ref)};
  }

  ErrorType type() const { return type_; }

 private:
  struct Key {
    Instance src;
    Instance ref;
    bool need_error = false;
    bool strict = false;  // terminal directly under an error rule

    friend bool operator<(const Key& a, const Key& b) {
      return std::tie(a.src, a.ref, a.need_error, a.strict) <
             std::tie(b.src, b.ref, b.need_error, b.strict);
    }
  };

  struct Option {
    std::vector<Key> children;
    std::vector<size_t> ref_order;  // child indices in reference order
    uint64_t count = 0;
  };

  static uint64_t Mul(uint64_t a, uint64_t b) {
    uint64_t out;
    if (__builtin_mul_overflow(a, b, &out)) {
      Fail(ErrorKind::kInvalidArgument, "derivation space exceeds 2^64");
    }
    return out;
  }
  static uint64_t Add(uint64_t a, uint64_t b) {
    uint64_t out;
    if (__builtin_add_overflow(a, b, &out)) {
      Fail(ErrorKind::kInvalidArgument, "derivation space exceeds 2^64");
    }
    return out;
  }

  bool IsTerminal(const Key& k) const { return CategoryFromSymbol(k.src.name).has_value(); }

  const std::vector<const LexicalEntry*>& Eligible(const Key& k) {
    auto it = eligible_.find(k);
    if (it != eligible_.end()) return it->second;
    std::vector<const LexicalEntry*> out;
    const Category c = *CategoryFromSymbol(k.src.name);
    const FeatureBundle fs = ToFeatures(k.src.values);
    const FeatureBundle fr = ToFeatures(k.ref.values);
    for (const LexicalEntry* e : grammar_.lexicon.OfCategory(c)) {
      if (TryInflect(*e, fs, k.strict) && TryInflect(*e, fr)) out.push_back(e);
    }
    return eligible_.emplace(k, std::move(out)).first->second;
  }

  const std::vector<Option>& Options(const Key& k) {
    auto it = options_.find(k);
    if (it != options_.end()) return it->second;
    std::vector<Option> out;
    for (size_t ri : grammar_.RulesFor(k.src.name)) {
      const GrammarRule& rule = grammar_.rules[ri];
      if (rule.IsError()) {
        if (k.need_error && rule.error == type_ && k.src == k.ref) AddErrorOptions(k, rule, out);
      } else {
        AddGrammaticalOptions(k, rule, out);
      }
    }
    for (Option& o : out) {
      o.count = 1;
      for (const Key& c : o.children) o.count = Mul(o.count, Count(c));
    }
    return options_.emplace(k, std::move(out)).first->second;
  }

  void AddGrammaticalOptions(const Key& k, const GrammarRule& rule, std::vector<Option>& out) {
    Bindings bs, br;
    if (!Unify(rule.lhs.args, k.src.values, bs) || !Unify(rule.lhs.args, k.ref.values, br)) return;
    const auto free = FreeVariables(rule, bs);
    ForEachAssignment(free, {}, [&](const Bindings& assignment) {
      Bindings s = bs, r = br;
      s.insert(s.end(), assignment.begin(), assignment.end());
      r.insert(r.end(), assignment.begin(), assignment.end());
      Option base;
      for (size_t i = 0; i < rule.rhs.size(); ++i) {
        base.children.push_back(Key{Resolve(rule.rhs[i], s), Resolve(rule.rhs[i], r), false, false});
        base.ref_order.push_back(i);
      }
      if (!k.need_error) {
        out.push_back(std::move(base));
        return;
      }
      for (size_t p = 0; p < base.children.size(); ++p) {
        if (rule.rhs[p].IsTerminal()) continue;
        Option o = base;
        o.children[p].need_error = true;
        out.push_back(std::move(o));
      }
    });
  }

  void AddErrorOptions(const Key& k, const GrammarRule& rule, std::vector<Option>& out) {
    const GrammarRule& counterpart = grammar_.rules[rule.counterpart];
    Bindings be;
    if (!Unify(rule.lhs.args, k.src.values, be)) return;
    const auto free = FreeVariables(rule, be);
    ForEachAssignment(free, be, [&](const Bindings& e_bind) {
      std::vector<Instance> src_slots;
      for (const Symbol& s : rule.rhs) src_slots.push_back(Resolve(s, e_bind));
      Bindings bg;
      if (!Unify(counterpart.lhs.args, k.ref.values, bg)) return;
      // Variables the counterpart leaves open take the values carried by
      // the aligned error-rule slot, leftmost slot first.
      for (size_t m = 0; m < counterpart.rhs.size(); ++m) {
        const size_t kslot = SlotFor(rule, m);
        const Symbol& gs = counterpart.rhs[m];
        for (size_t a = 0; a < gs.args.size(); ++a) {
          if (gs.args[a].is_var && !Lookup(bg, gs.args[a].var) &&
              a < src_slots[kslot].values.size()) {
            bg.emplace_back(gs.args[a].var, src_slots[kslot].values[a]);
          }
        }
      }
      const auto open = FreeVariables(counterpart, bg);
      ForEachAssignment(open, bg, [&](const Bindings& g_bind) {
        Option o;
        for (size_t kslot = 0; kslot < rule.rhs.size(); ++kslot) {
          Instance ref = Resolve(counterpart.rhs[rule.aligned_slot[kslot]], g_bind);
          o.children.push_back(Key{src_slots[kslot], std::move(ref), false, rule.rhs[kslot].IsTerminal()});
        }
        for (size_t m = 0; m < counterpart.rhs.size(); ++m) o.ref_order.push_back(SlotFor(rule, m));
        out.push_back(std::move(o));
      });
    });
  }

  static size_t SlotFor(const GrammarRule& rule, size_t counterpart_slot) {
    for (size_t k = 0; k < rule.aligned_slot.size(); ++k) {
      if (rule.aligned_slot[k] == counterpart_slot) return k;
    }
    Fail(ErrorKind::kGrammarIncomplete, "unaligned counterpart slot");
  }

  uint64_t Count(const Key& k) {
    auto it = counts_.find(k);
    if (it != counts_.end()) return it->second;
    uint64_t total = 0;
    if (IsTerminal(k)) {
      total = k.need_error ? 0 : Eligible(k).size();
    } else {
      for (const Option& o : Options(k)) total = Add(total, o.count);
    }
    counts_[k] = total;
    return total;
  }

  void Unrank(const Key& k, uint64_t index, Tokens& src, Tokens& ref) {
    if (IsTerminal(k)) {
      const LexicalEntry* e = Eligible(k)[index];
      src.push_back(Inflect(*e, ToFeatures(k.src.values), k.strict));
      ref.push_back(Inflect(*e, ToFeatures(k.ref.values)));
      return;
    }
    for (const Option& o : Options(k)) {
      if (index >= o.count) {
        index -= o.count;
        continue;
      }
      const size_t n = o.children.size();
      std::vector<uint64_t> digit(n);
      for (size_t i = n; i-- > 0;) {
        const uint64_t radix = Count(o.children[i]);
        digit[i] = index % radix;
        index /= radix;
      }
      std::vector<Tokens> child_src(n), child_ref(n);
      for (size_t i = 0; i < n; ++i) Unrank(o.children[i], digit[i], child_src[i], child_ref[i]);
      for (size_t i = 0; i < n; ++i) src.insert(src.end(), child_src[i].begin(), child_src[i].end());
      for (size_t i : o.ref_order) ref.insert(ref.end(), child_ref[i].begin(), child_ref[i].end());
      return;
    }
    Fail(ErrorKind::kInvalidArgument, "derivation index out of range");
  }

  const Grammar& grammar_;
  ErrorType type_;
  Key root_;
  std::map<Key, uint64_t> counts_;
  std::map<Key, std::vector<Option>> options_;
  std::map<Key, std::vector<const LexicalEntry*>> eligible_;
};

/// The single edit covering the region where source and reference differ.
inline Edit DifferingRegion(const Tokens& src, const Tokens& ref, std::string type_label) {
  size_t prefix = 0;
  while (prefix < src.size() && prefix < ref.size() && src[prefix] == ref[prefix]) ++prefix;
  size_t suffix = 0;
  while (suffix < src.size() - prefix && suffix < ref.size() - prefix &&
         src[src.size() - 1 - suffix] == ref[ref.size() - 1 - suffix]) {
    ++suffix;
  }
  Edit e;
  e.start = prefix;
  e.end = src.size() - suffix;
  e.correction.assign(ref.begin() + static_cast<std::ptrdiff_t>(prefix),
                      ref.end() - static_cast<std::ptrdiff_t>(suffix));
  e.type_label = std::move(type_label);
  return e;
}

inline SentencePair MakeSyntheticPair(Tokens src, Tokens ref, ErrorType type) {
  SentencePair p;
  p.gold_edits.push_back(DifferingRegion(src, ref, std::string(gecprobe::ToString(type))));
  p.source = std::move(src);
  p.reference = std::move(ref);
  p.error_type = type;
  p.noisy = false;
  p.origin = Origin::kSynthetic;
  return p;
}

/// One random paired derivation.
inline SentencePair DerivePair(const Grammar& grammar, ErrorType type, uint64_t seed) {
  PairedGenerator gen(grammar, type);
  const uint64_t total = gen.DerivationCount();
  if (total == 0) Fail(ErrorKind::kCapacityExceeded, "grammar derives no sentence pairs");
  Rng rng(seed);
  SparsePermutation order(total, rng);
  while (!order.Exhausted()) {
    auto [src, ref] = gen.Realize(order.Draw());
    if (src != ref) return MakeSyntheticPair(std::move(src), std::move(ref), type);
  }
  Fail(ErrorKind::kCapacityExceeded, "every derivation realizes identical source and reference");
}

/// `count` distinct (source, reference) pairs drawn without replacement.
inline Corpus GenerateCorpus(const Grammar& grammar, ErrorType type, size_t count, uint64_t seed) {
  if (count < 1) Fail(ErrorKind::kInvalidArgument, "count must be at least 1");
  PairedGenerator gen(grammar, type);
  const uint64_t total = gen.DerivationCount();
  if (total < count) {
    Fail(ErrorKind::kCapacityExceeded, "grammar derives " + std::to_string(total) +
                                           " pairs, fewer than the requested " +
                                           std::to_string(count));
  }
  Rng rng(seed);
  SparsePermutation order(total, rng);
  std::unordered_set<std::string> seen;
  Corpus out;
  out.reserve(count);
  while (out.size() < count && !order.Exhausted()) {
    auto [src, ref] = gen.Realize(order.Draw());
    if (src == ref) continue;
    if (!seen.insert(JoinTokens(src) + '\t' + JoinTokens(ref)).second) continue;
    out.push_back(MakeSyntheticPair(std::move(src), std::move(ref), type));
  }
  if (out.size() < count) {
    Fail(ErrorKind::kCapacityExceeded, "grammar derives only " + std::to_string(out.size()) +
                                           " distinct pairs, fewer than the requested " +
                                           std::to_string(count));
  }
  return out;
}

/// Every distinct derivable pair, in derivation-index order.
inline Corpus EnumerateAll(const Grammar& grammar, ErrorType type) {
  PairedGenerator gen(grammar, type);
  const uint64_t total = gen.DerivationCount();
  std::unordered_set<std::string> seen;
  Corpus out;
  for (uint64_t i = 0; i < total; ++i) {
    auto [src, ref] = gen.Realize(i);
    if (src == ref) continue;
    if (!seen.insert(JoinTokens(src) + '\t' + JoinTokens(ref)).second) continue;
    out.push_back(MakeSyntheticPair(std::move(src), std::move(ref), type));
  }
  return out;
}

}  // namespace gecprobe::gen
