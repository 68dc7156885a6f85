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

// Known/Unknown train/dev/test partitions over error-correction patterns.
//
// Known: every test pattern also occurs in train. Unknown: no test pattern
// occurs in train or dev. In both settings dev patterns are a subset of
// train patterns, so dev-based checkpoint selection never sees an unseen
// pattern.
//
// Unknown test patterns come from one of two rules:
//  * frequency (real corpora): patterns seen once go to test, patterns seen
//    at least twice feed train and dev;
//  * hold-out (synthetic corpora, or whenever patterns are listed in the
//    spec): whole pattern classes are withheld for test.
//
// Every random choice goes through one seeded shuffle of the canonically
// sorted corpus.

#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <tuple>
#include <unordered_set>
#include <vector>

#include "gecprobe/edits/align.hpp"
#include "gecprobe/error.hpp"
#include "gecprobe/rng.hpp"
#include "gecprobe/types.hpp"

namespace gecprobe::splits {

enum class Setting { kKnown, kUnknown };

inline std::string_view ToString(Setting s) { return s == Setting::kKnown ? "known" : "unknown"; }

inline Setting ParseSetting(std::string_view s) {
  if (s == "known") return Setting::kKnown;
  if (s == "unknown") return Setting::kUnknown;
  Fail(ErrorKind::kInvalidArgument, "setting must be known or unknown, got " + std::string(s));
}

enum class Partition { kTrain, kDev, kTest };

inline std::string_view ToString(Partition p) {
  switch (p) {
    case Partition::kTrain: return "train";
    case Partition::kDev: return "dev";
    case Partition::kTest: return "test";
  }
  return "?";
}

struct SplitSpec {
  Setting setting = Setting::kKnown;
  ErrorType error_type = ErrorType::kVerbSva;
  size_t train_size = 1;
  size_t dev_size = 1;
  size_t test_size = 1;
  uint64_t seed = 0;
  // Unknown setting: patterns to withhold. Empty selects the rule by origin.
  std::vector<ErrorCorrectionPattern> held_out;
};

using PatternIndex = std::map<ErrorCorrectionPattern, std::set<Partition>>;

struct DatasetBundle {
  Corpus train;
  Corpus dev;
  Corpus test;
  Setting setting = Setting::kKnown;
  ErrorType error_type = ErrorType::kVerbSva;
  PatternIndex pattern_index;
  std::vector<ErrorCorrectionPattern> held_out;  // patterns withheld for test
};

inline std::set<ErrorCorrectionPattern> PatternSet(const Corpus& pairs) {
  std::set<ErrorCorrectionPattern> out;
  for (const auto& p : pairs) out.insert(edits::PatternOf(p));
  return out;
}

inline PatternIndex BuildPatternIndex(const DatasetBundle& b) {
  PatternIndex index;
  for (const auto& p : b.train) index[edits::PatternOf(p)].insert(Partition::kTrain);
  for (const auto& p : b.dev) index[edits::PatternOf(p)].insert(Partition::kDev);
  for (const auto& p : b.test) index[edits::PatternOf(p)].insert(Partition::kTest);
  return index;
}

namespace detail {

inline std::string PairKey(const SentencePair& p) {
  return JoinTokens(p.source) + '\t' + JoinTokens(p.reference);
}

/// Distinct (source, reference) pairs in canonical order, then shuffled.
inline Corpus CanonicalShuffle(const Corpus& corpus, uint64_t seed) {
  std::vector<size_t> idx(corpus.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::vector<std::string> keys;
  keys.reserve(corpus.size());
  for (const auto& p : corpus) keys.push_back(PairKey(p));
  std::stable_sort(idx.begin(), idx.end(), [&](size_t a, size_t b) { return keys[a] < keys[b]; });
  Corpus out;
  out.reserve(corpus.size());
  for (size_t k = 0; k < idx.size(); ++k) {
    if (k > 0 && keys[idx[k]] == keys[idx[k - 1]]) continue;
    out.push_back(corpus[idx[k]]);
  }
  Rng rng(seed);
  rng.Shuffle(out);
  return out;
}

[[noreturn]] inline void Infeasible(const SplitSpec& spec, const std::string& what) {
  Fail(ErrorKind::kInfeasibleSplit,
       std::string(ToString(spec.setting)) + " split (" + std::to_string(spec.train_size) + "/" +
           std::to_string(spec.dev_size) + "/" + std::to_string(spec.test_size) + "): " + what);
}

struct Pool {
  std::vector<SentencePair> pairs;
  std::vector<ErrorCorrectionPattern> patterns;
  std::vector<bool> taken;
  std::map<ErrorCorrectionPattern, size_t> remaining;

  explicit Pool(std::vector<SentencePair> ps) : pairs(std::move(ps)), taken(pairs.size(), false) {
    for (const auto& p : pairs) {
      patterns.push_back(edits::PatternOf(p));
      ++remaining[patterns.back()];
    }
  }

  /// Takes up to `n` pairs in pool order whose pattern keeps at least one
  /// untaken occurrence afterwards.
  Corpus TakeKeepingOne(size_t n) {
    Corpus out;
    for (size_t i = 0; i < pairs.size() && out.size() < n; ++i) {
      if (taken[i] || remaining[patterns[i]] < 2) continue;
      taken[i] = true;
      --remaining[patterns[i]];
      out.push_back(pairs[i]);
    }
    return out;
  }

  /// Takes one pair per required pattern, then fills to `n` in pool order.
  Corpus TakeCovering(const std::set<ErrorCorrectionPattern>& required, size_t n, bool& ok) {
    Corpus out;
    std::set<ErrorCorrectionPattern> covered;
    for (size_t i = 0; i < pairs.size(); ++i) {
      if (taken[i] || !required.count(patterns[i]) || covered.count(patterns[i])) continue;
      covered.insert(patterns[i]);
      taken[i] = true;
      --remaining[patterns[i]];
      out.push_back(pairs[i]);
    }
    ok = covered.size() == required.size() && out.size() <= n;
    for (size_t i = 0; i < pairs.size() && out.size() < n; ++i) {
      if (taken[i]) continue;
      taken[i] = true;
      --remaining[patterns[i]];
      out.push_back(pairs[i]);
    }
    ok = ok && out.size() == n;
    return out;
  }
};

inline void CheckSpec(const SplitSpec& spec, const Corpus& corpus) {
  if (spec.train_size < 1 || spec.dev_size < 1 || spec.test_size < 1) {
    Fail(ErrorKind::kInvalidArgument, "train, dev and test sizes must all be at least 1");
  }
  if (corpus.size() < spec.train_size + spec.dev_size + spec.test_size) {
    Infeasible(spec, "corpus has only " + std::to_string(corpus.size()) + " pairs");
  }
}

/// Fills dev then train from `pool`, keeping dev patterns inside train and
/// covering `also_required` (Known test patterns) in train.
inline void FillTrainDev(const SplitSpec& spec, Pool& pool,
                         const std::set<ErrorCorrectionPattern>& also_required, DatasetBundle& b) {
  b.dev = pool.TakeKeepingOne(spec.dev_size);
  if (b.dev.size() < spec.dev_size) {
    Infeasible(spec, "only " + std::to_string(b.dev.size()) +
                         " dev pairs have a pattern that also remains for train");
  }
  std::set<ErrorCorrectionPattern> required = also_required;
  for (const auto& p : b.dev) required.insert(edits::PatternOf(p));
  bool ok = false;
  b.train = pool.TakeCovering(required, spec.train_size, ok);
  if (!ok) {
    Infeasible(spec, "train cannot hold " + std::to_string(spec.train_size) +
                         " pairs covering the " + std::to_string(required.size()) +
                         " dev/test patterns");
  }
}

inline DatasetBundle Finish(const SplitSpec& spec, DatasetBundle b) {
  b.setting = spec.setting;
  b.error_type = spec.error_type;
  b.pattern_index = BuildPatternIndex(b);
  return b;
}

}  // namespace detail

/// Unknown setting: test patterns never occur in train or dev.
inline DatasetBundle BuildUnknown(const Corpus& corpus, const SplitSpec& spec) {
  using namespace detail;
  CheckSpec(spec, corpus);
  const Corpus shuffled = CanonicalShuffle(corpus, spec.seed);
  std::map<ErrorCorrectionPattern, size_t> freq;
  for (const auto& p : shuffled) ++freq[edits::PatternOf(p)];

  const bool synthetic = std::all_of(shuffled.begin(), shuffled.end(),
                                     [](const SentencePair& p) { return p.origin == Origin::kSynthetic; });
  std::set<ErrorCorrectionPattern> held;
  DatasetBundle b;
  if (!spec.held_out.empty()) {
    held.insert(spec.held_out.begin(), spec.held_out.end());
  } else if (synthetic) {
    // Withhold whole pattern classes, visited in seeded order, until they
    // cover the test size while leaving enough pairs for train and dev. The
    // first pass only takes patterns whose words all still occur outside the
    // held set; the second drops that requirement.
    std::vector<ErrorCorrectionPattern> order;
    for (const auto& [pattern, _] : freq) order.push_back(pattern);
    Rng rng(Rng::Derive(spec.seed, 1));
    rng.Shuffle(order);
    std::map<std::string, size_t> remaining;
    std::map<ErrorCorrectionPattern, std::map<std::string, size_t>> words;
    for (const auto& p : shuffled) {
      auto& w = words[edits::PatternOf(p)];
      for (const Tokens* side : {&p.source, &p.reference}) {
        for (const auto& t : *side) {
          ++remaining[t];
          ++w[t];
        }
      }
    }
    auto keeps_words = [&](const ErrorCorrectionPattern& pattern) {
      for (const auto& [t, n] : words[pattern]) {
        if (remaining[t] == n) return false;
      }
      return true;
    };
    size_t held_pairs = 0;
    const size_t need_rest = spec.train_size + spec.dev_size;
    for (const bool familiar : {true, false}) {
      for (const auto& pattern : order) {
        if (held_pairs >= spec.test_size) break;
        if (held.count(pattern) || held_pairs + freq[pattern] + need_rest > shuffled.size()) continue;
        if (familiar && !keeps_words(pattern)) continue;
        held.insert(pattern);
        held_pairs += freq[pattern];
        for (const auto& [t, n] : words[pattern]) remaining[t] -= n;
      }
    }
  } else {
    for (const auto& [pattern, n] : freq) {
      if (n == 1) held.insert(pattern);
    }
  }

  Corpus test_pool, rest;
  for (const auto& p : shuffled) (held.count(edits::PatternOf(p)) ? test_pool : rest).push_back(p);
  if (held.empty() || test_pool.size() < spec.test_size) {
    Infeasible(spec, "only " + std::to_string(test_pool.size()) +
                         " pairs carry held-out (unseen) patterns");
  }
  b.test.assign(test_pool.begin(), test_pool.begin() + static_cast<std::ptrdiff_t>(spec.test_size));
  // Frequency rule: only patterns with duplicates are eligible for train.
  if (spec.held_out.empty() && !synthetic) {
    Corpus dup;
    for (const auto& p : rest) {
      if (freq[edits::PatternOf(p)] >= 2) dup.push_back(p);
    }
    rest = std::move(dup);
  }
  Pool pool(std::move(rest));
  FillTrainDev(spec, pool, {}, b);
  const auto test_patterns = PatternSet(b.test);
  b.held_out.assign(test_patterns.begin(), test_patterns.end());
  return Finish(spec, std::move(b));
}

/// Known setting: every test pattern keeps at least one train occurrence.
inline DatasetBundle BuildKnown(const Corpus& corpus, const SplitSpec& spec) {
  using namespace detail;
  CheckSpec(spec, corpus);
  const Corpus shuffled = CanonicalShuffle(corpus, spec.seed);
  std::map<ErrorCorrectionPattern, size_t> freq;
  for (const auto& p : shuffled) ++freq[edits::PatternOf(p)];
  Corpus repeated;
  for (const auto& p : shuffled) {
    if (freq[edits::PatternOf(p)] >= 2) repeated.push_back(p);
  }
  if (repeated.empty()) Infeasible(spec, "no pattern occurs at least twice");
  Pool pool(std::move(repeated));
  DatasetBundle b;
  b.test = pool.TakeKeepingOne(spec.test_size);
  if (b.test.size() < spec.test_size) {
    Infeasible(spec, "only " + std::to_string(b.test.size()) +
                         " test pairs can be drawn while keeping their pattern in train");
  }
  FillTrainDev(spec, pool, PatternSet(b.test), b);
  return Finish(spec, std::move(b));
}

inline DatasetBundle BuildSplit(const Corpus& corpus, const SplitSpec& spec) {
  return spec.setting == Setting::kKnown ? BuildKnown(corpus, spec) : BuildUnknown(corpus, spec);
}

/// Adds `k` donor pairs carrying `pattern` to train and restricts test to
/// that pattern.
inline DatasetBundle InjectPatterns(const DatasetBundle& bundle, const ErrorCorrectionPattern& pattern,
                                    size_t k, const Corpus& donor) {
  if (bundle.setting != Setting::kUnknown) {
    Fail(ErrorKind::kInvalidArgument, "pattern injection expects an unknown-setting bundle");
  }
  DatasetBundle out = bundle;
  out.test.clear();
  std::unordered_set<std::string> excluded;
  for (const auto& p : bundle.test) {
    excluded.insert(detail::PairKey(p));
    if (edits::PatternOf(p) == pattern) out.test.push_back(p);
  }
  if (out.test.empty()) {
    Fail(ErrorKind::kInvalidArgument, "test has no pairs with pattern '" + edits::ToString(pattern) + "'");
  }
  for (const auto& p : bundle.train) excluded.insert(detail::PairKey(p));
  for (const auto& p : bundle.dev) excluded.insert(detail::PairKey(p));
  size_t added = 0;
  for (const auto& p : donor) {
    if (added == k) break;
    if (p.gold_edits.size() != 1 || edits::PatternOf(p) != pattern) continue;
    if (!excluded.insert(detail::PairKey(p)).second) continue;
    out.train.push_back(p);
    ++added;
  }
  if (added < k) {
    Fail(ErrorKind::kInsufficientDonors, "donor corpus supplies " + std::to_string(added) +
                                             " unused pairs with pattern '" +
                                             edits::ToString(pattern) + "', " + std::to_string(k) +
                                             " requested");
  }
  out.pattern_index = BuildPatternIndex(out);
  return out;
}

// ---------------------------------------------------------------------------
// Invariant checks, run before bundles are written.

/// Empty when the bundle satisfies its setting's invariants, otherwise a
/// description of the first violation.
inline std::string Violation(const DatasetBundle& b) {
  const auto train = PatternSet(b.train);
  const auto dev = PatternSet(b.dev);
  const auto test = PatternSet(b.test);
  for (const auto& p : dev) {
    if (!train.count(p)) return "dev pattern '" + edits::ToString(p) + "' missing from train";
  }
  for (const auto& p : test) {
    const bool seen = train.count(p) || dev.count(p);
    if (b.setting == Setting::kUnknown && seen) {
      return "unknown test pattern '" + edits::ToString(p) + "' occurs in train/dev";
    }
    if (b.setting == Setting::kKnown && !train.count(p)) {
      return "known test pattern '" + edits::ToString(p) + "' missing from train";
    }
  }
  std::unordered_set<std::string> keys;
  for (const Corpus* part : {&b.train, &b.dev, &b.test}) {
    for (const auto& p : *part) {
      if (!keys.insert(detail::PairKey(p)).second) {
        return "pair '" + JoinTokens(p.source) + "' occurs twice across partitions";
      }
    }
  }
  return {};
}

}  // namespace gecprobe::splits
