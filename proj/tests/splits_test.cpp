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

#include <gtest/gtest.h>

#include <filesystem>
#include <functional>
#include <set>
#include <string>

#include "gecprobe/edits/align.hpp"
#include "gecprobe/gen/generator.hpp"
#include "gecprobe/splits/bundle_io.hpp"
#include "gecprobe/splits/splits.hpp"

namespace gecprobe::splits {
namespace {

// A pair whose single edit rewrites `target` into `correction` after a
// unique context prefix.
SentencePair Pair(const std::string& context, const std::string& target,
                  const std::string& correction, Origin origin = Origin::kReal) {
  SentencePair p;
  p.source = SplitTokens(context + " " + target + " end");
  p.reference = SplitTokens(context + " " + correction + " end");
  p.gold_edits = edits::Align(p.source, p.reference, "R:VERB:SVA");
  p.error_type = ErrorType::kVerbSva;
  p.origin = origin;
  return p;
}

// Brute force over every (test, train/dev) pattern pair.
bool PatternsShared(const Corpus& a, const Corpus& b) {
  for (const auto& x : a) {
    for (const auto& y : b) {
      if (edits::PatternOf(x) == edits::PatternOf(y)) return true;
    }
  }
  return false;
}

bool EveryPatternIn(const Corpus& needles, const Corpus& hay) {
  for (const auto& x : needles) {
    bool found = false;
    for (const auto& y : hay) found = found || edits::PatternOf(x) == edits::PatternOf(y);
    if (!found) return false;
  }
  return true;
}

void ExpectDisjointPairs(const DatasetBundle& b) {
  std::multiset<std::string> keys;
  for (const Corpus* c : {&b.train, &b.dev, &b.test}) {
    for (const auto& p : *c) keys.insert(JoinTokens(p.source) + "|" + JoinTokens(p.reference));
  }
  for (const auto& k : keys) EXPECT_EQ(keys.count(k), 1u) << k;
}

ErrorKind KindOf(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorKind::kIo;
}

SplitSpec Spec(Setting s, size_t train, size_t dev, size_t test, uint64_t seed = 1) {
  SplitSpec spec;
  spec.setting = s;
  spec.train_size = train;
  spec.dev_size = dev;
  spec.test_size = test;
  spec.seed = seed;
  return spec;
}

TEST(Unknown, ToyCorpusFrequencyRule) {
  const Corpus c = {Pair("a1", "p1", "q1"), Pair("a2", "p1", "q1"), Pair("a3", "p2", "q2"),
                    Pair("a4", "p2", "q2"), Pair("a5", "p3", "q3")};
  for (uint64_t seed = 0; seed < 10; ++seed) {
    const auto b = BuildUnknown(c, Spec(Setting::kUnknown, 3, 1, 1, seed));
    ASSERT_EQ(b.test.size(), 1u);
    EXPECT_EQ(edits::ToString(edits::PatternOf(b.test[0])), "p3 => q3");
    EXPECT_EQ(b.train.size(), 3u);
    EXPECT_EQ(b.dev.size(), 1u);
    EXPECT_FALSE(PatternsShared(b.test, b.train));
    EXPECT_FALSE(PatternsShared(b.test, b.dev));
    EXPECT_TRUE(EveryPatternIn(b.dev, b.train));
    EXPECT_TRUE(Violation(b).empty()) << Violation(b);
    EXPECT_EQ(b.pattern_index.at(edits::PatternOf(b.test[0])), std::set<Partition>{Partition::kTest});
  }
}

TEST(Unknown, NoSingletonsIsInfeasible) {
  const Corpus c = {Pair("a1", "p1", "q1"), Pair("a2", "p1", "q1"), Pair("a3", "p2", "q2"),
                    Pair("a4", "p2", "q2")};
  EXPECT_EQ(KindOf([&] { BuildUnknown(c, Spec(Setting::kUnknown, 2, 1, 1)); }),
            ErrorKind::kInfeasibleSplit);
}

TEST(Unknown, TooSmallCorpusIsInfeasible) {
  const Corpus c = {Pair("a1", "p1", "q1"), Pair("a2", "p1", "q1"), Pair("a5", "p3", "q3")};
  EXPECT_EQ(KindOf([&] { BuildUnknown(c, Spec(Setting::kUnknown, 5, 1, 1)); }),
            ErrorKind::kInfeasibleSplit);
  EXPECT_EQ(KindOf([&] { BuildUnknown(c, Spec(Setting::kUnknown, 1, 0, 1)); }),
            ErrorKind::kInvalidArgument);
}

TEST(Known, ToyCorpus) {
  const Corpus c = {Pair("a1", "p1", "q1"), Pair("a2", "p1", "q1"), Pair("a3", "p1", "q1")};
  const auto b = BuildKnown(c, Spec(Setting::kKnown, 1, 1, 1));
  EXPECT_EQ(b.train.size(), 1u);
  EXPECT_EQ(b.dev.size(), 1u);
  EXPECT_EQ(b.test.size(), 1u);
  EXPECT_TRUE(EveryPatternIn(b.test, b.train));
  ExpectDisjointPairs(b);
}

TEST(Known, AllSingletonsIsInfeasible) {
  const Corpus c = {Pair("a1", "p1", "q1"), Pair("a2", "p2", "q2"), Pair("a3", "p3", "q3"),
                    Pair("a4", "p4", "q4")};
  EXPECT_EQ(KindOf([&] { BuildKnown(c, Spec(Setting::kKnown, 2, 1, 1)); }),
            ErrorKind::kInfeasibleSplit);
}

TEST(Known, TestNeverTakesLastOccurrence) {
  // p1 x2, p2 x2: test may take at most one of each.
  const Corpus c = {Pair("a1", "p1", "q1"), Pair("a2", "p1", "q1"), Pair("a3", "p2", "q2"),
                    Pair("a4", "p2", "q2"), Pair("a5", "p2", "q2")};
  for (uint64_t seed = 0; seed < 20; ++seed) {
    const auto b = BuildKnown(c, Spec(Setting::kKnown, 2, 1, 2, seed));
    EXPECT_TRUE(EveryPatternIn(b.test, b.train));
    EXPECT_TRUE(EveryPatternIn(b.dev, b.train));
    ExpectDisjointPairs(b);
  }
  EXPECT_EQ(KindOf([&] { BuildKnown(c, Spec(Setting::kKnown, 1, 1, 3)); }),
            ErrorKind::kInfeasibleSplit);
}

TEST(Splits, DuplicatePairsNeverStraddlePartitions) {
  Corpus c;
  for (int i = 0; i < 20; ++i) {
    c.push_back(Pair("ctx" + std::to_string(i % 6), "p" + std::to_string(i % 3), "q"));
  }
  const auto b = BuildKnown(c, Spec(Setting::kKnown, 2, 1, 1));
  ExpectDisjointPairs(b);
}

// Random corpora: Zipf-like pattern frequencies over a small vocabulary.
Corpus RandomCorpus(Rng& rng, size_t n, Origin origin) {
  Corpus c;
  const size_t patterns = 5 + rng.Below(40);
  for (size_t i = 0; i < n; ++i) {
    const size_t r = rng.Below(patterns);
    const size_t k = rng.Below(r + 1);
    c.push_back(Pair("c" + std::to_string(i) + " x" + std::to_string(rng.Below(5)),
                     "t" + std::to_string(k), "u" + std::to_string(k % 7), origin));
  }
  return c;
}

TEST(Splits, RandomizedInvariants) {
  Rng rng(77);
  int built = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const Origin origin = trial % 2 ? Origin::kReal : Origin::kSynthetic;
    const Corpus c = RandomCorpus(rng, 60 + rng.Below(200), origin);
    const size_t test = 1 + rng.Below(10), dev = 1 + rng.Below(5), train = 10 + rng.Below(30);
    for (Setting s : {Setting::kKnown, Setting::kUnknown}) {
      try {
        const auto b = BuildSplit(c, Spec(s, train, dev, test, static_cast<uint64_t>(trial)));
        ++built;
        EXPECT_EQ(b.train.size(), train);
        EXPECT_EQ(b.dev.size(), dev);
        EXPECT_EQ(b.test.size(), test);
        EXPECT_TRUE(EveryPatternIn(b.dev, b.train));
        if (s == Setting::kKnown) {
          EXPECT_TRUE(EveryPatternIn(b.test, b.train));
        } else {
          EXPECT_FALSE(PatternsShared(b.test, b.train));
          EXPECT_FALSE(PatternsShared(b.test, b.dev));
        }
        ExpectDisjointPairs(b);
        EXPECT_TRUE(Violation(b).empty());
      } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::kInfeasibleSplit);
      }
    }
  }
  EXPECT_GT(built, 80);
}

TEST(Splits, Determinism) {
  Rng rng(3);
  const Corpus c = RandomCorpus(rng, 300, Origin::kSynthetic);
  const auto a = BuildUnknown(c, Spec(Setting::kUnknown, 100, 10, 20, 5));
  const auto b = BuildUnknown(c, Spec(Setting::kUnknown, 100, 10, 20, 5));
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.dev, b.dev);
  EXPECT_EQ(a.test, b.test);
  // Input order does not matter: sampling starts from a canonical sort.
  Corpus reversed(c.rbegin(), c.rend());
  const auto r = BuildUnknown(reversed, Spec(Setting::kUnknown, 100, 10, 20, 5));
  EXPECT_EQ(a.test, r.test);
  EXPECT_EQ(a.train, r.train);
}

class SyntheticSplits : public ::testing::TestWithParam<ErrorType> {};

TEST_P(SyntheticSplits, HeldOutPatternClasses) {
  const auto g = gen::LoadGrammar(std::string(GECPROBE_SOURCE_DIR) + "/grammars/english.cfg");
  const Corpus c = gen::GenerateCorpus(g, GetParam(), 3000, 11);
  const auto known = BuildKnown(c, Spec(Setting::kKnown, 2000, 100, 400));
  EXPECT_TRUE(Violation(known).empty()) << Violation(known);
  const auto unknown = BuildUnknown(c, Spec(Setting::kUnknown, 2000, 100, 400));
  EXPECT_TRUE(Violation(unknown).empty()) << Violation(unknown);
  EXPECT_EQ(unknown.test.size(), 400u);
  EXPECT_FALSE(unknown.held_out.empty());
}

INSTANTIATE_TEST_SUITE_P(AllTypes, SyntheticSplits, ::testing::ValuesIn(kAllErrorTypes),
                         [](const auto& info) {
                           std::string s(ToString(info.param));
                           for (char& ch : s) {
                             if (ch == ':') ch = '_';
                           }
                           return s;
                         });

TEST(Unknown, ExplicitHeldOutPattern) {
  const auto g = gen::LoadGrammar(std::string(GECPROBE_SOURCE_DIR) + "/grammars/english.cfg");
  const Corpus c = gen::GenerateCorpus(g, ErrorType::kVerbSva, 3000, 4);
  SplitSpec spec = Spec(Setting::kUnknown, 2000, 100, 50);
  spec.held_out = {edits::ParsePattern("hit => hits")};
  const auto b = BuildUnknown(c, spec);
  for (const auto& p : b.test) EXPECT_EQ(edits::ToString(edits::PatternOf(p)), "hit => hits");
  EXPECT_TRUE(Violation(b).empty());
}

TEST(Inject, AddsExactlyKDonorsAndRestrictsTest) {
  const auto g = gen::LoadGrammar(std::string(GECPROBE_SOURCE_DIR) + "/grammars/english.cfg");
  const Corpus c = gen::GenerateCorpus(g, ErrorType::kVerbSva, 4000, 4);
  SplitSpec spec = Spec(Setting::kUnknown, 2000, 100, 200);
  const auto pattern = edits::ParsePattern("touch => touches");
  spec.held_out = {pattern, edits::ParsePattern("clean => cleans")};
  const auto base = BuildUnknown(c, spec);
  const Corpus donor = gen::GenerateCorpus(g, ErrorType::kVerbSva, 6000, 99);

  const auto k0 = InjectPatterns(base, pattern, 0, donor);
  EXPECT_EQ(k0.train, base.train);
  EXPECT_EQ(k0.dev, base.dev);
  ASSERT_FALSE(k0.test.empty());
  for (const auto& p : k0.test) EXPECT_EQ(edits::PatternOf(p), pattern);

  const auto k1 = InjectPatterns(base, pattern, 1, donor);
  const auto k2 = InjectPatterns(base, pattern, 2, donor);
  ASSERT_EQ(k1.train.size(), base.train.size() + 1);
  ASSERT_EQ(k2.train.size(), base.train.size() + 2);
  EXPECT_EQ(Corpus(k2.train.begin(), k2.train.end() - 1), k1.train);
  EXPECT_EQ(k1.test, k0.test);
  for (const auto& added : {k2.train[k2.train.size() - 2], k2.train.back()}) {
    EXPECT_EQ(edits::PatternOf(added), pattern);
    for (const auto& t : base.test) EXPECT_FALSE(added.source == t.source && added.reference == t.reference);
  }
  EXPECT_EQ(KindOf([&] { InjectPatterns(base, pattern, 100000, donor); }), ErrorKind::kInsufficientDonors);
  EXPECT_EQ(KindOf([&] { InjectPatterns(base, edits::ParsePattern("run => runs"), 1, donor); }),
            ErrorKind::kInvalidArgument);
}

TEST(BundleIo, RoundTrip) {
  Rng rng(8);
  const Corpus c = RandomCorpus(rng, 200, Origin::kSynthetic);
  const auto b = BuildUnknown(c, Spec(Setting::kUnknown, 50, 5, 5, 2));
  const auto dir = std::filesystem::temp_directory_path() / "gecprobe_bundle_io_test";
  std::filesystem::remove_all(dir);
  SaveBundle(b, 2, dir);
  const auto back = LoadBundle(dir);
  EXPECT_EQ(back.train, b.train);
  EXPECT_EQ(back.dev, b.dev);
  EXPECT_EQ(back.test, b.test);
  EXPECT_EQ(back.setting, b.setting);
  EXPECT_EQ(back.held_out, b.held_out);
  std::filesystem::remove_all(dir);
}

TEST(BundleIo, RefusesInvalidBundle) {
  DatasetBundle b;
  b.setting = Setting::kUnknown;
  b.train = {Pair("a", "p", "q")};
  b.test = {Pair("b", "p", "q")};
  EXPECT_EQ(KindOf([&] { SaveBundle(b, 0, std::filesystem::temp_directory_path() / "gecprobe_bad"); }),
            ErrorKind::kInfeasibleSplit);
}

}  // namespace
}  // namespace gecprobe::splits
