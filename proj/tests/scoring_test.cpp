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

#include <algorithm>
#include <functional>
#include <string>
#include <vector>

#include "gecprobe/edits/align.hpp"
#include "gecprobe/rng.hpp"
#include "gecprobe/scoring/score.hpp"

namespace gecprobe::scoring {
namespace {

Tokens T(const char* s) { return SplitTokens(s); }

SentencePair Gold(const char* src, const char* ref, bool noisy = false) {
  SentencePair p;
  p.source = T(src);
  p.reference = T(ref);
  p.gold_edits = edits::Align(p.source, p.reference, "R:VERB:SVA");
  p.noisy = noisy;
  return p;
}

// tp=2, fp=1, fn=2 across three sentences.
struct Fixture {
  Corpus pairs;
  std::vector<Tokens> hyps;
};

Fixture TwoOneTwo() {
  Fixture f;
  f.pairs = {Gold("He walk and she run", "He walks and she runs"),
             Gold("Every dog run quickly", "Every dog runs quickly"),
             Gold("Many dogs runs", "Many dogs run")};
  f.hyps = {T("He walks and she runs"), T("Every dogs run quickly"), T("Many dogs runs")};
  return f;
}

TEST(Score, FixtureTwoOneTwo) {
  const Fixture f = TwoOneTwo();
  for (Mode m : {Mode::kCorrection, Mode::kDetection}) {
    const auto r = Score(f.hyps, f.pairs, m);
    EXPECT_EQ(r.counts, (MatchCounts{2, 1, 2}));
    EXPECT_DOUBLE_EQ(r.precision, 2.0 / 3.0);
    EXPECT_DOUBLE_EQ(r.recall, 0.5);
    EXPECT_NEAR(r.f05, 0.625, 1e-12);
    EXPECT_EQ(Pct(r.precision), "66.67");
    EXPECT_EQ(Pct(r.recall), "50.00");
    EXPECT_EQ(Pct(r.f05), "62.50");
  }
}

TEST(Score, TrivialCases) {
  const Fixture f = TwoOneTwo();
  std::vector<Tokens> refs, srcs;
  for (const auto& p : f.pairs) {
    refs.push_back(p.reference);
    srcs.push_back(p.source);
  }
  const auto perfect = Score(refs, f.pairs);
  EXPECT_EQ(perfect.precision, 1.0);
  EXPECT_EQ(perfect.recall, 1.0);
  EXPECT_EQ(perfect.f05, 1.0);
  const auto none = Score(srcs, f.pairs);
  EXPECT_EQ(none.counts.tp, 0u);
  EXPECT_EQ(none.counts.fp, 0u);
  EXPECT_EQ(none.recall, 0.0);
  EXPECT_EQ(none.f05, 0.0);
}

TEST(Score, WrongCorrectionAtGoldLocation) {
  const Corpus pairs = {Gold("Every dog run quickly", "Every dog runs quickly")};
  const std::vector<Tokens> hyps = {T("Every dog runned quickly")};
  const auto det = Score(hyps, pairs, Mode::kDetection);
  const auto cor = Score(hyps, pairs, Mode::kCorrection);
  EXPECT_EQ(det.counts, (MatchCounts{1, 0, 0}));
  EXPECT_EQ(cor.counts, (MatchCounts{0, 1, 1}));
}

TEST(Score, DetectionSpanRules) {
  const Edit ins{2, 2, T("x"), ""}, sub{2, 4, T("y"), ""}, other{5, 6, T("z"), ""};
  EXPECT_TRUE(SpansOverlap(ins, sub));
  EXPECT_TRUE(SpansOverlap(sub, ins));
  EXPECT_FALSE(SpansOverlap(Edit{4, 4, {}, ""}, sub));
  EXPECT_TRUE(SpansOverlap(ins, Edit{2, 2, T("q"), ""}));
  EXPECT_FALSE(SpansOverlap(ins, Edit{3, 3, T("q"), ""}));
  EXPECT_TRUE(SpansOverlap(Edit{3, 6, {}, ""}, sub));
  EXPECT_FALSE(SpansOverlap(other, sub));
  ScoreOptions exact{Mode::kDetection, true};
  EXPECT_FALSE(EditsMatch(Edit{3, 4, T("y"), ""}, sub, exact));
  EXPECT_TRUE(EditsMatch(Edit{2, 4, T("w"), ""}, sub, exact));
}

TEST(Score, LengthMismatch) {
  const Fixture f = TwoOneTwo();
  try {
    Score({T("a")}, f.pairs);
    FAIL() << "expected LengthMismatch";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kLengthMismatch);
  }
}

// Independent oracle: maximum matching by exhaustive assignment of gold
// edits to distinct hypothesis edits.
size_t BruteForceMatches(const std::vector<Edit>& hyp, const std::vector<Edit>& gold, Mode mode) {
  auto ok = [&](const Edit& h, const Edit& g) {
    if (mode == Mode::kCorrection) return h.start == g.start && h.end == g.end && h.correction == g.correction;
    const auto lo = std::max(h.start, g.start);
    const auto hi = std::min(h.end, g.end);
    if (h.start == h.end && g.start == g.end) return h.start == g.start;
    if (h.start == h.end) return g.start <= h.start && h.start < g.end;
    if (g.start == g.end) return h.start <= g.start && g.start < h.end;
    return lo < hi;
  };
  std::vector<bool> used(hyp.size(), false);
  std::function<size_t(size_t)> best = [&](size_t gi) -> size_t {
    if (gi == gold.size()) return 0;
    size_t out = best(gi + 1);
    for (size_t k = 0; k < hyp.size(); ++k) {
      if (used[k] || !ok(hyp[k], gold[gi])) continue;
      used[k] = true;
      out = std::max(out, 1 + best(gi + 1));
      used[k] = false;
    }
    return out;
  };
  return best(0);
}

Tokens RandomTokens(Rng& rng, size_t max_len, size_t vocab) {
  Tokens t(1 + rng.Below(max_len));
  for (auto& w : t) w = "v" + std::to_string(rng.Below(vocab));
  return t;
}

Tokens Perturb(Rng& rng, Tokens t, size_t vocab) {
  const size_t n = 1 + rng.Below(3);
  for (size_t k = 0; k < n; ++k) {
    const uint64_t op = rng.Below(3);
    if (op == 0 && !t.empty()) {
      t[rng.Below(t.size())] = "v" + std::to_string(rng.Below(vocab));
    } else if (op == 1 && t.size() > 1) {
      t.erase(t.begin() + static_cast<std::ptrdiff_t>(rng.Below(t.size())));
    } else {
      t.insert(t.begin() + static_cast<std::ptrdiff_t>(rng.Below(t.size() + 1)),
               "v" + std::to_string(rng.Below(vocab)));
    }
  }
  return t;
}

struct RandomSet {
  Corpus pairs;
  std::vector<Tokens> hyps;
};

RandomSet MakeRandomSet(Rng& rng, size_t n) {
  RandomSet s;
  for (size_t i = 0; i < n; ++i) {
    SentencePair p;
    p.source = RandomTokens(rng, 10, 6);
    p.reference = Perturb(rng, p.source, 6);
    p.gold_edits = edits::Align(p.source, p.reference);
    p.noisy = rng.Bernoulli(0.3);
    const uint64_t kind = rng.Below(4);
    s.hyps.push_back(kind == 0 ? p.reference : kind == 1 ? p.source : Perturb(rng, p.source, 6));
    s.pairs.push_back(std::move(p));
  }
  return s;
}

TEST(Score, MatchesBruteForceOracle) {
  Rng rng(2024);
  for (int trial = 0; trial < 2000; ++trial) {
    const auto s = MakeRandomSet(rng, 1);
    const auto& p = s.pairs[0];
    const auto hyp = edits::Align(p.source, s.hyps[0]);
    for (Mode m : {Mode::kCorrection, Mode::kDetection}) {
      const MatchCounts c = SentenceCounts(s.hyps[0], p, {m, false});
      const size_t tp = BruteForceMatches(hyp, p.gold_edits, m);
      ASSERT_EQ(c.tp, tp) << JoinTokens(p.source) << " | " << JoinTokens(p.reference) << " | "
                          << JoinTokens(s.hyps[0]);
      ASSERT_EQ(c.fp, hyp.size() - tp);
      ASSERT_EQ(c.fn, p.gold_edits.size() - tp);
    }
  }
}

TEST(Score, DetectionDominatesCorrection) {
  Rng rng(7);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto s = MakeRandomSet(rng, 1 + rng.Below(20));
    const auto det = Score(s.hyps, s.pairs, Mode::kDetection);
    const auto cor = Score(s.hyps, s.pairs, Mode::kCorrection);
    ASSERT_GE(det.counts.tp, cor.counts.tp);
    ASSERT_GE(det.f05, cor.f05);
  }
}

TEST(Score, BoundsAndIdentity) {
  Rng rng(1);
  for (int trial = 0; trial < 5000; ++trial) {
    const MatchCounts c{rng.Below(20), rng.Below(20), rng.Below(20)};
    const auto r = MakeReport(Mode::kCorrection, c);
    for (double v : {r.precision, r.recall, r.f05}) {
      ASSERT_GE(v, 0.0);
      ASSERT_LE(v, 1.0);
    }
    ASSERT_EQ(r.f05 == 0.0, c.tp == 0);
    // Equal precision and recall whenever fp == fn.
    const auto sym = MakeReport(Mode::kCorrection, {c.tp, c.fp, c.fp});
    ASSERT_NEAR(sym.f05, sym.precision, 1e-12);
  }
}

TEST(Score, PermutationInvariance) {
  Rng rng(5);
  auto s = MakeRandomSet(rng, 60);
  const auto before = Stratify(s.hyps, s.pairs, StratifyBy::kLengthBucket);
  std::vector<size_t> order(s.pairs.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.Shuffle(order);
  RandomSet t;
  for (size_t i : order) {
    t.pairs.push_back(s.pairs[i]);
    t.hyps.push_back(s.hyps[i]);
  }
  const auto after = Stratify(t.hyps, t.pairs, StratifyBy::kLengthBucket);
  EXPECT_EQ(ToJson(before).dump(), ToJson(after).dump());
}

TEST(Stratify, NoiseStrata) {
  const Corpus pairs = {Gold("Every dog run", "Every dog runs", false),
                        Gold("Many dogs runs", "Many dogs run", true)};
  const std::vector<Tokens> hyps = {T("Every dog runs"), T("Many dogs runs")};
  const auto r = Stratify(hyps, pairs, StratifyBy::kNoise);
  ASSERT_EQ(r.strata.size(), 2u);
  EXPECT_GT(r.strata.at("noiseless").f05, r.strata.at("noisy").f05);

  const Corpus clean = {pairs[0]};
  const auto only = Stratify({hyps[0]}, clean, StratifyBy::kNoise);
  EXPECT_EQ(only.strata.count("noisy"), 0u);
  EXPECT_EQ(only.strata.at("noiseless").counts, only.counts);
}

TEST(Stratify, BucketsPartitionCounts) {
  Rng rng(11);
  const auto s = MakeRandomSet(rng, 300);
  for (auto by : {StratifyBy::kLengthBucket, StratifyBy::kNoise}) {
    const auto r = Stratify(s.hyps, s.pairs, by, {Mode::kDetection, false});
    MatchCounts sum;
    for (const auto& [key, sub] : r.strata) sum += sub.counts;
    EXPECT_EQ(sum, r.counts);
  }
  EXPECT_EQ(LengthBucketKey(1, 5), "001-005");
  EXPECT_EQ(LengthBucketKey(5, 5), "001-005");
  EXPECT_EQ(LengthBucketKey(6, 5), "006-010");
  EXPECT_EQ(LengthBucketKey(12, 10), "011-020");
}

TEST(Gap, ReferenceRows) {
  auto g = GapFromPercent("VERB:SVA", 99.61, 46.05);
  EXPECT_EQ(Fixed2(g.delta), "-53.56");
  g = GapFromPercent("VERB:SVA", 87.84, 6.28);
  EXPECT_EQ(Fixed2(g.delta), "-81.56");
  g = GapFromPercent("WO", 50.0, 50.0);
  EXPECT_EQ(g.delta, 0.0);
  EXPECT_EQ(Fixed2(g.delta), "0.00");
}

TEST(Gap, FromReportsAndTable) {
  const auto known = MakeReport(Mode::kCorrection, {9, 1, 1});
  const auto unknown = MakeReport(Mode::kCorrection, {3, 3, 7});
  const auto g = GapReport("MORPH", known, unknown);
  EXPECT_DOUBLE_EQ(g.known, 90.0);
  EXPECT_NEAR(g.delta, g.unknown - g.known, 1e-9);
  const std::string table = FormatGapTable({GapFromPercent("VERB:SVA", 99.61, 46.05), g}, "Synthetic");
  EXPECT_NE(table.find("Known"), std::string::npos);
  EXPECT_NE(table.find("-53.56"), std::string::npos);
  EXPECT_NE(table.find("MORPH"), std::string::npos);
  EXPECT_THROW(GapReport("x", known, MakeReport(Mode::kDetection, {1, 0, 0})), Error);
}

TEST(Report, JsonAndTsv) {
  const Fixture f = TwoOneTwo();
  const auto r = Stratify(f.hyps, f.pairs, StratifyBy::kLengthBucket);
  const auto j = ToJson(r);
  EXPECT_EQ(j["f05_pct"], "62.50");
  EXPECT_EQ(j["tp"], 2);
  EXPECT_TRUE(j.contains("strata"));
  const std::string tsv = LengthTsv(r);
  EXPECT_EQ(tsv.rfind("bucket\tP\tR\tF0.5\n", 0), 0u);
}

}  // namespace
}  // namespace gecprobe::scoring
