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

// Edit-level precision, recall and F0.5 in correction and detection modes.
//
// Hypothesis edits come from aligning each source with its hypothesis. A
// correction match needs the same source span and the same replacement.
// A detection match needs only the location: overlapping spans, with an
// insertion matching at its boundary position. Gold edits are visited left
// to right and each takes the leftmost unmatched hypothesis edit that
// matches it.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "gecprobe/edits/align.hpp"
#include "gecprobe/error.hpp"
#include "gecprobe/types.hpp"

namespace gecprobe::scoring {

enum class Mode { kCorrection, kDetection };

inline std::string_view ToString(Mode m) { return m == Mode::kCorrection ? "correction" : "detection"; }

struct MatchCounts {
  size_t tp = 0;
  size_t fp = 0;
  size_t fn = 0;

  MatchCounts& operator+=(const MatchCounts& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    return *this;
  }
  bool operator==(const MatchCounts&) const = default;
};

struct ScoreOptions {
  Mode mode = Mode::kCorrection;
  bool exact_span_detection = false;  // detection requires identical spans
};

struct ScoreReport {
  Mode mode = Mode::kCorrection;
  MatchCounts counts;
  double precision = 0.0;
  double recall = 0.0;
  double f05 = 0.0;
  std::map<std::string, ScoreReport> strata;
};

inline double SafeRatio(size_t num, size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

inline double F05(double p, double r) {
  const double den = 0.25 * p + r;
  return den == 0.0 ? 0.0 : 1.25 * p * r / den;
}

inline ScoreReport MakeReport(Mode mode, const MatchCounts& c) {
  ScoreReport r;
  r.mode = mode;
  r.counts = c;
  r.precision = SafeRatio(c.tp, c.tp + c.fp);
  r.recall = SafeRatio(c.tp, c.tp + c.fn);
  r.f05 = F05(r.precision, r.recall);
  return r;
}

/// Percentage with two decimals, e.g. 0.625 -> "62.50".
inline std::string Pct(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", std::round(fraction * 10000.0) / 100.0 + 0.0);
  return buf;
}

inline bool SpansOverlap(const Edit& h, const Edit& g) {
  const bool h_empty = h.start == h.end;
  const bool g_empty = g.start == g.end;
  if (h_empty && g_empty) return h.start == g.start;
  if (h_empty) return g.start <= h.start && h.start < g.end;
  if (g_empty) return h.start <= g.start && g.start < h.end;
  return h.start < g.end && g.start < h.end;
}

inline bool EditsMatch(const Edit& h, const Edit& g, const ScoreOptions& opt) {
  const bool same_span = h.start == g.start && h.end == g.end;
  if (opt.mode == Mode::kCorrection) return same_span && h.correction == g.correction;
  return opt.exact_span_detection ? same_span : SpansOverlap(h, g);
}

/// Counts for one sentence given already extracted hypothesis edits.
inline MatchCounts MatchEdits(const std::vector<Edit>& hyp, std::vector<Edit> gold,
                              const ScoreOptions& opt) {
  std::stable_sort(gold.begin(), gold.end(), [](const Edit& a, const Edit& b) {
    return std::tie(a.start, a.end) < std::tie(b.start, b.end);
  });
  std::vector<bool> used(hyp.size(), false);
  MatchCounts c;
  for (const Edit& g : gold) {
    for (size_t k = 0; k < hyp.size(); ++k) {
      if (!used[k] && EditsMatch(hyp[k], g, opt)) {
        used[k] = true;
        ++c.tp;
        break;
      }
    }
  }
  c.fp = hyp.size() - c.tp;
  c.fn = gold.size() - c.tp;
  return c;
}

inline MatchCounts SentenceCounts(const Tokens& hypothesis, const SentencePair& pair,
                                  const ScoreOptions& opt) {
  return MatchEdits(edits::Align(pair.source, hypothesis), pair.gold_edits, opt);
}

inline void RequireAligned(const std::vector<Tokens>& hypotheses, const Corpus& pairs) {
  if (hypotheses.size() != pairs.size()) {
    Fail(ErrorKind::kLengthMismatch, std::to_string(hypotheses.size()) + " hypotheses for " +
                                         std::to_string(pairs.size()) + " pairs");
  }
}

inline ScoreReport Score(const std::vector<Tokens>& hypotheses, const Corpus& pairs,
                         const ScoreOptions& opt = {}) {
  RequireAligned(hypotheses, pairs);
  MatchCounts total;
  for (size_t i = 0; i < pairs.size(); ++i) total += SentenceCounts(hypotheses[i], pairs[i], opt);
  return MakeReport(opt.mode, total);
}

inline ScoreReport Score(const std::vector<Tokens>& hypotheses, const Corpus& pairs, Mode mode) {
  return Score(hypotheses, pairs, ScoreOptions{mode, false});
}

// ---------------------------------------------------------------------------
// Strata

enum class StratifyBy { kNoise, kLengthBucket };

inline std::string NoiseKey(const SentencePair& p) { return p.noisy ? "noisy" : "noiseless"; }

/// Source-length bucket label "lo-hi" (inclusive), zero-padded for sorting.
inline std::string LengthBucketKey(size_t length, size_t width) {
  if (width == 0) Fail(ErrorKind::kInvalidArgument, "length bucket width must be positive");
  const size_t lo = length == 0 ? 0 : (length - 1) / width * width + 1;
  const size_t hi = length == 0 ? 0 : lo + width - 1;
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%03zu-%03zu", lo, hi);
  return buf;
}

/// Global report whose strata partition the pairs by `by`.
inline ScoreReport Stratify(const std::vector<Tokens>& hypotheses, const Corpus& pairs, StratifyBy by,
                            const ScoreOptions& opt = {}, size_t bucket_width = 5) {
  RequireAligned(hypotheses, pairs);
  std::map<std::string, MatchCounts> per;
  MatchCounts total;
  for (size_t i = 0; i < pairs.size(); ++i) {
    const MatchCounts c = SentenceCounts(hypotheses[i], pairs[i], opt);
    total += c;
    const std::string key = by == StratifyBy::kNoise
                                ? NoiseKey(pairs[i])
                                : LengthBucketKey(pairs[i].source.size(), bucket_width);
    per[key] += c;
  }
  ScoreReport r = MakeReport(opt.mode, total);
  for (const auto& [key, c] : per) r.strata[key] = MakeReport(opt.mode, c);
  return r;
}

// ---------------------------------------------------------------------------
// Known/Unknown gap

struct GapRecord {
  std::string label;  // column heading, usually the error type
  double known = 0.0;    // percentage, two decimals
  double unknown = 0.0;  // percentage, two decimals
  double delta = 0.0;    // unknown - known
};

inline double Round2(double x) { return std::round(x * 100.0) / 100.0; }

/// Gap from percentages as printed (two decimals).
inline GapRecord GapFromPercent(std::string label, double known_pct, double unknown_pct) {
  GapRecord g;
  g.label = std::move(label);
  g.known = Round2(known_pct);
  g.unknown = Round2(unknown_pct);
  g.delta = Round2(g.unknown - g.known);
  return g;
}

inline GapRecord GapReport(std::string label, const ScoreReport& known, const ScoreReport& unknown) {
  if (known.mode != unknown.mode) {
    Fail(ErrorKind::kInvalidArgument, "gap report needs two reports of the same mode");
  }
  return GapFromPercent(std::move(label), 100.0 * known.f05, 100.0 * unknown.f05);
}

inline std::string Fixed2(double pct) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", pct + 0.0);
  return buf;
}

/// Fixed-width table: one column per record, rows Known / Unknown / Delta.
inline std::string FormatGapTable(const std::vector<GapRecord>& rows, const std::string& dataset) {
  auto pad = [](std::string s, size_t w, bool right) {
    if (s.size() >= w) return s;
    return right ? std::string(w - s.size(), ' ') + s : s + std::string(w - s.size(), ' ');
  };
  size_t first = std::max<size_t>(dataset.size(), 7) + 2;
  std::string out = pad(dataset, first, false) + pad("", 9, false);
  for (const auto& r : rows) out += pad(r.label, std::max<size_t>(r.label.size(), 8) + 2, true);
  out += '\n';
  auto line = [&](const std::string& name, auto field) {
    std::string s = pad("", first, false) + pad(name, 9, false);
    for (const auto& r : rows) s += pad(Fixed2(field(r)), std::max<size_t>(r.label.size(), 8) + 2, true);
    return s + '\n';
  };
  out += line("Known", [](const GapRecord& r) { return r.known; });
  out += line("Unknown", [](const GapRecord& r) { return r.unknown; });
  out += line("Delta", [](const GapRecord& r) { return r.delta; });
  return out;
}

// ---------------------------------------------------------------------------
// Serialization

inline nlohmann::ordered_json ToJson(const ScoreReport& r) {
  nlohmann::ordered_json j;
  j["mode"] = std::string(ToString(r.mode));
  j["tp"] = r.counts.tp;
  j["fp"] = r.counts.fp;
  j["fn"] = r.counts.fn;
  j["precision"] = r.precision;
  j["recall"] = r.recall;
  j["f05"] = r.f05;
  j["precision_pct"] = Pct(r.precision);
  j["recall_pct"] = Pct(r.recall);
  j["f05_pct"] = Pct(r.f05);
  if (!r.strata.empty()) {
    nlohmann::ordered_json s;
    for (const auto& [key, sub] : r.strata) s[key] = ToJson(sub);
    j["strata"] = std::move(s);
  }
  return j;
}

inline nlohmann::ordered_json ToJson(const GapRecord& g) {
  return {{"label", g.label}, {"known", g.known}, {"unknown", g.unknown}, {"delta", g.delta}};
}

/// Plot-ready rows: bucket, P, R, F0.5 (percentages).
inline std::string LengthTsv(const ScoreReport& stratified) {
  std::string out = "bucket\tP\tR\tF0.5\n";
  for (const auto& [key, r] : stratified.strata) {
    out += key + '\t' + Pct(r.precision) + '\t' + Pct(r.recall) + '\t' + Pct(r.f05) + '\n';
  }
  return out;
}

}  // namespace gecprobe::scoring
