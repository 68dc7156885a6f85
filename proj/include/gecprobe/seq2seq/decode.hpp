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

// Beam search with length normalization.

#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "gecprobe/seq2seq/config.hpp"
#include "gecprobe/seq2seq/model.hpp"
#include "gecprobe/seq2seq/vocab.hpp"

namespace gecprobe::seq2seq {

struct Hypothesis {
  std::vector<int> tokens;  // without the end marker
  double logprob = 0.0;     // includes the end marker
  double score = 0.0;       // logprob / (length + 1)^exponent when normalizing
};

inline double NormalizedScore(double logprob, size_t tokens, const DecodeConfig& c) {
  if (!c.length_normalization) return logprob;
  return logprob / std::pow(static_cast<double>(tokens + 1), c.length_exponent);
}

/// Output length cap for a source of `source_tokens` words.
inline int OutputLimit(size_t source_tokens, const DecodeConfig& c, const ModelConfig& m) {
  const int by_source = static_cast<int>(source_tokens) + c.max_extra_tokens;
  return std::max(0, std::min({c.max_output_length, by_source, m.max_sequence_length}));
}

/// Each step expands every live hypothesis and ranks the 2 * beam best
/// continuations by cumulative log-probability. An end marker among the
/// first `beam` ranks completes a hypothesis; other continuations refill the
/// beam. Search stops once `beam` hypotheses are complete or the length cap
/// forces the rest to end. Padding, <s> and <unk> are never emitted.
template <typename S>
Hypothesis BeamSearch(const Transformer<S>& model, const std::vector<int>& source, const DecodeConfig& config) {
  config.Validate();
  const size_t beam = static_cast<size_t>(config.beam_size);
  const int limit = OutputLimit(source.size(), config, model.config());
  const EncodedSource<S> enc = model.Encode(SourceIds(source));

  struct Live {
    std::vector<int> tokens;
    double logprob;
    DecoderCache<S> cache;
  };
  struct Candidate {
    double logprob;
    size_t from;
    int token;
  };

  std::vector<Live> live;
  live.push_back({{}, 0.0, model.NewCache()});
  std::vector<Hypothesis> finished;
  const int v = model.vocab_size();

  for (int t = 0; !live.empty() && finished.size() < beam; ++t) {
    std::vector<int> feed;
    std::vector<DecoderCache<S>*> caches;
    for (auto& h : live) {
      feed.push_back(h.tokens.empty() ? kBos : h.tokens.back());
      caches.push_back(&h.cache);
    }
    const Mat<S> logp = model.Step(enc, feed, caches);
    const bool must_end = t >= limit;

    std::vector<Candidate> cands;
    for (size_t b = 0; b < live.size(); ++b) {
      for (int w = 0; w < v; ++w) {
        if (w == kPad || w == kBos || w == kUnk) continue;
        if (must_end && w != kEos) continue;
        cands.push_back({live[b].logprob + static_cast<double>(logp(static_cast<Eigen::Index>(b), w)), b, w});
      }
    }
    const size_t keep = std::min(cands.size(), 2 * beam);
    std::partial_sort(cands.begin(), cands.begin() + static_cast<std::ptrdiff_t>(keep), cands.end(),
                      [](const Candidate& a, const Candidate& b) {
                        if (a.logprob != b.logprob) return a.logprob > b.logprob;
                        if (a.from != b.from) return a.from < b.from;
                        return a.token < b.token;
                      });

    std::vector<Live> next;
    for (size_t rank = 0; rank < keep; ++rank) {
      const Candidate& c = cands[rank];
      const Live& parent = live[c.from];
      if (c.token == kEos) {
        if (rank < beam && finished.size() < beam) {
          finished.push_back({parent.tokens, c.logprob, NormalizedScore(c.logprob, parent.tokens.size(), config)});
        }
      } else if (next.size() < beam) {
        Live child{parent.tokens, c.logprob, parent.cache};
        child.tokens.push_back(c.token);
        next.push_back(std::move(child));
      }
    }
    if (must_end) next.clear();
    live = std::move(next);
  }

  const auto best = std::max_element(finished.begin(), finished.end(),
                                     [](const Hypothesis& a, const Hypothesis& b) { return a.score < b.score; });
  return *best;
}

/// Tokens in, tokens out; unknown source words map to <unk>.
template <typename S>
Tokens Correct(const Transformer<S>& model, const Vocab& vocab, const Tokens& source, const DecodeConfig& config) {
  return vocab.Decode(BeamSearch(model, vocab.Encode(source), config).tokens);
}

}  // namespace gecprobe::seq2seq
