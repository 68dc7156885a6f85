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

// End-to-end experiment steps shared by the command-line tool and the
// acceptance suite: train, correct a test set, score it, few-shot sweeps.

#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "gecprobe/edits/align.hpp"
#include "gecprobe/scoring/score.hpp"
#include "gecprobe/seq2seq/checkpoint.hpp"
#include "gecprobe/seq2seq/decode.hpp"
#include "gecprobe/seq2seq/trainer.hpp"
#include "gecprobe/splits/splits.hpp"
#include "gecprobe/types.hpp"

namespace gecprobe::pipeline {

/// One hypothesis per source, in order.
inline std::vector<Tokens> CorrectAll(const seq2seq::Checkpoint& ckpt, const Corpus& pairs,
                                      const seq2seq::DecodeConfig& decode) {
  const seq2seq::Transformer<float> model = seq2seq::Restore(ckpt);
  std::vector<Tokens> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) out.push_back(seq2seq::Correct(model, ckpt.vocab, p.source, decode));
  return out;
}

struct Evaluation {
  scoring::ScoreReport correction;
  scoring::ScoreReport detection;
  scoring::ScoreReport correction_by_noise;
  scoring::ScoreReport correction_by_length;
};

inline Evaluation Evaluate(const std::vector<Tokens>& hyps, const Corpus& test, size_t bucket_width = 5) {
  using namespace scoring;
  return {Score(hyps, test, Mode::kCorrection), Score(hyps, test, Mode::kDetection),
          Stratify(hyps, test, StratifyBy::kNoise, {}, bucket_width),
          Stratify(hyps, test, StratifyBy::kLengthBucket, {}, bucket_width)};
}

inline nlohmann::ordered_json ToJson(const Evaluation& e) {
  return {{"correction", scoring::ToJson(e.correction)},
          {"detection", scoring::ToJson(e.detection)},
          {"correction_by_noise", scoring::ToJson(e.correction_by_noise)},
          {"correction_by_length", scoring::ToJson(e.correction_by_length)}};
}

struct ExperimentResult {
  seq2seq::TrainResult training;
  std::vector<Tokens> hypotheses;
  Evaluation evaluation;
};

/// Trains on the bundle, decodes its test set with the dev-best model and
/// scores it.
inline ExperimentResult RunExperiment(const splits::DatasetBundle& bundle, const seq2seq::ModelConfig& model,
                                      const seq2seq::TrainConfig& train, const seq2seq::DecodeConfig& decode,
                                      const seq2seq::EpochCallback& on_epoch = {}) {
  ExperimentResult r;
  r.training = seq2seq::Train(model, train, bundle, on_epoch);
  r.hypotheses = CorrectAll(r.training.best_model, bundle.test, decode);
  r.evaluation = Evaluate(r.hypotheses, bundle.test);
  return r;
}

struct FewShotCell {
  size_t k = 0;
  uint64_t seed = 0;
  scoring::ScoreReport correction;
};

struct FewShotRow {
  size_t k = 0;
  std::vector<FewShotCell> cells;
  double mean_f05 = 0.0;  // fraction, averaged over seeds
};

/// For each k, injects k donor pairs with `pattern`, retrains from scratch
/// per seed and scores correction on the pattern-restricted test set.
inline std::vector<FewShotRow> RunFewShot(const splits::DatasetBundle& bundle, const ErrorCorrectionPattern& pattern,
                                          const std::vector<size_t>& ks, const std::vector<uint64_t>& seeds,
                                          const Corpus& donor, const seq2seq::ModelConfig& model,
                                          seq2seq::TrainConfig train, const seq2seq::DecodeConfig& decode) {
  if (seeds.empty()) Fail(ErrorKind::kInvalidArgument, "few-shot needs at least one seed");
  std::vector<FewShotRow> rows;
  for (size_t k : ks) {
    const splits::DatasetBundle injected = splits::InjectPatterns(bundle, pattern, k, donor);
    FewShotRow row{k, {}, 0.0};
    for (uint64_t seed : seeds) {
      train.seed = seed;
      const ExperimentResult r = RunExperiment(injected, model, train, decode);
      row.cells.push_back({k, seed, r.evaluation.correction});
      row.mean_f05 += r.evaluation.correction.f05 / static_cast<double>(seeds.size());
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

inline nlohmann::ordered_json ToJson(const std::vector<FewShotRow>& rows, const ErrorCorrectionPattern& pattern) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& row : rows) {
    auto cells = nlohmann::ordered_json::array();
    for (const auto& c : row.cells) {
      cells.push_back({{"seed", c.seed},
                       {"precision", scoring::Pct(c.correction.precision)},
                       {"recall", scoring::Pct(c.correction.recall)},
                       {"f05", scoring::Pct(c.correction.f05)}});
    }
    arr.push_back({{"k", row.k}, {"mean_f05", scoring::Pct(row.mean_f05)}, {"runs", cells}});
  }
  return {{"pattern", edits::ToString(pattern)}, {"rows", arr}};
}

/// Tab-separated k, mean P, mean R, mean F0.5 (percentages).
inline std::string FewShotTsv(const std::vector<FewShotRow>& rows) {
  std::string out = "k\tP\tR\tF0.5\n";
  for (const auto& row : rows) {
    double p = 0.0, r = 0.0;
    for (const auto& c : row.cells) {
      p += c.correction.precision / static_cast<double>(row.cells.size());
      r += c.correction.recall / static_cast<double>(row.cells.size());
    }
    out += std::to_string(row.k) + "\t" + scoring::Pct(p) + "\t" + scoring::Pct(r) + "\t" +
           scoring::Pct(row.mean_f05) + "\n";
  }
  return out;
}

}  // namespace gecprobe::pipeline
