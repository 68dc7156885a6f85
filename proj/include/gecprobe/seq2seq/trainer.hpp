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

// Fixed-budget training loop with per-epoch dev evaluation.

#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include <json.hpp>

#include "gecprobe/error.hpp"
#include "gecprobe/rng.hpp"
#include "gecprobe/seq2seq/checkpoint.hpp"
#include "gecprobe/seq2seq/config.hpp"
#include "gecprobe/seq2seq/loss.hpp"
#include "gecprobe/seq2seq/model.hpp"
#include "gecprobe/seq2seq/optim.hpp"
#include "gecprobe/seq2seq/vocab.hpp"
#include "gecprobe/splits/splits.hpp"

namespace gecprobe::seq2seq {

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double train_nll = 0.0;
  double dev_loss = 0.0;
  double dev_nll = 0.0;
  double dev_accuracy = 0.0;
  double wall_time = 0.0;  // seconds since training started
  int64_t step = 0;
  double learning_rate = 0.0;
};

inline nlohmann::ordered_json ToJson(const EpochRecord& r) {
  return {{"epoch", r.epoch},       {"train_loss", r.train_loss}, {"train_nll", r.train_nll},
          {"dev_loss", r.dev_loss}, {"dev_nll", r.dev_nll},       {"dev_accuracy", r.dev_accuracy},
          {"wall_time", r.wall_time}, {"step", r.step},           {"learning_rate", r.learning_rate}};
}

struct TrainResult {
  Checkpoint final_model;
  Checkpoint best_model;  // lowest dev loss
  int best_epoch = 0;
  std::vector<EpochRecord> log;
};

/// Id sequences for the encoder and both decoder sides of each pair.
struct EncodedPair {
  std::vector<int> src, tgt_in, tgt_out;
};

inline std::vector<EncodedPair> EncodePairs(const Corpus& pairs, const Vocab& vocab, int max_length) {
  std::vector<EncodedPair> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) {
    if (static_cast<int>(p.source.size()) > max_length || static_cast<int>(p.reference.size()) > max_length) {
      Fail(ErrorKind::kPreconditionViolation,
           "pair longer than max_sequence_length " + std::to_string(max_length));
    }
    const std::vector<int> ref = vocab.Encode(p.reference);
    out.push_back({SourceIds(vocab.Encode(p.source)), TargetInput(ref), TargetOutput(ref)});
  }
  return out;
}

struct BatchView {
  Batch batch;
  std::vector<int> gold;
};

inline BatchView MakeBatch(const std::vector<EncodedPair>& data, const std::vector<size_t>& order, size_t begin,
                       size_t end) {
  BatchView v;
  for (size_t i = begin; i < end; ++i) {
    const EncodedPair& p = data[order[i]];
    v.batch.src.push_back(p.src);
    v.batch.tgt_in.push_back(p.tgt_in);
    v.gold.insert(v.gold.end(), p.tgt_out.begin(), p.tgt_out.end());
  }
  return v;
}

/// Token-weighted loss, NLL and accuracy in evaluation mode.
template <typename S>
LossResult Evaluate(Transformer<S>& model, const std::vector<EncodedPair>& data, double epsilon, size_t batch_size) {
  std::vector<size_t> order(data.size());
  std::iota(order.begin(), order.end(), size_t{0});
  LossResult total;
  double loss = 0.0, nll = 0.0;
  for (size_t b = 0; b < data.size(); b += batch_size) {
    const auto v = MakeBatch(data, order, b, std::min(data.size(), b + batch_size));
    const LossResult r = SmoothedCrossEntropy(model.Forward(v.batch, nullptr), v.gold, epsilon);
    loss += r.loss * static_cast<double>(r.tokens);
    nll += r.nll * static_cast<double>(r.tokens);
    total.tokens += r.tokens;
    total.correct += r.correct;
  }
  if (total.tokens > 0) {
    total.loss = loss / static_cast<double>(total.tokens);
    total.nll = nll / static_cast<double>(total.tokens);
  } else {
    total.empty = true;
  }
  return total;
}

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Trains for exactly `train_config.epochs` epochs. The vocabulary comes
/// from `train` alone. Deterministic for fixed configs and seed.
inline TrainResult Train(const ModelConfig& model_config, const TrainConfig& train_config, const Corpus& train,
                         const Corpus& dev, const EpochCallback& on_epoch = {}) {
  model_config.Validate();
  train_config.Validate();
  if (train.empty() || dev.empty()) Fail(ErrorKind::kPreconditionViolation, "train and dev must be non-empty");
  const Vocab vocab = BuildVocab(train);
  const auto train_data = EncodePairs(train, vocab, model_config.max_sequence_length);
  const auto dev_data = EncodePairs(dev, vocab, model_config.max_sequence_length);

  const uint64_t seed = train_config.seed;
  Transformer<float> model(model_config, static_cast<int>(vocab.size()), Rng::Derive(seed, 1));
  Rng dropout_rng(Rng::Derive(seed, 2));
  Rng order_rng(Rng::Derive(seed, 3));
  Adam<float> adam(train_config, model_config.model_dim);
  const auto params = model.Params();
  const size_t bs = static_cast<size_t>(train_config.batch_size);

  TrainResult result;
  double best_dev = std::numeric_limits<double>::infinity();
  const auto start = std::chrono::steady_clock::now();
  std::vector<size_t> order(train_data.size());
  std::iota(order.begin(), order.end(), size_t{0});

  for (int epoch = 1; epoch <= train_config.epochs; ++epoch) {
    order_rng.Shuffle(order);
    double loss_sum = 0.0, nll_sum = 0.0;
    size_t tokens = 0;
    for (size_t b = 0; b < order.size(); b += bs) {
      const auto v = MakeBatch(train_data, order, b, std::min(order.size(), b + bs));
      model.ZeroGrad();
      Mat<float> dlogits;
      const LossResult r = SmoothedCrossEntropy(model.Forward(v.batch, &dropout_rng), v.gold,
                                                model_config.label_smoothing, &dlogits);
      if (!std::isfinite(r.loss)) {
        Fail(ErrorKind::kDivergenceDetected, "non-finite training loss at epoch " + std::to_string(epoch) +
                                                 ", step " + std::to_string(adam.step() + 1));
      }
      model.Backward(dlogits);
      const double norm = ClipGradNorm(params, train_config.gradient_clip_norm);
      if (!std::isfinite(norm)) {
        Fail(ErrorKind::kDivergenceDetected, "non-finite gradient norm at epoch " + std::to_string(epoch) +
                                                 ", step " + std::to_string(adam.step() + 1));
      }
      adam.Update(params);
      loss_sum += r.loss * static_cast<double>(r.tokens);
      nll_sum += r.nll * static_cast<double>(r.tokens);
      tokens += r.tokens;
    }
    const LossResult d = Evaluate(model, dev_data, model_config.label_smoothing, bs);
    if (!std::isfinite(d.loss)) {
      Fail(ErrorKind::kDivergenceDetected, "non-finite dev loss at epoch " + std::to_string(epoch));
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(tokens);
    rec.train_nll = nll_sum / static_cast<double>(tokens);
    rec.dev_loss = d.loss;
    rec.dev_nll = d.nll;
    rec.dev_accuracy = static_cast<double>(d.correct) / static_cast<double>(d.tokens);
    rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    rec.step = adam.step();
    rec.learning_rate = adam.last_rate();
    result.log.push_back(rec);
    if (d.loss < best_dev) {
      best_dev = d.loss;
      result.best_epoch = epoch;
      result.best_model = Snapshot(model, vocab, adam.step());
    }
    if (on_epoch) on_epoch(rec);
  }
  result.final_model = Snapshot(model, vocab, adam.step());
  return result;
}

inline TrainResult Train(const ModelConfig& model_config, const TrainConfig& train_config,
                         const splits::DatasetBundle& bundle, const EpochCallback& on_epoch = {}) {
  return Train(model_config, train_config, bundle.train, bundle.dev, on_epoch);
}

}  // namespace gecprobe::seq2seq
