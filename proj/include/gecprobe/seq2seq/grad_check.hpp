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

// Finite-difference check of the analytic gradients.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "gecprobe/error.hpp"
#include "gecprobe/rng.hpp"
#include "gecprobe/seq2seq/config.hpp"
#include "gecprobe/seq2seq/loss.hpp"
#include "gecprobe/seq2seq/model.hpp"
#include "gecprobe/seq2seq/trainer.hpp"
#include "gecprobe/seq2seq/vocab.hpp"

namespace gecprobe::seq2seq {

struct GradCheckOptions {
  size_t samples = 256;
  double step = 1e-4;
  // Denominator floor for the relative error, so that gradients that are
  // zero up to rounding compare by absolute difference.
  double floor = 1e-6;
  uint64_t seed = 7;
};

struct GradCheckEntry {
  std::string name;
  Eigen::Index index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double rel_error = 0.0;
};

struct GradCheckReport {
  size_t checked = 0;
  double max_rel_error = 0.0;
  GradCheckEntry worst;
};

inline double RelativeError(double a, double n, double floor) {
  return std::abs(a - n) / std::max({std::abs(a), std::abs(n), floor});
}

/// Builds a double-precision model for `pairs`, computes analytic gradients
/// of the smoothed loss and compares a sample of them (spread evenly over all
/// tensors) with central differences. Throws GradientMismatch above
/// `tolerance`, naming the worst entry.
inline GradCheckReport GradCheck(const ModelConfig& config, const Corpus& pairs, double tolerance,
                                 const GradCheckOptions& opt = {}) {
  config.Validate();
  if (config.dropout != 0.0) {
    Fail(ErrorKind::kPreconditionViolation, "gradient check needs dropout 0, got " + std::to_string(config.dropout));
  }
  if (pairs.empty()) Fail(ErrorKind::kInvalidArgument, "gradient check needs at least one pair");
  const Vocab vocab = BuildVocab(pairs);
  const auto data = EncodePairs(pairs, vocab, config.max_sequence_length);
  std::vector<size_t> order(data.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  const BatchView view = MakeBatch(data, order, 0, data.size());

  Transformer<double> model(config, static_cast<int>(vocab.size()), opt.seed);
  // Non-trivial norm gains and biases, so their gradients are exercised.
  Rng rng(Rng::Derive(opt.seed, 1));
  for (auto& [name, p] : model.Params()) {
    if (name.find("norm") != std::string::npos || name.ends_with(".bias")) {
      for (Eigen::Index i = 0; i < p->value.size(); ++i) p->value.data()[i] += 0.1 * rng.Normal();
    }
  }
  auto loss = [&]() {
    return SmoothedCrossEntropy(model.Forward(view.batch, nullptr), view.gold, config.label_smoothing).loss;
  };

  model.ZeroGrad();
  Mat<double> dlogits;
  SmoothedCrossEntropy(model.Forward(view.batch, nullptr), view.gold, config.label_smoothing, &dlogits);
  model.Backward(dlogits);

  auto params = model.Params();
  Eigen::Index total = 0;
  for (const auto& [name, p] : params) total += p->value.size();
  GradCheckReport report;
  const size_t n = std::min<size_t>(opt.samples, static_cast<size_t>(total));
  for (size_t s = 0; s < n; ++s) {
    // Evenly spaced positions in the concatenation of all tensors.
    Eigen::Index flat = static_cast<Eigen::Index>((static_cast<double>(s) + 0.5) * static_cast<double>(total) /
                                                  static_cast<double>(n));
    size_t t = 0;
    while (flat >= params[t].second->value.size()) flat -= params[t++].second->value.size();
    Param<double>& p = *params[t].second;
    double& x = p.value.data()[flat];
    const double saved = x;
    x = saved + opt.step;
    const double up = loss();
    x = saved - opt.step;
    const double down = loss();
    x = saved;
    const double numeric = (up - down) / (2.0 * opt.step);
    const double analytic = p.grad.data()[flat];
    const double rel = RelativeError(analytic, numeric, opt.floor);
    ++report.checked;
    if (rel >= report.max_rel_error) {
      report.max_rel_error = rel;
      report.worst = {params[t].first, flat, analytic, numeric, rel};
    }
  }
  if (report.max_rel_error > tolerance) {
    std::ostringstream msg;
    msg << "gradient mismatch: " << report.worst.name << "[" << report.worst.index
        << "] analytic=" << report.worst.analytic << " numeric=" << report.worst.numeric
        << " rel=" << report.worst.rel_error << " > " << tolerance;
    Fail(ErrorKind::kGradientMismatch, msg.str());
  }
  return report;
}

}  // namespace gecprobe::seq2seq
