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

// Label-smoothed cross entropy over output logits.

#pragma once

#include <cmath>
#include <iostream>
#include <vector>

#include "gecprobe/error.hpp"
#include "gecprobe/seq2seq/layers.hpp"
#include "gecprobe/seq2seq/vocab.hpp"

namespace gecprobe::seq2seq {

struct LossResult {
  double loss = 0.0;  // mean smoothed loss over non-pad positions
  double nll = 0.0;   // mean plain negative log-likelihood over the same positions
  size_t tokens = 0;
  size_t correct = 0;  // positions whose argmax equals the gold id
  bool empty = false;  // every position was pad
};

/// The smoothed target puts 1 - epsilon on the gold id and spreads epsilon
/// evenly over the other non-pad ids. When `dlogits` is given it receives the
/// gradient of the mean loss; pad rows get zero.
template <typename S>
LossResult SmoothedCrossEntropy(const Mat<S>& logits, const std::vector<int>& gold, double epsilon,
                                Mat<S>* dlogits = nullptr) {
  if (epsilon < 0.0 || epsilon >= 1.0) Fail(ErrorKind::kInvalidArgument, "epsilon must lie in [0, 1)");
  if (static_cast<size_t>(logits.rows()) != gold.size()) {
    Fail(ErrorKind::kLengthMismatch, "logits rows and gold ids differ in count");
  }
  const Eigen::Index v = logits.cols();
  if (v < kNumReserved + 1) Fail(ErrorKind::kInvalidArgument, "vocabulary too small for smoothing");
  const double off = epsilon / static_cast<double>(v - 2);  // v - 1 non-pad ids, one of them gold
  LossResult r;
  for (int g : gold) r.tokens += g != kPad;
  if (dlogits) *dlogits = Mat<S>::Zero(logits.rows(), v);
  if (r.tokens == 0) {
    r.empty = true;
    std::cerr << "warning: loss over an all-pad batch is defined as 0\n";
    return r;
  }
  const double inv_n = 1.0 / static_cast<double>(r.tokens);
  double total = 0.0, nll = 0.0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const int g = gold[static_cast<size_t>(i)];
    if (g == kPad) continue;
    if (g < 0 || g >= v) Fail(ErrorKind::kInvalidArgument, "gold id out of range");
    const double mx = static_cast<double>(logits.row(i).maxCoeff());
    double z = 0.0;
    for (Eigen::Index j = 0; j < v; ++j) z += std::exp(static_cast<double>(logits(i, j)) - mx);
    const double lse = mx + std::log(z);
    double sum_other = 0.0;
    for (Eigen::Index j = 0; j < v; ++j) {
      if (j == kPad || j == g) continue;
      sum_other += static_cast<double>(logits(i, j)) - lse;
    }
    const double lp_gold = static_cast<double>(logits(i, g)) - lse;
    total += -(1.0 - epsilon) * lp_gold - off * sum_other;
    nll -= lp_gold;
    Eigen::Index arg = 0;
    logits.row(i).maxCoeff(&arg);
    r.correct += arg == g;
    if (dlogits) {
      for (Eigen::Index j = 0; j < v; ++j) {
        const double p = std::exp(static_cast<double>(logits(i, j)) - lse);
        const double q = j == g ? 1.0 - epsilon : (j == kPad ? 0.0 : off);
        (*dlogits)(i, j) = static_cast<S>((p - q) * inv_n);
      }
    }
  }
  r.loss = total * inv_n;
  r.nll = nll * inv_n;
  return r;
}

}  // namespace gecprobe::seq2seq
