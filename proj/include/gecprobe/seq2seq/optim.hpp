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

// Adam with the inverse-square-root warmup schedule and global-norm clipping.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "gecprobe/seq2seq/config.hpp"
#include "gecprobe/seq2seq/layers.hpp"

namespace gecprobe::seq2seq {

/// lr(step) = scale * dim^-0.5 * min(step^-0.5, step * warmup^-1.5), step >= 1.
inline double ScheduledRate(int64_t step, int model_dim, int warmup, double scale) {
  const double s = static_cast<double>(std::max<int64_t>(step, 1));
  return scale / std::sqrt(static_cast<double>(model_dim)) *
         std::min(1.0 / std::sqrt(s), s * std::pow(static_cast<double>(warmup), -1.5));
}

/// Rescales all gradients so their joint L2 norm is at most `max_norm`.
/// Returns the norm before clipping.
template <typename S>
double ClipGradNorm(const NamedParams<S>& params, double max_norm) {
  double sq = 0.0;
  for (const auto& [name, p] : params) sq += p->grad.template cast<double>().squaredNorm();
  const double norm = std::sqrt(sq);
  if (norm > max_norm) {
    const S factor = static_cast<S>(max_norm / (norm + 1e-6));
    for (const auto& [name, p] : params) p->grad *= factor;
  }
  return norm;
}

template <typename S>
class Adam {
 public:
  Adam(const TrainConfig& config, int model_dim) : config_(config), model_dim_(model_dim) {}

  int64_t step() const { return step_; }
  double last_rate() const { return rate_; }

  void Update(const NamedParams<S>& params) {
    if (m_.empty()) {
      for (const auto& [name, p] : params) {
        m_.push_back(Mat<S>::Zero(p->value.rows(), p->value.cols()));
        v_.push_back(Mat<S>::Zero(p->value.rows(), p->value.cols()));
      }
    }
    ++step_;
    rate_ = ScheduledRate(step_, model_dim_, config_.warmup_steps, config_.lr_scale);
    const double b1 = config_.adam_beta1, b2 = config_.adam_beta2;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(step_));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(step_));
    const S step_size = static_cast<S>(rate_ / c1);
    const S inv_c2 = static_cast<S>(1.0 / c2);
    const S eps = static_cast<S>(config_.adam_eps);
    for (size_t i = 0; i < params.size(); ++i) {
      Param<S>& p = *params[i].second;
      m_[i] = static_cast<S>(b1) * m_[i] + static_cast<S>(1.0 - b1) * p.grad;
      v_[i] = static_cast<S>(b2) * v_[i] + static_cast<S>(1.0 - b2) * p.grad.cwiseAbs2();
      p.value.array() -= step_size * m_[i].array() / ((v_[i].array() * inv_c2).sqrt() + eps);
    }
  }

 private:
  TrainConfig config_;
  int model_dim_;
  int64_t step_ = 0;
  double rate_ = 0.0;
  std::vector<Mat<S>> m_, v_;
};

}  // namespace gecprobe::seq2seq
