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

// Building blocks of the Transformer with explicit forward and backward
// passes. Activations are row-major matrices with one row per token; a
// batch is a concatenation of sentences, described by row offsets.

#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gecprobe/rng.hpp"

namespace gecprobe::seq2seq {

template <typename S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename S>
using RowVec = Eigen::Matrix<S, 1, Eigen::Dynamic>;

/// Row offsets of sentences in a flattened batch: sentence s occupies rows
/// [offsets[s], offsets[s + 1]).
using Offsets = std::vector<int>;

template <typename S>
struct Param {
  Mat<S> value;
  Mat<S> grad;

  void Resize(int rows, int cols) {
    value = Mat<S>::Zero(rows, cols);
    grad = Mat<S>::Zero(rows, cols);
  }
};

template <typename S>
using NamedParams = std::vector<std::pair<std::string, Param<S>*>>;

template <typename S>
void XavierUniform(Param<S>& p, Rng& rng) {
  const double a = std::sqrt(6.0 / static_cast<double>(p.value.rows() + p.value.cols()));
  for (Eigen::Index i = 0; i < p.value.size(); ++i) {
    p.value.data()[i] = static_cast<S>((2.0 * rng.Uniform() - 1.0) * a);
  }
}

template <typename S>
class Linear {
 public:
  void Init(int in, int out, Rng& rng) {
    w_.Resize(in, out);
    b_.Resize(1, out);
    XavierUniform(w_, rng);
  }

  Mat<S> Apply(const Mat<S>& x) const {
    Mat<S> y = x * w_.value;
    y.rowwise() += b_.value.row(0);
    return y;
  }

  Mat<S> Forward(const Mat<S>& x) {
    x_ = x;
    return Apply(x);
  }

  Mat<S> Backward(const Mat<S>& dy) {
    w_.grad.noalias() += x_.transpose() * dy;
    b_.grad += dy.colwise().sum();
    return dy * w_.value.transpose();
  }

  void Collect(const std::string& prefix, NamedParams<S>& out) {
    out.emplace_back(prefix + ".weight", &w_);
    out.emplace_back(prefix + ".bias", &b_);
  }

  const Param<S>& weight() const { return w_; }
  const Param<S>& bias() const { return b_; }

 private:
  Param<S> w_, b_;
  Mat<S> x_;
};

template <typename S>
class LayerNorm {
 public:
  static constexpr double kEps = 1e-5;

  void Init(int dim) {
    gamma_.Resize(1, dim);
    beta_.Resize(1, dim);
    gamma_.value.setOnes();
  }

  Mat<S> Apply(const Mat<S>& x) const {
    Mat<S> xhat;
    Eigen::Matrix<S, Eigen::Dynamic, 1> inv;
    return Normalize(x, xhat, inv);
  }

  Mat<S> Forward(const Mat<S>& x) { return Normalize(x, xhat_, inv_); }

  Mat<S> Backward(const Mat<S>& dy) {
    gamma_.grad += (dy.array() * xhat_.array()).colwise().sum().matrix();
    beta_.grad += dy.colwise().sum();
    const Mat<S> dxhat = (dy.array().rowwise() * gamma_.value.row(0).array()).matrix();
    Mat<S> dx(dy.rows(), dy.cols());
    for (Eigen::Index r = 0; r < dy.rows(); ++r) {
      const S m1 = dxhat.row(r).mean();
      const S m2 = (dxhat.row(r).array() * xhat_.row(r).array()).mean();
      dx.row(r) = inv_(r) * (dxhat.row(r).array() - m1 - xhat_.row(r).array() * m2);
    }
    return dx;
  }

  void Collect(const std::string& prefix, NamedParams<S>& out) {
    out.emplace_back(prefix + ".gamma", &gamma_);
    out.emplace_back(prefix + ".beta", &beta_);
  }

 private:
  Mat<S> Normalize(const Mat<S>& x, Mat<S>& xhat, Eigen::Matrix<S, Eigen::Dynamic, 1>& inv) const {
    const Eigen::Index n = x.rows(), d = x.cols();
    xhat.resize(n, d);
    inv.resize(n);
    for (Eigen::Index r = 0; r < n; ++r) {
      const S mean = x.row(r).mean();
      const S var = (x.row(r).array() - mean).square().mean();
      inv(r) = S(1) / std::sqrt(var + static_cast<S>(kEps));
      xhat.row(r) = (x.row(r).array() - mean) * inv(r);
    }
    Mat<S> y = (xhat.array().rowwise() * gamma_.value.row(0).array()).matrix();
    y.rowwise() += beta_.value.row(0);
    return y;
  }

  Param<S> gamma_, beta_;
  Mat<S> xhat_;
  Eigen::Matrix<S, Eigen::Dynamic, 1> inv_;
};

/// Inverted dropout; the identity when `p` is 0 or outside training.
template <typename S>
class Dropout {
 public:
  Mat<S> Forward(const Mat<S>& x, double p, Rng* rng) {
    active_ = rng != nullptr && p > 0.0;
    if (!active_) return x;
    mask_.resize(x.rows(), x.cols());
    const S keep = static_cast<S>(1.0 / (1.0 - p));
    for (Eigen::Index i = 0; i < mask_.size(); ++i) {
      mask_.data()[i] = rng->Uniform() < p ? S(0) : keep;
    }
    return (x.array() * mask_.array()).matrix();
  }

  Mat<S> Backward(const Mat<S>& dy) const {
    if (!active_) return dy;
    return (dy.array() * mask_.array()).matrix();
  }

 private:
  bool active_ = false;
  Mat<S> mask_;
};

/// Multi-head scaled dot-product attention between query rows and key/value
/// rows, restricted to matching sentences.
template <typename S>
class MultiHeadAttention {
 public:
  void Init(int dim, int heads, Rng& rng) {
    heads_ = heads;
    dk_ = dim / heads;
    q_.Init(dim, dim, rng);
    k_.Init(dim, dim, rng);
    v_.Init(dim, dim, rng);
    o_.Init(dim, dim, rng);
  }

  Mat<S> Forward(const Mat<S>& xq, const Offsets& qoff, const Mat<S>& xkv, const Offsets& kvoff,
                 bool causal) {
    Mat<S> q = q_.Forward(xq);
    Mat<S> k = k_.Forward(xkv);
    Mat<S> v = v_.Forward(xkv);
    Mat<S> ctx = Mat<S>::Zero(xq.rows(), xq.cols());
    const S scale = S(1) / std::sqrt(static_cast<S>(dk_));
    const size_t sentences = qoff.size() - 1;
    probs_.assign(sentences * static_cast<size_t>(heads_), Mat<S>());
    for (size_t s = 0; s < sentences; ++s) {
      const int q0 = qoff[s], nq = qoff[s + 1] - qoff[s];
      const int k0 = kvoff[s], nk = kvoff[s + 1] - kvoff[s];
      if (nq == 0 || nk == 0) continue;
      for (int h = 0; h < heads_; ++h) {
        Mat<S> scores = q.block(q0, h * dk_, nq, dk_) * k.block(k0, h * dk_, nk, dk_).transpose();
        scores *= scale;
        if (causal) {
          for (int i = 0; i < nq; ++i) {
            for (int j = i + 1; j < nk; ++j) scores(i, j) = -std::numeric_limits<S>::infinity();
          }
        }
        SoftmaxRows(scores);
        ctx.block(q0, h * dk_, nq, dk_).noalias() = scores * v.block(k0, h * dk_, nk, dk_);
        probs_[s * static_cast<size_t>(heads_) + static_cast<size_t>(h)] = std::move(scores);
      }
    }
    qm_ = std::move(q);
    km_ = std::move(k);
    vm_ = std::move(v);
    qoff_ = qoff;
    kvoff_ = kvoff;
    return o_.Forward(ctx);
  }

  /// Returns (d query input, d key/value input).
  std::pair<Mat<S>, Mat<S>> Backward(const Mat<S>& dy) {
    const Mat<S> dctx = o_.Backward(dy);
    Mat<S> dq = Mat<S>::Zero(qm_.rows(), qm_.cols());
    Mat<S> dk = Mat<S>::Zero(km_.rows(), km_.cols());
    Mat<S> dv = Mat<S>::Zero(vm_.rows(), vm_.cols());
    const S scale = S(1) / std::sqrt(static_cast<S>(dk_));
    const size_t sentences = qoff_.size() - 1;
    for (size_t s = 0; s < sentences; ++s) {
      const int q0 = qoff_[s], nq = qoff_[s + 1] - qoff_[s];
      const int k0 = kvoff_[s], nk = kvoff_[s + 1] - kvoff_[s];
      if (nq == 0 || nk == 0) continue;
      for (int h = 0; h < heads_; ++h) {
        const Mat<S>& p = probs_[s * static_cast<size_t>(heads_) + static_cast<size_t>(h)];
        const auto dout = dctx.block(q0, h * dk_, nq, dk_);
        dv.block(k0, h * dk_, nk, dk_).noalias() += p.transpose() * dout;
        Mat<S> dp = dout * vm_.block(k0, h * dk_, nk, dk_).transpose();
        const Eigen::Matrix<S, Eigen::Dynamic, 1> dot = (dp.array() * p.array()).rowwise().sum();
        Mat<S> ds = (p.array() * (dp.colwise() - dot).array()).matrix() * scale;
        dq.block(q0, h * dk_, nq, dk_).noalias() += ds * km_.block(k0, h * dk_, nk, dk_);
        dk.block(k0, h * dk_, nk, dk_).noalias() += ds.transpose() * qm_.block(q0, h * dk_, nq, dk_);
      }
    }
    Mat<S> dxq = q_.Backward(dq);
    Mat<S> dxkv = k_.Backward(dk);
    dxkv += v_.Backward(dv);
    return {std::move(dxq), std::move(dxkv)};
  }

  void Collect(const std::string& prefix, NamedParams<S>& out) {
    q_.Collect(prefix + ".q", out);
    k_.Collect(prefix + ".k", out);
    v_.Collect(prefix + ".v", out);
    o_.Collect(prefix + ".out", out);
  }

  const Linear<S>& q() const { return q_; }
  const Linear<S>& k() const { return k_; }
  const Linear<S>& v() const { return v_; }
  const Linear<S>& o() const { return o_; }
  int heads() const { return heads_; }
  int head_dim() const { return dk_; }

  static void SoftmaxRows(Mat<S>& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      const S mx = m.row(r).maxCoeff();
      m.row(r) = (m.row(r).array() - mx).exp();
      m.row(r) /= m.row(r).sum();
    }
  }

 private:
  int heads_ = 1;
  int dk_ = 1;
  Linear<S> q_, k_, v_, o_;
  Mat<S> qm_, km_, vm_;
  Offsets qoff_, kvoff_;
  std::vector<Mat<S>> probs_;
};

/// Position-wise feed-forward block: Linear, ReLU, Linear.
template <typename S>
class FeedForward {
 public:
  void Init(int dim, int hidden, Rng& rng) {
    in_.Init(dim, hidden, rng);
    out_.Init(hidden, dim, rng);
  }

  Mat<S> Apply(const Mat<S>& x) const { return out_.Apply(in_.Apply(x).cwiseMax(S(0))); }

  Mat<S> Forward(const Mat<S>& x) {
    h_ = in_.Forward(x).cwiseMax(S(0));
    return out_.Forward(h_);
  }

  Mat<S> Backward(const Mat<S>& dy) {
    Mat<S> dh = out_.Backward(dy);
    dh = (h_.array() > S(0)).select(dh, S(0));
    return in_.Backward(dh);
  }

  void Collect(const std::string& prefix, NamedParams<S>& out) {
    in_.Collect(prefix + ".fc1", out);
    out_.Collect(prefix + ".fc2", out);
  }

 private:
  Linear<S> in_, out_;
  Mat<S> h_;
};

/// Sinusoidal position table, one row per position.
template <typename S>
Mat<S> PositionTable(int positions, int dim) {
  Mat<S> pe(positions, dim);
  for (int pos = 0; pos < positions; ++pos) {
    for (int i = 0; i < dim; i += 2) {
      const double angle = pos / std::pow(10000.0, static_cast<double>(i) / dim);
      pe(pos, i) = static_cast<S>(std::sin(angle));
      if (i + 1 < dim) pe(pos, i + 1) = static_cast<S>(std::cos(angle));
    }
  }
  return pe;
}

}  // namespace gecprobe::seq2seq
