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

// Post-norm encoder-decoder Transformer. Training runs a full teacher-forced
// pass over a flattened batch; decoding uses a cached, one-step-at-a-time
// path that reproduces the same logits.

#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "gecprobe/error.hpp"
#include "gecprobe/rng.hpp"
#include "gecprobe/seq2seq/config.hpp"
#include "gecprobe/seq2seq/layers.hpp"
#include "gecprobe/seq2seq/vocab.hpp"

namespace gecprobe::seq2seq {

/// Source ids followed by the end marker.
inline std::vector<int> SourceIds(const std::vector<int>& ids) {
  std::vector<int> out(ids);
  out.push_back(kEos);
  return out;
}

/// Decoder input: begin marker followed by the target.
inline std::vector<int> TargetInput(const std::vector<int>& ids) {
  std::vector<int> out{kBos};
  out.insert(out.end(), ids.begin(), ids.end());
  return out;
}

/// Decoder output: the target followed by the end marker.
inline std::vector<int> TargetOutput(const std::vector<int>& ids) { return SourceIds(ids); }

struct Batch {
  std::vector<std::vector<int>> src;     // already terminated by kEos
  std::vector<std::vector<int>> tgt_in;  // starts with kBos
};

/// Token plus sinusoidal position embedding over a table owned elsewhere,
/// so that several users can share one table.
template <typename S>
class Embedding {
 public:
  void Init(int dim, int positions) {
    scale_ = std::sqrt(static_cast<S>(dim));
    pe_ = PositionTable<S>(positions, dim);
  }

  /// Embeds each sentence with positions restarting at 0.
  Mat<S> Apply(const Param<S>& table, const std::vector<std::vector<int>>& sentences) const {
    int rows = 0;
    for (const auto& s : sentences) rows += static_cast<int>(s.size());
    Mat<S> x(rows, table.value.cols());
    int r = 0;
    for (const auto& s : sentences) {
      for (size_t t = 0; t < s.size(); ++t, ++r) x.row(r) = Row(table, s[t], static_cast<int>(t));
    }
    return x;
  }

  RowVec<S> Row(const Param<S>& table, int id, int position) const {
    if (id < 0 || id >= table.value.rows()) Fail(ErrorKind::kInvalidArgument, "token id out of range");
    if (position >= pe_.rows()) Fail(ErrorKind::kInvalidArgument, "sequence exceeds max_sequence_length");
    return table.value.row(id) * scale_ + pe_.row(position);
  }

  Mat<S> Forward(const Param<S>& table, const std::vector<std::vector<int>>& sentences) {
    ids_.clear();
    for (const auto& s : sentences) ids_.insert(ids_.end(), s.begin(), s.end());
    return Apply(table, sentences);
  }

  void Backward(Param<S>& table, const Mat<S>& dx) const {
    for (size_t r = 0; r < ids_.size(); ++r) table.grad.row(ids_[r]) += dx.row(static_cast<Eigen::Index>(r)) * scale_;
  }

 private:
  S scale_ = S(1);
  Mat<S> pe_;
  std::vector<int> ids_;
};

template <typename S>
void InitEmbeddingTable(Param<S>& table, int vocab, int dim, Rng& rng) {
  table.Resize(vocab, dim);
  const double sd = 1.0 / std::sqrt(static_cast<double>(dim));
  for (Eigen::Index i = 0; i < table.value.size(); ++i) table.value.data()[i] = static_cast<S>(rng.Normal() * sd);
  table.value.row(kPad).setZero();
}

template <typename S>
class EncoderLayer {
 public:
  void Init(const ModelConfig& c, Rng& rng) {
    attn_.Init(c.model_dim, c.heads, rng);
    ln1_.Init(c.model_dim);
    ffn_.Init(c.model_dim, c.ff_dim, rng);
    ln2_.Init(c.model_dim);
  }

  Mat<S> Forward(const Mat<S>& x, const Offsets& off, double p, Rng* rng) {
    const Mat<S> a = drop1_.Forward(attn_.Forward(x, off, x, off, false), p, rng);
    const Mat<S> h = ln1_.Forward(x + a);
    const Mat<S> f = drop2_.Forward(ffn_.Forward(h), p, rng);
    return ln2_.Forward(h + f);
  }

  Mat<S> Backward(const Mat<S>& dy) {
    const Mat<S> dr2 = ln2_.Backward(dy);
    const Mat<S> dh = dr2 + ffn_.Backward(drop2_.Backward(dr2));
    const Mat<S> dr1 = ln1_.Backward(dh);
    auto [dq, dkv] = attn_.Backward(drop1_.Backward(dr1));
    return dr1 + dq + dkv;
  }

  Mat<S> Apply(const Mat<S>& x, const Offsets& off) const {
    const Mat<S> h = ln1_.Apply(x + SelfAttend(x, off));
    return ln2_.Apply(h + ffn_.Apply(h));
  }

  void Collect(const std::string& prefix, NamedParams<S>& out) {
    attn_.Collect(prefix + ".self_attn", out);
    ln1_.Collect(prefix + ".self_attn_norm", out);
    ffn_.Collect(prefix + ".ffn", out);
    ln2_.Collect(prefix + ".ffn_norm", out);
  }

 private:
  Mat<S> SelfAttend(const Mat<S>& x, const Offsets& off) const;

  MultiHeadAttention<S> attn_;
  LayerNorm<S> ln1_, ln2_;
  FeedForward<S> ffn_;
  Dropout<S> drop1_, drop2_;
};

/// Attention of `q` rows over `k`/`v` rows for one sentence, all heads, in
/// evaluation mode; `visible` limits each query row i to keys [0, visible(i)).
template <typename S, typename Visible>
Mat<S> AttendEval(const MultiHeadAttention<S>& m, const Mat<S>& q, const Mat<S>& k, const Mat<S>& v,
                  Visible visible) {
  const int dk = m.head_dim();
  const S scale = S(1) / std::sqrt(static_cast<S>(dk));
  Mat<S> ctx = Mat<S>::Zero(q.rows(), q.cols());
  for (int h = 0; h < m.heads(); ++h) {
    for (Eigen::Index i = 0; i < q.rows(); ++i) {
      const int n = visible(static_cast<int>(i));
      Mat<S> scores = (q.block(i, h * dk, 1, dk) * k.block(0, h * dk, n, dk).transpose()) * scale;
      MultiHeadAttention<S>::SoftmaxRows(scores);
      ctx.block(i, h * dk, 1, dk).noalias() = scores * v.block(0, h * dk, n, dk);
    }
  }
  return m.o().Apply(ctx);
}

template <typename S>
Mat<S> EncoderLayer<S>::SelfAttend(const Mat<S>& x, const Offsets& off) const {
  Mat<S> out(x.rows(), x.cols());
  for (size_t s = 0; s + 1 < off.size(); ++s) {
    const int r0 = off[s], n = off[s + 1] - off[s];
    if (n == 0) continue;
    const Mat<S> xs = x.middleRows(r0, n);
    out.middleRows(r0, n) =
        AttendEval(attn_, attn_.q().Apply(xs), attn_.k().Apply(xs), attn_.v().Apply(xs), [n](int) { return n; });
  }
  return out;
}

/// Per-hypothesis decoder cache: projected self-attention keys and values
/// for every position decoded so far, one pair per layer.
template <typename S>
struct DecoderCache {
  std::vector<Mat<S>> k, v;
  int length = 0;
};

/// Encoder output for one source, with cross-attention keys and values
/// projected once per decoder layer.
template <typename S>
struct EncodedSource {
  Mat<S> memory;
  std::vector<Mat<S>> cross_k, cross_v;
};

template <typename S>
class DecoderLayer {
 public:
  void Init(const ModelConfig& c, Rng& rng) {
    self_.Init(c.model_dim, c.heads, rng);
    ln1_.Init(c.model_dim);
    cross_.Init(c.model_dim, c.heads, rng);
    ln2_.Init(c.model_dim);
    ffn_.Init(c.model_dim, c.ff_dim, rng);
    ln3_.Init(c.model_dim);
  }

  Mat<S> Forward(const Mat<S>& x, const Offsets& off, const Mat<S>& memory, const Offsets& moff, double p,
                 Rng* rng) {
    const Mat<S> a = drop1_.Forward(self_.Forward(x, off, x, off, true), p, rng);
    const Mat<S> h1 = ln1_.Forward(x + a);
    const Mat<S> c = drop2_.Forward(cross_.Forward(h1, off, memory, moff, false), p, rng);
    const Mat<S> h2 = ln2_.Forward(h1 + c);
    const Mat<S> f = drop3_.Forward(ffn_.Forward(h2), p, rng);
    return ln3_.Forward(h2 + f);
  }

  /// Returns d input; adds the memory gradient into `dmemory`.
  Mat<S> Backward(const Mat<S>& dy, Mat<S>& dmemory) {
    const Mat<S> dr3 = ln3_.Backward(dy);
    const Mat<S> dh2 = dr3 + ffn_.Backward(drop3_.Backward(dr3));
    const Mat<S> dr2 = ln2_.Backward(dh2);
    auto [dq_cross, dmem] = cross_.Backward(drop2_.Backward(dr2));
    dmemory += dmem;
    const Mat<S> dh1 = dr2 + dq_cross;
    const Mat<S> dr1 = ln1_.Backward(dh1);
    auto [dq, dkv] = self_.Backward(drop1_.Backward(dr1));
    return dr1 + dq + dkv;
  }

  void Prepare(const Mat<S>& memory, Mat<S>& k, Mat<S>& v) const {
    k = cross_.k().Apply(memory);
    v = cross_.v().Apply(memory);
  }

  /// One decoding step for a set of hypotheses. Row b of `x` belongs to
  /// hypothesis b, whose cache receives this layer's new key and value.
  Mat<S> Step(const Mat<S>& x, std::vector<DecoderCache<S>*>& caches, size_t layer, const Mat<S>& cross_k,
              const Mat<S>& cross_v) const {
    const Mat<S> q = self_.q().Apply(x);
    const Mat<S> k = self_.k().Apply(x);
    const Mat<S> v = self_.v().Apply(x);
    const int dk = self_.head_dim();
    const S scale = S(1) / std::sqrt(static_cast<S>(dk));
    Mat<S> ctx(x.rows(), x.cols());
    for (Eigen::Index b = 0; b < x.rows(); ++b) {
      DecoderCache<S>& c = *caches[static_cast<size_t>(b)];
      Mat<S>& ck = c.k[layer];
      Mat<S>& cv = c.v[layer];
      const Eigen::Index n = ck.rows() + 1;
      ck.conservativeResize(n, x.cols());
      cv.conservativeResize(n, x.cols());
      ck.row(n - 1) = k.row(b);
      cv.row(n - 1) = v.row(b);
      for (int h = 0; h < self_.heads(); ++h) {
        Mat<S> scores = (q.block(b, h * dk, 1, dk) * ck.middleCols(h * dk, dk).transpose()) * scale;
        MultiHeadAttention<S>::SoftmaxRows(scores);
        ctx.block(b, h * dk, 1, dk).noalias() = scores * cv.middleCols(h * dk, dk);
      }
    }
    const Mat<S> h1 = ln1_.Apply(x + self_.o().Apply(ctx));
    const int m = static_cast<int>(cross_k.rows());
    const Mat<S> c = AttendEval(cross_, cross_.q().Apply(h1), cross_k, cross_v, [m](int) { return m; });
    const Mat<S> h2 = ln2_.Apply(h1 + c);
    return ln3_.Apply(h2 + ffn_.Apply(h2));
  }

  void Collect(const std::string& prefix, NamedParams<S>& out) {
    self_.Collect(prefix + ".self_attn", out);
    ln1_.Collect(prefix + ".self_attn_norm", out);
    cross_.Collect(prefix + ".cross_attn", out);
    ln2_.Collect(prefix + ".cross_attn_norm", out);
    ffn_.Collect(prefix + ".ffn", out);
    ln3_.Collect(prefix + ".ffn_norm", out);
  }

 private:
  MultiHeadAttention<S> self_, cross_;
  LayerNorm<S> ln1_, ln2_, ln3_;
  FeedForward<S> ffn_;
  Dropout<S> drop1_, drop2_, drop3_;
};

template <typename S>
class Transformer {
 public:
  Transformer(const ModelConfig& config, int vocab_size, uint64_t seed) : config_(config), vocab_size_(vocab_size) {
    config_.Validate();
    if (vocab_size <= kNumReserved) Fail(ErrorKind::kInvalidArgument, "vocabulary has no word types");
    Rng rng(seed);
    const int positions = config_.max_sequence_length + 2;
    src_embed_.Init(config_.model_dim, positions);
    tgt_embed_.Init(config_.model_dim, positions);
    InitEmbeddingTable(src_table_, vocab_size, config_.model_dim, rng);
    if (!config_.share_embeddings) InitEmbeddingTable(tgt_table_, vocab_size, config_.model_dim, rng);
    encoder_.resize(static_cast<size_t>(config_.encoder_layers));
    for (auto& l : encoder_) l.Init(config_, rng);
    decoder_.resize(static_cast<size_t>(config_.decoder_layers));
    for (auto& l : decoder_) l.Init(config_, rng);
    if (!config_.share_embeddings) output_.Init(config_.model_dim, vocab_size, rng);
  }

  const ModelConfig& config() const { return config_; }
  int vocab_size() const { return vocab_size_; }

  /// Parameters in canonical order with canonical names. A shared table is
  /// listed once, as "embed_tokens.weight".
  NamedParams<S> Params() {
    NamedParams<S> out;
    const bool shared = config_.share_embeddings;
    out.emplace_back(shared ? "embed_tokens.weight" : "encoder.embed_tokens.weight", &src_table_);
    for (size_t i = 0; i < encoder_.size(); ++i) encoder_[i].Collect("encoder.layers." + std::to_string(i), out);
    if (!shared) out.emplace_back("decoder.embed_tokens.weight", &tgt_table_);
    for (size_t i = 0; i < decoder_.size(); ++i) decoder_[i].Collect("decoder.layers." + std::to_string(i), out);
    if (!shared) output_.Collect("decoder.output_projection", out);
    return out;
  }

  void ZeroGrad() {
    for (auto& [name, p] : Params()) p->grad.setZero();
  }

  /// Teacher-forced logits, one row per decoder input token. Dropout is
  /// active only when `rng` is given; caches are kept for Backward.
  Mat<S> Forward(const Batch& batch, Rng* rng) {
    if (batch.src.size() != batch.tgt_in.size()) Fail(ErrorKind::kInvalidArgument, "batch sides differ in size");
    src_off_ = MakeOffsets(batch.src);
    tgt_off_ = MakeOffsets(batch.tgt_in);
    const double p = config_.dropout;
    Mat<S> x = src_drop_.Forward(src_embed_.Forward(src_table_, batch.src), p, rng);
    for (auto& l : encoder_) x = l.Forward(x, src_off_, p, rng);
    memory_rows_ = x.rows();
    Mat<S> y = tgt_drop_.Forward(tgt_embed_.Forward(TargetTable(), batch.tgt_in), p, rng);
    for (auto& l : decoder_) y = l.Forward(y, tgt_off_, x, src_off_, p, rng);
    if (!config_.share_embeddings) return output_.Forward(y);
    decoder_out_ = std::move(y);
    return decoder_out_ * src_table_.value.transpose();
  }

  void Backward(const Mat<S>& dlogits) {
    Mat<S> dy;
    if (config_.share_embeddings) {
      src_table_.grad.noalias() += dlogits.transpose() * decoder_out_;
      dy = dlogits * src_table_.value;
    } else {
      dy = output_.Backward(dlogits);
    }
    Mat<S> dmemory = Mat<S>::Zero(memory_rows_, config_.model_dim);
    for (size_t i = decoder_.size(); i-- > 0;) dy = decoder_[i].Backward(dy, dmemory);
    tgt_embed_.Backward(TargetTable(), tgt_drop_.Backward(dy));
    for (size_t i = encoder_.size(); i-- > 0;) dmemory = encoder_[i].Backward(dmemory);
    src_embed_.Backward(src_table_, src_drop_.Backward(dmemory));
  }

  EncodedSource<S> Encode(const std::vector<int>& src) const {
    EncodedSource<S> e;
    const Offsets off{0, static_cast<int>(src.size())};
    e.memory = src_embed_.Apply(src_table_, {src});
    for (const auto& l : encoder_) e.memory = l.Apply(e.memory, off);
    e.cross_k.resize(decoder_.size());
    e.cross_v.resize(decoder_.size());
    for (size_t i = 0; i < decoder_.size(); ++i) decoder_[i].Prepare(e.memory, e.cross_k[i], e.cross_v[i]);
    return e;
  }

  DecoderCache<S> NewCache() const {
    DecoderCache<S> c;
    c.k.assign(decoder_.size(), Mat<S>(0, config_.model_dim));
    c.v.assign(decoder_.size(), Mat<S>(0, config_.model_dim));
    return c;
  }

  /// Feeds one token per hypothesis and returns next-token log-probabilities,
  /// one row per hypothesis. Each cache advances by one position.
  Mat<S> Step(const EncodedSource<S>& enc, const std::vector<int>& tokens,
              std::vector<DecoderCache<S>*>& caches) const {
    Mat<S> x(static_cast<Eigen::Index>(tokens.size()), config_.model_dim);
    for (size_t b = 0; b < tokens.size(); ++b) {
      x.row(static_cast<Eigen::Index>(b)) = tgt_embed_.Row(TargetTable(), tokens[b], caches[b]->length);
    }
    for (size_t i = 0; i < decoder_.size(); ++i) x = decoder_[i].Step(x, caches, i, enc.cross_k[i], enc.cross_v[i]);
    for (auto* c : caches) ++c->length;
    Mat<S> logits = config_.share_embeddings ? Mat<S>(x * src_table_.value.transpose()) : output_.Apply(x);
    LogSoftmaxRows(logits);
    return logits;
  }

  static void LogSoftmaxRows(Mat<S>& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      const S mx = m.row(r).maxCoeff();
      const S lse = mx + std::log((m.row(r).array() - mx).exp().sum());
      m.row(r).array() -= lse;
    }
  }

  static Offsets MakeOffsets(const std::vector<std::vector<int>>& sentences) {
    Offsets off{0};
    for (const auto& s : sentences) off.push_back(off.back() + static_cast<int>(s.size()));
    return off;
  }

 private:
  Param<S>& TargetTable() { return config_.share_embeddings ? src_table_ : tgt_table_; }
  const Param<S>& TargetTable() const { return config_.share_embeddings ? src_table_ : tgt_table_; }

  ModelConfig config_;
  int vocab_size_;
  Param<S> src_table_, tgt_table_;
  Embedding<S> src_embed_, tgt_embed_;
  Dropout<S> src_drop_, tgt_drop_;
  std::vector<EncoderLayer<S>> encoder_;
  std::vector<DecoderLayer<S>> decoder_;
  Linear<S> output_;
  Offsets src_off_, tgt_off_;
  Mat<S> decoder_out_;
  Eigen::Index memory_rows_ = 0;
};

}  // namespace gecprobe::seq2seq
