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

// Model, training and decoding configuration with JSON round-tripping.

#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "gecprobe/error.hpp"

namespace gecprobe::seq2seq {

struct ModelConfig {
  int encoder_layers = 2;
  int decoder_layers = 2;
  int model_dim = 128;
  int ff_dim = 256;
  int heads = 4;
  double dropout = 0.3;
  double label_smoothing = 0.1;
  int max_sequence_length = 64;
  // One table for source and target embeddings and the output projection.
  bool share_embeddings = true;

  void Validate() const {
    auto require = [](bool ok, const std::string& what) {
      if (!ok) Fail(ErrorKind::kInvalidArgument, "model config: " + what);
    };
    require(encoder_layers >= 0 && decoder_layers >= 0, "layer counts must be non-negative");
    require(model_dim > 0 && ff_dim > 0 && heads > 0, "dimensions must be positive");
    require(model_dim % heads == 0, "model_dim must be divisible by heads");
    require(dropout >= 0.0 && dropout < 1.0, "dropout must lie in [0, 1)");
    require(label_smoothing >= 0.0 && label_smoothing < 1.0, "label_smoothing must lie in [0, 1)");
    require(max_sequence_length > 0, "max_sequence_length must be positive");
  }
};

struct TrainConfig {
  int epochs = 30;
  int batch_size = 32;
  int warmup_steps = 400;
  double lr_scale = 1.0;  // multiplies model_dim^-0.5 * min(step^-0.5, step * warmup^-1.5)
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.98;
  double adam_eps = 1e-9;
  double gradient_clip_norm = 1.0;
  uint64_t seed = 1;

  void Validate() const {
    auto require = [](bool ok, const std::string& what) {
      if (!ok) Fail(ErrorKind::kInvalidArgument, "train config: " + what);
    };
    require(epochs >= 1, "epochs must be at least 1");
    require(batch_size >= 1, "batch_size must be at least 1");
    require(warmup_steps >= 1, "warmup_steps must be at least 1");
    require(lr_scale > 0.0, "lr_scale must be positive");
    require(gradient_clip_norm > 0.0, "gradient_clip_norm must be positive");
  }
};

struct DecodeConfig {
  int beam_size = 5;
  bool length_normalization = true;
  double length_exponent = 1.0;
  int max_output_length = 64;
  int max_extra_tokens = 10;  // output may exceed the source by this many tokens

  void Validate() const {
    if (beam_size < 1) Fail(ErrorKind::kInvalidArgument, "decode config: beam_size must be at least 1");
    if (max_output_length < 1) {
      Fail(ErrorKind::kInvalidArgument, "decode config: max_output_length must be positive");
    }
  }
};

inline void to_json(nlohmann::json& j, const ModelConfig& c) {
  j = {{"encoder_layers", c.encoder_layers}, {"decoder_layers", c.decoder_layers},
       {"model_dim", c.model_dim},           {"ff_dim", c.ff_dim},
       {"heads", c.heads},                   {"dropout", c.dropout},
       {"label_smoothing", c.label_smoothing}, {"max_sequence_length", c.max_sequence_length},
       {"share_embeddings", c.share_embeddings}};
}

inline void from_json(const nlohmann::json& j, ModelConfig& c) {
  c.encoder_layers = j.value("encoder_layers", c.encoder_layers);
  c.decoder_layers = j.value("decoder_layers", c.decoder_layers);
  c.model_dim = j.value("model_dim", c.model_dim);
  c.ff_dim = j.value("ff_dim", c.ff_dim);
  c.heads = j.value("heads", c.heads);
  c.dropout = j.value("dropout", c.dropout);
  c.label_smoothing = j.value("label_smoothing", c.label_smoothing);
  c.max_sequence_length = j.value("max_sequence_length", c.max_sequence_length);
  c.share_embeddings = j.value("share_embeddings", c.share_embeddings);
}

inline void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = {{"epochs", c.epochs},         {"batch_size", c.batch_size},
       {"warmup_steps", c.warmup_steps}, {"lr_scale", c.lr_scale},
       {"adam_beta1", c.adam_beta1}, {"adam_beta2", c.adam_beta2},
       {"adam_eps", c.adam_eps},     {"gradient_clip_norm", c.gradient_clip_norm},
       {"seed", c.seed}};
}

inline void from_json(const nlohmann::json& j, TrainConfig& c) {
  c.epochs = j.value("epochs", c.epochs);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.warmup_steps = j.value("warmup_steps", c.warmup_steps);
  c.lr_scale = j.value("lr_scale", c.lr_scale);
  c.adam_beta1 = j.value("adam_beta1", c.adam_beta1);
  c.adam_beta2 = j.value("adam_beta2", c.adam_beta2);
  c.adam_eps = j.value("adam_eps", c.adam_eps);
  c.gradient_clip_norm = j.value("gradient_clip_norm", c.gradient_clip_norm);
  c.seed = j.value("seed", c.seed);
}

inline void to_json(nlohmann::json& j, const DecodeConfig& c) {
  j = {{"beam_size", c.beam_size},
       {"length_normalization", c.length_normalization},
       {"length_exponent", c.length_exponent},
       {"max_output_length", c.max_output_length},
       {"max_extra_tokens", c.max_extra_tokens}};
}

inline void from_json(const nlohmann::json& j, DecodeConfig& c) {
  c.beam_size = j.value("beam_size", c.beam_size);
  c.length_normalization = j.value("length_normalization", c.length_normalization);
  c.length_exponent = j.value("length_exponent", c.length_exponent);
  c.max_output_length = j.value("max_output_length", c.max_output_length);
  c.max_extra_tokens = j.value("max_extra_tokens", c.max_extra_tokens);
}

}  // namespace gecprobe::seq2seq
