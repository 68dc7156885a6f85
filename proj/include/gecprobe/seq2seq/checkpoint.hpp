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

// Checkpoint snapshots and their on-disk form.
//
// Binary file, all integers little-endian:
//   "GECPCKP1"            8-byte magic
//   u32 version           currently 1
//   u64 step              optimizer steps taken
//   u32 count             number of tensors, then per tensor:
//     u32 name_len, name bytes (UTF-8)
//     u32 rows, u32 cols
//     rows * cols float32 values, row-major
// The JSON sidecar next to it (same stem, ".json") holds the format version,
// model config, vocabulary, step and the tensor names with shapes.

#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gecprobe/error.hpp"
#include "gecprobe/seq2seq/config.hpp"
#include "gecprobe/seq2seq/model.hpp"
#include "gecprobe/seq2seq/vocab.hpp"

namespace gecprobe::seq2seq {

inline constexpr char kCheckpointMagic[9] = "GECPCKP1";
inline constexpr uint32_t kCheckpointVersion = 1;

struct Tensor {
  std::string name;
  uint32_t rows = 0;
  uint32_t cols = 0;
  std::vector<float> data;

  friend bool operator==(const Tensor&, const Tensor&) = default;
};

struct Checkpoint {
  ModelConfig config;
  Vocab vocab;
  int64_t step = 0;
  std::vector<Tensor> tensors;
};

inline Checkpoint Snapshot(Transformer<float>& model, const Vocab& vocab, int64_t step) {
  Checkpoint c{model.config(), vocab, step, {}};
  for (const auto& [name, p] : model.Params()) {
    Tensor t{name, static_cast<uint32_t>(p->value.rows()), static_cast<uint32_t>(p->value.cols()), {}};
    t.data.assign(p->value.data(), p->value.data() + p->value.size());
    c.tensors.push_back(std::move(t));
  }
  return c;
}

/// Rebuilds a model; tensor names and shapes must match the config exactly.
inline Transformer<float> Restore(const Checkpoint& c) {
  Transformer<float> model(c.config, static_cast<int>(c.vocab.size()), 0);
  auto params = model.Params();
  if (params.size() != c.tensors.size()) {
    Fail(ErrorKind::kInvalidArgument, "checkpoint has " + std::to_string(c.tensors.size()) +
                                          " tensors, config expects " + std::to_string(params.size()));
  }
  for (size_t i = 0; i < params.size(); ++i) {
    const Tensor& t = c.tensors[i];
    Param<float>& p = *params[i].second;
    if (t.name != params[i].first || t.rows != p.value.rows() || t.cols != p.value.cols() ||
        t.data.size() != static_cast<size_t>(p.value.size())) {
      Fail(ErrorKind::kInvalidArgument, "checkpoint tensor " + t.name + " does not match " + params[i].first);
    }
    std::memcpy(p.value.data(), t.data.data(), t.data.size() * sizeof(float));
  }
  return model;
}

namespace detail {

inline void PutU32(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void PutU64(std::string& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

class Reader {
 public:
  Reader(const std::string& bytes, const std::string& name) : bytes_(bytes), name_(name) {}

  uint64_t Uint(int width) {
    Need(static_cast<size_t>(width));
    uint64_t v = 0;
    for (int i = 0; i < width; ++i) v |= static_cast<uint64_t>(static_cast<unsigned char>(bytes_[pos_++])) << (8 * i);
    return v;
  }

  std::string Bytes(size_t n) {
    Need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  bool AtEnd() const { return pos_ == bytes_.size(); }

 private:
  void Need(size_t n) const {
    if (bytes_.size() - pos_ < n) Fail(ErrorKind::kIo, name_ + ": truncated checkpoint");
  }

  const std::string& bytes_;
  std::string name_;
  size_t pos_ = 0;
};

inline std::filesystem::path SidecarPath(const std::filesystem::path& bin) {
  std::filesystem::path p = bin;
  return p.replace_extension(".json");
}

}  // namespace detail

inline std::string EncodeCheckpoint(const Checkpoint& c) {
  std::string out(kCheckpointMagic, 8);
  detail::PutU32(out, kCheckpointVersion);
  detail::PutU64(out, static_cast<uint64_t>(c.step));
  detail::PutU32(out, static_cast<uint32_t>(c.tensors.size()));
  for (const Tensor& t : c.tensors) {
    detail::PutU32(out, static_cast<uint32_t>(t.name.size()));
    out += t.name;
    detail::PutU32(out, t.rows);
    detail::PutU32(out, t.cols);
    for (float f : t.data) {
      uint32_t bits;
      std::memcpy(&bits, &f, sizeof bits);
      detail::PutU32(out, bits);
    }
  }
  return out;
}

inline nlohmann::json SidecarJson(const Checkpoint& c) {
  nlohmann::json tensors = nlohmann::json::array();
  for (const Tensor& t : c.tensors) tensors.push_back({{"name", t.name}, {"shape", {t.rows, t.cols}}});
  return {{"format", "gecprobe-checkpoint"},
          {"version", kCheckpointVersion},
          {"step", c.step},
          {"model", c.config},
          {"vocab", c.vocab.ToJson()},
          {"tensors", tensors}};
}

inline void SaveCheckpoint(const Checkpoint& c, const std::filesystem::path& bin) {
  if (bin.has_parent_path()) std::filesystem::create_directories(bin.parent_path());
  {
    std::ofstream out(bin, std::ios::binary);
    const std::string bytes = EncodeCheckpoint(c);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) Fail(ErrorKind::kIo, "cannot write " + bin.string());
  }
  std::ofstream side(detail::SidecarPath(bin));
  side << SidecarJson(c).dump(2) << '\n';
  if (!side) Fail(ErrorKind::kIo, "cannot write " + detail::SidecarPath(bin).string());
}

inline Checkpoint LoadCheckpoint(const std::filesystem::path& bin) {
  std::ifstream side_in(detail::SidecarPath(bin));
  if (!side_in) Fail(ErrorKind::kIo, "cannot read " + detail::SidecarPath(bin).string());
  nlohmann::json side;
  try {
    side = nlohmann::json::parse(side_in);
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorKind::kIo, detail::SidecarPath(bin).string() + ": " + e.what());
  }
  std::ifstream in(bin, std::ios::binary);
  if (!in) Fail(ErrorKind::kIo, "cannot read " + bin.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  detail::Reader r(bytes, bin.string());
  if (r.Bytes(8) != std::string(kCheckpointMagic, 8)) Fail(ErrorKind::kIo, bin.string() + ": bad magic");
  if (const uint64_t v = r.Uint(4); v != kCheckpointVersion) {
    Fail(ErrorKind::kIo, bin.string() + ": unsupported version " + std::to_string(v));
  }
  Checkpoint c;
  c.config = side.at("model").get<ModelConfig>();
  c.vocab = Vocab::FromJson(side.at("vocab"));
  c.step = static_cast<int64_t>(r.Uint(8));
  const uint64_t count = r.Uint(4);
  for (uint64_t i = 0; i < count; ++i) {
    Tensor t;
    t.name = r.Bytes(r.Uint(4));
    t.rows = static_cast<uint32_t>(r.Uint(4));
    t.cols = static_cast<uint32_t>(r.Uint(4));
    t.data.resize(static_cast<size_t>(t.rows) * t.cols);
    for (float& f : t.data) {
      const auto bits = static_cast<uint32_t>(r.Uint(4));
      std::memcpy(&f, &bits, sizeof f);
    }
    c.tensors.push_back(std::move(t));
  }
  if (!r.AtEnd()) Fail(ErrorKind::kIo, bin.string() + ": trailing bytes");
  return c;
}

}  // namespace gecprobe::seq2seq
