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

// On-disk bundle: train/dev/test JSONL files next to a manifest.json that
// records setting, error type, sizes, seed and the held-out patterns.

#pragma once

#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "gecprobe/corpus_io.hpp"
#include "gecprobe/splits/splits.hpp"

namespace gecprobe::splits {

inline nlohmann::ordered_json ManifestJson(const DatasetBundle& b, uint64_t seed) {
  nlohmann::ordered_json j;
  j["setting"] = std::string(ToString(b.setting));
  j["error_type"] = std::string(ToString(b.error_type));
  j["seed"] = seed;
  j["files"] = {{"train", "train.jsonl"}, {"dev", "dev.jsonl"}, {"test", "test.jsonl"}};
  j["sizes"] = {{"train", b.train.size()}, {"dev", b.dev.size()}, {"test", b.test.size()}};
  auto held = nlohmann::ordered_json::array();
  for (const auto& p : b.held_out) held.push_back(edits::ToString(p));
  j["held_out"] = std::move(held);
  return j;
}

/// Validates the bundle, then writes it under `dir`.
inline void SaveBundle(const DatasetBundle& b, uint64_t seed, const std::filesystem::path& dir) {
  if (const std::string v = Violation(b); !v.empty()) {
    Fail(ErrorKind::kInfeasibleSplit, "refusing to write invalid bundle: " + v);
  }
  std::filesystem::create_directories(dir);
  SaveJsonl(b.train, (dir / "train.jsonl").string());
  SaveJsonl(b.dev, (dir / "dev.jsonl").string());
  SaveJsonl(b.test, (dir / "test.jsonl").string());
  std::ofstream out(dir / "manifest.json", std::ios::binary);
  if (!out) Fail(ErrorKind::kIo, "cannot write " + (dir / "manifest.json").string());
  out << ManifestJson(b, seed).dump(2) << '\n';
}

inline DatasetBundle LoadBundle(const std::filesystem::path& dir) {
  const auto manifest_path = dir / "manifest.json";
  std::ifstream in(manifest_path, std::ios::binary);
  if (!in) Fail(ErrorKind::kIo, "cannot open bundle manifest " + manifest_path.string());
  DatasetBundle b;
  try {
    const auto j = nlohmann::json::parse(in);
    b.setting = ParseSetting(j.at("setting").get<std::string>());
    b.error_type = ErrorTypeOrThrow(j.at("error_type").get<std::string>());
    const auto& files = j.at("files");
    b.train = LoadJsonl((dir / files.at("train").get<std::string>()).string());
    b.dev = LoadJsonl((dir / files.at("dev").get<std::string>()).string());
    b.test = LoadJsonl((dir / files.at("test").get<std::string>()).string());
    for (const auto& p : j.at("held_out")) b.held_out.push_back(edits::ParsePattern(p.get<std::string>()));
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorKind::kMalformedCorpus, manifest_path.string() + ": " + e.what());
  }
  b.pattern_index = BuildPatternIndex(b);
  return b;
}

}  // namespace gecprobe::splits
