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

// JSONL corpus format shared by every stage. One object per line:
//   {"src": "...", "ref": "...", "etype": "VERB:SVA" | null,
//    "edits": [{"start": i, "end": j, "correction": "...", "type": "..."}],
//    "noisy": false, "origin": "synthetic" | "real"}

#pragma once

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "gecprobe/error.hpp"
#include "gecprobe/types.hpp"

namespace gecprobe {

inline nlohmann::ordered_json ToJson(const SentencePair& p) {
  nlohmann::ordered_json j;
  j["src"] = JoinTokens(p.source);
  j["ref"] = JoinTokens(p.reference);
  j["etype"] = p.error_type ? nlohmann::ordered_json(std::string(ToString(*p.error_type)))
                            : nlohmann::ordered_json(nullptr);
  auto edits = nlohmann::ordered_json::array();
  for (const Edit& e : p.gold_edits) {
    nlohmann::ordered_json je;
    je["start"] = e.start;
    je["end"] = e.end;
    je["correction"] = JoinTokens(e.correction);
    je["type"] = e.type_label;
    edits.push_back(std::move(je));
  }
  j["edits"] = std::move(edits);
  j["noisy"] = p.noisy;
  j["origin"] = std::string(ToString(p.origin));
  return j;
}

inline SentencePair PairFromJson(const nlohmann::json& j) {
  SentencePair p;
  p.source = SplitTokens(j.at("src").get<std::string>());
  p.reference = SplitTokens(j.at("ref").get<std::string>());
  if (j.contains("etype") && !j.at("etype").is_null()) {
    p.error_type = ErrorTypeOrThrow(j.at("etype").get<std::string>());
  }
  if (j.contains("edits")) {
    for (const auto& je : j.at("edits")) {
      Edit e;
      e.start = je.at("start").get<size_t>();
      e.end = je.at("end").get<size_t>();
      e.correction = SplitTokens(je.value("correction", std::string()));
      e.type_label = je.value("type", std::string());
      p.gold_edits.push_back(std::move(e));
    }
  }
  p.noisy = j.value("noisy", false);
  const std::string origin = j.value("origin", std::string("synthetic"));
  if (origin != "synthetic" && origin != "real") {
    Fail(ErrorKind::kMalformedCorpus, "origin must be synthetic or real, got " + origin);
  }
  p.origin = origin == "real" ? Origin::kReal : Origin::kSynthetic;
  return p;
}

inline void WriteJsonl(const Corpus& corpus, std::ostream& out) {
  for (const SentencePair& p : corpus) out << ToJson(p).dump() << '\n';
}

inline Corpus ReadJsonl(std::istream& in, const std::string& name = "<stream>") {
  Corpus out;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      out.push_back(PairFromJson(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      Fail(ErrorKind::kMalformedCorpus, name + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      Fail(ErrorKind::kMalformedCorpus, name + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

inline void WriteTsv(const Corpus& corpus, std::ostream& out) {
  for (const SentencePair& p : corpus) {
    out << JoinTokens(p.source) << '\t' << JoinTokens(p.reference) << '\n';
  }
}

inline void SaveJsonl(const Corpus& corpus, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) Fail(ErrorKind::kIo, "cannot write " + path);
  WriteJsonl(corpus, out);
}

inline Corpus LoadJsonl(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorKind::kIo, "cannot open corpus " + path);
  return ReadJsonl(in, path);
}

inline void SaveTsv(const Corpus& corpus, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) Fail(ErrorKind::kIo, "cannot write " + path);
  WriteTsv(corpus, out);
}

}  // namespace gecprobe
