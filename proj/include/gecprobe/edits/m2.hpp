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

#pragma once

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "gecprobe/error.hpp"
#include "gecprobe/types.hpp"

namespace gecprobe::edits {

struct Provenance {
  std::string file;
  size_t line = 0;  // line of the S line, 1-based
};

struct AnnotatedCorpus {
  std::vector<SentencePair> pairs;
  std::vector<Provenance> provenance;
};

namespace detail {

inline std::vector<std::string> SplitFields(const std::string& s) {
  std::vector<std::string> out;
  size_t pos = 0;
  while (true) {
    const size_t at = s.find("|||", pos);
    out.push_back(s.substr(pos, at == std::string::npos ? std::string::npos : at - pos));
    if (at == std::string::npos) break;
    pos = at + 3;
  }
  return out;
}

inline bool ParseInt(const std::string& s, long& out) {
  const char* b = s.data();
  const char* e = b + s.size();
  auto [ptr, ec] = std::from_chars(b, e, out);
  return ec == std::errc() && ptr == e;
}

}  // namespace detail

/// Reads M2: blocks of one `S` line followed by `A` lines, separated by
/// blank lines. Only annotator 0 is kept. `noop` and `-1 -1` annotations
/// leave the pair without gold edits.
inline AnnotatedCorpus ParseM2(std::istream& in, const std::string& file_name = "<stream>") {
  AnnotatedCorpus corpus;
  std::string line;
  size_t line_no = 0;
  bool in_block = false;
  auto bad = [&](const std::string& what) {
    Fail(ErrorKind::kMalformedM2, file_name + ":" + std::to_string(line_no) + ": " + what);
  };
  auto finish = [&] {
    if (!in_block) return;
    SentencePair& p = corpus.pairs.back();
    try {
      p.reference = ApplyEdits(p.source, p.gold_edits);
    } catch (const Error& e) {
      Fail(ErrorKind::kMalformedM2, file_name + ":" + std::to_string(corpus.provenance.back().line) +
                                        ": edits do not apply: " + e.what());
    }
    in_block = false;
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      finish();
      continue;
    }
    if (line.rfind("S ", 0) == 0 || line == "S") {
      finish();
      SentencePair p;
      p.source = SplitTokens(line.size() > 2 ? std::string_view(line).substr(2) : std::string_view());
      p.origin = Origin::kReal;
      corpus.pairs.push_back(std::move(p));
      corpus.provenance.push_back({file_name, line_no});
      in_block = true;
      continue;
    }
    if (line.rfind("A ", 0) != 0) bad("expected an S or A line");
    if (!in_block) bad("A line outside a sentence block");
    const auto fields = detail::SplitFields(line.substr(2));
    if (fields.size() < 3) bad("A line needs span|||type|||correction fields");
    const auto span = SplitTokens(fields[0]);
    long start = 0, end = 0;
    if (span.size() != 2 || !detail::ParseInt(span[0], start) || !detail::ParseInt(span[1], end)) {
      bad("span must be two integers");
    }
    long annotator = 0;
    if (fields.size() >= 6) {
      const auto id = SplitTokens(fields.back());
      if (id.size() != 1 || !detail::ParseInt(id[0], annotator)) bad("annotator id must be an integer");
    }
    if (annotator != 0) continue;
    const std::string& type = fields[1];
    if (type == "noop" || (start == -1 && end == -1)) continue;
    SentencePair& p = corpus.pairs.back();
    if (start < 0 || end < 0) bad("negative span");
    if (start > end) bad("span start exceeds end");
    if (static_cast<size_t>(end) > p.source.size()) bad("span exceeds sentence length");
    Edit e;
    e.start = static_cast<size_t>(start);
    e.end = static_cast<size_t>(end);
    e.type_label = type;
    if (fields[2] != "-NONE-") e.correction = SplitTokens(fields[2]);
    p.gold_edits.push_back(std::move(e));
  }
  finish();
  return corpus;
}

inline AnnotatedCorpus ParseM2Text(const std::string& text) {
  std::istringstream in(text);
  return ParseM2(in);
}

inline AnnotatedCorpus LoadM2(const std::string& path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorKind::kIo, "cannot open M2 file " + path);
  return ParseM2(in, path);
}

/// Writes pairs as M2 with annotator id 0. Pairs without edits get a noop
/// line.
inline void WriteM2(const std::vector<SentencePair>& pairs, std::ostream& out) {
  for (const SentencePair& p : pairs) {
    out << "S " << JoinTokens(p.source) << '\n';
    if (p.gold_edits.empty()) {
      out << "A -1 -1|||noop|||-NONE-|||REQUIRED|||-NONE-|||0\n";
    }
    for (const Edit& e : p.gold_edits) {
      out << "A " << e.start << ' ' << e.end << "|||" << e.type_label << "|||"
          << (e.correction.empty() ? std::string("-NONE-") : JoinTokens(e.correction))
          << "|||REQUIRED|||-NONE-|||0\n";
    }
    out << '\n';
  }
}

inline std::string WriteM2Text(const std::vector<SentencePair>& pairs) {
  std::ostringstream out;
  WriteM2(pairs, out);
  return out.str();
}

/// One pair per edit of `type`: the reference applies only that edit, other
/// edits stay uncorrected on both sides, and the pair is noisy iff the
/// sentence carried any other edit.
inline std::vector<SentencePair> ExplodePerPattern(const std::vector<SentencePair>& corpus,
                                                   ErrorType type) {
  std::vector<SentencePair> out;
  for (const SentencePair& p : corpus) {
    for (const Edit& e : p.gold_edits) {
      if (!LabelMatches(e.type_label, type)) continue;
      SentencePair d;
      d.source = p.source;
      d.reference = ApplyEdits(p.source, {e});
      d.gold_edits = {e};
      d.error_type = type;
      d.noisy = p.gold_edits.size() > 1;
      d.origin = p.origin;
      out.push_back(std::move(d));
    }
  }
  return out;
}

}  // namespace gecprobe::edits
