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

// Declarative paired grammar: feature-annotated context-free rules, each
// either grammatical or tagged with the error type it introduces, plus the
// inflection lexicon. The text format is documented in README.md and
// grammars/english.cfg.

#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "gecprobe/error.hpp"
#include "gecprobe/gen/lexicon.hpp"
#include "gecprobe/types.hpp"

namespace gecprobe::gen {

enum class FeatureValue : uint8_t { kSg, kPl, kPres, kPast, kIng, kBase, kCp };

inline std::string_view ToString(FeatureValue v) {
  switch (v) {
    case FeatureValue::kSg: return "sg";
    case FeatureValue::kPl: return "pl";
    case FeatureValue::kPres: return "pres";
    case FeatureValue::kPast: return "past";
    case FeatureValue::kIng: return "ing";
    case FeatureValue::kBase: return "base";
    case FeatureValue::kCp: return "cp";
  }
  return "?";
}

inline std::optional<FeatureValue> ParseFeatureValue(std::string_view s) {
  for (FeatureValue v : {FeatureValue::kSg, FeatureValue::kPl, FeatureValue::kPres,
                         FeatureValue::kPast, FeatureValue::kIng, FeatureValue::kBase,
                         FeatureValue::kCp}) {
    if (ToString(v) == s) return v;
  }
  return std::nullopt;
}

/// Values a variable left unbound by the left-hand side ranges over.
inline constexpr std::array<FeatureValue, 2> kFreeVariableDomain = {FeatureValue::kSg,
                                                                    FeatureValue::kPl};

struct Arg {
  bool is_var = false;
  FeatureValue value = FeatureValue::kSg;
  std::string var;

  friend bool operator==(const Arg&, const Arg&) = default;
};

struct Symbol {
  std::string name;
  std::vector<Arg> args;
  std::optional<Category> terminal;

  bool IsTerminal() const { return terminal.has_value(); }
};

/// A nonterminal or terminal with every argument resolved.
struct Instance {
  std::string name;
  std::vector<FeatureValue> values;

  friend bool operator==(const Instance&, const Instance&) = default;
  friend auto operator<=>(const Instance&, const Instance&) = default;
};

inline std::string ToString(const Instance& inst) {
  std::string out = inst.name;
  if (!inst.values.empty()) {
    out += '[';
    for (size_t i = 0; i < inst.values.size(); ++i) {
      if (i) out += ',';
      out += ToString(inst.values[i]);
    }
    out += ']';
  }
  return out;
}

struct GrammarRule {
  Symbol lhs;
  std::vector<Symbol> rhs;
  std::optional<ErrorType> error;  // nullopt: grammatical
  // Error rules only: index of the grammatical counterpart, and for each rhs
  // slot the counterpart slot holding the same lexical choice.
  size_t counterpart = SIZE_MAX;
  std::vector<size_t> aligned_slot;
  size_t line = 0;

  bool IsError() const { return error.has_value(); }
};

using Bindings = std::vector<std::pair<std::string, FeatureValue>>;

inline std::optional<FeatureValue> Lookup(const Bindings& b, const std::string& var) {
  for (const auto& [name, value] : b) {
    if (name == var) return value;
  }
  return std::nullopt;
}

/// Matches rule lhs arguments against an instance, extending `bindings`.
inline bool Unify(const std::vector<Arg>& params, const std::vector<FeatureValue>& values,
                  Bindings& bindings) {
  if (params.size() != values.size()) return false;
  for (size_t i = 0; i < params.size(); ++i) {
    const Arg& p = params[i];
    if (!p.is_var) {
      if (p.value != values[i]) return false;
      continue;
    }
    if (auto bound = Lookup(bindings, p.var)) {
      if (*bound != values[i]) return false;
    } else {
      bindings.emplace_back(p.var, values[i]);
    }
  }
  return true;
}

/// Variables used in the rule's rhs that `bindings` leaves open, in first
/// occurrence order.
inline std::vector<std::string> FreeVariables(const GrammarRule& rule, const Bindings& bindings) {
  std::vector<std::string> out;
  for (const Symbol& s : rule.rhs) {
    for (const Arg& a : s.args) {
      if (a.is_var && !Lookup(bindings, a.var) &&
          std::find(out.begin(), out.end(), a.var) == out.end()) {
        out.push_back(a.var);
      }
    }
  }
  return out;
}

/// Calls `fn(bindings)` once per assignment of `vars` over the free domain.
inline void ForEachAssignment(const std::vector<std::string>& vars, Bindings base,
                              const std::function<void(const Bindings&)>& fn) {
  if (vars.empty()) {
    fn(base);
    return;
  }
  const size_t n = vars.size();
  std::vector<size_t> digit(n, 0);
  const size_t base_size = base.size();
  while (true) {
    base.resize(base_size);
    for (size_t i = 0; i < n; ++i) base.emplace_back(vars[i], kFreeVariableDomain[digit[i]]);
    fn(base);
    size_t i = n;
    while (i > 0) {
      --i;
      if (++digit[i] < kFreeVariableDomain.size()) break;
      digit[i] = 0;
      if (i == 0) return;
    }
  }
}

inline Instance Resolve(const Symbol& symbol, const Bindings& bindings) {
  Instance out{symbol.name, {}};
  out.values.reserve(symbol.args.size());
  for (const Arg& a : symbol.args) {
    if (!a.is_var) {
      out.values.push_back(a.value);
    } else if (auto v = Lookup(bindings, a.var)) {
      out.values.push_back(*v);
    } else {
      Fail(ErrorKind::kGrammarIncomplete, "unbound variable $" + a.var + " in " + symbol.name);
    }
  }
  return out;
}

/// Maps a resolved terminal's arguments onto lexical features. Number
/// values set agreement; pres/past/ing/base pick the verb form (pres
/// resolves to third-singular or base by number); cp selects the
/// counterpart modifier form.
inline FeatureBundle ToFeatures(const std::vector<FeatureValue>& values) {
  FeatureBundle f;
  bool present = false;
  for (FeatureValue v : values) {
    switch (v) {
      case FeatureValue::kSg: f.number = Number::kSingular; break;
      case FeatureValue::kPl: f.number = Number::kPlural; break;
      case FeatureValue::kPres: present = true; break;
      case FeatureValue::kPast: f.verb_form = VerbForm::kPast; break;
      case FeatureValue::kIng: f.verb_form = VerbForm::kProgressive; break;
      case FeatureValue::kBase: f.verb_form = VerbForm::kBase; break;
      case FeatureValue::kCp: f.counterpart = true; break;
    }
  }
  if (present) {
    f.verb_form = f.number == Number::kSingular ? VerbForm::kThirdSgPresent
                  : f.number == Number::kPlural ? VerbForm::kBase
                                                : VerbForm::kNotApplicable;
  }
  return f;
}

class Grammar {
 public:
  std::vector<GrammarRule> rules;
  std::map<ErrorType, Instance> starts;
  Lexicon lexicon;

  std::vector<size_t> RulesFor(const std::string& lhs_name) const {
    std::vector<size_t> out;
    for (size_t i = 0; i < rules.size(); ++i) {
      if (rules[i].lhs.name == lhs_name) out.push_back(i);
    }
    return out;
  }

  bool HasErrorRule(ErrorType type) const {
    return std::any_of(rules.begin(), rules.end(),
                       [&](const GrammarRule& r) { return r.error == type; });
  }

  /// Links error rules to counterparts and checks symbol references.
  /// Called by the parser; call again after editing rules by hand.
  void Link() {
    std::set<std::string> defined;
    for (const auto& r : rules) defined.insert(r.lhs.name);
    for (const auto& r : rules) {
      if (r.rhs.empty()) Fail(ErrorKind::kGrammarSyntax, "empty rhs at line " + std::to_string(r.line));
      for (const Symbol& s : r.rhs) {
        if (!s.IsTerminal() && !defined.count(s.name)) {
          Fail(ErrorKind::kGrammarSyntax, "undefined nonterminal '" + s.name + "' at line " +
                                              std::to_string(r.line));
        }
      }
    }
    for (const auto& [type, start] : starts) {
      if (!defined.count(start.name)) {
        Fail(ErrorKind::kGrammarSyntax, "start symbol '" + start.name + "' for " +
                                            std::string(gecprobe::ToString(type)) + " has no rules");
      }
    }
    for (size_t i = 0; i < rules.size(); ++i) {
      if (rules[i].IsError()) LinkCounterpart(i);
    }
  }

  /// Nonterminal names reachable from themselves, i.e. recursion.
  std::vector<std::string> RecursiveNonterminals() const {
    std::map<std::string, std::set<std::string>> edges;
    for (const auto& r : rules) {
      for (const Symbol& s : r.rhs) {
        if (!s.IsTerminal()) edges[r.lhs.name].insert(s.name);
      }
    }
    std::vector<std::string> out;
    for (const auto& [name, _] : edges) {
      std::set<std::string> seen;
      std::vector<std::string> stack(edges[name].begin(), edges[name].end());
      bool cyclic = false;
      while (!stack.empty() && !cyclic) {
        std::string cur = stack.back();
        stack.pop_back();
        if (cur == name) cyclic = true;
        if (!seen.insert(cur).second) continue;
        auto it = edges.find(cur);
        if (it != edges.end()) stack.insert(stack.end(), it->second.begin(), it->second.end());
      }
      if (cyclic) out.push_back(name);
    }
    return out;
  }

  void RequireFinite() const {
    auto rec = RecursiveNonterminals();
    if (!rec.empty()) {
      Fail(ErrorKind::kNonFiniteGrammar, "recursive nonterminal '" + rec.front() + "'");
    }
  }

 private:
  static std::vector<std::string> CategoryNames(const GrammarRule& r) {
    std::vector<std::string> names;
    for (const Symbol& s : r.rhs) names.push_back(s.name);
    std::sort(names.begin(), names.end());
    return names;
  }

  static bool LhsCompatible(const Symbol& a, const Symbol& b) {
    if (a.args.size() != b.args.size()) return false;
    for (size_t i = 0; i < a.args.size(); ++i) {
      if (!a.args[i].is_var && !b.args[i].is_var && a.args[i].value != b.args[i].value) {
        return false;
      }
    }
    return true;
  }

  void LinkCounterpart(size_t index) {
    GrammarRule& e = rules[index];
    const auto names = CategoryNames(e);
    std::vector<size_t> candidates;
    for (size_t j = 0; j < rules.size(); ++j) {
      const GrammarRule& g = rules[j];
      if (g.IsError() || g.lhs.name != e.lhs.name) continue;
      if (CategoryNames(g) == names && LhsCompatible(e.lhs, g.lhs)) candidates.push_back(j);
    }
    const std::string where = "error rule for " + e.lhs.name + " at line " + std::to_string(e.line);
    if (candidates.empty()) {
      Fail(ErrorKind::kGrammarIncomplete,
           where + " has no grammatical counterpart with the same symbols");
    }
    if (candidates.size() > 1) {
      Fail(ErrorKind::kGrammarSyntax, where + " has several grammatical counterparts");
    }
    e.counterpart = candidates.front();
    const GrammarRule& g = rules[e.counterpart];
    // k-th occurrence of a symbol in the error rule pairs with the k-th
    // occurrence of the same symbol in the counterpart.
    e.aligned_slot.assign(e.rhs.size(), SIZE_MAX);
    std::vector<bool> used(g.rhs.size(), false);
    for (size_t k = 0; k < e.rhs.size(); ++k) {
      for (size_t m = 0; m < g.rhs.size(); ++m) {
        if (!used[m] && g.rhs[m].name == e.rhs[k].name) {
          used[m] = true;
          e.aligned_slot[k] = m;
          break;
        }
      }
    }
  }
};

// ---------------------------------------------------------------------------
// Text format.

namespace detail {

inline std::string Trim(std::string_view s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

[[noreturn]] inline void SyntaxError(size_t line, const std::string& what) {
  Fail(ErrorKind::kGrammarSyntax, "line " + std::to_string(line) + ": " + what);
}

inline Symbol ParseSymbol(const std::string& text, size_t line) {
  Symbol s;
  const auto open = text.find('[');
  s.name = text.substr(0, open);
  if (s.name.empty()) SyntaxError(line, "empty symbol name in '" + text + "'");
  s.terminal = CategoryFromSymbol(s.name);
  if (open == std::string::npos) return s;
  if (text.back() != ']') SyntaxError(line, "unterminated feature list in '" + text + "'");
  std::stringstream args(text.substr(open + 1, text.size() - open - 2));
  std::string a;
  while (std::getline(args, a, ',')) {
    a = Trim(a);
    if (a.empty()) SyntaxError(line, "empty feature in '" + text + "'");
    if (a[0] == '$') {
      if (a.size() == 1) SyntaxError(line, "empty variable name in '" + text + "'");
      s.args.push_back({true, FeatureValue::kSg, a.substr(1)});
    } else if (auto v = ParseFeatureValue(a)) {
      s.args.push_back({false, *v, {}});
    } else {
      SyntaxError(line, "unknown feature value '" + a + "'");
    }
  }
  return s;
}

inline Number ParseAgreement(const std::string& s, size_t line) {
  if (s == "sg") return Number::kSingular;
  if (s == "pl") return Number::kPlural;
  if (s == "any") return Number::kAny;
  SyntaxError(line, "quantifier agreement must be sg, pl or any, got '" + s + "'");
}

inline void ParseLexiconLine(const std::vector<std::string>& w, size_t line, Lexicon& lexicon) {
  auto category = CategoryFromSymbol(w[0]);
  if (!category) SyntaxError(line, "unknown lexical category '" + w[0] + "'");
  auto arity = [&](size_t lo, size_t hi) {
    if (w.size() - 1 < lo || w.size() - 1 > hi) {
      SyntaxError(line, "wrong number of forms for " + w[0]);
    }
  };
  try {
    switch (*category) {
      case Category::kQuantifier:
        arity(2, 2);
        lexicon.Add(MakeQuantifier(w[1], ParseAgreement(w[2], line)));
        break;
      case Category::kNoun:
        arity(2, 2);
        lexicon.Add(MakeNoun(w[1], w[2]));
        break;
      case Category::kIntransitiveVerb:
      case Category::kTransitiveVerb:
        arity(4, 4);
        lexicon.Add(MakeVerb(*category, w[1], w[2], w[3], w[4]));
        break;
      case Category::kAdjective:
      case Category::kAdverb:
        arity(1, 2);
        lexicon.Add(MakeModifier(*category, w[1], w.size() > 2 ? w[2] : std::string{}));
        break;
    }
  } catch (const Error& e) {
    SyntaxError(line, e.what());
  }
}

}  // namespace detail

inline Grammar ParseGrammar(std::istream& in) {
  using detail::SyntaxError;
  using detail::Trim;
  enum class Section { kNone, kRules, kLexicon } section = Section::kNone;
  Grammar g;
  std::string raw;
  size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw.substr(0, raw.find('#'));
    line = Trim(line);
    if (line.empty()) continue;
    if (line == "rules:") { section = Section::kRules; continue; }
    if (line == "lexicon:") { section = Section::kLexicon; continue; }
    std::vector<std::string> words = SplitTokens(line);
    if (section == Section::kNone) SyntaxError(line_no, "content before 'rules:' or 'lexicon:'");
    if (section == Section::kLexicon) {
      detail::ParseLexiconLine(words, line_no, g.lexicon);
      continue;
    }
    if (words[0] == "start") {
      if (words.size() != 3) SyntaxError(line_no, "expected: start <error-type> <symbol>");
      auto type = ParseErrorType(words[1]);
      if (!type) SyntaxError(line_no, "unknown error type '" + words[1] + "'");
      Symbol s = detail::ParseSymbol(words[2], line_no);
      Instance inst{s.name, {}};
      for (const Arg& a : s.args) {
        if (a.is_var) SyntaxError(line_no, "start symbol arguments must be values");
        inst.values.push_back(a.value);
      }
      g.starts[*type] = inst;
      continue;
    }
    // rule: lhs -> alt | alt ... [! TYPE]
    if (words.size() < 3 || words[1] != "->") SyntaxError(line_no, "expected '<lhs> -> <rhs>'");
    std::optional<ErrorType> error;
    auto bang = std::find(words.begin(), words.end(), "!");
    if (bang != words.end()) {
      if (std::next(bang) == words.end() || std::next(bang, 2) != words.end()) {
        SyntaxError(line_no, "expected a single error type after '!'");
      }
      error = ParseErrorType(*std::next(bang));
      if (!error) SyntaxError(line_no, "unknown error type '" + *std::next(bang) + "'");
      words.erase(bang, words.end());
    }
    Symbol lhs = detail::ParseSymbol(words[0], line_no);
    if (lhs.IsTerminal()) SyntaxError(line_no, "lexical category '" + lhs.name + "' used as lhs");
    std::vector<Symbol> alt;
    auto flush = [&] {
      if (alt.empty()) SyntaxError(line_no, "empty alternative");
      GrammarRule r;
      r.lhs = lhs;
      r.rhs = std::move(alt);
      r.error = error;
      r.line = line_no;
      g.rules.push_back(std::move(r));
      alt.clear();
    };
    for (size_t i = 2; i < words.size(); ++i) {
      if (words[i] == "|") {
        flush();
      } else {
        alt.push_back(detail::ParseSymbol(words[i], line_no));
      }
    }
    flush();
  }
  g.Link();
  return g;
}

inline Grammar ParseGrammarText(const std::string& text) {
  std::istringstream in(text);
  return ParseGrammar(in);
}

inline Grammar LoadGrammar(const std::string& path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorKind::kIo, "cannot open grammar file " + path);
  return ParseGrammar(in);
}

}  // namespace gecprobe::gen
