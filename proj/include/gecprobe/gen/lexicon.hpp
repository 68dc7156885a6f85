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

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "gecprobe/error.hpp"

namespace gecprobe::gen {

enum class Category { kQuantifier, kNoun, kIntransitiveVerb, kTransitiveVerb, kAdjective, kAdverb };

inline std::string_view CategorySymbol(Category c) {
  switch (c) {
    case Category::kQuantifier: return "Q";
    case Category::kNoun: return "N";
    case Category::kIntransitiveVerb: return "IV";
    case Category::kTransitiveVerb: return "TV";
    case Category::kAdjective: return "Adj";
    case Category::kAdverb: return "Adv";
  }
  return "?";
}

inline std::optional<Category> CategoryFromSymbol(std::string_view s) {
  for (Category c : {Category::kQuantifier, Category::kNoun, Category::kIntransitiveVerb,
                     Category::kTransitiveVerb, Category::kAdjective, Category::kAdverb}) {
    if (CategorySymbol(c) == s) return c;
  }
  return std::nullopt;
}

inline bool IsVerb(Category c) {
  return c == Category::kIntransitiveVerb || c == Category::kTransitiveVerb;
}

enum class Number { kSingular, kPlural, kAny };
enum class VerbForm { kBase, kThirdSgPresent, kPast, kProgressive, kNotApplicable };

/// Features requested of (or provided by) a lexical form. `counterpart`
/// selects the paired adjective/adverb form (quick <-> quickly).
struct FeatureBundle {
  Number number = Number::kAny;
  VerbForm verb_form = VerbForm::kNotApplicable;
  bool counterpart = false;

  friend bool operator==(const FeatureBundle&, const FeatureBundle&) = default;
  friend bool operator<(const FeatureBundle& a, const FeatureBundle& b) {
    return std::tie(a.number, a.verb_form, a.counterpart) <
           std::tie(b.number, b.verb_form, b.counterpart);
  }
};

struct LexicalEntry {
  std::string lemma;
  Category category = Category::kNoun;
  std::map<FeatureBundle, std::string> forms;
};

namespace detail {

inline std::optional<std::string> Lookup(const LexicalEntry& entry, const FeatureBundle& key) {
  auto it = entry.forms.find(key);
  if (it == entry.forms.end() || it->second.empty()) return std::nullopt;
  return it->second;
}

}  // namespace detail

/// Surface string for `entry` under `features`, or nullopt when the entry
/// has no compatible form. With `strict_agreement`, a quantifier that agrees
/// with any number does not satisfy a concrete number request.
inline std::optional<std::string> TryInflect(const LexicalEntry& entry,
                                             const FeatureBundle& features,
                                             bool strict_agreement = false) {
  using detail::Lookup;
  switch (entry.category) {
    case Category::kQuantifier: {
      for (const auto& [key, surface] : entry.forms) {
        const Number agreement = key.number;
        const bool ok = features.number == Number::kAny || agreement == features.number ||
                        (!strict_agreement && agreement == Number::kAny);
        if (ok && !surface.empty()) return surface;
      }
      return std::nullopt;
    }
    case Category::kNoun:
      if (features.number == Number::kAny) return std::nullopt;
      return Lookup(entry, {features.number, VerbForm::kNotApplicable, false});
    case Category::kIntransitiveVerb:
    case Category::kTransitiveVerb:
      if (features.verb_form == VerbForm::kNotApplicable) return std::nullopt;
      return Lookup(entry, {Number::kAny, features.verb_form, false});
    case Category::kAdjective:
    case Category::kAdverb:
      return Lookup(entry, {Number::kAny, VerbForm::kNotApplicable, features.counterpart});
  }
  return std::nullopt;
}

inline std::string Inflect(const LexicalEntry& entry, const FeatureBundle& features,
                           bool strict_agreement = false) {
  auto surface = TryInflect(entry, features, strict_agreement);
  if (!surface) {
    Fail(ErrorKind::kMissingForm, "lexical entry '" + entry.lemma + "' (" +
                                      std::string(CategorySymbol(entry.category)) +
                                      ") has no form for the requested features");
  }
  return *surface;
}

// Entry builders used by the lexicon parser and by tests.

inline LexicalEntry MakeQuantifier(std::string surface, Number agreement) {
  LexicalEntry e{surface, Category::kQuantifier, {}};
  e.forms[{agreement, VerbForm::kNotApplicable, false}] = std::move(surface);
  return e;
}

inline LexicalEntry MakeNoun(std::string singular, std::string plural) {
  LexicalEntry e{singular, Category::kNoun, {}};
  e.forms[{Number::kSingular, VerbForm::kNotApplicable, false}] = std::move(singular);
  e.forms[{Number::kPlural, VerbForm::kNotApplicable, false}] = std::move(plural);
  return e;
}

inline LexicalEntry MakeVerb(Category category, std::string base, std::string third_sg,
                             std::string past, std::string progressive) {
  LexicalEntry e{base, category, {}};
  e.forms[{Number::kAny, VerbForm::kBase, false}] = std::move(base);
  e.forms[{Number::kAny, VerbForm::kThirdSgPresent, false}] = std::move(third_sg);
  e.forms[{Number::kAny, VerbForm::kPast, false}] = std::move(past);
  e.forms[{Number::kAny, VerbForm::kProgressive, false}] = std::move(progressive);
  return e;
}

/// Adjective or adverb, optionally with its counterpart form.
inline LexicalEntry MakeModifier(Category category, std::string surface,
                                 std::string counterpart = {}) {
  LexicalEntry e{surface, category, {}};
  e.forms[{Number::kAny, VerbForm::kNotApplicable, false}] = std::move(surface);
  if (!counterpart.empty()) {
    e.forms[{Number::kAny, VerbForm::kNotApplicable, true}] = std::move(counterpart);
  }
  return e;
}

class Lexicon {
 public:
  void Add(LexicalEntry entry) {
    Validate(entry);
    entries_.push_back(std::move(entry));
  }

  const std::vector<LexicalEntry>& entries() const { return entries_; }

  std::vector<const LexicalEntry*> OfCategory(Category c) const {
    std::vector<const LexicalEntry*> out;
    for (const auto& e : entries_) {
      if (e.category == c) out.push_back(&e);
    }
    return out;
  }

  static void Validate(const LexicalEntry& e) {
    auto require = [&](bool ok, const char* what) {
      if (!ok) {
        Fail(ErrorKind::kGrammarSyntax, "lexical entry '" + e.lemma + "': " + what);
      }
    };
    require(!e.lemma.empty(), "empty lemma");
    switch (e.category) {
      case Category::kNoun: {
        auto sg = detail::Lookup(e, {Number::kSingular, VerbForm::kNotApplicable, false});
        auto pl = detail::Lookup(e, {Number::kPlural, VerbForm::kNotApplicable, false});
        require(sg && pl, "noun needs singular and plural forms");
        require(*sg != *pl, "noun singular and plural forms must differ");
        break;
      }
      case Category::kIntransitiveVerb:
      case Category::kTransitiveVerb:
        for (VerbForm f : {VerbForm::kBase, VerbForm::kThirdSgPresent, VerbForm::kPast,
                           VerbForm::kProgressive}) {
          require(detail::Lookup(e, {Number::kAny, f, false}).has_value(),
                  "verb needs base, third-singular, past and progressive forms");
        }
        break;
      case Category::kAdjective:
      case Category::kAdverb: {
        auto plain = detail::Lookup(e, {Number::kAny, VerbForm::kNotApplicable, false});
        require(plain.has_value(), "modifier needs a surface form");
        if (auto cp = detail::Lookup(e, {Number::kAny, VerbForm::kNotApplicable, true})) {
          require(*cp != *plain, "counterpart form must differ from the plain form");
        }
        break;
      }
      case Category::kQuantifier:
        require(e.forms.size() == 1 && !e.forms.begin()->second.empty(),
                "quantifier needs exactly one surface form");
        break;
    }
  }

 private:
  std::vector<LexicalEntry> entries_;
};

}  // namespace gecprobe::gen
