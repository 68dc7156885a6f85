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

#include <gtest/gtest.h>

#include <set>
#include <sstream>
#include <string>

#include "gecprobe/corpus_io.hpp"
#include "gecprobe/edits/align.hpp"
#include "gecprobe/gen/generator.hpp"
#include "gecprobe/gen/recognizer.hpp"

namespace gecprobe::gen {
namespace {

const Grammar& DefaultGrammar() {
  static const Grammar g = LoadGrammar(std::string(GECPROBE_SOURCE_DIR) + "/grammars/english.cfg");
  return g;
}

std::set<std::string> PairStrings(const Corpus& c) {
  std::set<std::string> out;
  for (const auto& p : c) out.insert(JoinTokens(p.source) + " | " + JoinTokens(p.reference));
  return out;
}

constexpr const char* kSvaCore = R"(
rules:
  start VERB:SVA S[pres]
  S[$t] -> NP[$n] VP[$n,$t]
  S[$t] -> NP[sg] VP[pl,$t] | NP[pl] VP[sg,$t]   ! VERB:SVA
  VP[$n,$t] -> IV[$n,$t]
  NP[$n] -> Q[$n] N[$n]
lexicon:
)";

TEST(Inflect, LexicalForms) {
  const auto run = MakeVerb(Category::kIntransitiveVerb, "run", "runs", "ran", "running");
  EXPECT_EQ(Inflect(run, {Number::kAny, VerbForm::kThirdSgPresent, false}), "runs");
  EXPECT_EQ(Inflect(run, {Number::kAny, VerbForm::kProgressive, false}), "running");
  const auto dog = MakeNoun("dog", "dogs");
  EXPECT_EQ(Inflect(dog, {Number::kPlural, VerbForm::kNotApplicable, false}), "dogs");
  const auto quickly = MakeModifier(Category::kAdverb, "quickly", "quick");
  EXPECT_EQ(Inflect(quickly, {Number::kAny, VerbForm::kNotApplicable, false}), "quickly");
  EXPECT_EQ(Inflect(quickly, {Number::kAny, VerbForm::kNotApplicable, true}), "quick");
}

TEST(Inflect, MissingFormThrows) {
  const auto slowly = MakeModifier(Category::kAdverb, "slowly");
  try {
    Inflect(slowly, {Number::kAny, VerbForm::kNotApplicable, true});
    FAIL() << "expected MissingForm";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kMissingForm);
  }
}

TEST(Inflect, QuantifierAgreement) {
  const auto some = MakeQuantifier("some", Number::kAny);
  const FeatureBundle sg{Number::kSingular, VerbForm::kNotApplicable, false};
  EXPECT_EQ(TryInflect(some, sg).value_or(""), "some");
  EXPECT_FALSE(TryInflect(some, sg, /*strict_agreement=*/true).has_value());
  const auto many = MakeQuantifier("many", Number::kPlural);
  EXPECT_FALSE(TryInflect(many, sg).has_value());
}

TEST(Lexicon, RejectsInvalidEntries) {
  Lexicon lex;
  EXPECT_THROW(lex.Add(MakeNoun("sheep", "sheep")), Error);
  EXPECT_THROW(lex.Add(MakeVerb(Category::kIntransitiveVerb, "go", "goes", "", "going")), Error);
  EXPECT_NO_THROW(lex.Add(MakeNoun("dog", "dogs")));
}

TEST(GrammarParse, SyntaxErrorsCarryKind) {
  try {
    ParseGrammarText("rules:\n  S -> \n");
    FAIL() << "expected a syntax error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kGrammarSyntax);
  }
  EXPECT_THROW(ParseGrammarText("lexicon:\n  Q a dual\n"), Error);
}

TEST(GrammarParse, RecursionIsRejected) {
  const Grammar g = ParseGrammarText(R"(
rules:
  start VERB:SVA S[pres]
  S[$t] -> NP[$n] VP[$n,$t]
  S[$t] -> NP[sg] VP[pl,$t]  ! VERB:SVA
  VP[$n,$t] -> IV[$n,$t] | IV[$n,$t] S[$t]
  NP[$n] -> Q[$n] N[$n]
lexicon:
  Q every sg
  N dog dogs
  IV run runs ran running
)");
  try {
    EnumerateAll(g, ErrorType::kVerbSva);
    FAIL() << "expected NonFiniteGrammar";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kNonFiniteGrammar);
  }
}

TEST(Generator, MissingErrorRuleIsIncomplete) {
  try {
    DerivePair(ParseGrammarText(std::string(kSvaCore) + "  Q every sg\n  N dog dogs\n  IV run runs ran running\n"),
               ErrorType::kWordOrder, 1);
    FAIL() << "expected GrammarIncomplete";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kGrammarIncomplete);
  }
}

TEST(Generator, TableOneSentencesAreDerivable) {
  const Grammar& g = DefaultGrammar();
  const std::vector<std::tuple<ErrorType, std::string>> expected = {
      {ErrorType::kVerbSva, "Every white dog run quickly | Every white dog runs quickly"},
      {ErrorType::kVerbForm, "Some white dogs running quickly | Some white dogs ran quickly"},
      {ErrorType::kWordOrder, "White every dog ran quickly | Every white dog ran quickly"},
      {ErrorType::kMorph, "Some white dogs ran quick | Some white dogs ran quickly"},
      {ErrorType::kNounNum, "Every dogs ran | Every dog ran"},
      {ErrorType::kNounNum, "A dogs ran | A dog ran"},
  };
  for (const auto& [type, pair] : expected) {
    EXPECT_TRUE(PairStrings(EnumerateAll(g, type)).count(pair)) << ToString(type) << ": " << pair;
  }
}

// Independent oracle: the SVA mismatch cross product Q x N x IV, written out
// by hand from the agreement facts.
TEST(Generator, EnumerationMatchesHandCrossProduct) {
  const Grammar g = ParseGrammarText(std::string(kSvaCore) +
                                     "  Q every sg\n  Q many pl\n  Q some any\n"
                                     "  N dog dogs\n  N cat cats\n"
                                     "  IV run runs ran running\n  IV walk walks walked walking\n");
  struct Q { std::string w; bool sg, pl; };
  const std::vector<Q> qs = {{"every", true, false}, {"many", false, true}, {"some", true, true}};
  const std::vector<std::pair<std::string, std::string>> ns = {{"dog", "dogs"}, {"cat", "cats"}};
  const std::vector<std::pair<std::string, std::string>> vs = {{"run", "runs"}, {"walk", "walks"}};
  std::set<std::string> oracle;
  for (const auto& q : qs) {
    for (const auto& [nsg, npl] : ns) {
      for (const auto& [vbase, v3] : vs) {
        const std::string Qw = Capitalize(q.w);
        if (q.sg) oracle.insert(Qw + " " + nsg + " " + vbase + " | " + Qw + " " + nsg + " " + v3);
        if (q.pl) oracle.insert(Qw + " " + npl + " " + v3 + " | " + Qw + " " + npl + " " + vbase);
      }
    }
  }
  EXPECT_EQ(PairStrings(EnumerateAll(g, ErrorType::kVerbSva)), oracle);
}

TEST(Generator, EmptyCategoryGivesEmptyEnumeration) {
  const Grammar g = ParseGrammarText(std::string(kSvaCore) + "  Q every sg\n  N dog dogs\n");
  EXPECT_TRUE(EnumerateAll(g, ErrorType::kVerbSva).empty());
}

TEST(Generator, CapacityExceeded) {
  const Grammar g = ParseGrammarText(std::string(kSvaCore) +
                                     "  Q every sg\n  Q many pl\n  N dog dogs\n  N cat cats\n"
                                     "  IV run runs ran running\n");
  EXPECT_EQ(EnumerateAll(g, ErrorType::kVerbSva).size(), 4u);
  try {
    GenerateCorpus(g, ErrorType::kVerbSva, 10, 3);
    FAIL() << "expected CapacityExceeded";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kCapacityExceeded);
  }
  EXPECT_EQ(GenerateCorpus(g, ErrorType::kVerbSva, 4, 3).size(), 4u);
}

TEST(Generator, CountOneAndDeterminism) {
  const Grammar& g = DefaultGrammar();
  EXPECT_EQ(GenerateCorpus(g, ErrorType::kVerbSva, 1, 7).size(), 1u);
  std::ostringstream a, b, c;
  WriteJsonl(GenerateCorpus(g, ErrorType::kWordOrder, 300, 7), a);
  WriteJsonl(GenerateCorpus(g, ErrorType::kWordOrder, 300, 7), b);
  WriteJsonl(GenerateCorpus(g, ErrorType::kWordOrder, 300, 8), c);
  EXPECT_EQ(a.str(), b.str());
  EXPECT_NE(a.str(), c.str());
  EXPECT_EQ(DerivePair(g, ErrorType::kMorph, 11).source, DerivePair(g, ErrorType::kMorph, 11).source);
}

TEST(Generator, SampleIsSubsetOfEnumeration) {
  const Grammar& g = DefaultGrammar();
  const auto all = PairStrings(EnumerateAll(g, ErrorType::kMorph));
  for (const auto& s : PairStrings(GenerateCorpus(g, ErrorType::kMorph, 400, 5))) {
    EXPECT_TRUE(all.count(s)) << s;
  }
}

class GeneratorProperties : public ::testing::TestWithParam<ErrorType> {};

TEST_P(GeneratorProperties, PairsAreParallelSingleEditAndParse) {
  const Grammar& g = DefaultGrammar();
  const ErrorType type = GetParam();
  Recognizer rec(g, type);
  const Corpus corpus = GenerateCorpus(g, type, 400, 2024);
  std::set<std::string> distinct;
  for (const SentencePair& p : corpus) {
    const std::string text = JoinTokens(p.source) + " | " + JoinTokens(p.reference);
    EXPECT_TRUE(distinct.insert(text).second) << text;
    ASSERT_EQ(p.gold_edits.size(), 1u) << text;
    EXPECT_FALSE(p.noisy);
    EXPECT_EQ(p.error_type, type);
    EXPECT_EQ(p.gold_edits[0].type_label, ToString(type));
    EXPECT_EQ(ApplyEdits(p.source, p.gold_edits), p.reference) << text;
    const auto aligned = edits::Align(p.source, p.reference);
    ASSERT_EQ(aligned.size(), 1u) << text;
    EXPECT_EQ(aligned[0].start, p.gold_edits[0].start) << text;
    EXPECT_EQ(aligned[0].end, p.gold_edits[0].end) << text;
    EXPECT_EQ(aligned[0].correction, p.gold_edits[0].correction) << text;
    EXPECT_TRUE(rec.IsGrammatical(p.reference)) << text;
    EXPECT_TRUE(rec.IsSingleError(p.source)) << text;
  }
}

INSTANTIATE_TEST_SUITE_P(AllTypes, GeneratorProperties, ::testing::ValuesIn(kAllErrorTypes),
                         [](const auto& info) {
                           std::string s(ToString(info.param));
                           for (char& c : s) {
                             if (c == ':') c = '_';
                           }
                           return s;
                         });

TEST(Recognizer, RejectsOtherErrorTypes) {
  const Grammar& g = DefaultGrammar();
  Recognizer sva(g, ErrorType::kVerbSva);
  EXPECT_FALSE(sva.IsSingleError(SplitTokens("Every dogs ran")));
  EXPECT_TRUE(sva.IsSingleError(SplitTokens("Every dog run")));
  EXPECT_TRUE(sva.IsGrammatical(SplitTokens("Every dog runs")));
  EXPECT_FALSE(sva.IsGrammatical(SplitTokens("dog every runs")));
}

}  // namespace
}  // namespace gecprobe::gen
