// Copyright 2026 The dpnote Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dpnote/quality.h"

#include <cmath>
#include <limits>
#include <random>

#include "dpnote/privacy.h"
#include "dpnote/tokenizer.h"
#include "fixtures.h"
#include "gtest/gtest.h"

namespace dpnote {
namespace {

// Returns fixed log-probabilities regardless of the text.
class FixedScorer : public TokenScorer {
 public:
  explicit FixedScorer(std::vector<double> probs) {
    for (double p : probs) log_probs_.push_back(std::log(p));
  }
  std::vector<double> TokenLogProbs(std::string_view) const override {
    return log_probs_;
  }

 private:
  std::vector<double> log_probs_;
};

// Candidate "c<i>" has perplexity scores[i]; "" is unscorable.
class TableScorer : public TokenScorer {
 public:
  explicit TableScorer(std::vector<double> scores)
      : scores_(std::move(scores)) {}
  std::vector<double> TokenLogProbs(std::string_view text) const override {
    if (text.empty()) return {};
    const double s = scores_[std::stoul(std::string(text.substr(1)))];
    return {-std::log(s)};
  }

 private:
  std::vector<double> scores_;
};

TEST(PerplexityTest, UniformScorerGivesVocabularySize) {
  std::vector<std::string> words;
  for (int i = 0; i < 49; ++i) words.push_back("w" + std::to_string(i));
  NgramScorer scorer(Vocabulary::FromWords(words), 1);
  ASSERT_EQ(scorer.support_size(), 50u);
  for (const std::string text : {"w1", "w3 w7 w7 w48", "w0 unknownword"}) {
    auto ppl = Perplexity(scorer, text);
    ASSERT_TRUE(ppl.ok());
    EXPECT_NEAR(*ppl, 50.0, 1e-9);
  }
}

TEST(PerplexityTest, HandComputedTwoTokens) {
  FixedScorer scorer({0.5, 0.125});
  EXPECT_NEAR(*Perplexity(scorer, "x y"), 4.0, 1e-9);
  FixedScorer certain({1.0, 1.0, 1.0});
  EXPECT_NEAR(*Perplexity(certain, "x"), 1.0, 1e-12);
}

TEST(PerplexityTest, EmptyTextIsAnError) {
  NgramScorer scorer(Vocabulary::FromWords({"a"}), 2);
  EXPECT_FALSE(Perplexity(scorer, "").ok());
  EXPECT_FALSE(Perplexity(scorer, "   ").ok());
}

TEST(NgramScorerTest, AddKFormula) {
  auto corpus = Corpus::Create(CorpusRole::kPublic,
                               {Note{"p", "a b a c"}});
  auto scorer = NgramScorer::Train(*corpus, 2, 0.5);
  ASSERT_TRUE(scorer.ok());
  // support = {a, b, c, <unk>} = 4; after "a": b once, c once, total 2.
  const std::vector<double> lp = scorer->TokenLogProbs("a b");
  ASSERT_EQ(lp.size(), 2u);
  // first token after <bos>: a seen once out of 1.
  EXPECT_NEAR(lp[0], std::log((1 + 0.5) / (1 + 0.5 * 4)), 1e-12);
  EXPECT_NEAR(lp[1], std::log((1 + 0.5) / (2 + 0.5 * 4)), 1e-12);
}

TEST(NgramScorerTest, RefusesPrivateData) {
  auto corpus =
      Corpus::Create(CorpusRole::kPrivateTrain, {Note{"p", "a b"}});
  EXPECT_FALSE(NgramScorer::Train(*corpus, 2).ok());
  auto pub = Corpus::Create(CorpusRole::kPublic, {Note{"p", "a b"}});
  EXPECT_FALSE(NgramScorer::Train(*pub, 0).ok());
  EXPECT_FALSE(NgramScorer::Train(*pub, 2, 0.0).ok());
}

TEST(NgramScorerTest, FluentTextBeatsRandomTokens) {
  auto notes = testing::MakeSectionedNotes(30, 3, "p");
  auto corpus = Corpus::Create(CorpusRole::kPublic, notes);
  auto scorer = NgramScorer::Train(*corpus, 3);
  ASSERT_TRUE(scorer.ok());
  std::mt19937_64 gen(1);
  const std::string fluent = notes[0].text;
  std::vector<std::string> words = Tokenize(fluent);
  std::string shuffled;
  for (size_t i = 0; i < words.size(); ++i) {
    shuffled += words[gen() % words.size()] + " ";
  }
  EXPECT_LT(*Perplexity(*scorer, fluent), *Perplexity(*scorer, shuffled));
}

TEST(SelectBestTest, Examples) {
  TableScorer scorer({3.2, 1.5, 7.0});
  std::vector<std::string> three = {"c0", "c1", "c2"};
  auto best = SelectBest(three, scorer);
  ASSERT_TRUE(best.ok());
  EXPECT_EQ(best->index, 1u);
  EXPECT_NEAR(best->score, 1.5, 1e-12);
  std::vector<std::string> one = {"c2"};
  EXPECT_EQ(SelectBest(one, scorer)->index, 0u);
  TableScorer tied({2.0, 2.0});
  std::vector<std::string> two = {"c0", "c1"};
  EXPECT_EQ(SelectBest(two, tied)->index, 0u);
}

TEST(SelectBestTest, UnscorableCandidates) {
  TableScorer scorer({5.0});
  std::vector<std::string> mixed = {"", "c0"};
  auto best = SelectBest(mixed, scorer);
  ASSERT_TRUE(best.ok());
  EXPECT_EQ(best->index, 1u);
  EXPECT_TRUE(std::isinf(best->scores[0]));
  std::vector<std::string> none = {"", ""};
  EXPECT_FALSE(SelectBest(none, scorer).ok());
  EXPECT_FALSE(SelectBest(std::vector<std::string>{}, scorer).ok());
}

TEST(SelectBestTest, InvariantUnderIncreasingTransform) {
  std::mt19937_64 gen(8);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> s;
    for (int i = 0; i < 6; ++i) s.push_back(1.0 + static_cast<double>(gen() % 5));
    std::vector<double> transformed;
    for (double x : s) transformed.push_back(std::exp(x) + 3.0);
    EXPECT_EQ(*ArgMinScore(s), *ArgMinScore(transformed));
  }
}

TEST(SelectBestTest, DoesNotTouchTheLedger) {
  AccountantLedger ledger;
  ASSERT_TRUE(ledger
                  .Record(LedgerEntry{"note",
                                      PrivacyBudget{1.0, 1e-6},
                                      {CorpusRole::kPrivateTrain, ""},
                                      false})
                  .ok());
  const size_t before = ledger.size();
  TableScorer scorer({1.0, 2.0});
  std::vector<std::string> c = {"c0", "c1"};
  ASSERT_TRUE(SelectBest(c, scorer).ok());
  EXPECT_EQ(ledger.size(), before);
}

TEST(RejectLongSentencesTest, InclusiveBoundary) {
  // The terminator counts toward the sentence length.
  const std::string at(kDefaultMaxSentenceChars - 1, 'x');
  auto ok = RejectLongSentences(at + ". Short one.");
  EXPECT_TRUE(ok.accepted);
  EXPECT_EQ(ok.longest_sentence_chars, kDefaultMaxSentenceChars);
  const std::string over(kDefaultMaxSentenceChars + 1, 'x');
  auto check = RejectLongSentences("Short. " + over + ".");
  EXPECT_FALSE(check.accepted);
  EXPECT_EQ(check.longest_sentence_chars, kDefaultMaxSentenceChars + 2);
  EXPECT_TRUE(RejectLongSentences("").accepted);
}

TEST(RejectLongSentencesTest, CountsCodePointsAndSplitsOnAllEnders) {
  auto check = RejectLongSentences("é é é! ab? c. d", 6);
  EXPECT_TRUE(check.accepted);
  EXPECT_EQ(check.longest_sentence_chars, 6u);  // "é é é!"
  EXPECT_FALSE(RejectLongSentences("abcdef", 5).accepted);
  // A period without following whitespace does not end a sentence.
  EXPECT_EQ(RejectLongSentences("1.5 mg given").longest_sentence_chars, 12u);
}

}  // namespace
}  // namespace dpnote
