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

#include "dpnote/terms.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fixtures.h"
#include "gmock/gmock.h"
#include "gtest/gtest.h"

namespace dpnote {
namespace {

using ::testing::ElementsAre;

Lexicon MakeLexicon(const std::vector<std::string>& surfaces) {
  std::vector<Lexicon::Source> sources;
  for (const std::string& s : surfaces) sources.push_back({s, std::nullopt});
  return *Lexicon::Create(std::move(sources));
}

TEST(NormalizeTermTest, Rules) {
  EXPECT_EQ(NormalizeTerm("  Chest   PAIN, "), "chest pain");
  EXPECT_EQ(NormalizeTerm("(pneumonia)."), "pneumonia");
  EXPECT_EQ(NormalizeTerm("x-ray"), "x-ray");
  EXPECT_EQ(NormalizeTerm("--- ..."), "");
}

TEST(TrigramTest, GramsAndJaccard) {
  EXPECT_THAT(CharTrigrams("fever"), ElementsAre("eve", "fev", "ver"));
  EXPECT_THAT(CharTrigrams("ab"), ElementsAre("ab"));
  EXPECT_TRUE(CharTrigrams("").empty());
  // diarrhoea: dia iar arr rrh rho hoe oea; diarrhea: dia iar arr rrh rhe hea.
  // Shared 4, union 9.
  EXPECT_NEAR(TrigramJaccard("diarrhoea", "diarrhea"), 4.0 / 9.0, 1e-15);
  EXPECT_DOUBLE_EQ(TrigramJaccard("fever", "fever"), 1.0);
  EXPECT_DOUBLE_EQ(TrigramJaccard("abc", "xyz"), 0.0);
}

TEST(ExtractTermsTest, ExactMatch) {
  Lexicon lex = MakeLexicon({"diarrhea"});
  EXPECT_THAT(ExtractTerms("patient reports diarrhea", lex).terms,
              ElementsAre("diarrhea"));
}

TEST(ExtractTermsTest, MisspellingBelowThresholdIsIgnored) {
  Lexicon lex = MakeLexicon({"diarrhea"});
  // Similarity 4/9 < 0.7.
  EXPECT_TRUE(ExtractTerms("diarrhoea noted", lex, 0.7).terms.empty());
  EXPECT_THAT(ExtractTerms("diarrhoea noted", lex, 0.4).terms,
              ElementsAre("diarrhea"));
}

TEST(ExtractTermsTest, EmptyLexiconOrBody) {
  auto empty = Lexicon::Create({});
  ASSERT_TRUE(empty.ok());
  EXPECT_TRUE(ExtractTerms("fever and cough", *empty).terms.empty());
  EXPECT_TRUE(ExtractTerms("", MakeLexicon({"fever"})).terms.empty());
}

TEST(ExtractTermsTest, LongestMatchWinsAndNoOverlap) {
  Lexicon lex =
      MakeLexicon({"heart failure", "congestive heart failure", "failure"});
  const std::string text = "known congestive heart failure; renal failure.";
  auto matches = MatchTerms(text, lex);
  ASSERT_EQ(matches.size(), 2u);
  EXPECT_EQ(matches[0].surface, "congestive heart failure");
  EXPECT_EQ(text.substr(matches[0].begin, matches[0].end - matches[0].begin),
            "congestive heart failure");
  EXPECT_EQ(matches[1].surface, "failure");
  EXPECT_LE(matches[0].end, matches[1].begin);
}

TEST(ExtractTermsTest, DeduplicatesInFirstOccurrenceOrder) {
  Lexicon lex = MakeLexicon({"fever", "cough"});
  EXPECT_THAT(ExtractTerms("Cough, fever, COUGH and fever", lex).terms,
              ElementsAre("cough", "fever"));
}

TEST(ExtractTermsTest, EveryMatchReachesThreshold) {
  Lexicon lex = MakeLexicon(testing::TermFixtureLexicon());
  for (const std::string& s : testing::TermFixtureSentences(50, 9)) {
    for (const TermMatch& m : MatchTerms(s, lex, 0.7)) {
      EXPECT_GE(TrigramJaccard(NormalizeTerm(s.substr(m.begin, m.end - m.begin)),
                               lex.entries()[m.lexicon_index].normalized),
                0.7);
    }
  }
}

TEST(ExtractTermsTest, MatchesBruteForceOracle) {
  const std::vector<std::string> surfaces = testing::TermFixtureLexicon();
  Lexicon lex = MakeLexicon(surfaces);
  for (double threshold : {0.5, 0.7, 0.9}) {
    for (const std::string& s : testing::TermFixtureSentences(50, 7)) {
      EXPECT_EQ(ExtractTerms(s, lex, threshold).terms,
                testing::BruteForceExtract(s, surfaces, threshold,
                                           &TrigramJaccard))
          << s;
    }
  }
}

TEST(LexiconTest, ParseAndDuplicates) {
  std::istringstream in(
      "# comment\nFever\tC0015967\nfever\n  chest pain \tC0008031\n\n");
  auto lex = ParseLexicon(in);
  ASSERT_TRUE(lex.ok());
  ASSERT_EQ(lex->size(), 2u);
  EXPECT_EQ(lex->entries()[0].canonical_id, "C0015967");
  EXPECT_EQ(lex->entries()[1].normalized, "chest pain");
  EXPECT_EQ(lex->max_token_count(), 2);
  EXPECT_FALSE(Lexicon::Create({{"...", std::nullopt}}).ok());
}

TEST(LexiconTest, ShippedLexiconLoads) {
  auto lex = LoadLexicon(testing::DataDir() + "/lexicon.tsv");
  ASSERT_TRUE(lex.ok()) << lex.status();
  EXPECT_GT(lex->size(), 30u);
}

TEST(EmbedTermsTest, DeterministicPermutationInvariantUnitNorm) {
  std::vector<std::string> a = {"fever", "cough", "chest pain"};
  std::vector<std::string> b = {"chest pain", "fever", "cough"};
  auto ea = EmbedTerms(a);
  auto eb = EmbedTerms(b);
  ASSERT_TRUE(ea.ok());
  EXPECT_EQ(ea->values, EmbedTerms(a)->values);
  EXPECT_EQ(ea->values, eb->values);
  EXPECT_NEAR(ea->values.norm(), 1.0, 1e-12);
  EXPECT_EQ(ea->values.size(), kDefaultEmbeddingDim);
}

TEST(EmbedTermsTest, EmptyListIsDegenerate) {
  auto e = EmbedTerms(std::vector<std::string>{});
  ASSERT_TRUE(e.ok());
  EXPECT_TRUE(e->degenerate);
  EXPECT_EQ(e->values.norm(), 0.0);
  EXPECT_FALSE(EmbedTerms(std::vector<std::string>{"x"}, 4).ok());
}

TEST(EmbedTermsTest, PartialOverlapHasIntermediateCosine) {
  TermList a{{"fever"}, SectionGroup::kPatientInformation};
  TermList b{{"fever", "cough"}, SectionGroup::kPatientInformation};
  auto sim = TermListSimilarity(a, b);
  ASSERT_TRUE(sim.ok());
  EXPECT_GT(*sim, 0.0);
  EXPECT_LT(*sim, 1.0);
  EXPECT_NEAR(*TermListSimilarity(a, a), 1.0, 1e-12);
  TermList empty;
  EXPECT_EQ(*TermListSimilarity(empty, empty), 0.0);
}

TEST(EmbedTermsTest, FrozenBucketsForFever) {
  // "fever" has grams eve, fev, ver: three +-1 entries, norm sqrt(3) before
  // scaling, so every nonzero entry is +-1/sqrt(3) unless two grams collide.
  auto e = EmbedTerms(std::vector<std::string>{"fever"});
  int nonzero = 0;
  for (Eigen::Index i = 0; i < e->values.size(); ++i) {
    if (e->values(i) != 0.0) {
      ++nonzero;
      EXPECT_NEAR(std::abs(e->values(i)), 1.0 / std::sqrt(3.0), 1e-12);
    }
  }
  EXPECT_EQ(nonzero, 3);
}

TEST(PerturbTrainingEmbeddingTest, ZeroSigmaAndStatistics) {
  Rng rng(5);
  Eigen::VectorXd e = Eigen::VectorXd::Constant(100000, 0.25);
  auto same = PerturbTrainingEmbedding(e, 0.0, rng);
  ASSERT_TRUE(same.ok());
  EXPECT_EQ(*same, e);
  auto noisy = PerturbTrainingEmbedding(e, 0.05, rng);
  ASSERT_TRUE(noisy.ok());
  ASSERT_EQ(noisy->size(), e.size());
  const Eigen::VectorXd diff = *noisy - e;
  const double mean = diff.mean();
  const double sd = std::sqrt((diff.array() - mean).square().mean());
  EXPECT_NEAR(sd / 0.05, 1.0, 0.03);
  EXPECT_FALSE(PerturbTrainingEmbedding(e, -1.0, rng).ok());
}

TEST(DecodeTermsTest, SelfNearestAndFullOrdering) {
  Lexicon lex = MakeLexicon({"fever", "cough", "chest pain", "edema"});
  auto table = BuildLexiconEmbeddings(lex);
  ASSERT_TRUE(table.ok());
  auto query = EmbedTerms(std::vector<std::string>{"fever"});
  auto top1 = DecodeTerms(query->values, *table, 1);
  ASSERT_TRUE(top1.ok());
  EXPECT_THAT(top1->terms, ElementsAre("fever"));
  auto all = DecodeTerms(query->values, *table, 4);
  ASSERT_EQ(all->terms.size(), 4u);
  EXPECT_EQ(all->terms[0], "fever");
  EXPECT_FALSE(DecodeTerms(query->values, *table, 0).ok());
  EXPECT_TRUE(
      DecodeTerms(Eigen::VectorXd::Zero(kDefaultEmbeddingDim), *table, 2)
          ->terms.empty());
}

TEST(DecodeTermsTest, OrthogonalFixture) {
  LexiconEmbeddings table;
  table.matrix = EmbeddingMatrix(
      EmbeddingMatrix::Storage::Identity(4, 4));
  table.surfaces = {"e1", "e2", "e3", "e4"};
  Eigen::VectorXd query = Eigen::VectorXd::Zero(4);
  query(1) = 0.9;
  query(2) = 0.1;
  auto top2 = DecodeTerms(query, table, 2);
  ASSERT_TRUE(top2.ok());
  EXPECT_THAT(top2->terms, ElementsAre("e2", "e3"));
  // Ties keep lexicon order.
  auto tie = DecodeTerms(Eigen::VectorXd::Ones(4), table, 4);
  EXPECT_THAT(tie->terms, ElementsAre("e1", "e2", "e3", "e4"));
}

TEST(DecodeTermsTest, UnperturbedSingleTermsRoundTripOnFixtureLexicon) {
  Lexicon lex = MakeLexicon(testing::TermFixtureLexicon());
  auto table = BuildLexiconEmbeddings(lex);
  ASSERT_TRUE(table.ok());
  for (const LexiconEntry& entry : lex.entries()) {
    auto q = EmbedTerms(std::vector<std::string>{entry.surface});
    // Only meaningful where the term is its own unique nearest neighbour.
    double self = 0.0, best_other = -1.0;
    for (Eigen::Index r = 0; r < table->matrix.rows(); ++r) {
      const double c = table->matrix.values().row(r).dot(q->values);
      if (table->surfaces[r] == entry.surface) {
        self = c;
      } else {
        best_other = std::max(best_other, c);
      }
    }
    if (self <= best_other) continue;
    EXPECT_THAT(DecodeTerms(q->values, *table, 1)->terms,
                ElementsAre(entry.surface));
  }
}

TEST(LexiconEmbeddingsTest, ExternalFilesLoadAndNormalize) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "dpnote_lexemb";
  fs::create_directories(dir);
  EmbeddingMatrix m(2, 8);
  m.mutable_values()(0, 0) = 3.0;
  m.mutable_values()(1, 1) = 0.5;
  ASSERT_TRUE(SaveEmbeddingMatrix(m, (dir / "m.dpem").string()).ok());
  {
    std::ofstream out(dir / "s.txt");
    out << "alpha\nbeta\n";
  }
  auto table = LoadLexiconEmbeddings((dir / "m.dpem").string(),
                                     (dir / "s.txt").string());
  ASSERT_TRUE(table.ok()) << table.status();
  EXPECT_DOUBLE_EQ(table->matrix.values()(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(table->matrix.values()(1, 1), 1.0);
  {
    std::ofstream out(dir / "s.txt");
    out << "alpha\n";
  }
  EXPECT_FALSE(LoadLexiconEmbeddings((dir / "m.dpem").string(),
                                     (dir / "s.txt").string())
                   .ok());
  fs::remove_all(dir);
}

}  // namespace
}  // namespace dpnote
