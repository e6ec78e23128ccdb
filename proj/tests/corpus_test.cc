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

#include "dpnote/corpus.h"

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "gmock/gmock.h"
#include "gtest/gtest.h"

namespace dpnote {
namespace {

using ::testing::HasSubstr;

absl::StatusOr<Corpus> ParseString(const std::string& s,
                                   CorpusRole role = CorpusRole::kPublic) {
  std::istringstream in(s);
  return ParseCorpus(in, role);
}

std::string TempPath(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

TEST(CorpusTest, ParsesRecordsInFileOrder) {
  auto corpus = ParseString(
      "{\"id\":\"b\",\"text\":\"second\"}\n"
      "{\"id\":\"a\",\"text\":\"first\",\"labels\":[\"I10\"]}\n");
  ASSERT_TRUE(corpus.ok()) << corpus.status();
  ASSERT_EQ(corpus->size(), 2u);
  EXPECT_EQ((*corpus)[0].id, "b");
  EXPECT_EQ((*corpus)[1].id, "a");
  EXPECT_FALSE((*corpus)[0].labels.has_value());
  EXPECT_EQ((*corpus)[1].labels, std::vector<std::string>{"I10"});
}

TEST(CorpusTest, DuplicateIdNamesTheLine) {
  auto corpus = ParseString(
      "{\"id\":\"n1\",\"text\":\"x\"}\n"
      "{\"id\":\"n2\",\"text\":\"y\"}\n"
      "{\"id\":\"n1\",\"text\":\"z\"}\n");
  ASSERT_FALSE(corpus.ok());
  EXPECT_THAT(corpus.status().message(), HasSubstr("line 3"));
  EXPECT_THAT(corpus.status().message(), HasSubstr("n1"));
}

TEST(CorpusTest, MalformedLinesAreRejectedWithLineNumber) {
  for (const std::string bad :
       {"{\"id\":\"a\",\"text\":\"x\"}\nnot json\n",
        "{\"id\":\"a\",\"text\":\"x\"}\n{\"id\":\"b\"}\n",
        "{\"id\":\"a\",\"text\":\"x\"}\n{\"id\":\"\",\"text\":\"y\"}\n",
        "{\"id\":\"a\",\"text\":\"x\"}\n{\"id\":\"b\",\"text\":\"y\",\"x\":1}\n",
        "{\"id\":\"a\",\"text\":\"x\"}\n{\"id\":\"b\",\"text\":\"y\","
        "\"labels\":[1]}\n"}) {
    auto corpus = ParseString(bad);
    ASSERT_FALSE(corpus.ok()) << bad;
    EXPECT_THAT(corpus.status().message(), HasSubstr("line 2")) << bad;
  }
}

TEST(CorpusTest, EmptyFileIsAnError) {
  EXPECT_FALSE(ParseString("").ok());
}

TEST(CorpusTest, CreateRejectsDuplicateAndEmptyIds) {
  EXPECT_FALSE(
      Corpus::Create(CorpusRole::kPublic, {Note{"a", "x"}, Note{"a", "y"}})
          .ok());
  EXPECT_FALSE(Corpus::Create(CorpusRole::kPublic, {Note{"", "x"}}).ok());
}

TEST(CorpusTest, DegenerateAndUnlabeledCounts) {
  auto corpus = Corpus::Create(
      CorpusRole::kPrivateTrain,
      {Note{"a", "", std::nullopt}, Note{"b", "text", std::vector<std::string>{}},
       Note{"c", "text", std::vector<std::string>{"J18"}}});
  ASSERT_TRUE(corpus.ok());
  EXPECT_EQ(corpus->degenerate_count(), 1u);
  EXPECT_EQ(corpus->unlabeled_count(), 2u);
}

TEST(CorpusTest, EmptyCorpusSerializesToEmptyFile) {
  auto corpus = Corpus::Create(CorpusRole::kSynthetic, {});
  ASSERT_TRUE(corpus.ok());
  auto bytes = SerializeCorpus(*corpus);
  ASSERT_TRUE(bytes.ok());
  EXPECT_EQ(*bytes, "");
}

TEST(CorpusTest, OneNoteIsOneLine) {
  auto corpus = Corpus::Create(CorpusRole::kPublic, {Note{"a", "x\ny"}});
  ASSERT_TRUE(corpus.ok());
  auto bytes = SerializeCorpus(*corpus);
  ASSERT_TRUE(bytes.ok());
  EXPECT_EQ(*bytes, "{\"id\":\"a\",\"text\":\"x\\ny\"}\n");
}

TEST(CorpusTest, CanonicalFileRoundTripsByteForByte) {
  const std::string golden =
      "{\"id\":\"n1\",\"text\":\"Chief Complaint: chest pain\",\"labels\":"
      "[\"I20\",\"I10\"]}\n"
      "{\"id\":\"n2\",\"text\":\"Résumé \\\"quoted\\\" \\t tab\"}\n"
      "{\"id\":\"n3\",\"text\":\"\",\"labels\":[]}\n"
      "{\"id\":\"n4\",\"text\":\"line\\r\\nbreak\",\"labels\":[\"E11\"]}\n"
      "{\"id\":\"n5\",\"text\":\"naïve — café\"}\n";
  const std::string path = TempPath("dpnote_corpus_golden.jsonl");
  {
    std::ofstream out(path, std::ios::binary);
    out << golden;
  }
  auto corpus = LoadCorpus(path, CorpusRole::kPublic);
  ASSERT_TRUE(corpus.ok()) << corpus.status();
  ASSERT_TRUE(SaveCorpus(*corpus, path).ok());
  std::ifstream in(path, std::ios::binary);
  std::stringstream reread;
  reread << in.rdbuf();
  EXPECT_EQ(reread.str(), golden);
  std::filesystem::remove(path);
}

TEST(CorpusTest, LoadOfSaveIsIdentityOnRandomCorpora) {
  std::mt19937_64 gen(11);
  const std::string alphabet = "ab c\n\t\"\\é:{}";
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Note> notes;
    const size_t n = 1 + gen() % 6;
    for (size_t i = 0; i < n; ++i) {
      Note note;
      note.id = "id" + std::to_string(i);
      for (size_t c = gen() % 20; c > 0; --c) {
        note.text += alphabet[gen() % alphabet.size()];
      }
      // Keep UTF-8 valid: the alphabet's two-byte letter may be split.
      std::string valid;
      for (size_t c = 0; c < note.text.size(); ++c) {
        const auto u = static_cast<unsigned char>(note.text[c]);
        if (u >= 0x80) {
          valid += "é";
        } else {
          valid += note.text[c];
        }
      }
      note.text = valid;
      switch (gen() % 3) {
        case 0:
          break;
        case 1:
          note.labels = std::vector<std::string>{};
          break;
        default:
          note.labels = std::vector<std::string>{"A", "B"};
      }
      notes.push_back(std::move(note));
    }
    auto corpus = Corpus::Create(CorpusRole::kPrivateTest, notes);
    ASSERT_TRUE(corpus.ok());
    auto bytes = SerializeCorpus(*corpus);
    ASSERT_TRUE(bytes.ok());
    auto again = ParseString(*bytes, CorpusRole::kPrivateTest);
    ASSERT_TRUE(again.ok()) << again.status();
    EXPECT_EQ(*again, *corpus);
  }
}

TEST(CorpusTest, RoleNamesRoundTrip) {
  for (CorpusRole role :
       {CorpusRole::kPublic, CorpusRole::kPrivateTrain,
        CorpusRole::kPrivateTest, CorpusRole::kSynthetic}) {
    auto parsed = ParseCorpusRole(CorpusRoleName(role));
    ASSERT_TRUE(parsed.ok());
    EXPECT_EQ(*parsed, role);
  }
  EXPECT_FALSE(ParseCorpusRole("secret").ok());
  EXPECT_TRUE(IsPrivate(CorpusRole::kPrivateTrain));
  EXPECT_FALSE(IsPrivate(CorpusRole::kSynthetic));
}

TEST(CorpusTest, MissingFileIsNotFound) {
  auto corpus = LoadCorpus("/nonexistent/dpnote.jsonl", CorpusRole::kPublic);
  EXPECT_EQ(corpus.status().code(), absl::StatusCode::kNotFound);
}

}  // namespace
}  // namespace dpnote
