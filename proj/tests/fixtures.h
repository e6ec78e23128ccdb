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

// Generated fixtures and brute-force oracles shared by the unit tests and the
// acceptance runner. Apart from the shared tokenizer nothing here calls into
// the code under test.

#ifndef DPNOTE_TESTS_FIXTURES_H_
#define DPNOTE_TESTS_FIXTURES_H_

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "dpnote/corpus.h"
#include "dpnote/structuring.h"

namespace dpnote::testing {

// Directory holding section_rules.tsv, lexicon.tsv and toy/.
std::string DataDir();

// The clinical title taxonomy written out by hand, independent of the
// library's own table.
struct TaxonomyTitle {
  std::string_view title;
  SectionGroup group;
};
const std::vector<TaxonomyTitle>& TaxonomyTitles();

struct ExpectedSection {
  SectionGroup group;
  size_t begin = 0;
  size_t end = 0;
};

struct SectionFixtureNote {
  Note note;
  std::string residual_prefix;
  std::vector<ExpectedSection> sections;
};

// Notes built from every taxonomy title with random casing, indentation,
// spacing, both title terminators, CRLF line endings, repeated groups and
// body lines that mention titles without being titles. The expected split is
// tracked while the text is written.
std::vector<SectionFixtureNote> MakeSectionFixture(int count, uint64_t seed);

// A 30-entry clinical lexicon with near-duplicate pairs and multiword terms.
std::vector<std::string> TermFixtureLexicon();

// Sentences mixing exact, misspelled, inflected and differently cased
// mentions of the lexicon terms with filler words and punctuation.
std::vector<std::string> TermFixtureSentences(int count, uint64_t seed);

// Every window of 1..max lexicon tokens is scored against every lexicon entry
// with `similarity`; windows are then taken longest first, leftmost first,
// without overlap. Returns matched surfaces in text order, deduplicated.
using SimilarityFn = double (*)(std::string_view, std::string_view);
std::vector<std::string> BruteForceExtract(
    std::string_view text, const std::vector<std::string>& lexicon,
    double threshold, SimilarityFn similarity);

// Plain n-gram counts keyed by token strings: (group, context, next) for
// every order 1..n, over Tokenize() output. Sections are visited in taxonomy
// order, each seeded with the last n-1 tokens of the previous section (padded
// with "<bos>") and terminated by "<eos>". Tokens outside `vocabulary` become
// "<unk>"; contexts outside `universe` are dropped when it is non-null.
using StringNgram =
    std::tuple<SectionGroup, std::vector<std::string>, std::string>;
using StringContext = std::pair<SectionGroup, std::vector<std::string>>;
using StringCounts = std::map<StringNgram, double>;
using NoteSections = std::vector<std::pair<SectionGroup, std::string>>;
StringCounts CountNgramsOracle(const std::vector<NoteSections>& notes,
                               int order,
                               const std::set<std::string>* vocabulary,
                               const std::set<StringContext>* universe);

// A small sectioned corpus for generator tests; every note carries all six
// display-name headers.
std::vector<Note> MakeSectionedNotes(int count, uint64_t seed,
                                     std::string_view id_prefix);

}  // namespace dpnote::testing

#endif  // DPNOTE_TESTS_FIXTURES_H_
