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

#ifndef DPNOTE_TERMS_H_
#define DPNOTE_TERMS_H_

#include <cstdint>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "Eigen/Core"
#include "absl/status/statusor.h"
#include "dpnote/privacy.h"
#include "dpnote/rng.h"
#include "dpnote/structuring.h"

namespace dpnote {

inline constexpr double kDefaultTermThreshold = 0.7;
inline constexpr int kDefaultEmbeddingDim = 256;
inline constexpr int kMinEmbeddingDim = 8;
inline constexpr double kDefaultTrainingEmbeddingSigma = 0.05;

// Lowercases, strips punctuation from both ends of every whitespace token and
// joins the non-empty tokens with single spaces.
std::string NormalizeTerm(std::string_view text);

// Distinct character 3-grams of an already normalized string, sorted. A
// nonempty string shorter than three bytes is its own single gram.
std::vector<std::string> CharTrigrams(std::string_view normalized);

// |A ∩ B| / |A ∪ B| over CharTrigrams of the two normalized strings.
double TrigramJaccard(std::string_view a, std::string_view b);

struct LexiconEntry {
  std::string surface;
  std::optional<std::string> canonical_id;
  std::string normalized;
  int token_count = 0;
  std::vector<std::string> trigrams;
};

// Term dictionary with a trigram inverted index. Immutable after Create().
class Lexicon {
 public:
  struct Source {
    std::string surface;
    std::optional<std::string> canonical_id;
  };

  // Entries whose normalized surface repeats an earlier one are dropped;
  // entries that normalize to nothing are rejected.
  static absl::StatusOr<Lexicon> Create(std::vector<Source> sources);

  const std::vector<LexiconEntry>& entries() const { return entries_; }
  size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  int max_token_count() const { return max_token_count_; }

  // Indices of entries sharing at least one gram with `trigrams`, ascending.
  std::vector<uint32_t> Candidates(std::span<const std::string> trigrams) const;

 private:
  std::vector<LexiconEntry> entries_;
  std::unordered_map<std::string, std::vector<uint32_t>> index_;
  int max_token_count_ = 0;
};

// One term per line, optional TAB + canonical id, '#' comments ignored.
absl::StatusOr<Lexicon> ParseLexicon(std::istream& in);
absl::StatusOr<Lexicon> LoadLexicon(const std::string& path);

struct TermList {
  // Deduplicated case-insensitively, in order of first occurrence.
  std::vector<std::string> terms;
  SectionGroup group = SectionGroup::kPatientInformation;

  friend bool operator==(const TermList&, const TermList&) = default;
};

struct TermMatch {
  size_t lexicon_index = 0;
  std::string surface;
  double similarity = 0.0;
  // Byte span in the searched text.
  size_t begin = 0;
  size_t end = 0;
  // Window position in whitespace tokens.
  size_t token_begin = 0;
  size_t token_count = 0;
};

// Every token window of up to lexicon.max_token_count() tokens is compared to
// the lexicon; a window matches its most similar entry (lowest index on ties)
// when the similarity reaches `threshold`. Matches are then chosen longest
// window first, leftmost first among equal lengths, skipping any window that
// overlaps an already chosen one. Returned in text order.
std::vector<TermMatch> MatchTerms(std::string_view text, const Lexicon& lexicon,
                                  double threshold = kDefaultTermThreshold);

// Matched lexicon surfaces, deduplicated.
TermList ExtractTerms(std::string_view section_body, const Lexicon& lexicon,
                      double threshold = kDefaultTermThreshold,
                      SectionGroup group = SectionGroup::kPatientInformation);

struct TermEmbedding {
  Eigen::VectorXd values;
  // The input had no grams; values is the zero vector.
  bool degenerate = false;
};

// Order-invariant signed feature hashing: every character 3-gram occurrence
// of every normalized term adds +-1 to one of `dim` buckets; the sum is
// L2-normalized.
absl::StatusOr<TermEmbedding> EmbedTerms(std::span<const std::string> terms,
                                         int dim = kDefaultEmbeddingDim);
absl::StatusOr<TermEmbedding> EmbedTerms(const TermList& terms,
                                         int dim = kDefaultEmbeddingDim);
// Hashes the whitespace tokens of free text the same way.
absl::StatusOr<TermEmbedding> EmbedText(std::string_view text,
                                        int dim = kDefaultEmbeddingDim);

// e + N(0, sigma^2) elementwise.
absl::StatusOr<Eigen::VectorXd> PerturbTrainingEmbedding(
    const Eigen::VectorXd& embedding, double sigma, Rng& rng);

// Unit-norm surface embeddings used by the nearest-neighbour decoder.
struct LexiconEmbeddings {
  EmbeddingMatrix matrix;
  std::vector<std::string> surfaces;
};

absl::StatusOr<LexiconEmbeddings> BuildLexiconEmbeddings(
    const Lexicon& lexicon, int dim = kDefaultEmbeddingDim);
// A DPEM matrix plus a text file with one surface per row. Rows are
// normalized to unit length; zero rows are rejected.
absl::StatusOr<LexiconEmbeddings> LoadLexiconEmbeddings(
    const std::string& matrix_path, const std::string& surfaces_path);

// The `count` surfaces most cosine-similar to `query`, most similar first,
// lexicon order on ties. A zero query decodes to an empty list.
absl::StatusOr<TermList> DecodeTerms(
    const Eigen::VectorXd& query, const LexiconEmbeddings& lexicon, int count,
    SectionGroup group = SectionGroup::kPatientInformation);

// Cosine of the two term-list embeddings; 0 if either is degenerate.
absl::StatusOr<double> TermListSimilarity(const TermList& a, const TermList& b,
                                          int dim = kDefaultEmbeddingDim);

}  // namespace dpnote

#endif  // DPNOTE_TERMS_H_
