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

#ifndef DPNOTE_QUALITY_H_
#define DPNOTE_QUALITY_H_

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "absl/status/statusor.h"
#include "dpnote/corpus.h"
#include "dpnote/generation.h"

namespace dpnote {

inline constexpr size_t kDefaultMaxSentenceChars = 2181;
inline constexpr int kDefaultRegenerationRetries = 5;
inline constexpr double kDefaultAddK = 0.01;

// Fluency model used to rank candidates. Returns ln p(token | prefix) for
// each token of `text` under the scorer's own tokenizer.
class TokenScorer {
 public:
  virtual ~TokenScorer() = default;
  virtual std::vector<double> TokenLogProbs(std::string_view text) const = 0;
};

// Add-k smoothed n-gram scorer:
//   p(w | ctx) = (c(ctx, w) + k) / (c(ctx) + k * |support|)
// over a support of every vocabulary word plus <unk>.
class NgramScorer : public TokenScorer {
 public:
  // An untrained scorer is uniform over its support.
  NgramScorer(Vocabulary vocabulary, int order, double add_k = kDefaultAddK);

  // Vocabulary and counts from `notes`, which must not be private.
  static absl::StatusOr<NgramScorer> Train(const Corpus& notes, int order,
                                           double add_k = kDefaultAddK);

  void Observe(std::string_view text);

  size_t support_size() const { return vocabulary_.size() - 2; }
  int order() const { return order_; }
  std::vector<double> TokenLogProbs(std::string_view text) const override;

 private:
  std::vector<int32_t> History(std::span<const int32_t> ids, size_t pos) const;

  Vocabulary vocabulary_;
  int order_;
  double add_k_;
  std::map<std::vector<int32_t>, std::unordered_map<int32_t, int64_t>> counts_;
  std::map<std::vector<int32_t>, int64_t> totals_;
};

// exp(-(1/t) * sum of log-probabilities). Fails on text with no tokens.
absl::StatusOr<double> Perplexity(const TokenScorer& scorer,
                                  std::string_view text);

struct Selection {
  size_t index = 0;
  double score = 0.0;
  // Perplexity per candidate; +inf for unscorable ones.
  std::vector<double> scores;
};

// Index of the lowest score, lowest index on ties. Fails if every score is
// +inf or NaN.
absl::StatusOr<size_t> ArgMinScore(std::span<const double> scores);

// Scores every candidate and picks the least perplexing one. Selection is
// post-processing of already private candidates and touches no ledger.
absl::StatusOr<Selection> SelectBest(std::span<const std::string> candidates,
                                     const TokenScorer& scorer);

struct SentenceCheck {
  bool accepted = true;
  size_t longest_sentence_chars = 0;
};

// Splits on '.', '!' or '?' followed by whitespace and measures sentences in
// UTF-8 code points. Accepts iff no sentence exceeds `max_chars`.
SentenceCheck RejectLongSentences(std::string_view note,
                                  size_t max_chars = kDefaultMaxSentenceChars);

}  // namespace dpnote

#endif  // DPNOTE_QUALITY_H_
