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

#include <algorithm>
#include <cmath>
#include <limits>

#include "absl/strings/ascii.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/strip.h"
#include "dpnote/tokenizer.h"
#include "strings.h"

namespace dpnote {
namespace {

inline bool IsUtf8Continuation(char c) {
  return (static_cast<unsigned char>(c) & 0xc0) == 0x80;
}

}  // namespace

NgramScorer::NgramScorer(Vocabulary vocabulary, int order, double add_k)
    : vocabulary_(std::move(vocabulary)), order_(order), add_k_(add_k) {}

absl::StatusOr<NgramScorer> NgramScorer::Train(const Corpus& notes, int order,
                                               double add_k) {
  if (IsPrivate(notes.role())) {
    return absl::InvalidArgumentError(
        "the reference scorer must not be trained on private data");
  }
  if (order < 1 || order > kMaxNgramOrder) {
    return absl::InvalidArgumentError(
        internal::StrCat("scorer order must lie in [1, ", kMaxNgramOrder, "]"));
  }
  if (!(add_k > 0.0)) {
    return absl::InvalidArgumentError("add-k smoothing must be positive");
  }
  NgramScorer scorer(BuildVocabulary(notes.notes()), order, add_k);
  for (const Note& note : notes.notes()) scorer.Observe(note.text);
  return scorer;
}

std::vector<int32_t> NgramScorer::History(std::span<const int32_t> ids,
                                          size_t pos) const {
  const size_t width = static_cast<size_t>(order_ - 1);
  std::vector<int32_t> context(width, Vocabulary::kBos);
  for (size_t w = 0; w < width && w < pos; ++w) {
    context[width - 1 - w] = ids[pos - 1 - w];
  }
  return context;
}

void NgramScorer::Observe(std::string_view text) {
  const std::vector<int32_t> ids = vocabulary_.Encode(Tokenize(text));
  for (size_t i = 0; i < ids.size(); ++i) {
    std::vector<int32_t> context = History(ids, i);
    ++counts_[context][ids[i]];
    ++totals_[std::move(context)];
  }
}

std::vector<double> NgramScorer::TokenLogProbs(std::string_view text) const {
  const std::vector<int32_t> ids = vocabulary_.Encode(Tokenize(text));
  const double support = static_cast<double>(support_size());
  std::vector<double> log_probs;
  log_probs.reserve(ids.size());
  for (size_t i = 0; i < ids.size(); ++i) {
    const std::vector<int32_t> context = History(ids, i);
    double count = 0.0, total = 0.0;
    if (auto t = totals_.find(context); t != totals_.end()) {
      total = static_cast<double>(t->second);
      const auto& row = counts_.at(context);
      if (auto c = row.find(ids[i]); c != row.end()) {
        count = static_cast<double>(c->second);
      }
    }
    log_probs.push_back(std::log((count + add_k_) / (total + add_k_ * support)));
  }
  return log_probs;
}

absl::StatusOr<double> Perplexity(const TokenScorer& scorer,
                                  std::string_view text) {
  const std::vector<double> log_probs = scorer.TokenLogProbs(text);
  if (log_probs.empty()) {
    return absl::InvalidArgumentError("perplexity of an empty text");
  }
  double sum = 0.0;
  for (double lp : log_probs) sum += lp;
  return std::exp(-sum / static_cast<double>(log_probs.size()));
}

absl::StatusOr<size_t> ArgMinScore(std::span<const double> scores) {
  std::optional<size_t> best;
  for (size_t i = 0; i < scores.size(); ++i) {
    if (std::isnan(scores[i]) || std::isinf(scores[i])) continue;
    if (!best.has_value() || scores[i] < scores[*best]) best = i;
  }
  if (!best.has_value()) {
    return absl::FailedPreconditionError("no candidate could be scored");
  }
  return *best;
}

absl::StatusOr<Selection> SelectBest(std::span<const std::string> candidates,
                                     const TokenScorer& scorer) {
  if (candidates.empty()) {
    return absl::InvalidArgumentError("no candidates to select from");
  }
  Selection selection;
  for (const std::string& candidate : candidates) {
    absl::StatusOr<double> ppl = Perplexity(scorer, candidate);
    selection.scores.push_back(
        ppl.ok() ? *ppl : std::numeric_limits<double>::infinity());
  }
  absl::StatusOr<size_t> index = ArgMinScore(selection.scores);
  if (!index.ok()) return index.status();
  selection.index = *index;
  selection.score = selection.scores[*index];
  return selection;
}

SentenceCheck RejectLongSentences(std::string_view note, size_t max_chars) {
  SentenceCheck check;
  auto measure = [&check](std::string_view sentence) {
    sentence = internal::StripAsciiWhitespace(sentence);
    const size_t chars = static_cast<size_t>(std::count_if(
        sentence.begin(), sentence.end(),
        [](char c) { return !IsUtf8Continuation(c); }));
    check.longest_sentence_chars = std::max(check.longest_sentence_chars, chars);
  };
  size_t start = 0;
  for (size_t i = 0; i + 1 < note.size(); ++i) {
    const char c = note[i];
    if ((c == '.' || c == '!' || c == '?') &&
        absl::ascii_isspace(static_cast<unsigned char>(note[i + 1]))) {
      measure(note.substr(start, i + 1 - start));
      start = i + 1;
    }
  }
  measure(note.substr(start));
  check.accepted = check.longest_sentence_chars <= max_chars;
  return check;
}

}  // namespace dpnote
