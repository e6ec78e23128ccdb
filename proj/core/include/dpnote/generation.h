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

#ifndef DPNOTE_GENERATION_H_
#define DPNOTE_GENERATION_H_

#include <cstdint>
#include <functional>
#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "dpnote/privacy.h"
#include "dpnote/rng.h"
#include "dpnote/structuring.h"
#include "dpnote/terms.h"

namespace dpnote {

inline constexpr int kMaxNgramOrder = 5;
inline constexpr int kDefaultCandidates = 4;
inline constexpr std::string_view kDefaultInstructionTemplate =
    "Write the {group} section.";

// Token <-> id map. Ids 0..2 are reserved for <unk>, <bos> and <eos>; words
// follow in sorted order so that a vocabulary is a pure function of its word
// set.
class Vocabulary {
 public:
  static constexpr int32_t kUnk = 0;
  static constexpr int32_t kBos = 1;
  static constexpr int32_t kEos = 2;
  static constexpr int32_t kFirstWord = 3;

  Vocabulary();
  // Duplicates are ignored.
  static Vocabulary FromWords(std::vector<std::string> words);

  int32_t Id(std::string_view token) const;
  const std::string& Token(int32_t id) const { return tokens_[id]; }
  size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  std::vector<int32_t> Encode(std::span<const std::string> tokens) const;

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.tokens_ == b.tokens_;
  }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int32_t> ids_;
};

// Vocabulary of every token in the given notes.
Vocabulary BuildVocabulary(std::span<const Note> notes);

struct DecodingOptions {
  // <= 0 selects greedy argmax decoding.
  double temperature = 0.1;
  // Counts of tokens already emitted in the section are divided by this once
  // per earlier occurrence.
  double repetition_penalty = 1.2;
  // Added to the log-weight of tokens that occur in the section's terms,
  // after the temperature has been applied to the counts.
  double term_bias = 2.0;
  // Added to the log-weight of the end-of-section token.
  double eos_bias = 0.5;
  int max_tokens = 256;
};

// What a section generator sees when writing one section.
struct GenerationContext {
  std::string instruction;
  // Already generated sections of the same note, in taxonomy order.
  std::vector<std::pair<SectionGroup, std::string>> previous_sections;
  TermList term_list;
  SectionGroup group = SectionGroup::kPatientInformation;
};

// "{group}" in `tmpl` is replaced by the group's display name.
std::string InstructionFor(SectionGroup group,
                           std::string_view tmpl = kDefaultInstructionTemplate);

// Pluggable section-wise note generator. Implementations must be
// deterministic given (context, options, rng state).
class SectionGenerator {
 public:
  virtual ~SectionGenerator() = default;
  virtual absl::StatusOr<std::string> GenerateSection(
      const GenerationContext& context, const DecodingOptions& options,
      Rng& rng) const = 0;
};

struct NgramTrainingOptions {
  int order = 3;
  // L2 bound on a single note's count vector.
  double clip = 5.0;
};

// Per-group n-gram tables for all orders 1..n. Rows are dense over the
// vocabulary and exist only for contexts observed in the public corpus.
class DpNgramModel : public SectionGenerator {
 public:
  struct ContextKey {
    SectionGroup group;
    std::vector<int32_t> tokens;  // order - 1 ids

    friend auto operator<=>(const ContextKey&, const ContextKey&) = default;
    friend bool operator==(const ContextKey&, const ContextKey&) = default;
  };
  using Table = std::map<ContextKey, std::vector<double>>;

  DpNgramModel() = default;

  int order() const { return order_; }
  const Vocabulary& vocabulary() const { return vocabulary_; }
  const PrivacyBudget& budget() const { return budget_; }
  double clip() const { return clip_; }
  double sigma() const { return sigma_; }
  const Table& table() const { return table_; }

  // Count row for a context, or nullptr outside the context universe.
  const std::vector<double>* Row(SectionGroup group,
                                 std::span<const int32_t> context) const;
  double Count(SectionGroup group, std::span<const int32_t> context,
               int32_t next) const;

  // Normalized next-token distribution for the longest suffix of `history`
  // with positive mass over emittable tokens, backing off to shorter
  // contexts. Empty if even the unigram row has no mass.
  std::vector<double> NextTokenDistribution(
      SectionGroup group, std::span<const int32_t> history) const;

  // Initial context: the last order-1 tokens of the previous section, padded
  // with <bos>.
  std::vector<int32_t> SeedContext(std::string_view previous_section) const;

  std::vector<int32_t> GenerateIds(const GenerationContext& context,
                                   const DecodingOptions& options,
                                   Rng& rng) const;
  absl::StatusOr<std::string> GenerateSection(const GenerationContext& context,
                                              const DecodingOptions& options,
                                              Rng& rng) const override;

  // "DPNG" container: version, order, budget, clip, sigma, vocabulary,
  // contexts, then the nonzero cells as sorted (context, next, f64) triples.
  absl::Status Write(std::ostream& out) const;
  static absl::StatusOr<DpNgramModel> Read(std::istream& in);

  friend bool operator==(const DpNgramModel& a, const DpNgramModel& b) {
    return a.order_ == b.order_ && a.vocabulary_ == b.vocabulary_ &&
           a.budget_ == b.budget_ && a.clip_ == b.clip_ &&
           a.sigma_ == b.sigma_ && a.table_ == b.table_;
  }

 private:
  friend absl::StatusOr<DpNgramModel> TrainDpNgram(
      std::span<const SectionedNote> private_notes,
      std::span<const SectionedNote> public_notes, const PrivacyBudget& budget,
      const NgramTrainingOptions& options, Rng& rng);

  int order_ = 1;
  Vocabulary vocabulary_;
  PrivacyBudget budget_;
  double clip_ = 0.0;
  double sigma_ = 0.0;
  Table table_;
};

// Token-id sequence fed to the counter for one section: the seeded context
// followed by the section's tokens and <eos>.
struct CountingSequence {
  SectionGroup group;
  std::vector<int32_t> ids;
};

// One note's sections in taxonomy order, each seeded with the tail of the
// previous one.
std::vector<CountingSequence> CountingSequences(const SectionedNote& note,
                                                const Vocabulary& vocabulary,
                                                int order);

// A note's sparse contribution: (context, next) -> count, all orders.
using NoteCounts = std::map<std::pair<DpNgramModel::ContextKey, int32_t>, double>;
NoteCounts CountNote(const SectionedNote& note, const Vocabulary& vocabulary,
                     int order);
// Scales `counts` so that its L2 norm is at most `clip`.
void ClipNoteCounts(NoteCounts& counts, double clip);

// Trains on the private notes. The vocabulary and the context universe come
// from the public notes only; private tokens outside the vocabulary count as
// <unk> and private contexts outside the universe are dropped. With a finite
// budget each note's counts are clipped to `clip`, every cell of the universe
// receives N(0, sigma^2) with sigma = GaussianSigma(budget, clip), and
// negative cells are floored at zero. An infinite budget yields raw counts.
absl::StatusOr<DpNgramModel> TrainDpNgram(
    std::span<const SectionedNote> private_notes,
    std::span<const SectionedNote> public_notes, const PrivacyBudget& budget,
    const NgramTrainingOptions& options, Rng& rng);

struct SyntheticSection {
  SectionGroup group;
  std::string text;
};

// "<Group display name>:\n<text>\n" blocks separated by blank lines.
std::string RenderSyntheticNote(std::span<const SyntheticSection> sections);

struct Candidate {
  std::vector<SyntheticSection> sections;
  std::string text;
  int attempts = 1;
  // False when every attempt failed `accept` and the best effort was kept.
  bool accepted = true;
};

struct CandidateOptions {
  int count = kDefaultCandidates;
  DecodingOptions decoding;
  std::string instruction_template = std::string(kDefaultInstructionTemplate);
  // Quality gate applied to each rendered candidate; rejected candidates are
  // regenerated up to max_retries more times.
  std::function<bool(const std::string&)> accept;
  // Ranks rejected attempts when none passes; lower is better.
  std::function<double(const std::string&)> reject_cost;
  int max_retries = 5;
};

// Builds `count` candidate notes section by section in taxonomy order.
// Attempt a of candidate i draws from rng.Fork(i).Fork(a).
absl::StatusOr<std::vector<Candidate>> GenerateCandidates(
    const SectionGenerator& generator, std::span<const TermList> term_lists,
    const CandidateOptions& options, const Rng& rng);

}  // namespace dpnote

#endif  // DPNOTE_GENERATION_H_
