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

#include "dpnote/generation.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <unordered_set>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_replace.h"
#include "binary_io.h"
#include "dpnote/tokenizer.h"
#include "strings.h"

namespace dpnote {
namespace {

using internal::GetF64;
using internal::GetLe;
using internal::GetString;
using internal::PutF64;
using internal::PutLe;
using internal::PutString;

constexpr char kDpngMagic[4] = {'D', 'P', 'N', 'G'};
constexpr uint32_t kDpngVersion = 1;
constexpr uint32_t kMaxTokenBytes = 1 << 16;

inline bool Emittable(int32_t id) {
  return id != Vocabulary::kUnk && id != Vocabulary::kBos;
}

std::vector<const Section*> InTaxonomyOrder(const SectionedNote& note) {
  std::vector<const Section*> sections;
  for (const Section& s : note.sections) sections.push_back(&s);
  std::stable_sort(sections.begin(), sections.end(),
                   [](const Section* a, const Section* b) {
                     return GroupIndex(a->group) < GroupIndex(b->group);
                   });
  return sections;
}

std::vector<int32_t> Seed(std::span<const int32_t> previous, int order) {
  const size_t width = static_cast<size_t>(order - 1);
  std::vector<int32_t> seed(width, Vocabulary::kBos);
  const size_t take = std::min(width, previous.size());
  std::copy(previous.end() - static_cast<long>(take), previous.end(),
            seed.end() - static_cast<long>(take));
  return seed;
}

}  // namespace

Vocabulary::Vocabulary() : tokens_{"<unk>", "<bos>", "<eos>"} {
  for (int32_t i = 0; i < kFirstWord; ++i) ids_.emplace(tokens_[i], i);
}

Vocabulary Vocabulary::FromWords(std::vector<std::string> words) {
  std::sort(words.begin(), words.end());
  words.erase(std::unique(words.begin(), words.end()), words.end());
  Vocabulary vocabulary;
  for (std::string& word : words) {
    if (vocabulary.ids_.count(word)) continue;
    const auto id = static_cast<int32_t>(vocabulary.tokens_.size());
    vocabulary.ids_.emplace(word, id);
    vocabulary.tokens_.push_back(std::move(word));
  }
  return vocabulary;
}

int32_t Vocabulary::Id(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  return it == ids_.end() ? kUnk : it->second;
}

std::vector<int32_t> Vocabulary::Encode(
    std::span<const std::string> tokens) const {
  std::vector<int32_t> ids;
  ids.reserve(tokens.size());
  for (const std::string& t : tokens) ids.push_back(Id(t));
  return ids;
}

Vocabulary BuildVocabulary(std::span<const Note> notes) {
  std::set<std::string> words;
  for (const Note& note : notes) {
    for (std::string& token : Tokenize(note.text)) words.insert(std::move(token));
  }
  return Vocabulary::FromWords({words.begin(), words.end()});
}

std::string InstructionFor(SectionGroup group, std::string_view tmpl) {
  return absl::StrReplaceAll(internal::Av(tmpl),
                             {{"{group}", internal::Av(DisplayName(group))}});
}

const std::vector<double>* DpNgramModel::Row(
    SectionGroup group, std::span<const int32_t> context) const {
  auto it = table_.find(ContextKey{group, {context.begin(), context.end()}});
  return it == table_.end() ? nullptr : &it->second;
}

double DpNgramModel::Count(SectionGroup group, std::span<const int32_t> context,
                           int32_t next) const {
  const std::vector<double>* row = Row(group, context);
  if (row == nullptr || next < 0 || static_cast<size_t>(next) >= row->size()) {
    return 0.0;
  }
  return (*row)[next];
}

std::vector<double> DpNgramModel::NextTokenDistribution(
    SectionGroup group, std::span<const int32_t> history) const {
  const int max_width =
      std::min<int>(order_ - 1, static_cast<int>(history.size()));
  for (int width = max_width; width >= 0; --width) {
    const std::vector<double>* row =
        Row(group, history.subspan(history.size() - width));
    if (row == nullptr) continue;
    double mass = 0.0;
    for (size_t id = 0; id < row->size(); ++id) {
      if (Emittable(static_cast<int32_t>(id))) mass += (*row)[id];
    }
    if (!(mass > 0.0)) continue;
    std::vector<double> dist(row->size(), 0.0);
    for (size_t id = 0; id < row->size(); ++id) {
      if (Emittable(static_cast<int32_t>(id))) dist[id] = (*row)[id] / mass;
    }
    return dist;
  }
  return {};
}

std::vector<int32_t> DpNgramModel::SeedContext(
    std::string_view previous_section) const {
  const std::vector<int32_t> previous =
      vocabulary_.Encode(Tokenize(previous_section));
  return Seed(previous, order_);
}

std::vector<int32_t> DpNgramModel::GenerateIds(const GenerationContext& context,
                                               const DecodingOptions& options,
                                               Rng& rng) const {
  std::vector<int32_t> history =
      context.previous_sections.empty()
          ? Seed({}, order_)
          : SeedContext(context.previous_sections.back().second);
  const size_t seed_size = history.size();

  std::unordered_set<int32_t> term_ids;
  for (const std::string& term : context.term_list.terms) {
    for (int32_t id : vocabulary_.Encode(Tokenize(term))) {
      if (Emittable(id) && id != Vocabulary::kEos) term_ids.insert(id);
    }
  }
  std::unordered_map<int32_t, int> emitted;
  const bool greedy = !(options.temperature > 0.0);
  std::vector<double> logits;

  for (int step = 0; step < options.max_tokens; ++step) {
    // Back off until some context has mass over emittable tokens.
    const std::vector<double>* row = nullptr;
    const int max_width = std::min<int>(order_ - 1, static_cast<int>(history.size()));
    for (int width = max_width; width >= 0 && row == nullptr; --width) {
      const std::vector<double>* candidate = Row(
          context.group,
          std::span<const int32_t>(history).subspan(history.size() - width));
      if (candidate == nullptr) continue;
      for (size_t id = 0; id < candidate->size(); ++id) {
        if (Emittable(static_cast<int32_t>(id)) && (*candidate)[id] > 0.0) {
          row = candidate;
          break;
        }
      }
    }
    if (row == nullptr) break;

    logits.assign(row->size(), -std::numeric_limits<double>::infinity());
    double best = -std::numeric_limits<double>::infinity();
    int32_t best_id = Vocabulary::kEos;
    for (size_t i = 0; i < row->size(); ++i) {
      const auto id = static_cast<int32_t>(i);
      double count = (*row)[i];
      if (!Emittable(id) || !(count > 0.0)) continue;
      if (auto it = emitted.find(id); it != emitted.end()) {
        count /= std::pow(options.repetition_penalty, it->second);
      }
      // Temperature sharpens the counts; the biases then act as fixed
      // log-odds shifts on the final distribution.
      double logit = greedy ? std::log(count)
                            : std::log(count) / options.temperature;
      if (id == Vocabulary::kEos) {
        logit += options.eos_bias;
      } else if (term_ids.count(id)) {
        logit += options.term_bias;
      }
      logits[i] = logit;
      if (logit > best) {
        best = logit;
        best_id = id;
      }
    }

    int32_t next = best_id;
    if (!greedy) {
      double total = 0.0;
      for (double& l : logits) {
        l = std::isinf(l) ? 0.0 : std::exp(l - best);
        total += l;
      }
      double u = rng.Uniform() * total;
      for (size_t i = 0; i < logits.size(); ++i) {
        if (logits[i] <= 0.0) continue;
        next = static_cast<int32_t>(i);
        if (u < logits[i]) break;
        u -= logits[i];
      }
    }
    if (next == Vocabulary::kEos) break;
    history.push_back(next);
    ++emitted[next];
  }
  return {history.begin() + static_cast<long>(seed_size), history.end()};
}

absl::StatusOr<std::string> DpNgramModel::GenerateSection(
    const GenerationContext& context, const DecodingOptions& options,
    Rng& rng) const {
  if (options.max_tokens < 1) {
    return absl::InvalidArgumentError("max_tokens must be >= 1");
  }
  if (!(options.repetition_penalty > 0.0)) {
    return absl::InvalidArgumentError("repetition_penalty must be positive");
  }
  if (table_.empty()) return absl::FailedPreconditionError("model is empty");
  std::vector<std::string> tokens;
  for (int32_t id : GenerateIds(context, options, rng)) {
    tokens.push_back(vocabulary_.Token(id));
  }
  return Detokenize(tokens);
}

absl::Status DpNgramModel::Write(std::ostream& out) const {
  out.write(kDpngMagic, 4);
  PutLe<uint32_t>(out, kDpngVersion);
  PutLe<uint32_t>(out, static_cast<uint32_t>(order_));
  PutF64(out, budget_.epsilon);
  PutF64(out, budget_.delta);
  PutF64(out, clip_);
  PutF64(out, sigma_);
  PutLe<uint32_t>(out, static_cast<uint32_t>(vocabulary_.size()));
  for (const std::string& token : vocabulary_.tokens()) PutString(out, token);

  PutLe<uint64_t>(out, table_.size());
  for (const auto& [key, row] : table_) {
    PutLe<uint8_t>(out, static_cast<uint8_t>(key.group));
    PutLe<uint8_t>(out, static_cast<uint8_t>(key.tokens.size()));
    for (int32_t id : key.tokens) PutLe<uint32_t>(out, static_cast<uint32_t>(id));
  }
  uint64_t nonzero = 0;
  for (const auto& [key, row] : table_) {
    nonzero += std::count_if(row.begin(), row.end(),
                             [](double v) { return v != 0.0; });
  }
  PutLe<uint64_t>(out, nonzero);
  uint64_t context_index = 0;
  for (const auto& [key, row] : table_) {
    for (size_t next = 0; next < row.size(); ++next) {
      if (row[next] == 0.0) continue;
      PutLe<uint64_t>(out, context_index);
      PutLe<uint32_t>(out, static_cast<uint32_t>(next));
      PutF64(out, row[next]);
    }
    ++context_index;
  }
  if (!out) return absl::DataLossError("failed writing DPNG stream");
  return absl::OkStatus();
}

absl::StatusOr<DpNgramModel> DpNgramModel::Read(std::istream& in) {
  auto truncated = [](std::string_view what) {
    return absl::InvalidArgumentError(
        internal::StrCat("truncated or corrupt DPNG stream (", what, ")"));
  };
  char magic[4];
  if (!in.read(magic, 4) || !std::equal(magic, magic + 4, kDpngMagic)) {
    return absl::InvalidArgumentError("not a DPNG stream (bad magic)");
  }
  uint32_t version = 0, order = 0, vocab_size = 0;
  if (!GetLe(in, version)) return truncated("version");
  if (version != kDpngVersion) {
    return absl::UnimplementedError(
        internal::StrCat("unsupported DPNG version ", version));
  }
  DpNgramModel model;
  if (!GetLe(in, order) || order < 1 || order > kMaxNgramOrder) {
    return truncated("order");
  }
  model.order_ = static_cast<int>(order);
  if (!GetF64(in, model.budget_.epsilon) || !GetF64(in, model.budget_.delta) ||
      !GetF64(in, model.clip_) || !GetF64(in, model.sigma_)) {
    return truncated("header");
  }
  if (!GetLe(in, vocab_size) || vocab_size < Vocabulary::kFirstWord) {
    return truncated("vocabulary size");
  }
  std::vector<std::string> words;
  for (uint32_t i = 0; i < vocab_size; ++i) {
    std::string token;
    if (!GetString(in, token, kMaxTokenBytes)) return truncated("vocabulary");
    if (i >= static_cast<uint32_t>(Vocabulary::kFirstWord)) {
      words.push_back(std::move(token));
    }
  }
  model.vocabulary_ = Vocabulary::FromWords(words);
  if (model.vocabulary_.size() != vocab_size) {
    return absl::InvalidArgumentError("DPNG vocabulary is not canonical");
  }

  uint64_t context_count = 0;
  if (!GetLe(in, context_count)) return truncated("context count");
  std::vector<Table::iterator> rows;
  for (uint64_t c = 0; c < context_count; ++c) {
    uint8_t group = 0, width = 0;
    if (!GetLe(in, group) || !GetLe(in, width) || group >= 6 ||
        width + 1u > order) {
      return truncated("context");
    }
    ContextKey key{static_cast<SectionGroup>(group), {}};
    for (uint8_t w = 0; w < width; ++w) {
      uint32_t id = 0;
      if (!GetLe(in, id) || id >= vocab_size) return truncated("context ids");
      key.tokens.push_back(static_cast<int32_t>(id));
    }
    auto [it, inserted] = model.table_.emplace(
        std::move(key), std::vector<double>(vocab_size, 0.0));
    if (!inserted) return absl::InvalidArgumentError("duplicate DPNG context");
    rows.push_back(it);
  }
  uint64_t cells = 0;
  if (!GetLe(in, cells)) return truncated("cell count");
  for (uint64_t i = 0; i < cells; ++i) {
    uint64_t context_index = 0;
    uint32_t next = 0;
    double value = 0.0;
    if (!GetLe(in, context_index) || !GetLe(in, next) || !GetF64(in, value) ||
        context_index >= rows.size() || next >= vocab_size ||
        !std::isfinite(value) || value < 0.0) {
      return truncated("cells");
    }
    rows[context_index]->second[next] = value;
  }
  return model;
}

std::vector<CountingSequence> CountingSequences(const SectionedNote& note,
                                                const Vocabulary& vocabulary,
                                                int order) {
  std::vector<CountingSequence> sequences;
  std::vector<int32_t> previous;
  for (const Section* section : InTaxonomyOrder(note)) {
    std::vector<int32_t> body = vocabulary.Encode(Tokenize(section->body));
    CountingSequence seq{section->group, Seed(previous, order)};
    seq.ids.insert(seq.ids.end(), body.begin(), body.end());
    seq.ids.push_back(Vocabulary::kEos);
    sequences.push_back(std::move(seq));
    previous = std::move(body);
  }
  return sequences;
}

NoteCounts CountNote(const SectionedNote& note, const Vocabulary& vocabulary,
                     int order) {
  NoteCounts counts;
  const size_t width = static_cast<size_t>(order - 1);
  for (const CountingSequence& seq : CountingSequences(note, vocabulary, order)) {
    for (size_t t = width; t < seq.ids.size(); ++t) {
      for (size_t w = 0; w <= width; ++w) {
        DpNgramModel::ContextKey key{
            seq.group, {seq.ids.begin() + static_cast<long>(t - w),
                        seq.ids.begin() + static_cast<long>(t)}};
        counts[{std::move(key), seq.ids[t]}] += 1.0;
      }
    }
  }
  return counts;
}

void ClipNoteCounts(NoteCounts& counts, double clip) {
  double sq = 0.0;
  for (const auto& [cell, value] : counts) sq += value * value;
  const double norm = std::sqrt(sq);
  if (norm <= clip || norm == 0.0) return;
  const double scale = clip / norm;
  for (auto& [cell, value] : counts) value *= scale;
}

absl::StatusOr<DpNgramModel> TrainDpNgram(
    std::span<const SectionedNote> private_notes,
    std::span<const SectionedNote> public_notes, const PrivacyBudget& budget,
    const NgramTrainingOptions& options, Rng& rng) {
  if (options.order < 1 || options.order > kMaxNgramOrder) {
    return absl::InvalidArgumentError(internal::StrCat(
        "n-gram order must lie in [1, ", kMaxNgramOrder, "], got ",
        options.order));
  }
  if (!(options.clip > 0.0)) {
    return absl::InvalidArgumentError("clip bound must be positive");
  }
  if (private_notes.empty()) {
    return absl::InvalidArgumentError("empty private training corpus");
  }
  absl::StatusOr<NoiseScale> noise = GaussianSigma(budget, options.clip);
  if (!noise.ok()) return noise.status();

  DpNgramModel model;
  model.order_ = options.order;
  model.budget_ = budget;
  model.clip_ = options.clip;
  model.sigma_ = noise->sigma;

  std::set<std::string> words;
  for (const SectionedNote& note : public_notes) {
    for (const Section& section : note.sections) {
      for (std::string& t : Tokenize(section.body)) words.insert(std::move(t));
    }
  }
  model.vocabulary_ = Vocabulary::FromWords({words.begin(), words.end()});
  const size_t vocab_size = model.vocabulary_.size();

  for (const SectionedNote& note : public_notes) {
    for (const auto& [cell, count] :
         CountNote(note, model.vocabulary_, options.order)) {
      model.table_.try_emplace(cell.first, vocab_size, 0.0);
    }
  }
  if (model.table_.empty()) {
    return absl::FailedPreconditionError(
        "public corpus yields no sectioned text to fix the context universe");
  }

  for (const SectionedNote& note : private_notes) {
    NoteCounts counts = CountNote(note, model.vocabulary_, options.order);
    std::erase_if(counts, [&](const auto& entry) {
      return !model.table_.contains(entry.first.first);
    });
    if (!budget.disabled()) ClipNoteCounts(counts, options.clip);
    for (const auto& [cell, value] : counts) {
      model.table_.at(cell.first)[cell.second] += value;
    }
  }

  if (noise->sigma > 0.0) {
    for (auto& [key, row] : model.table_) {
      for (size_t id = 0; id < row.size(); ++id) {
        if (static_cast<int32_t>(id) == Vocabulary::kBos) continue;
        row[id] = std::max(0.0, row[id] + rng.Gaussian(noise->sigma));
      }
    }
  }
  return model;
}

std::string RenderSyntheticNote(std::span<const SyntheticSection> sections) {
  std::string out;
  for (size_t i = 0; i < sections.size(); ++i) {
    if (i > 0) out += '\n';
    internal::StrAppend(&out, DisplayName(sections[i].group), ":\n",
                    sections[i].text, "\n");
  }
  return out;
}

absl::StatusOr<std::vector<Candidate>> GenerateCandidates(
    const SectionGenerator& generator, std::span<const TermList> term_lists,
    const CandidateOptions& options, const Rng& rng) {
  if (options.count < 1) {
    return absl::InvalidArgumentError("candidate count must be >= 1");
  }
  if (term_lists.size() > kAllSectionGroups.size()) {
    return absl::InvalidArgumentError("more than six sections requested");
  }
  std::vector<const TermList*> ordered;
  for (const TermList& list : term_lists) ordered.push_back(&list);
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const TermList* a, const TermList* b) {
                     return GroupIndex(a->group) < GroupIndex(b->group);
                   });
  for (size_t i = 1; i < ordered.size(); ++i) {
    if (ordered[i]->group == ordered[i - 1]->group) {
      return absl::InvalidArgumentError(internal::StrCat(
          "duplicate term list for group ", GroupKey(ordered[i]->group)));
    }
  }

  std::vector<Candidate> candidates;
  for (int i = 0; i < options.count; ++i) {
    const Rng candidate_rng = rng.Fork(static_cast<uint64_t>(i));
    std::optional<Candidate> fallback;
    double fallback_cost = std::numeric_limits<double>::infinity();
    for (int attempt = 0; attempt <= options.max_retries; ++attempt) {
      Rng stream = candidate_rng.Fork(static_cast<uint64_t>(attempt));
      Candidate candidate;
      candidate.attempts = attempt + 1;
      GenerationContext context;
      for (const TermList* list : ordered) {
        context.group = list->group;
        context.term_list = *list;
        context.instruction =
            InstructionFor(list->group, options.instruction_template);
        absl::StatusOr<std::string> text =
            generator.GenerateSection(context, options.decoding, stream);
        if (!text.ok()) return text.status();
        candidate.sections.push_back(SyntheticSection{list->group, *text});
        context.previous_sections.emplace_back(list->group, *std::move(text));
      }
      candidate.text = RenderSyntheticNote(candidate.sections);
      if (!options.accept || options.accept(candidate.text)) {
        fallback.reset();
        candidates.push_back(std::move(candidate));
        break;
      }
      const double cost =
          options.reject_cost ? options.reject_cost(candidate.text) : 0.0;
      if (!fallback.has_value() || cost < fallback_cost) {
        fallback_cost = cost;
        candidate.accepted = false;
        fallback = std::move(candidate);
      }
      if (attempt == options.max_retries) {
        fallback->attempts = attempt + 1;
        candidates.push_back(*std::move(fallback));
      }
    }
  }
  return candidates;
}

}  // namespace dpnote
