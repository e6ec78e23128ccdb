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

#include <algorithm>
#include <fstream>
#include <numeric>
#include <unordered_set>

#include "absl/strings/ascii.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_split.h"
#include "absl/strings/strip.h"
#include "dpnote/hash.h"
#include "strings.h"

namespace dpnote {
namespace {

constexpr uint64_t kBucketSalt = 0x62756b6574ULL;  // "buket"
constexpr uint64_t kSignSalt = 0x7369676e5fULL;    // "sign_"

inline bool IsEdgePunct(unsigned char c) { return absl::ascii_ispunct(c); }

struct WordToken {
  std::string normalized;
  size_t begin;
  size_t end;
};

// Whitespace tokens with edge punctuation stripped and empty tokens dropped.
std::vector<WordToken> WordTokens(std::string_view text) {
  std::vector<WordToken> tokens;
  size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() &&
           absl::ascii_isspace(static_cast<unsigned char>(text[i]))) {
      ++i;
    }
    size_t begin = i;
    while (i < text.size() &&
           !absl::ascii_isspace(static_cast<unsigned char>(text[i]))) {
      ++i;
    }
    size_t end = i;
    while (begin < end && IsEdgePunct(static_cast<unsigned char>(text[begin]))) {
      ++begin;
    }
    while (end > begin &&
           IsEdgePunct(static_cast<unsigned char>(text[end - 1]))) {
      --end;
    }
    if (begin < end) {
      tokens.push_back(WordToken{
          internal::AsciiStrToLower(text.substr(begin, end - begin)), begin, end});
    }
  }
  return tokens;
}

std::vector<std::string> TrigramOccurrences(std::string_view normalized) {
  std::vector<std::string> grams;
  if (normalized.empty()) return grams;
  if (normalized.size() < 3) {
    grams.emplace_back(normalized);
    return grams;
  }
  for (size_t i = 0; i + 3 <= normalized.size(); ++i) {
    grams.emplace_back(normalized.substr(i, 3));
  }
  return grams;
}

double SortedSetJaccard(std::span<const std::string> a,
                        std::span<const std::string> b) {
  if (a.empty() && b.empty()) return 0.0;
  size_t inter = 0, i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] < b[j]) {
      ++i;
    } else if (b[j] < a[i]) {
      ++j;
    } else {
      ++inter;
      ++i;
      ++j;
    }
  }
  return static_cast<double>(inter) /
         static_cast<double>(a.size() + b.size() - inter);
}

void AddHashedGrams(std::string_view normalized, Eigen::VectorXd& acc) {
  const uint64_t dim = static_cast<uint64_t>(acc.size());
  for (const std::string& gram : TrigramOccurrences(normalized)) {
    const uint64_t bucket = Fnv1a64(gram, kBucketSalt) % dim;
    const double sign = (Fnv1a64(gram, kSignSalt) >> 63) ? -1.0 : 1.0;
    acc(static_cast<Eigen::Index>(bucket)) += sign;
  }
}

absl::StatusOr<TermEmbedding> Finish(Eigen::VectorXd acc) {
  TermEmbedding out;
  const double norm = acc.norm();
  if (norm == 0.0) {
    out.values = Eigen::VectorXd::Zero(acc.size());
    out.degenerate = true;
  } else {
    out.values = acc / norm;
  }
  return out;
}

absl::Status CheckDim(int dim) {
  if (dim < kMinEmbeddingDim) {
    return absl::InvalidArgumentError(internal::StrCat(
        "embedding dimension must be >= ", kMinEmbeddingDim, ", got ", dim));
  }
  return absl::OkStatus();
}

}  // namespace

std::string NormalizeTerm(std::string_view text) {
  std::string out;
  for (const WordToken& token : WordTokens(text)) {
    if (!out.empty()) out += ' ';
    out += token.normalized;
  }
  return out;
}

std::vector<std::string> CharTrigrams(std::string_view normalized) {
  std::vector<std::string> grams = TrigramOccurrences(normalized);
  std::sort(grams.begin(), grams.end());
  grams.erase(std::unique(grams.begin(), grams.end()), grams.end());
  return grams;
}

double TrigramJaccard(std::string_view a, std::string_view b) {
  return SortedSetJaccard(CharTrigrams(a), CharTrigrams(b));
}

absl::StatusOr<Lexicon> Lexicon::Create(std::vector<Source> sources) {
  Lexicon lexicon;
  std::unordered_set<std::string> seen;
  for (size_t i = 0; i < sources.size(); ++i) {
    LexiconEntry entry;
    entry.surface = std::move(sources[i].surface);
    entry.canonical_id = std::move(sources[i].canonical_id);
    entry.normalized = NormalizeTerm(entry.surface);
    if (entry.normalized.empty()) {
      return absl::InvalidArgumentError(internal::StrCat(
          "lexicon entry ", i, " ('", entry.surface,
          "') is empty after normalization"));
    }
    if (!seen.insert(entry.normalized).second) continue;
    entry.token_count = static_cast<int>(
        std::count(entry.normalized.begin(), entry.normalized.end(), ' ') + 1);
    entry.trigrams = CharTrigrams(entry.normalized);
    const auto id = static_cast<uint32_t>(lexicon.entries_.size());
    for (const std::string& gram : entry.trigrams) {
      lexicon.index_[gram].push_back(id);
    }
    lexicon.max_token_count_ =
        std::max(lexicon.max_token_count_, entry.token_count);
    lexicon.entries_.push_back(std::move(entry));
  }
  return lexicon;
}

std::vector<uint32_t> Lexicon::Candidates(
    std::span<const std::string> trigrams) const {
  std::vector<uint32_t> ids;
  for (const std::string& gram : trigrams) {
    auto it = index_.find(gram);
    if (it != index_.end()) {
      ids.insert(ids.end(), it->second.begin(), it->second.end());
    }
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

absl::StatusOr<Lexicon> ParseLexicon(std::istream& in) {
  std::vector<Lexicon::Source> sources;
  std::string line;
  while (std::getline(in, line)) {
    std::string_view view = internal::StripTrailingAsciiWhitespace(line);
    if (internal::StripLeadingAsciiWhitespace(view).empty() ||
        internal::StartsWith(internal::StripLeadingAsciiWhitespace(view), "#")) {
      continue;
    }
    std::vector<std::string_view> fields = internal::SplitChar(view, '\t');
    Lexicon::Source source{std::string(fields[0]), std::nullopt};
    if (fields.size() > 1 && !fields[1].empty()) {
      source.canonical_id = std::string(fields[1]);
    }
    sources.push_back(std::move(source));
  }
  return Lexicon::Create(std::move(sources));
}

absl::StatusOr<Lexicon> LoadLexicon(const std::string& path) {
  std::ifstream in(path);
  if (!in) return absl::NotFoundError(internal::StrCat("cannot open ", path));
  return ParseLexicon(in);
}

std::vector<TermMatch> MatchTerms(std::string_view text, const Lexicon& lexicon,
                                  double threshold) {
  std::vector<TermMatch> found;
  if (lexicon.empty()) return found;
  const std::vector<WordToken> tokens = WordTokens(text);
  const size_t max_len = static_cast<size_t>(lexicon.max_token_count());
  for (size_t start = 0; start < tokens.size(); ++start) {
    std::string window;
    for (size_t len = 1; len <= max_len && start + len <= tokens.size();
         ++len) {
      if (len > 1) window += ' ';
      window += tokens[start + len - 1].normalized;
      const std::vector<std::string> grams = CharTrigrams(window);
      double best = -1.0;
      uint32_t best_id = 0;
      for (uint32_t id : lexicon.Candidates(grams)) {
        const double sim =
            SortedSetJaccard(grams, lexicon.entries()[id].trigrams);
        if (sim > best) {
          best = sim;
          best_id = id;
        }
      }
      if (best >= threshold) {
        found.push_back(TermMatch{best_id, lexicon.entries()[best_id].surface,
                                  best, tokens[start].begin,
                                  tokens[start + len - 1].end, start, len});
      }
    }
  }

  std::stable_sort(found.begin(), found.end(),
                   [](const TermMatch& a, const TermMatch& b) {
                     if (a.token_count != b.token_count) {
                       return a.token_count > b.token_count;
                     }
                     return a.token_begin < b.token_begin;
                   });
  std::vector<bool> taken(tokens.size(), false);
  std::vector<TermMatch> chosen;
  for (TermMatch& match : found) {
    const auto first = taken.begin() + static_cast<long>(match.token_begin);
    const auto last = first + static_cast<long>(match.token_count);
    if (std::any_of(first, last, [](bool t) { return t; })) continue;
    std::fill(first, last, true);
    chosen.push_back(std::move(match));
  }
  std::sort(chosen.begin(), chosen.end(),
            [](const TermMatch& a, const TermMatch& b) {
              return a.token_begin < b.token_begin;
            });
  return chosen;
}

TermList ExtractTerms(std::string_view section_body, const Lexicon& lexicon,
                      double threshold, SectionGroup group) {
  TermList list;
  list.group = group;
  std::unordered_set<std::string> seen;
  for (const TermMatch& match : MatchTerms(section_body, lexicon, threshold)) {
    if (seen.insert(lexicon.entries()[match.lexicon_index].normalized).second) {
      list.terms.push_back(match.surface);
    }
  }
  return list;
}

absl::StatusOr<TermEmbedding> EmbedTerms(std::span<const std::string> terms,
                                         int dim) {
  if (absl::Status s = CheckDim(dim); !s.ok()) return s;
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(dim);
  for (const std::string& term : terms) AddHashedGrams(NormalizeTerm(term), acc);
  return Finish(std::move(acc));
}

absl::StatusOr<TermEmbedding> EmbedTerms(const TermList& terms, int dim) {
  return EmbedTerms(std::span<const std::string>(terms.terms), dim);
}

absl::StatusOr<TermEmbedding> EmbedText(std::string_view text, int dim) {
  if (absl::Status s = CheckDim(dim); !s.ok()) return s;
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(dim);
  for (const WordToken& token : WordTokens(text)) {
    AddHashedGrams(token.normalized, acc);
  }
  return Finish(std::move(acc));
}

absl::StatusOr<Eigen::VectorXd> PerturbTrainingEmbedding(
    const Eigen::VectorXd& embedding, double sigma, Rng& rng) {
  if (!(sigma >= 0.0)) {
    return absl::InvalidArgumentError(
        internal::StrCat("sigma_emb must be >= 0, got ", sigma));
  }
  Eigen::VectorXd out = embedding;
  if (sigma > 0.0) {
    for (Eigen::Index i = 0; i < out.size(); ++i) out(i) += rng.Gaussian(sigma);
  }
  return out;
}

absl::StatusOr<LexiconEmbeddings> BuildLexiconEmbeddings(const Lexicon& lexicon,
                                                         int dim) {
  if (absl::Status s = CheckDim(dim); !s.ok()) return s;
  LexiconEmbeddings out;
  out.matrix = EmbeddingMatrix(static_cast<Eigen::Index>(lexicon.size()), dim);
  for (size_t i = 0; i < lexicon.size(); ++i) {
    const std::string& surface = lexicon.entries()[i].surface;
    absl::StatusOr<TermEmbedding> e =
        EmbedTerms(std::span<const std::string>(&surface, 1), dim);
    if (!e.ok()) return e.status();
    out.matrix.mutable_values().row(static_cast<Eigen::Index>(i)) =
        e->values.transpose();
    out.surfaces.push_back(surface);
  }
  return out;
}

absl::StatusOr<LexiconEmbeddings> LoadLexiconEmbeddings(
    const std::string& matrix_path, const std::string& surfaces_path) {
  absl::StatusOr<EmbeddingMatrix> matrix = LoadEmbeddingMatrix(matrix_path);
  if (!matrix.ok()) return matrix.status();
  std::ifstream in(surfaces_path);
  if (!in) {
    return absl::NotFoundError(internal::StrCat("cannot open ", surfaces_path));
  }
  LexiconEmbeddings out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    out.surfaces.push_back(line);
  }
  if (static_cast<Eigen::Index>(out.surfaces.size()) != matrix->rows()) {
    return absl::InvalidArgumentError(internal::StrCat(
        surfaces_path, " lists ", out.surfaces.size(), " surfaces but ",
        matrix_path, " has ", matrix->rows(), " rows"));
  }
  auto& values = matrix->mutable_values();
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    const double norm = values.row(r).norm();
    if (norm == 0.0) {
      return absl::InvalidArgumentError(
          internal::StrCat(matrix_path, ": row ", r, " is zero"));
    }
    values.row(r) /= norm;
  }
  out.matrix = *std::move(matrix);
  return out;
}

absl::StatusOr<TermList> DecodeTerms(const Eigen::VectorXd& query,
                                     const LexiconEmbeddings& lexicon,
                                     int count, SectionGroup group) {
  if (count < 1) {
    return absl::InvalidArgumentError("decode length must be >= 1");
  }
  if (static_cast<size_t>(count) > lexicon.surfaces.size()) {
    return absl::InvalidArgumentError(
        internal::StrCat("decode length ", count, " exceeds lexicon size ",
                     lexicon.surfaces.size()));
  }
  if (query.size() != lexicon.matrix.dim()) {
    return absl::InvalidArgumentError(
        internal::StrCat("query dimension ", query.size(),
                     " does not match lexicon dimension ",
                     lexicon.matrix.dim()));
  }
  TermList out;
  out.group = group;
  const double norm = query.norm();
  if (norm == 0.0) return out;
  const Eigen::VectorXd cosine = lexicon.matrix.values() * (query / norm);
  std::vector<size_t> order(lexicon.surfaces.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return cosine(static_cast<Eigen::Index>(a)) >
           cosine(static_cast<Eigen::Index>(b));
  });
  for (int i = 0; i < count; ++i) out.terms.push_back(lexicon.surfaces[order[i]]);
  return out;
}

absl::StatusOr<double> TermListSimilarity(const TermList& a, const TermList& b,
                                          int dim) {
  absl::StatusOr<TermEmbedding> ea = EmbedTerms(a, dim);
  if (!ea.ok()) return ea.status();
  absl::StatusOr<TermEmbedding> eb = EmbedTerms(b, dim);
  if (!eb.ok()) return eb.status();
  if (ea->degenerate || eb->degenerate) return 0.0;
  return ea->values.dot(eb->values);
}

}  // namespace dpnote
