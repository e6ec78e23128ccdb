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

#ifndef DPNOTE_EVAL_H_
#define DPNOTE_EVAL_H_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "Eigen/Core"
#include "absl/status/statusor.h"
#include "dpnote/corpus.h"
#include "dpnote/privacy.h"
#include "dpnote/terms.h"

namespace dpnote {

inline constexpr double kDefaultSmoothing = 0.5;
inline constexpr double kDefaultLengthBinWidth = 250.0;

// Counts over consecutive bins [edges[i], edges[i+1]).
struct Histogram {
  std::vector<double> edges;
  std::vector<int64_t> counts;
  // Pseudo-count added to every bin before normalizing.
  double smoothing = kDefaultSmoothing;

  int64_t total() const;
};

// KL(p || q) in nats over the smoothed, normalized bins. Both histograms
// must share their edges. +inf when q has an empty bin that p does not.
absl::StatusOr<double> KlDivergence(const Histogram& p, const Histogram& q);

// KL(p || q) over parallel count vectors with `smoothing` added to every
// element of both.
double SmoothedKl(std::span<const double> p, std::span<const double> q,
                  double smoothing);

struct LengthDistribution {
  std::vector<int64_t> lengths;  // tokens per note
  Histogram histogram;
  double mean = 0.0;
};

// Histogram of per-note token counts in bins of `bin_width` starting at 0,
// with at least `min_bins` bins.
absl::StatusOr<LengthDistribution> ComputeLengthDistribution(
    const Corpus& corpus, double bin_width = kDefaultLengthBinWidth,
    size_t min_bins = 0);

// Length histograms of two corpora over the same edges.
absl::StatusOr<std::pair<LengthDistribution, LengthDistribution>>
ComputeLengthDistributions(const Corpus& real, const Corpus& synthetic,
                           double bin_width = kDefaultLengthBinWidth);

// Unary and co-occurrence term multisets of a corpus.
struct TermStats {
  std::map<std::string, int64_t> unary;
  // Pairs of distinct terms from the same note, lexicographically ordered.
  std::map<std::pair<std::string, std::string>, int64_t> binary;
  size_t notes = 0;
};

// Unary counts every listed occurrence; each note contributes every pair of
// its distinct terms once.
TermStats BuildTermStats(std::span<const std::vector<std::string>> note_terms);
TermStats CorpusTermStats(const Corpus& corpus, const Lexicon& lexicon,
                          double threshold = kDefaultTermThreshold);

struct TermFidelity {
  double jaccard_unary = 0.0;
  double jaccard_binary = 0.0;
  double kl_unary = 0.0;
  double kl_binary = 0.0;
  // Both sides had no terms (unary) or no pairs (binary).
  bool degenerate = false;
};

// Jaccard over the distinct term sets, KL(real || synthetic) over occurrence
// frequencies restricted to the union support. Jaccard(empty, empty) = 1.
TermFidelity ComputeTermFidelity(const TermStats& real,
                                 const TermStats& synthetic,
                                 double smoothing = kDefaultSmoothing);

struct NgramFrequencyProfile {
  int n = 1;
  // frequency -> number of distinct n-grams with that frequency.
  std::map<int64_t, int64_t> frequency_of_frequency;
  // Log-binned view with edges 1, 2, 4, ...
  Histogram histogram;
  int64_t total_ngrams = 0;
  int64_t distinct_ngrams = 0;
};

absl::StatusOr<NgramFrequencyProfile> ComputeNgramFrequencyProfile(
    const Corpus& corpus, int n);

// Multi-label ground truth (0/1) and scores, samples x labels.
struct LabelScores {
  Eigen::MatrixXi truth;
  Eigen::MatrixXd scores;
};

struct ClassificationReport {
  double micro_f1 = 0.0;
  double macro_f1 = 0.0;
  // NaN when undefined (no positive or no negative cells).
  double micro_auc = 0.0;
  double macro_auc = 0.0;
  std::map<int, double> precision_at_k;
  // Labels without positives (F1) or without both classes (AUC).
  std::vector<int> skipped_f1_labels;
  std::vector<int> skipped_auc_labels;
};

// Rank-statistic AUC with midranks for ties; NaN when a class is missing.
double RankAuc(std::span<const int> truth, std::span<const double> scores);

absl::StatusOr<ClassificationReport> ClassificationMetrics(
    const LabelScores& labels, double threshold = 0.5,
    std::vector<int> ks = {1, 3, 5});

struct PairwiseComparisons {
  std::vector<std::string> items;
  // wins[i][j]: times item i beat item j.
  std::vector<std::vector<int64_t>> wins;
};

struct BradleyTerryOptions {
  double tolerance = 1e-8;
  int max_iterations = 10000;
  // Added to every off-diagonal win count.
  double pseudo = 0.1;
};

struct BradleyTerryFit {
  // Normalized to sum to 1.
  std::vector<double> strengths;
  // P[i][j] = pi_i / (pi_i + pi_j); P[i][j] + P[j][i] == 1 exactly.
  std::vector<std::vector<double>> win_prob;
  int iterations = 0;
  bool converged = false;
  // Log-likelihood after every iteration, starting with the initial guess.
  std::vector<double> log_likelihood;
};

// Maximum-likelihood strengths by minorization-maximization.
absl::StatusOr<BradleyTerryFit> FitBradleyTerry(
    const PairwiseComparisons& comparisons,
    const BradleyTerryOptions& options = {});

struct DistanceSummary {
  std::vector<double> distances;
  double mean = 0.0;
  double median = 0.0;
  // Edges 0, 0.1, ..., 2.0.
  Histogram histogram;
};

// For every synthetic row, 1 - max cosine similarity to any training row.
absl::StatusOr<DistanceSummary> MinCosineDistances(
    const EmbeddingMatrix& synthetic, const EmbeddingMatrix& training);

// EmbedText() of every non-empty note, one row each.
absl::StatusOr<EmbeddingMatrix> EmbedCorpus(const Corpus& corpus,
                                            int dim = kDefaultEmbeddingDim);

struct EvalOptions {
  double length_bin_width = kDefaultLengthBinWidth;
  double term_threshold = kDefaultTermThreshold;
  std::vector<int> ngram_orders = {1, 2, 3};
  int embedding_dim = kDefaultEmbeddingDim;
};

struct EvalReport {
  LengthDistribution real_length;
  LengthDistribution synthetic_length;
  double length_kl = 0.0;
  TermFidelity terms;
  std::vector<NgramFrequencyProfile> real_ngrams;
  std::vector<NgramFrequencyProfile> synthetic_ngrams;
  std::optional<ClassificationReport> utility;
  // Synthetic (and, as a baseline, real) notes against the training notes.
  std::optional<DistanceSummary> privacy_synthetic;
  std::optional<DistanceSummary> privacy_real;
  // Only filled when an external tool supplies the value.
  std::optional<double> mauve;
};

absl::StatusOr<EvalReport> Evaluate(const Corpus& real,
                                    const Corpus& synthetic,
                                    const Lexicon& lexicon,
                                    const EvalOptions& options,
                                    const Corpus* training = nullptr,
                                    const LabelScores* utility = nullptr);

// Single JSON document; histograms carry edges and counts.
std::string SerializeEvalReport(const EvalReport& report);

}  // namespace dpnote

#endif  // DPNOTE_EVAL_H_
