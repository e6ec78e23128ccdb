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

#include "dpnote/eval.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "dpnote/tokenizer.h"
#include "json.hpp"
#include "strings.h"

namespace dpnote {
namespace {

using ordered_json = nlohmann::ordered_json;

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr int kMaxProfileOrder = 5;
constexpr int kDistanceBins = 20;

// sum p_b ln(p_b / q_b) over already smoothed, unnormalized masses.
double KlFromMasses(std::span<const double> p, std::span<const double> q) {
  const double p_total = std::accumulate(p.begin(), p.end(), 0.0);
  const double q_total = std::accumulate(q.begin(), q.end(), 0.0);
  if (p_total <= 0.0) return 0.0;
  if (q_total <= 0.0) return kInf;
  double kl = 0.0;
  for (size_t b = 0; b < p.size(); ++b) {
    if (p[b] <= 0.0) continue;
    if (q[b] <= 0.0) return kInf;
    const double pb = p[b] / p_total;
    const double qb = q[b] / q_total;
    kl += pb * std::log(pb / qb);
  }
  // Rounding can leave tiny negatives for equal distributions.
  return std::max(kl, 0.0);
}

template <typename Key>
double SetJaccard(const std::map<Key, int64_t>& a,
                  const std::map<Key, int64_t>& b) {
  if (a.empty() && b.empty()) return 1.0;
  size_t shared = 0;
  for (const auto& [key, count] : a) shared += b.contains(key) ? 1 : 0;
  return static_cast<double>(shared) /
         static_cast<double>(a.size() + b.size() - shared);
}

template <typename Key>
double UnionKl(const std::map<Key, int64_t>& real,
               const std::map<Key, int64_t>& synthetic, double smoothing) {
  std::set<Key> support;
  for (const auto& entry : real) support.insert(entry.first);
  for (const auto& entry : synthetic) support.insert(entry.first);
  std::vector<double> p, q;
  p.reserve(support.size());
  q.reserve(support.size());
  for (const Key& key : support) {
    auto r = real.find(key);
    auto s = synthetic.find(key);
    p.push_back(r == real.end() ? 0.0 : static_cast<double>(r->second));
    q.push_back(s == synthetic.end() ? 0.0 : static_cast<double>(s->second));
  }
  return SmoothedKl(p, q, smoothing);
}

double Median(std::vector<double> values) {
  if (values.empty()) return kNaN;
  std::sort(values.begin(), values.end());
  const size_t mid = values.size() / 2;
  if (values.size() % 2 == 1) return values[mid];
  return 0.5 * (values[mid - 1] + values[mid]);
}

absl::StatusOr<Eigen::MatrixXd> UnitRows(const EmbeddingMatrix& m,
                                         std::string_view what) {
  Eigen::MatrixXd rows = m.values();
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    const double norm = rows.row(i).norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) {
      return absl::InvalidArgumentError(
          internal::StrCat(what, " row ", i, " has zero or non-finite norm"));
    }
    rows.row(i) /= norm;
  }
  return rows;
}

ordered_json HistogramJson(const Histogram& h) {
  return ordered_json{{"edges", h.edges},
                      {"counts", h.counts},
                      {"smoothing", h.smoothing}};
}

ordered_json LengthJson(const LengthDistribution& d) {
  return ordered_json{{"notes", d.lengths.size()},
                      {"mean_tokens", d.mean},
                      {"histogram", HistogramJson(d.histogram)}};
}

ordered_json ProfileJson(const NgramFrequencyProfile& p) {
  ordered_json fof = ordered_json::object();
  for (const auto& [freq, mult] : p.frequency_of_frequency) {
    fof[std::to_string(freq)] = mult;
  }
  return ordered_json{{"n", p.n},
                      {"total_ngrams", p.total_ngrams},
                      {"distinct_ngrams", p.distinct_ngrams},
                      {"frequency_of_frequency", std::move(fof)},
                      {"histogram", HistogramJson(p.histogram)}};
}

ordered_json DistanceJson(const DistanceSummary& d) {
  return ordered_json{{"count", d.distances.size()},
                      {"mean", d.mean},
                      {"median", d.median},
                      {"histogram", HistogramJson(d.histogram)}};
}

}  // namespace

int64_t Histogram::total() const {
  return std::accumulate(counts.begin(), counts.end(), int64_t{0});
}

absl::StatusOr<double> KlDivergence(const Histogram& p, const Histogram& q) {
  if (p.edges != q.edges) {
    return absl::InvalidArgumentError("histograms have different bin edges");
  }
  if (p.counts.size() != q.counts.size() ||
      p.counts.size() + 1 != p.edges.size()) {
    return absl::InvalidArgumentError("histogram counts do not match edges");
  }
  if (p.smoothing < 0.0 || q.smoothing < 0.0) {
    return absl::InvalidArgumentError("smoothing must be nonnegative");
  }
  std::vector<double> pm(p.counts.size()), qm(q.counts.size());
  for (size_t b = 0; b < pm.size(); ++b) {
    if (p.counts[b] < 0 || q.counts[b] < 0) {
      return absl::InvalidArgumentError("negative histogram count");
    }
    pm[b] = static_cast<double>(p.counts[b]) + p.smoothing;
    qm[b] = static_cast<double>(q.counts[b]) + q.smoothing;
  }
  if (std::accumulate(pm.begin(), pm.end(), 0.0) <= 0.0 ||
      std::accumulate(qm.begin(), qm.end(), 0.0) <= 0.0) {
    return absl::InvalidArgumentError("histogram has no mass");
  }
  return KlFromMasses(pm, qm);
}

double SmoothedKl(std::span<const double> p, std::span<const double> q,
                  double smoothing) {
  std::vector<double> pm(p.begin(), p.end()), qm(q.begin(), q.end());
  for (double& v : pm) v += smoothing;
  for (double& v : qm) v += smoothing;
  return KlFromMasses(pm, qm);
}

absl::StatusOr<LengthDistribution> ComputeLengthDistribution(
    const Corpus& corpus, double bin_width, size_t min_bins) {
  if (corpus.empty()) {
    return absl::InvalidArgumentError("length distribution of empty corpus");
  }
  if (!(bin_width > 0.0) || !std::isfinite(bin_width)) {
    return absl::InvalidArgumentError("bin width must be positive");
  }
  LengthDistribution dist;
  int64_t longest = 0;
  double sum = 0.0;
  for (const Note& note : corpus.notes()) {
    const auto tokens = static_cast<int64_t>(Tokenize(note.text).size());
    dist.lengths.push_back(tokens);
    longest = std::max(longest, tokens);
    sum += static_cast<double>(tokens);
  }
  dist.mean = sum / static_cast<double>(dist.lengths.size());
  const size_t bins = std::max(
      min_bins,
      static_cast<size_t>(std::floor(static_cast<double>(longest) / bin_width)) +
          1);
  for (size_t b = 0; b <= bins; ++b) {
    dist.histogram.edges.push_back(static_cast<double>(b) * bin_width);
  }
  dist.histogram.counts.assign(bins, 0);
  for (int64_t len : dist.lengths) {
    const auto b = static_cast<size_t>(
        std::floor(static_cast<double>(len) / bin_width));
    ++dist.histogram.counts[std::min(b, bins - 1)];
  }
  return dist;
}

absl::StatusOr<std::pair<LengthDistribution, LengthDistribution>>
ComputeLengthDistributions(const Corpus& real, const Corpus& synthetic,
                           double bin_width) {
  absl::StatusOr<LengthDistribution> r =
      ComputeLengthDistribution(real, bin_width);
  if (!r.ok()) return r.status();
  absl::StatusOr<LengthDistribution> s =
      ComputeLengthDistribution(synthetic, bin_width);
  if (!s.ok()) return s.status();
  const size_t bins =
      std::max(r->histogram.counts.size(), s->histogram.counts.size());
  r = ComputeLengthDistribution(real, bin_width, bins);
  s = ComputeLengthDistribution(synthetic, bin_width, bins);
  return std::make_pair(*std::move(r), *std::move(s));
}

TermStats BuildTermStats(std::span<const std::vector<std::string>> note_terms) {
  TermStats stats;
  stats.notes = note_terms.size();
  for (const std::vector<std::string>& terms : note_terms) {
    for (const std::string& term : terms) ++stats.unary[term];
    std::set<std::string> distinct(terms.begin(), terms.end());
    for (auto a = distinct.begin(); a != distinct.end(); ++a) {
      for (auto b = std::next(a); b != distinct.end(); ++b) {
        ++stats.binary[{*a, *b}];
      }
    }
  }
  return stats;
}

TermStats CorpusTermStats(const Corpus& corpus, const Lexicon& lexicon,
                          double threshold) {
  std::vector<std::vector<std::string>> note_terms;
  note_terms.reserve(corpus.size());
  for (const Note& note : corpus.notes()) {
    std::vector<std::string>& terms = note_terms.emplace_back();
    for (const TermMatch& match : MatchTerms(note.text, lexicon, threshold)) {
      terms.push_back(match.surface);
    }
  }
  return BuildTermStats(note_terms);
}

TermFidelity ComputeTermFidelity(const TermStats& real,
                                 const TermStats& synthetic,
                                 double smoothing) {
  TermFidelity fidelity;
  fidelity.jaccard_unary = SetJaccard(real.unary, synthetic.unary);
  fidelity.jaccard_binary = SetJaccard(real.binary, synthetic.binary);
  fidelity.kl_unary = UnionKl(real.unary, synthetic.unary, smoothing);
  fidelity.kl_binary = UnionKl(real.binary, synthetic.binary, smoothing);
  fidelity.degenerate = (real.unary.empty() && synthetic.unary.empty()) ||
                        (real.binary.empty() && synthetic.binary.empty());
  return fidelity;
}

absl::StatusOr<NgramFrequencyProfile> ComputeNgramFrequencyProfile(
    const Corpus& corpus, int n) {
  if (corpus.empty()) {
    return absl::InvalidArgumentError("n-gram profile of empty corpus");
  }
  if (n < 1 || n > kMaxProfileOrder) {
    return absl::InvalidArgumentError(
        internal::StrCat("n-gram order must lie in [1, ", kMaxProfileOrder, "]"));
  }
  std::map<std::string, int64_t> counts;
  NgramFrequencyProfile profile;
  profile.n = n;
  for (const Note& note : corpus.notes()) {
    const std::vector<std::string> tokens = Tokenize(note.text);
    const auto width = static_cast<size_t>(n);
    for (size_t i = 0; i + width <= tokens.size(); ++i) {
      // Tokens never contain spaces.
      ++counts[absl::StrJoin(tokens.begin() + i, tokens.begin() + i + width,
                             " ")];
      ++profile.total_ngrams;
    }
  }
  profile.distinct_ngrams = static_cast<int64_t>(counts.size());
  int64_t max_freq = 0;
  for (const auto& [gram, freq] : counts) {
    ++profile.frequency_of_frequency[freq];
    max_freq = std::max(max_freq, freq);
  }
  profile.histogram.edges.push_back(1.0);
  for (int64_t edge = 1; edge <= max_freq; edge *= 2) {
    profile.histogram.edges.push_back(static_cast<double>(edge * 2));
    profile.histogram.counts.push_back(0);
  }
  for (const auto& [freq, mult] : profile.frequency_of_frequency) {
    const int bin = std::bit_width(static_cast<uint64_t>(freq)) - 1;
    profile.histogram.counts[static_cast<size_t>(bin)] += mult;
  }
  return profile;
}

double RankAuc(std::span<const int> truth, std::span<const double> scores) {
  const size_t n = truth.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return scores[a] < scores[b]; });
  double positive_rank_sum = 0.0;
  double positives = 0.0;
  for (size_t i = 0; i < n;) {
    size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    // 1-based ranks i+1 .. j share their mean.
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);
    for (size_t t = i; t < j; ++t) {
      if (truth[order[t]] != 0) {
        positive_rank_sum += midrank;
        positives += 1.0;
      }
    }
    i = j;
  }
  const double negatives = static_cast<double>(n) - positives;
  if (positives == 0.0 || negatives == 0.0) return kNaN;
  return (positive_rank_sum - positives * (positives + 1.0) / 2.0) /
         (positives * negatives);
}

absl::StatusOr<ClassificationReport> ClassificationMetrics(
    const LabelScores& labels, double threshold, std::vector<int> ks) {
  const Eigen::Index n = labels.truth.rows();
  const Eigen::Index num_labels = labels.truth.cols();
  if (labels.scores.rows() != n || labels.scores.cols() != num_labels) {
    return absl::InvalidArgumentError("truth and score shapes differ");
  }
  if (n == 0 || num_labels == 0) {
    return absl::InvalidArgumentError("no samples or no labels");
  }
  if (!(threshold > 0.0 && threshold < 1.0)) {
    return absl::InvalidArgumentError("threshold must lie in (0, 1)");
  }
  for (int k : ks) {
    if (k < 1 || k > num_labels) {
      return absl::InvalidArgumentError(
          internal::StrCat("precision@", k, " needs 1 <= k <= ", num_labels));
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index l = 0; l < num_labels; ++l) {
      const int t = labels.truth(i, l);
      if (t != 0 && t != 1) {
        return absl::InvalidArgumentError("truth entries must be 0 or 1");
      }
      if (!std::isfinite(labels.scores(i, l))) {
        return absl::InvalidArgumentError("scores must be finite");
      }
    }
  }

  ClassificationReport report;
  int64_t tp = 0, fp = 0, fn = 0;
  double macro_f1_sum = 0.0;
  int macro_f1_labels = 0;
  double macro_auc_sum = 0.0;
  int macro_auc_labels = 0;
  std::vector<int> column_truth(static_cast<size_t>(n));
  std::vector<double> column_scores(static_cast<size_t>(n));
  for (Eigen::Index l = 0; l < num_labels; ++l) {
    int64_t ltp = 0, lfp = 0, lfn = 0, positives = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const bool truth = labels.truth(i, l) == 1;
      const bool predicted = labels.scores(i, l) >= threshold;
      ltp += truth && predicted;
      lfp += !truth && predicted;
      lfn += truth && !predicted;
      positives += truth;
      column_truth[static_cast<size_t>(i)] = labels.truth(i, l);
      column_scores[static_cast<size_t>(i)] = labels.scores(i, l);
    }
    tp += ltp;
    fp += lfp;
    fn += lfn;
    if (positives == 0) {
      report.skipped_f1_labels.push_back(static_cast<int>(l));
    } else {
      macro_f1_sum += 2.0 * static_cast<double>(ltp) /
                      static_cast<double>(2 * ltp + lfp + lfn);
      ++macro_f1_labels;
    }
    const double auc = RankAuc(column_truth, column_scores);
    if (std::isnan(auc)) {
      report.skipped_auc_labels.push_back(static_cast<int>(l));
    } else {
      macro_auc_sum += auc;
      ++macro_auc_labels;
    }
  }
  const int64_t denom = 2 * tp + fp + fn;
  report.micro_f1 =
      denom == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
  report.macro_f1 = macro_f1_labels == 0 ? kNaN : macro_f1_sum / macro_f1_labels;
  report.macro_auc =
      macro_auc_labels == 0 ? kNaN : macro_auc_sum / macro_auc_labels;

  std::vector<int> flat_truth;
  std::vector<double> flat_scores;
  flat_truth.reserve(static_cast<size_t>(n * num_labels));
  flat_scores.reserve(static_cast<size_t>(n * num_labels));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index l = 0; l < num_labels; ++l) {
      flat_truth.push_back(labels.truth(i, l));
      flat_scores.push_back(labels.scores(i, l));
    }
  }
  report.micro_auc = RankAuc(flat_truth, flat_scores);

  std::vector<int> ranked(static_cast<size_t>(num_labels));
  for (int k : ks) {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      std::iota(ranked.begin(), ranked.end(), 0);
      std::stable_sort(ranked.begin(), ranked.end(), [&](int a, int b) {
        return labels.scores(i, a) > labels.scores(i, b);
      });
      int hits = 0;
      for (int r = 0; r < k; ++r) hits += labels.truth(i, ranked[r]);
      sum += static_cast<double>(hits) / k;
    }
    report.precision_at_k[k] = sum / static_cast<double>(n);
  }
  return report;
}

absl::StatusOr<BradleyTerryFit> FitBradleyTerry(
    const PairwiseComparisons& comparisons, const BradleyTerryOptions& options) {
  const size_t m = comparisons.items.size();
  if (m == 0) return absl::InvalidArgumentError("no items to rank");
  if (comparisons.wins.size() != m) {
    return absl::InvalidArgumentError("win matrix must be items x items");
  }
  for (size_t i = 0; i < m; ++i) {
    if (comparisons.wins[i].size() != m) {
      return absl::InvalidArgumentError("win matrix must be items x items");
    }
    if (comparisons.wins[i][i] != 0) {
      return absl::InvalidArgumentError("an item cannot beat itself");
    }
    for (int64_t w : comparisons.wins[i]) {
      if (w < 0) return absl::InvalidArgumentError("negative win count");
    }
  }
  if (!(options.pseudo >= 0.0) || !(options.tolerance > 0.0) ||
      options.max_iterations < 1) {
    return absl::InvalidArgumentError("invalid Bradley-Terry options");
  }

  std::vector<std::vector<double>> w(m, std::vector<double>(m, 0.0));
  for (size_t i = 0; i < m; ++i) {
    for (size_t j = 0; j < m; ++j) {
      if (i != j) {
        w[i][j] = static_cast<double>(comparisons.wins[i][j]) + options.pseudo;
      }
    }
  }

  // Connectivity over pairs that were compared at least once.
  std::vector<bool> reached(m, false);
  std::vector<size_t> stack = {0};
  reached[0] = true;
  while (!stack.empty()) {
    const size_t i = stack.back();
    stack.pop_back();
    for (size_t j = 0; j < m; ++j) {
      if (!reached[j] && w[i][j] + w[j][i] > 0.0) {
        reached[j] = true;
        stack.push_back(j);
      }
    }
  }
  if (std::find(reached.begin(), reached.end(), false) != reached.end()) {
    return absl::FailedPreconditionError("comparison graph is disconnected");
  }

  auto log_likelihood = [&](const std::vector<double>& pi) {
    double ll = 0.0;
    for (size_t i = 0; i < m; ++i) {
      for (size_t j = 0; j < m; ++j) {
        if (i == j || w[i][j] == 0.0) continue;
        ll += w[i][j] * (std::log(pi[i]) - std::log(pi[i] + pi[j]));
      }
    }
    return ll;
  };

  BradleyTerryFit fit;
  std::vector<double> pi(m, 1.0 / static_cast<double>(m));
  std::vector<double> wins_total(m, 0.0);
  for (size_t i = 0; i < m; ++i) {
    wins_total[i] = std::accumulate(w[i].begin(), w[i].end(), 0.0);
  }
  fit.log_likelihood.push_back(log_likelihood(pi));
  std::vector<double> next(m);
  for (int iter = 1; iter <= options.max_iterations && m > 1; ++iter) {
    for (size_t i = 0; i < m; ++i) {
      double denom = 0.0;
      for (size_t j = 0; j < m; ++j) {
        if (j == i) continue;
        const double pair_total = w[i][j] + w[j][i];
        if (pair_total > 0.0) denom += pair_total / (pi[i] + pi[j]);
      }
      next[i] = denom > 0.0 ? wins_total[i] / denom : pi[i];
    }
    const double total = std::accumulate(next.begin(), next.end(), 0.0);
    double change = 0.0;
    for (size_t i = 0; i < m; ++i) {
      next[i] /= total;
      change = std::max(change, std::abs(next[i] - pi[i]));
    }
    pi.swap(next);
    fit.iterations = iter;
    fit.log_likelihood.push_back(log_likelihood(pi));
    if (change < options.tolerance) {
      fit.converged = true;
      break;
    }
  }
  if (m == 1) fit.converged = true;

  fit.strengths = pi;
  fit.win_prob.assign(m, std::vector<double>(m, 0.5));
  for (size_t i = 0; i < m; ++i) {
    for (size_t j = i + 1; j < m; ++j) {
      const double sum = pi[i] + pi[j];
      if (sum == 0.0) continue;
      // 1 - p is exact for p >= 0.5, so the pair sums to exactly 1.
      if (pi[i] >= pi[j]) {
        fit.win_prob[i][j] = pi[i] / sum;
        fit.win_prob[j][i] = 1.0 - fit.win_prob[i][j];
      } else {
        fit.win_prob[j][i] = pi[j] / sum;
        fit.win_prob[i][j] = 1.0 - fit.win_prob[j][i];
      }
    }
  }
  return fit;
}

absl::StatusOr<DistanceSummary> MinCosineDistances(
    const EmbeddingMatrix& synthetic, const EmbeddingMatrix& training) {
  if (synthetic.rows() == 0 || training.rows() == 0) {
    return absl::InvalidArgumentError("distance probe needs nonempty inputs");
  }
  if (synthetic.dim() != training.dim()) {
    return absl::InvalidArgumentError("embedding dimensions differ");
  }
  absl::StatusOr<Eigen::MatrixXd> s = UnitRows(synthetic, "synthetic");
  if (!s.ok()) return s.status();
  absl::StatusOr<Eigen::MatrixXd> t = UnitRows(training, "training");
  if (!t.ok()) return t.status();
  const Eigen::MatrixXd cosines = (*s) * t->transpose();

  DistanceSummary summary;
  summary.histogram.smoothing = 0.0;
  for (int b = 0; b <= kDistanceBins; ++b) {
    summary.histogram.edges.push_back(2.0 * b / kDistanceBins);
  }
  summary.histogram.counts.assign(kDistanceBins, 0);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < cosines.rows(); ++i) {
    const double d = std::clamp(1.0 - cosines.row(i).maxCoeff(), 0.0, 2.0);
    summary.distances.push_back(d);
    sum += d;
    const int bin = std::min(kDistanceBins - 1,
                             static_cast<int>(d / 2.0 * kDistanceBins));
    ++summary.histogram.counts[static_cast<size_t>(bin)];
  }
  summary.mean = sum / static_cast<double>(summary.distances.size());
  summary.median = Median(summary.distances);
  return summary;
}

absl::StatusOr<EmbeddingMatrix> EmbedCorpus(const Corpus& corpus, int dim) {
  std::vector<Eigen::VectorXd> rows;
  for (const Note& note : corpus.notes()) {
    absl::StatusOr<TermEmbedding> e = EmbedText(note.text, dim);
    if (!e.ok()) return e.status();
    if (!e->degenerate) rows.push_back(std::move(e->values));
  }
  if (rows.empty()) {
    return absl::InvalidArgumentError("no note produced an embedding");
  }
  EmbeddingMatrix matrix(static_cast<Eigen::Index>(rows.size()), dim);
  for (size_t i = 0; i < rows.size(); ++i) {
    matrix.mutable_values().row(static_cast<Eigen::Index>(i)) =
        rows[i].transpose();
  }
  return matrix;
}

absl::StatusOr<EvalReport> Evaluate(const Corpus& real,
                                    const Corpus& synthetic,
                                    const Lexicon& lexicon,
                                    const EvalOptions& options,
                                    const Corpus* training,
                                    const LabelScores* utility) {
  EvalReport report;
  auto lengths =
      ComputeLengthDistributions(real, synthetic, options.length_bin_width);
  if (!lengths.ok()) return lengths.status();
  report.real_length = std::move(lengths->first);
  report.synthetic_length = std::move(lengths->second);
  absl::StatusOr<double> kl = KlDivergence(report.real_length.histogram,
                                           report.synthetic_length.histogram);
  if (!kl.ok()) return kl.status();
  report.length_kl = *kl;

  report.terms = ComputeTermFidelity(
      CorpusTermStats(real, lexicon, options.term_threshold),
      CorpusTermStats(synthetic, lexicon, options.term_threshold));

  for (int n : options.ngram_orders) {
    auto r = ComputeNgramFrequencyProfile(real, n);
    if (!r.ok()) return r.status();
    auto s = ComputeNgramFrequencyProfile(synthetic, n);
    if (!s.ok()) return s.status();
    report.real_ngrams.push_back(*std::move(r));
    report.synthetic_ngrams.push_back(*std::move(s));
  }

  if (utility != nullptr) {
    auto metrics = ClassificationMetrics(*utility);
    if (!metrics.ok()) return metrics.status();
    report.utility = *std::move(metrics);
  }

  if (training != nullptr) {
    auto train = EmbedCorpus(*training, options.embedding_dim);
    if (!train.ok()) return train.status();
    auto synth = EmbedCorpus(synthetic, options.embedding_dim);
    if (!synth.ok()) return synth.status();
    auto distances = MinCosineDistances(*synth, *train);
    if (!distances.ok()) return distances.status();
    report.privacy_synthetic = *std::move(distances);
    auto real_rows = EmbedCorpus(real, options.embedding_dim);
    if (!real_rows.ok()) return real_rows.status();
    distances = MinCosineDistances(*real_rows, *train);
    if (!distances.ok()) return distances.status();
    report.privacy_real = *std::move(distances);
  }
  return report;
}

std::string SerializeEvalReport(const EvalReport& report) {
  ordered_json doc;
  doc["length"] = ordered_json{{"real", LengthJson(report.real_length)},
                               {"synthetic", LengthJson(report.synthetic_length)},
                               {"kl", report.length_kl}};
  doc["terms"] = ordered_json{{"jaccard_unary", report.terms.jaccard_unary},
                              {"jaccard_binary", report.terms.jaccard_binary},
                              {"kl_unary", report.terms.kl_unary},
                              {"kl_binary", report.terms.kl_binary},
                              {"degenerate", report.terms.degenerate}};
  ordered_json ngrams = ordered_json::array();
  for (size_t i = 0; i < report.real_ngrams.size(); ++i) {
    ngrams.push_back(ordered_json{
        {"n", report.real_ngrams[i].n},
        {"real", ProfileJson(report.real_ngrams[i])},
        {"synthetic", ProfileJson(report.synthetic_ngrams[i])}});
  }
  doc["ngram_profiles"] = std::move(ngrams);
  if (report.utility.has_value()) {
    const ClassificationReport& u = *report.utility;
    ordered_json pak = ordered_json::object();
    for (const auto& [k, v] : u.precision_at_k) pak[std::to_string(k)] = v;
    doc["utility"] = ordered_json{{"micro_f1", u.micro_f1},
                                  {"macro_f1", u.macro_f1},
                                  {"micro_auc", u.micro_auc},
                                  {"macro_auc", u.macro_auc},
                                  {"precision_at_k", std::move(pak)},
                                  {"skipped_f1_labels", u.skipped_f1_labels},
                                  {"skipped_auc_labels", u.skipped_auc_labels}};
  } else {
    doc["utility"] = nullptr;
  }
  if (report.privacy_synthetic.has_value()) {
    doc["privacy_probe"] =
        ordered_json{{"synthetic", DistanceJson(*report.privacy_synthetic)},
                     {"real", report.privacy_real.has_value()
                                  ? DistanceJson(*report.privacy_real)
                                  : ordered_json(nullptr)}};
  } else {
    doc["privacy_probe"] = nullptr;
  }
  doc["mauve"] = report.mauve.has_value() ? ordered_json(*report.mauve)
                                          : ordered_json(nullptr);
  return doc.dump(2) + "\n";
}

}  // namespace dpnote
