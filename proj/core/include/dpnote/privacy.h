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

#ifndef DPNOTE_PRIVACY_H_
#define DPNOTE_PRIVACY_H_

#include <cstdint>
#include <istream>
#include <limits>
#include <mutex>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "Eigen/Core"
#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "dpnote/corpus.h"
#include "dpnote/rng.h"

namespace dpnote {

inline constexpr double kInfiniteEpsilon =
    std::numeric_limits<double>::infinity();

// An (epsilon, delta) pair. Epsilon = +inf means "no differential privacy":
// every mechanism calibrated from such a budget adds zero noise.
struct PrivacyBudget {
  double epsilon = 0.0;
  double delta = 0.0;

  static absl::StatusOr<PrivacyBudget> Create(double epsilon, double delta);

  bool disabled() const { return epsilon == kInfiniteEpsilon; }

  friend bool operator==(const PrivacyBudget&, const PrivacyBudget&) = default;
};

std::ostream& operator<<(std::ostream& os, const PrivacyBudget& budget);

struct NoiseScale {
  double sigma = 0.0;
  // The L2 sensitivity the scale was calibrated for.
  double sensitivity = 0.0;
};

// Classical Gaussian mechanism: sigma = sensitivity * sqrt(2 ln(1.25/delta)) /
// epsilon. The textbook guarantee only covers epsilon <= 1; larger budgets use
// the same formula and are flagged by RegimeCaveats().
absl::StatusOr<NoiseScale> GaussianSigma(const PrivacyBudget& budget,
                                         double sensitivity);

// (b * budget, (1 - b) * budget).
absl::StatusOr<std::pair<PrivacyBudget, PrivacyBudget>> SplitBudget(
    const PrivacyBudget& budget, double fraction);

// budget / sections, the per-section share of a per-note budget.
absl::StatusOr<PrivacyBudget> PerSectionBudget(const PrivacyBudget& budget,
                                               int sections);

// Row-major n x d matrix of embeddings, one row per item.
class EmbeddingMatrix {
 public:
  using Storage =
      Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  EmbeddingMatrix() = default;
  EmbeddingMatrix(Eigen::Index rows, Eigen::Index dim)
      : values_(Storage::Zero(rows, dim)) {}
  explicit EmbeddingMatrix(Storage values) : values_(std::move(values)) {}

  Eigen::Index rows() const { return values_.rows(); }
  Eigen::Index dim() const { return values_.cols(); }
  const Storage& values() const { return values_; }
  Storage& mutable_values() { return values_; }

  double MaxRowNorm() const;

 private:
  Storage values_;
};

// Scales every row whose L2 norm exceeds `bound` down to norm `bound`.
absl::StatusOr<EmbeddingMatrix> ClipRows(const EmbeddingMatrix& embeddings,
                                         double bound);

// "DPEM" binary interchange: magic, u32 rows, u32 dim, then rows*dim
// little-endian f64 in row-major order.
absl::Status WriteEmbeddingMatrix(const EmbeddingMatrix& embeddings,
                                  std::ostream& out);
absl::StatusOr<EmbeddingMatrix> ReadEmbeddingMatrix(std::istream& in);
absl::Status SaveEmbeddingMatrix(const EmbeddingMatrix& embeddings,
                                 const std::string& path);
absl::StatusOr<EmbeddingMatrix> LoadEmbeddingMatrix(const std::string& path);

// Moore-Penrose pseudoinverse via SVD. Singular values below
// relative_cutoff * sigma_max are treated as zero.
Eigen::MatrixXd PseudoInverse(const Eigen::MatrixXd& m,
                              double relative_cutoff = 1e-10);

struct DprpOptions {
  // Fraction of the embedding dimension kept by the projection.
  double rank_fraction = 0.6;
  // Share of the budget spent on the embedding noise; the rest goes to the
  // covariance noise.
  double allocation = 0.85;
  double pinv_cutoff = 1e-10;
};

struct DprpResult {
  EmbeddingMatrix privatized;
  // The embeddings after the additive noise step, before projection.
  EmbeddingMatrix noisy;
  // d x k, top-k right singular vectors of the noised covariance.
  Eigen::MatrixXd basis;
  NoiseScale embedding_noise;
  NoiseScale covariance_noise;
};

// ceil(rank_fraction * dim), clamped to [1, dim].
int ProjectionRank(int dim, double rank_fraction);

// Projects rows onto span(basis): rows * pinv(basis^T) * basis^T.
EmbeddingMatrix ProjectRows(const EmbeddingMatrix& rows,
                            const Eigen::MatrixXd& basis,
                            double pinv_cutoff = 1e-10);

// Embedding perturbation with a noisy random projection:
//   1. split the budget by `allocation`, calibrate sigma_1, sigma_2 with unit
//      sensitivity (rows must already be clipped to unit norm);
//   2. E' = E + N(0, sigma_1^2) elementwise;
//   3. C' = E^T E + S, S symmetric with N(0, sigma_2^2) entries;
//   4. V' = right singular vectors of C', keep the top k;
//   5. return E' * pinv(V'_k^T) * V'_k^T.
absl::StatusOr<DprpResult> DprpPerturb(const EmbeddingMatrix& embeddings,
                                       const PrivacyBudget& budget,
                                       const DprpOptions& options, Rng& rng);

// A slice of a corpus that a mechanism reads. An empty key covers the whole
// role; two partitions overlap when the roles match and either key is empty
// or the keys are equal.
struct DataPartition {
  CorpusRole role = CorpusRole::kPrivateTrain;
  std::string key;

  bool Overlaps(const DataPartition& other) const;
};

struct LedgerEntry {
  std::string mechanism;
  PrivacyBudget budget;
  DataPartition partition;
  // Post-processing of an already private output carries no cost.
  bool post_processing = false;
};

// Append-only record of every mechanism a run applied. Safe to append from
// concurrent workers.
class AccountantLedger {
 public:
  AccountantLedger() = default;
  AccountantLedger(const AccountantLedger&) = delete;
  AccountantLedger& operator=(const AccountantLedger&) = delete;

  // Rejects cost-bearing entries against public data.
  absl::Status Record(LedgerEntry entry);
  absl::Status RecordPostProcessing(std::string mechanism,
                                    DataPartition partition);

  std::vector<LedgerEntry> entries() const;
  size_t size() const;

 private:
  mutable std::mutex mu_;
  std::vector<LedgerEntry> entries_;
};

// Parallel composition over disjoint partitions: the componentwise max of
// all cost-bearing entries. Two cost-bearing entries on overlapping
// partitions would need sequential composition and are rejected. An empty
// ledger composes to (0, 0).
absl::StatusOr<PrivacyBudget> Compose(std::span<const LedgerEntry> entries);
absl::StatusOr<PrivacyBudget> Compose(const AccountantLedger& ledger);

// Human-readable notes on entries whose guarantee relies on the Gaussian
// formula outside its textbook range (epsilon > 1).
std::vector<std::string> RegimeCaveats(std::span<const LedgerEntry> entries);

}  // namespace dpnote

#endif  // DPNOTE_PRIVACY_H_
