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

#include "dpnote/privacy.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>

#include "Eigen/SVD"
#include "absl/strings/str_cat.h"
#include "strings.h"

namespace dpnote {
namespace {

// Dimension above which the divide-and-conquer SVD is used.
constexpr Eigen::Index kBdcSvdThreshold = 32;

// Rows are clipped to unit norm before DPRP; allow for rounding.
constexpr double kClipSlack = 1e-9;

constexpr char kDpemMagic[4] = {'D', 'P', 'E', 'M'};

template <typename Svd>
Eigen::MatrixXd PseudoInverseFrom(const Svd& svd, double relative_cutoff) {
  const Eigen::VectorXd& s = svd.singularValues();
  const double cutoff = s.size() > 0 ? relative_cutoff * s(0) : 0.0;
  Eigen::VectorXd inv(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    inv(i) = s(i) > cutoff && s(i) > 0.0 ? 1.0 / s(i) : 0.0;
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

void PutU32(std::ostream& out, uint32_t v) {
  char bytes[4];
  for (int i = 0; i < 4; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(bytes, 4);
}

bool GetU32(std::istream& in, uint32_t& v) {
  unsigned char bytes[4];
  if (!in.read(reinterpret_cast<char*>(bytes), 4)) return false;
  v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(bytes[i]) << (8 * i);
  return true;
}

}  // namespace

absl::StatusOr<PrivacyBudget> PrivacyBudget::Create(double epsilon,
                                                    double delta) {
  if (std::isnan(epsilon) || epsilon < 0.0) {
    return absl::InvalidArgumentError(
        internal::StrCat("epsilon must be >= 0 or +inf, got ", epsilon));
  }
  if (std::isnan(delta) || delta < 0.0 || delta >= 1.0) {
    return absl::InvalidArgumentError(
        internal::StrCat("delta must lie in [0, 1), got ", delta));
  }
  return PrivacyBudget{epsilon, delta};
}

std::ostream& operator<<(std::ostream& os, const PrivacyBudget& budget) {
  return os << "(eps=" << budget.epsilon << ", delta=" << budget.delta << ")";
}

absl::StatusOr<NoiseScale> GaussianSigma(const PrivacyBudget& budget,
                                         double sensitivity) {
  if (!(sensitivity > 0.0) || !std::isfinite(sensitivity)) {
    return absl::InvalidArgumentError(
        internal::StrCat("sensitivity must be positive, got ", sensitivity));
  }
  if (budget.disabled()) return NoiseScale{0.0, sensitivity};
  if (!(budget.epsilon > 0.0)) {
    return absl::InvalidArgumentError("Gaussian mechanism needs epsilon > 0");
  }
  if (!(budget.delta > 0.0) || budget.delta >= 1.0) {
    return absl::InvalidArgumentError(internal::StrCat(
        "Gaussian mechanism needs 0 < delta < 1, got ", budget.delta));
  }
  const double sigma = sensitivity *
                       std::sqrt(2.0 * std::log(1.25 / budget.delta)) /
                       budget.epsilon;
  return NoiseScale{sigma, sensitivity};
}

absl::StatusOr<std::pair<PrivacyBudget, PrivacyBudget>> SplitBudget(
    const PrivacyBudget& budget, double fraction) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    return absl::InvalidArgumentError(
        internal::StrCat("allocation must lie in (0, 1), got ", fraction));
  }
  PrivacyBudget first{fraction * budget.epsilon, fraction * budget.delta};
  PrivacyBudget second{
      budget.disabled() ? kInfiniteEpsilon : budget.epsilon - first.epsilon,
      budget.delta - first.delta};
  return std::make_pair(first, second);
}

absl::StatusOr<PrivacyBudget> PerSectionBudget(const PrivacyBudget& budget,
                                               int sections) {
  if (sections < 1) {
    return absl::InvalidArgumentError(
        internal::StrCat("section count must be >= 1, got ", sections));
  }
  return PrivacyBudget{budget.epsilon / sections, budget.delta / sections};
}

double EmbeddingMatrix::MaxRowNorm() const {
  if (values_.rows() == 0) return 0.0;
  return values_.rowwise().norm().maxCoeff();
}

absl::StatusOr<EmbeddingMatrix> ClipRows(const EmbeddingMatrix& embeddings,
                                         double bound) {
  if (!(bound > 0.0)) {
    return absl::InvalidArgumentError(
        internal::StrCat("clip bound must be positive, got ", bound));
  }
  EmbeddingMatrix clipped = embeddings;
  auto& values = clipped.mutable_values();
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    const double norm = values.row(r).norm();
    if (norm > bound) values.row(r) *= bound / norm;
  }
  return clipped;
}

absl::Status WriteEmbeddingMatrix(const EmbeddingMatrix& embeddings,
                                  std::ostream& out) {
  if (embeddings.rows() > UINT32_MAX || embeddings.dim() > UINT32_MAX) {
    return absl::OutOfRangeError("matrix too large for DPEM");
  }
  out.write(kDpemMagic, 4);
  PutU32(out, static_cast<uint32_t>(embeddings.rows()));
  PutU32(out, static_cast<uint32_t>(embeddings.dim()));
  const auto& values = embeddings.values();
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    for (Eigen::Index c = 0; c < values.cols(); ++c) {
      const uint64_t bits = std::bit_cast<uint64_t>(values(r, c));
      char bytes[8];
      for (int i = 0; i < 8; ++i) {
        bytes[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
      }
      out.write(bytes, 8);
    }
  }
  if (!out) return absl::DataLossError("failed writing DPEM stream");
  return absl::OkStatus();
}

absl::StatusOr<EmbeddingMatrix> ReadEmbeddingMatrix(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || !std::equal(magic, magic + 4, kDpemMagic)) {
    return absl::InvalidArgumentError("not a DPEM stream (bad magic)");
  }
  uint32_t rows = 0, dim = 0;
  if (!GetU32(in, rows) || !GetU32(in, dim)) {
    return absl::InvalidArgumentError("truncated DPEM header");
  }
  EmbeddingMatrix embeddings(rows, dim);
  auto& values = embeddings.mutable_values();
  for (uint32_t r = 0; r < rows; ++r) {
    for (uint32_t c = 0; c < dim; ++c) {
      unsigned char bytes[8];
      if (!in.read(reinterpret_cast<char*>(bytes), 8)) {
        return absl::InvalidArgumentError(
            internal::StrCat("truncated DPEM payload at row ", r));
      }
      uint64_t bits = 0;
      for (int i = 0; i < 8; ++i) bits |= static_cast<uint64_t>(bytes[i]) << (8 * i);
      values(r, c) = std::bit_cast<double>(bits);
      if (!std::isfinite(values(r, c))) {
        return absl::InvalidArgumentError("DPEM entries must be finite");
      }
    }
  }
  return embeddings;
}

absl::Status SaveEmbeddingMatrix(const EmbeddingMatrix& embeddings,
                                 const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) return absl::UnavailableError(internal::StrCat("cannot write ", path));
  return WriteEmbeddingMatrix(embeddings, out);
}

absl::StatusOr<EmbeddingMatrix> LoadEmbeddingMatrix(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return absl::NotFoundError(internal::StrCat("cannot open ", path));
  return ReadEmbeddingMatrix(in);
}

Eigen::MatrixXd PseudoInverse(const Eigen::MatrixXd& m,
                              double relative_cutoff) {
  if (m.size() == 0) return Eigen::MatrixXd(m.cols(), m.rows());
  if (std::max(m.rows(), m.cols()) > kBdcSvdThreshold) {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(m,
                                       Eigen::ComputeThinU | Eigen::ComputeThinV);
    return PseudoInverseFrom(svd, relative_cutoff);
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(
      m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return PseudoInverseFrom(svd, relative_cutoff);
}

int ProjectionRank(int dim, double rank_fraction) {
  // The slack keeps products such as 0.6 * 10 from rounding up past 6.
  const int k = static_cast<int>(std::ceil(rank_fraction * dim - 1e-9));
  return std::clamp(k, 1, std::max(dim, 1));
}

EmbeddingMatrix ProjectRows(const EmbeddingMatrix& rows,
                            const Eigen::MatrixXd& basis, double pinv_cutoff) {
  const Eigen::MatrixXd basis_t = basis.transpose();
  const Eigen::MatrixXd projector =
      PseudoInverse(basis_t, pinv_cutoff) * basis_t;
  return EmbeddingMatrix(rows.values() * projector);
}

absl::StatusOr<DprpResult> DprpPerturb(const EmbeddingMatrix& embeddings,
                                       const PrivacyBudget& budget,
                                       const DprpOptions& options, Rng& rng) {
  const Eigen::Index n = embeddings.rows();
  const Eigen::Index d = embeddings.dim();
  if (d == 0) return absl::InvalidArgumentError("embedding dimension is 0");
  if (n == 0) return absl::InvalidArgumentError("no embedding rows");
  if (!(options.rank_fraction > 0.0 && options.rank_fraction <= 1.0)) {
    return absl::InvalidArgumentError(internal::StrCat(
        "rank_fraction must lie in (0, 1], got ", options.rank_fraction));
  }
  if (const double norm = embeddings.MaxRowNorm(); norm > 1.0 + kClipSlack) {
    return absl::FailedPreconditionError(internal::StrCat(
        "embedding rows must be clipped to unit norm (max row norm ", norm,
        ")"));
  }

  absl::StatusOr<std::pair<PrivacyBudget, PrivacyBudget>> parts =
      SplitBudget(budget, options.allocation);
  if (!parts.ok()) return parts.status();
  // Unit-norm rows bound the L2 sensitivity of E and the Frobenius
  // sensitivity of E^T E by 1.
  absl::StatusOr<NoiseScale> embedding_noise = GaussianSigma(parts->first, 1.0);
  if (!embedding_noise.ok()) return embedding_noise.status();
  absl::StatusOr<NoiseScale> covariance_noise =
      GaussianSigma(parts->second, 1.0);
  if (!covariance_noise.ok()) return covariance_noise.status();

  DprpResult result;
  result.embedding_noise = *embedding_noise;
  result.covariance_noise = *covariance_noise;

  EmbeddingMatrix::Storage noisy = embeddings.values();
  if (embedding_noise->sigma > 0.0) {
    for (Eigen::Index r = 0; r < n; ++r) {
      for (Eigen::Index c = 0; c < d; ++c) {
        noisy(r, c) += rng.Gaussian(embedding_noise->sigma);
      }
    }
  }
  result.noisy = EmbeddingMatrix(std::move(noisy));

  Eigen::MatrixXd covariance =
      embeddings.values().transpose() * embeddings.values();
  if (covariance_noise->sigma > 0.0) {
    for (Eigen::Index i = 0; i < d; ++i) {
      for (Eigen::Index j = i; j < d; ++j) {
        const double z = rng.Gaussian(covariance_noise->sigma);
        covariance(i, j) += z;
        if (j != i) covariance(j, i) += z;
      }
    }
  }

  const int k = ProjectionRank(static_cast<int>(d), options.rank_fraction);
  Eigen::MatrixXd right_vectors;
  if (d > kBdcSvdThreshold) {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(covariance, Eigen::ComputeFullV);
    right_vectors = svd.matrixV();
  } else {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(covariance, Eigen::ComputeFullV);
    right_vectors = svd.matrixV();
  }
  result.basis = right_vectors.leftCols(k);
  result.privatized =
      ProjectRows(result.noisy, result.basis, options.pinv_cutoff);
  return result;
}

bool DataPartition::Overlaps(const DataPartition& other) const {
  if (role != other.role) return false;
  return key.empty() || other.key.empty() || key == other.key;
}

absl::Status AccountantLedger::Record(LedgerEntry entry) {
  if (!entry.post_processing) {
    if (entry.partition.role == CorpusRole::kPublic) {
      return absl::InvalidArgumentError(internal::StrCat(
          "mechanism '", entry.mechanism,
          "' records a privacy cost against public data"));
    }
    absl::StatusOr<PrivacyBudget> checked =
        PrivacyBudget::Create(entry.budget.epsilon, entry.budget.delta);
    if (!checked.ok()) return checked.status();
  } else {
    entry.budget = PrivacyBudget{0.0, 0.0};
  }
  std::lock_guard<std::mutex> lock(mu_);
  entries_.push_back(std::move(entry));
  return absl::OkStatus();
}

absl::Status AccountantLedger::RecordPostProcessing(std::string mechanism,
                                                    DataPartition partition) {
  return Record(LedgerEntry{std::move(mechanism), PrivacyBudget{},
                            std::move(partition), /*post_processing=*/true});
}

std::vector<LedgerEntry> AccountantLedger::entries() const {
  std::lock_guard<std::mutex> lock(mu_);
  return entries_;
}

size_t AccountantLedger::size() const {
  std::lock_guard<std::mutex> lock(mu_);
  return entries_.size();
}

absl::StatusOr<PrivacyBudget> Compose(std::span<const LedgerEntry> entries) {
  PrivacyBudget overall{0.0, 0.0};
  for (size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].post_processing) continue;
    for (size_t j = 0; j < i; ++j) {
      if (entries[j].post_processing) continue;
      if (entries[i].partition.Overlaps(entries[j].partition)) {
        return absl::FailedPreconditionError(internal::StrCat(
            "mechanisms '", entries[j].mechanism, "' and '",
            entries[i].mechanism, "' both read partition ",
            CorpusRoleName(entries[i].partition.role),
            entries[i].partition.key.empty()
                ? ""
                : internal::StrCat("/", entries[i].partition.key),
            "; overlapping partitions need sequential composition, which "
            "this accountant does not support"));
      }
    }
    overall.epsilon = std::max(overall.epsilon, entries[i].budget.epsilon);
    overall.delta = std::max(overall.delta, entries[i].budget.delta);
  }
  return overall;
}

absl::StatusOr<PrivacyBudget> Compose(const AccountantLedger& ledger) {
  const std::vector<LedgerEntry> entries = ledger.entries();
  return Compose(std::span<const LedgerEntry>(entries));
}

std::vector<std::string> RegimeCaveats(std::span<const LedgerEntry> entries) {
  std::vector<std::string> caveats;
  for (const LedgerEntry& entry : entries) {
    if (entry.post_processing || entry.budget.disabled()) continue;
    if (entry.budget.epsilon > 1.0) {
      caveats.push_back(internal::StrCat(
          entry.mechanism, ": epsilon=", entry.budget.epsilon,
          " exceeds 1; the classical Gaussian calibration is applied outside "
          "the range its standard proof covers"));
    }
  }
  return caveats;
}

}  // namespace dpnote
