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

#ifndef DPNOTE_PIPELINE_H_
#define DPNOTE_PIPELINE_H_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "dpnote/corpus.h"
#include "dpnote/eval.h"
#include "dpnote/pipeline_config.h"
#include "dpnote/privacy.h"

namespace dpnote {

inline constexpr std::string_view kSyntheticCorpusFile = "synthetic.jsonl";
inline constexpr std::string_view kRunReportFile = "run_report.json";

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

struct CorpusStats {
  CorpusRole role = CorpusRole::kPublic;
  size_t notes = 0;
  size_t degenerate = 0;
  size_t unlabeled = 0;
};

// How one synthetic note was chosen.
struct NoteTrace {
  std::string id;
  std::string source_id;
  size_t selected = 0;
  double perplexity = 0.0;
  // False when no attempt passed the sentence filter for the chosen
  // candidate.
  bool accepted = true;
  int attempts = 0;
};

struct RunReport {
  // Always Compose(ledger).
  PrivacyBudget overall;
  std::vector<LedgerEntry> ledger;
  std::vector<std::string> caveats;
  std::string config_snapshot;
  std::vector<CorpusStats> corpora;
  int terms_per_section = 0;
  std::vector<NoteTrace> notes;
  std::optional<EvalReport> evaluation;
  std::vector<StageTiming> timings;
};

struct PipelineResult {
  Corpus synthetic;
  RunReport report;
};

// The full synthesis run: split, extract, optionally privatize the term
// lists, train the generator once on the private training notes, then for
// every private test note generate candidates, filter and select. Errors are
// prefixed with the failing stage. Nothing is written.
absl::StatusOr<PipelineResult> RunPipeline(const PipelineConfig& config);

// Writes the synthetic corpus and the run report into `dir`. On failure no
// output file is left behind.
absl::Status WritePipelineOutputs(const PipelineResult& result,
                                  const std::string& dir);

// RunPipeline followed by WritePipelineOutputs(config.output_dir).
absl::StatusOr<PipelineResult> Synthesize(const PipelineConfig& config);

std::string SerializeRunReport(const RunReport& report);

// The "ledger" array of a serialized run report.
absl::StatusOr<std::vector<LedgerEntry>> ParseLedgerJson(
    std::string_view run_report_json);

// DPNOTE_THREADS if set and positive, else the hardware concurrency.
int WorkerThreads();

}  // namespace dpnote

#endif  // DPNOTE_PIPELINE_H_
