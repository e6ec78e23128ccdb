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

#ifndef DPNOTE_PIPELINE_CONFIG_H_
#define DPNOTE_PIPELINE_CONFIG_H_

#include <cstdint>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "dpnote/generation.h"
#include "dpnote/privacy.h"
#include "dpnote/quality.h"
#include "dpnote/terms.h"

namespace dpnote {

// 1 / (n ln n), the default delta for a private corpus of n notes. n >= 3.
absl::StatusOr<double> DefaultDelta(int64_t n);

// Everything a synthesis run reads. Optional fields left unset take their
// data-dependent default at run time.
struct PipelineConfig {
  // [paths]
  std::string public_corpus;
  std::string private_train;
  std::string private_test;
  std::string lexicon;
  // Empty selects the built-in title rules.
  std::string section_rules;
  std::string output_dir = "out";

  // [privacy]
  double eps_n = 8.0;
  std::optional<double> delta_n;  // default: DefaultDelta(|private_train|)
  // Unset disables term privatization.
  std::optional<double> eps_t;
  std::optional<double> delta_t;  // default: DefaultDelta(|private_test|)

  // [generation]
  int ngram_order = 3;
  double clip = 5.0;
  int candidates = kDefaultCandidates;
  double temperature = 0.1;
  double repetition_penalty = 1.2;
  double term_bias = 2.0;
  double eos_bias = 0.5;
  int max_tokens = 256;
  int max_retries = kDefaultRegenerationRetries;
  int64_t max_sentence_chars = kDefaultMaxSentenceChars;
  std::string instruction_template = std::string(kDefaultInstructionTemplate);
  int scorer_order = 3;
  double scorer_add_k = kDefaultAddK;

  // [terms]
  double term_threshold = kDefaultTermThreshold;
  int embedding_dim = kDefaultEmbeddingDim;
  double rank_fraction = 0.6;
  double allocation = 0.85;
  double sigma_emb = kDefaultTrainingEmbeddingSigma;
  // Default: mean terms per section in the public corpus, rounded.
  std::optional<int> terms_per_section;

  // [run]
  uint64_t seed = 0;

  friend bool operator==(const PipelineConfig&,
                         const PipelineConfig&) = default;
};

// Range checks on every knob. Paths are not touched.
absl::Status ValidatePipelineConfig(const PipelineConfig& config);

// "key = value" lines under [paths], [privacy], [generation], [terms] and
// [run] headers; '#' starts a comment line. Unknown sections or keys, and
// repeated keys, are errors. "auto" (or "none" for eps_t) leaves an optional
// field unset.
absl::StatusOr<PipelineConfig> ParsePipelineConfig(std::istream& in);
// As above; relative paths are resolved against the file's directory.
absl::StatusOr<PipelineConfig> LoadPipelineConfig(const std::string& path);

// Every key, in a fixed order. Parsing the output yields an equal config.
std::string FormatPipelineConfig(const PipelineConfig& config);

// Sets one "section.key" (or unique bare "key") from its text form.
absl::Status SetConfigValue(PipelineConfig& config, std::string_view key,
                            std::string_view value);

// All "section.key" names, in file order.
std::vector<std::string> ConfigKeys();

}  // namespace dpnote

#endif  // DPNOTE_PIPELINE_CONFIG_H_
