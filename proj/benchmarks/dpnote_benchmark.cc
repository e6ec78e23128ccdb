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

#include <string>
#include <vector>

#include "benchmark/benchmark.h"
#include "dpnote/generation.h"
#include "dpnote/privacy.h"
#include "dpnote/rng.h"
#include "dpnote/structuring.h"
#include "dpnote/terms.h"

namespace dpnote {
namespace {

const char* const kWords[] = {"patient", "reports", "chest",  "pain",
                              "with",    "mild",    "dyspnea", "and",
                              "fever",   "denies",  "cough",   "today"};
const char* const kTitles[] = {"Chief Complaint:", "Physical Exam:",
                               "Pertinent Results:", "Brief Hospital Course:",
                               "Discharge Medications:", "Sex:"};

std::string Filler(Rng& rng, int words) {
  std::string out;
  for (int i = 0; i < words; ++i) {
    out += kWords[rng.NextU64() % std::size(kWords)];
    out += i % 9 == 8 ? ".\n" : " ";
  }
  return out;
}

std::string MakeNote(Rng& rng, int words_per_section) {
  std::string text = "Name: ___\n";
  for (const char* title : kTitles) {
    text += std::string(title) + "\n" + Filler(rng, words_per_section) + "\n";
  }
  return text;
}

void BM_DprpPerturb(benchmark::State& state) {
  const auto n = static_cast<int>(state.range(0));
  const auto d = static_cast<int>(state.range(1));
  Rng rng(1);
  EmbeddingMatrix e(n, d);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < d; ++c) e.mutable_values()(r, c) = rng.Gaussian();
  }
  e = *ClipRows(e, 1.0);
  const PrivacyBudget budget = *PrivacyBudget::Create(1.0, 1e-5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(DprpPerturb(e, budget, DprpOptions{}, rng));
  }
}
BENCHMARK(BM_DprpPerturb)->Args({100, 64})->Args({1000, 256});

void BM_ExtractTerms(benchmark::State& state) {
  std::vector<Lexicon::Source> sources;
  for (const char* s : {"chest pain", "dyspnea", "fever", "cough",
                        "shortness of breath", "atrial fibrillation"}) {
    sources.push_back({s, std::nullopt});
  }
  const Lexicon lexicon = *Lexicon::Create(std::move(sources));
  Rng rng(2);
  const std::string body = Filler(rng, static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(ExtractTerms(body, lexicon, kDefaultTermThreshold));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ExtractTerms)->Arg(100)->Arg(1000);

void BM_SplitSections(benchmark::State& state) {
  Rng rng(3);
  const Note note{"n", MakeNote(rng, static_cast<int>(state.range(0))), {}};
  for (auto _ : state) benchmark::DoNotOptimize(SplitSections(note));
  state.SetBytesProcessed(state.iterations() *
                          static_cast<int64_t>(note.text.size()));
}
BENCHMARK(BM_SplitSections)->Arg(50)->Arg(500);

void BM_TrainDpNgram(benchmark::State& state) {
  Rng rng(4);
  std::vector<SectionedNote> pub, priv;
  for (int i = 0; i < state.range(0); ++i) {
    pub.push_back(SplitSections(Note{"p", MakeNote(rng, 40), {}}));
    priv.push_back(SplitSections(Note{"t", MakeNote(rng, 40), {}}));
  }
  const PrivacyBudget budget = *PrivacyBudget::Create(8.0, 1e-5);
  for (auto _ : state) {
    Rng train = rng.Fork("train");
    benchmark::DoNotOptimize(TrainDpNgram(priv, pub, budget, {3, 5.0}, train));
  }
}
BENCHMARK(BM_TrainDpNgram)->Arg(30)->Arg(300);

}  // namespace
}  // namespace dpnote

BENCHMARK_MAIN();
