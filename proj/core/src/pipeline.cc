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

#include "dpnote/pipeline.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <thread>

#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "dpnote/generation.h"
#include "dpnote/quality.h"
#include "dpnote/rng.h"
#include "dpnote/structuring.h"
#include "dpnote/terms.h"
#include "json.hpp"
#include "strings.h"

namespace dpnote {
namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

absl::Status Tagged(std::string_view stage, const absl::Status& status) {
  return absl::Status(status.code(),
                      internal::StrCat("[", stage, "] ", status.message()));
}

class StageClock {
 public:
  explicit StageClock(std::vector<StageTiming>& timings)
      : timings_(timings), start_(std::chrono::steady_clock::now()) {}

  void Lap(std::string stage) {
    const auto now = std::chrono::steady_clock::now();
    timings_.push_back(StageTiming{
        std::move(stage), std::chrono::duration<double>(now - start_).count()});
    start_ = now;
  }

 private:
  std::vector<StageTiming>& timings_;
  std::chrono::steady_clock::time_point start_;
};

ordered_json Real(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

absl::StatusOr<double> RealFromJson(const ordered_json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string() && j.get<std::string>() == "inf") return kInfiniteEpsilon;
  return absl::InvalidArgumentError("expected a number or \"inf\"");
}

std::vector<SectionedNote> SplitAll(const Corpus& corpus,
                                    std::span<const TitleRule> rules) {
  std::vector<SectionedNote> out;
  out.reserve(corpus.size());
  for (const Note& note : corpus.notes()) {
    if (!note.degenerate()) out.push_back(SplitSections(note, rules));
  }
  return out;
}

// Term lists of every group for one note; absent sections give empty lists.
std::vector<TermList> SectionTerms(const SectionedNote& note,
                                   const Lexicon& lexicon, double threshold) {
  std::vector<TermList> lists;
  for (SectionGroup group : kAllSectionGroups) {
    const Section* section = note.Find(group);
    if (section == nullptr) {
      lists.push_back(TermList{{}, group});
    } else {
      lists.push_back(ExtractTerms(section->body, lexicon, threshold, group));
    }
  }
  return lists;
}

int MeanTermsPerSection(std::span<const SectionedNote> notes,
                        const Lexicon& lexicon, double threshold) {
  size_t sections = 0, terms = 0;
  for (const SectionedNote& note : notes) {
    for (const Section& section : note.sections) {
      ++sections;
      terms += ExtractTerms(section.body, lexicon, threshold).terms.size();
    }
  }
  if (sections == 0) return 1;
  const auto mean = static_cast<int>(
      std::lround(static_cast<double>(terms) / static_cast<double>(sections)));
  return std::max(1, mean);
}

struct NoteOutcome {
  Note note;
  NoteTrace trace;
  absl::Status status;
};

}  // namespace

int WorkerThreads() {
  int threads = static_cast<int>(std::thread::hardware_concurrency());
  if (const char* env = std::getenv("DPNOTE_THREADS")) {
    int capped = 0;
    if (absl::SimpleAtoi(env, &capped) && capped > 0) {
      threads = threads > 0 ? std::min(threads, capped) : capped;
    }
  }
  return std::max(1, threads);
}

absl::StatusOr<PipelineResult> RunPipeline(const PipelineConfig& config) {
  if (absl::Status s = ValidatePipelineConfig(config); !s.ok()) {
    return Tagged("config", s);
  }
  RunReport report;
  report.config_snapshot = FormatPipelineConfig(config);
  StageClock clock(report.timings);
  const Rng master(config.seed);

  // Load.
  absl::StatusOr<Corpus> public_corpus =
      LoadCorpus(config.public_corpus, CorpusRole::kPublic);
  if (!public_corpus.ok()) return Tagged("load", public_corpus.status());
  absl::StatusOr<Corpus> train =
      LoadCorpus(config.private_train, CorpusRole::kPrivateTrain);
  if (!train.ok()) return Tagged("load", train.status());
  absl::StatusOr<Corpus> test =
      LoadCorpus(config.private_test, CorpusRole::kPrivateTest);
  if (!test.ok()) return Tagged("load", test.status());
  absl::StatusOr<Lexicon> lexicon = LoadLexicon(config.lexicon);
  if (!lexicon.ok()) return Tagged("load", lexicon.status());
  std::vector<TitleRule> rules = DefaultTitleRules();
  if (!config.section_rules.empty()) {
    absl::StatusOr<std::vector<TitleRule>> loaded =
        LoadTitleRules(config.section_rules);
    if (!loaded.ok()) return Tagged("load", loaded.status());
    rules = *std::move(loaded);
  }
  for (const Corpus* c : {&*public_corpus, &*train, &*test}) {
    report.corpora.push_back(CorpusStats{c->role(), c->size(),
                                         c->degenerate_count(),
                                         c->unlabeled_count()});
  }
  clock.Lap("load");

  // Budgets.
  PrivacyBudget note_budget;
  {
    double delta = 0.0;
    if (config.delta_n.has_value()) {
      delta = *config.delta_n;
    } else {
      absl::StatusOr<double> d =
          DefaultDelta(static_cast<int64_t>(train->size()));
      if (!d.ok()) return Tagged("config", d.status());
      delta = *d;
    }
    absl::StatusOr<PrivacyBudget> b = PrivacyBudget::Create(config.eps_n, delta);
    if (!b.ok()) return Tagged("config", b.status());
    note_budget = *b;
  }
  std::optional<PrivacyBudget> term_budget;
  if (config.eps_t.has_value()) {
    double delta = 0.0;
    if (config.delta_t.has_value()) {
      delta = *config.delta_t;
    } else {
      absl::StatusOr<double> d =
          DefaultDelta(static_cast<int64_t>(test->size()));
      if (!d.ok()) return Tagged("config", d.status());
      delta = *d;
    }
    absl::StatusOr<PrivacyBudget> b = PrivacyBudget::Create(*config.eps_t, delta);
    if (!b.ok()) return Tagged("config", b.status());
    term_budget = *b;
  }

  // Split and extract.
  const std::vector<SectionedNote> public_sections =
      SplitAll(*public_corpus, rules);
  const std::vector<SectionedNote> train_sections = SplitAll(*train, rules);
  std::vector<const Note*> sources;
  std::vector<SectionedNote> test_sections;
  for (const Note& note : test->notes()) {
    if (note.degenerate()) continue;
    sources.push_back(&note);
    test_sections.push_back(SplitSections(note, rules));
  }
  if (sources.empty()) {
    return Tagged("split", absl::FailedPreconditionError(
                               "private test corpus has no non-empty notes"));
  }
  clock.Lap("split");

  std::vector<std::vector<TermList>> term_lists;
  term_lists.reserve(test_sections.size());
  for (const SectionedNote& note : test_sections) {
    term_lists.push_back(SectionTerms(note, *lexicon, config.term_threshold));
  }
  report.terms_per_section =
      config.terms_per_section.value_or(MeanTermsPerSection(
          public_sections, *lexicon, config.term_threshold));
  report.terms_per_section =
      std::min(report.terms_per_section, static_cast<int>(lexicon->size()));
  clock.Lap("extract");

  AccountantLedger ledger;

  // Optional term privatization: one DPRP run per section group over the
  // test notes, each at budget / m.
  if (term_budget.has_value()) {
    const int m = static_cast<int>(kAllSectionGroups.size());
    absl::StatusOr<PrivacyBudget> per_section =
        PerSectionBudget(*term_budget, m);
    if (!per_section.ok()) return Tagged("dprp", per_section.status());
    absl::StatusOr<LexiconEmbeddings> decoder =
        BuildLexiconEmbeddings(*lexicon, config.embedding_dim);
    if (!decoder.ok()) return Tagged("dprp", decoder.status());
    DprpOptions options;
    options.rank_fraction = config.rank_fraction;
    options.allocation = config.allocation;
    const Rng dprp_rng = master.Fork("dprp");
    for (size_t g = 0; g < kAllSectionGroups.size(); ++g) {
      const SectionGroup group = kAllSectionGroups[g];
      EmbeddingMatrix rows(static_cast<Eigen::Index>(term_lists.size()),
                           config.embedding_dim);
      for (size_t i = 0; i < term_lists.size(); ++i) {
        absl::StatusOr<TermEmbedding> e =
            EmbedTerms(term_lists[i][g], config.embedding_dim);
        if (!e.ok()) return Tagged("dprp", e.status());
        rows.mutable_values().row(static_cast<Eigen::Index>(i)) =
            e->values.transpose();
      }
      Rng stream = dprp_rng.Fork(GroupKey(group));
      absl::StatusOr<DprpResult> perturbed =
          DprpPerturb(rows, *per_section, options, stream);
      if (!perturbed.ok()) return Tagged("dprp", perturbed.status());
      for (size_t i = 0; i < term_lists.size(); ++i) {
        const Eigen::VectorXd query =
            perturbed->privatized.values()
                .row(static_cast<Eigen::Index>(i))
                .transpose();
        absl::StatusOr<TermList> decoded =
            DecodeTerms(query, *decoder, report.terms_per_section, group);
        if (!decoded.ok()) return Tagged("decode", decoded.status());
        term_lists[i][g] = *std::move(decoded);
      }
    }
    if (absl::Status s = ledger.Record(LedgerEntry{
            "dprp_term_embeddings", *term_budget,
            DataPartition{CorpusRole::kPrivateTest, ""}, false});
        !s.ok()) {
      return Tagged("dprp", s);
    }
    clock.Lap("dprp");
  }

  // Generator, trained once.
  NgramTrainingOptions training;
  training.order = config.ngram_order;
  training.clip = config.clip;
  Rng train_rng = master.Fork("ngram");
  absl::StatusOr<DpNgramModel> model = TrainDpNgram(
      train_sections, public_sections, note_budget, training, train_rng);
  if (!model.ok()) return Tagged("train", model.status());
  if (absl::Status s = ledger.Record(LedgerEntry{
          "dp_ngram_counts", note_budget,
          DataPartition{CorpusRole::kPrivateTrain, ""}, false});
      !s.ok()) {
    return Tagged("train", s);
  }
  absl::StatusOr<NgramScorer> scorer = NgramScorer::Train(
      *public_corpus, config.scorer_order, config.scorer_add_k);
  if (!scorer.ok()) return Tagged("train", scorer.status());
  clock.Lap("train");

  // Per-note generation, selection and assembly.
  CandidateOptions candidate_options;
  candidate_options.count = config.candidates;
  candidate_options.decoding.temperature = config.temperature;
  candidate_options.decoding.repetition_penalty = config.repetition_penalty;
  candidate_options.decoding.term_bias = config.term_bias;
  candidate_options.decoding.eos_bias = config.eos_bias;
  candidate_options.decoding.max_tokens = config.max_tokens;
  candidate_options.instruction_template = config.instruction_template;
  candidate_options.max_retries = config.max_retries;
  const auto max_chars = static_cast<size_t>(config.max_sentence_chars);
  candidate_options.accept = [max_chars](const std::string& text) {
    return RejectLongSentences(text, max_chars).accepted;
  };
  candidate_options.reject_cost = [max_chars](const std::string& text) {
    return static_cast<double>(
        RejectLongSentences(text, max_chars).longest_sentence_chars);
  };

  const Rng note_rng = master.Fork("notes");
  std::vector<NoteOutcome> outcomes(sources.size());
  auto work = [&](size_t i) {
    NoteOutcome& out = outcomes[i];
    const Note& source = *sources[i];
    absl::StatusOr<std::vector<Candidate>> candidates = GenerateCandidates(
        *model, term_lists[i], candidate_options, note_rng.Fork(source.id));
    if (!candidates.ok()) {
      out.status = candidates.status();
      return;
    }
    std::vector<std::string> texts;
    for (const Candidate& c : *candidates) texts.push_back(c.text);
    absl::StatusOr<Selection> selection = SelectBest(texts, *scorer);
    if (!selection.ok()) {
      out.status = selection.status();
      return;
    }
    const Candidate& chosen = (*candidates)[selection->index];
    out.note = Note{internal::StrCat("syn-", source.id), chosen.text,
                    source.labels};
    out.trace = NoteTrace{out.note.id, source.id, selection->index,
                          selection->score, chosen.accepted, chosen.attempts};
  };
  const size_t threads =
      std::min(sources.size(), static_cast<size_t>(WorkerThreads()));
  std::atomic<size_t> next{0};
  std::atomic<bool> failed{false};
  auto worker = [&] {
    for (size_t i = next++; i < sources.size() && !failed; i = next++) {
      work(i);
      if (!outcomes[i].status.ok()) failed = true;
    }
  };
  {
    std::vector<std::jthread> pool;
    for (size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
  }
  std::vector<Note> synthetic_notes;
  for (NoteOutcome& out : outcomes) {
    if (!out.status.ok()) return Tagged("generate", out.status);
  }
  for (NoteOutcome& out : outcomes) {
    if (out.note.id.empty()) {
      return Tagged("generate", absl::InternalError("note was not generated"));
    }
    synthetic_notes.push_back(std::move(out.note));
    report.notes.push_back(std::move(out.trace));
  }
  if (absl::Status s = ledger.RecordPostProcessing(
          "candidate_selection", DataPartition{CorpusRole::kPrivateTrain, ""});
      !s.ok()) {
    return Tagged("select", s);
  }
  absl::StatusOr<Corpus> synthetic =
      Corpus::Create(CorpusRole::kSynthetic, std::move(synthetic_notes));
  if (!synthetic.ok()) return Tagged("assemble", synthetic.status());
  clock.Lap("generate");

  report.ledger = ledger.entries();
  absl::StatusOr<PrivacyBudget> overall = Compose(report.ledger);
  if (!overall.ok()) return Tagged("accountant", overall.status());
  report.overall = *overall;
  report.caveats = RegimeCaveats(report.ledger);
  // Unlabeled notes are kept; say so.
  for (const CorpusStats& c : report.corpora) {
    if (c.unlabeled > 0 && c.role != CorpusRole::kPublic) {
      report.caveats.push_back(internal::StrCat(
          CorpusRoleName(c.role), ": ", c.unlabeled, " of ", c.notes,
          " notes carry no labels and were kept"));
    }
  }

  EvalOptions eval_options;
  eval_options.term_threshold = config.term_threshold;
  eval_options.embedding_dim = config.embedding_dim;
  absl::StatusOr<EvalReport> evaluation = Evaluate(
      *test, *synthetic, *lexicon, eval_options, &*train, nullptr);
  if (!evaluation.ok()) return Tagged("evaluate", evaluation.status());
  report.evaluation = *std::move(evaluation);
  clock.Lap("evaluate");
  return PipelineResult{*std::move(synthetic), std::move(report)};
}

absl::Status WritePipelineOutputs(const PipelineResult& result,
                                  const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    return Tagged("write", absl::InternalError(internal::StrCat(
                               "cannot create ", dir, ": ", ec.message())));
  }
  absl::StatusOr<std::string> corpus = SerializeCorpus(result.synthetic);
  if (!corpus.ok()) return Tagged("write", corpus.status());
  const std::vector<std::pair<fs::path, std::string>> files = {
      {fs::path(dir) / kSyntheticCorpusFile, *std::move(corpus)},
      {fs::path(dir) / kRunReportFile, SerializeRunReport(result.report)},
  };
  std::vector<fs::path> written;
  auto cleanup = [&written] {
    std::error_code ignored;
    for (const fs::path& p : written) fs::remove(p, ignored);
  };
  // Stage everything under temporary names first, then rename.
  for (const auto& [path, content] : files) {
    fs::path tmp = path;
    tmp += ".tmp";
    written.push_back(tmp);
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << content;
    out.close();
    if (!out) {
      cleanup();
      return Tagged("write",
                    absl::InternalError(internal::StrCat("cannot write ", tmp.string())));
    }
  }
  for (const auto& [path, content] : files) {
    fs::path tmp = path;
    tmp += ".tmp";
    fs::rename(tmp, path, ec);
    if (ec) {
      for (const auto& f : files) written.push_back(f.first);
      cleanup();
      return Tagged("write", absl::InternalError(internal::StrCat(
                                 "cannot rename ", tmp.string(), ": ",
                                 ec.message())));
    }
  }
  return absl::OkStatus();
}

absl::StatusOr<PipelineResult> Synthesize(const PipelineConfig& config) {
  absl::StatusOr<PipelineResult> result = RunPipeline(config);
  if (!result.ok()) return result.status();
  if (absl::Status s = WritePipelineOutputs(*result, config.output_dir);
      !s.ok()) {
    return s;
  }
  return result;
}

std::string SerializeRunReport(const RunReport& report) {
  ordered_json doc;
  doc["overall_budget"] = ordered_json{{"epsilon", Real(report.overall.epsilon)},
                                       {"delta", report.overall.delta}};
  ordered_json ledger = ordered_json::array();
  for (const LedgerEntry& e : report.ledger) {
    ledger.push_back(ordered_json{
        {"mechanism", e.mechanism},
        {"epsilon", Real(e.budget.epsilon)},
        {"delta", e.budget.delta},
        {"role", std::string(CorpusRoleName(e.partition.role))},
        {"partition_key", e.partition.key},
        {"post_processing", e.post_processing}});
  }
  doc["ledger"] = std::move(ledger);
  doc["caveats"] = report.caveats;
  doc["config"] = report.config_snapshot;
  ordered_json corpora = ordered_json::array();
  for (const CorpusStats& c : report.corpora) {
    corpora.push_back(ordered_json{{"role", std::string(CorpusRoleName(c.role))},
                                   {"notes", c.notes},
                                   {"degenerate", c.degenerate},
                                   {"unlabeled", c.unlabeled}});
  }
  doc["corpora"] = std::move(corpora);
  doc["terms_per_section"] = report.terms_per_section;
  ordered_json notes = ordered_json::array();
  for (const NoteTrace& t : report.notes) {
    notes.push_back(ordered_json{{"id", t.id},
                                 {"source_id", t.source_id},
                                 {"selected_candidate", t.selected},
                                 {"perplexity", Real(t.perplexity)},
                                 {"accepted", t.accepted},
                                 {"attempts", t.attempts}});
  }
  doc["notes"] = std::move(notes);
  doc["evaluation"] = report.evaluation.has_value()
                          ? ordered_json::parse(
                                SerializeEvalReport(*report.evaluation))
                          : ordered_json(nullptr);
  ordered_json timings = ordered_json::array();
  for (const StageTiming& t : report.timings) {
    timings.push_back(ordered_json{{"stage", t.stage}, {"seconds", t.seconds}});
  }
  doc["timings"] = std::move(timings);
  return doc.dump(2) + "\n";
}

absl::StatusOr<std::vector<LedgerEntry>> ParseLedgerJson(
    std::string_view run_report_json) {
  const ordered_json doc = ordered_json::parse(run_report_json, nullptr,
                                               /*allow_exceptions=*/false);
  if (doc.is_discarded() || !doc.is_object() || !doc.contains("ledger") ||
      !doc["ledger"].is_array()) {
    return absl::InvalidArgumentError("not a run report with a ledger");
  }
  std::vector<LedgerEntry> entries;
  for (const ordered_json& e : doc["ledger"]) {
    if (!e.is_object() || !e.contains("mechanism") || !e.contains("epsilon") ||
        !e.contains("delta") || !e.contains("role")) {
      return absl::InvalidArgumentError("malformed ledger entry");
    }
    LedgerEntry entry;
    entry.mechanism = e["mechanism"].get<std::string>();
    absl::StatusOr<double> eps = RealFromJson(e["epsilon"]);
    if (!eps.ok()) return eps.status();
    if (!e["delta"].is_number()) {
      return absl::InvalidArgumentError("ledger delta must be a number");
    }
    entry.budget = PrivacyBudget{*eps, e["delta"].get<double>()};
    absl::StatusOr<CorpusRole> role =
        ParseCorpusRole(e["role"].get<std::string>());
    if (!role.ok()) return role.status();
    entry.partition.role = *role;
    if (e.contains("partition_key")) {
      entry.partition.key = e["partition_key"].get<std::string>();
    }
    entry.post_processing = e.value("post_processing", false);
    entries.push_back(std::move(entry));
  }
  return entries;
}

}  // namespace dpnote
