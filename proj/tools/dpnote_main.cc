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

// dpnote: differentially private synthesis of sectioned clinical notes.
//
//   dpnote synthesize --config run.conf [--eps-n R] [--eps-t R] [--seed N]
//                     [--out DIR] [--set section.key=value]...
//   dpnote evaluate --real F --synth F --lexicon F [--train F] --out F
//   dpnote accountant (--report run_report.json | --entry SPEC...)
//   dpnote split --input F [--rules F] [--out F]
//   dpnote terms --input F --lexicon F [--rules F] [--threshold T] [--out F]
//
// Exit status: 0 on success, 2 on a configuration error, 3 when a stage
// fails.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "absl/status/status.h"
#include "dpnote/corpus.h"
#include "dpnote/eval.h"
#include "dpnote/pipeline.h"
#include "dpnote/pipeline_config.h"
#include "dpnote/privacy.h"
#include "dpnote/structuring.h"
#include "dpnote/terms.h"
#include "json.hpp"

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitStage = 3;

int Fail(int code, const absl::Status& status) {
  std::cerr << "dpnote: " << status.message() << "\n";
  return code;
}

// Output goes to `path`, or stdout when it is empty or "-".
absl::Status Emit(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    return absl::OkStatus();
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
  out.close();
  if (!out) return absl::InternalError("cannot write " + path);
  return absl::OkStatus();
}

absl::StatusOr<std::vector<dpnote::TitleRule>> Rules(const std::string& path) {
  if (path.empty()) return dpnote::DefaultTitleRules();
  return dpnote::LoadTitleRules(path);
}

struct SynthesizeArgs {
  std::string config;
  std::optional<double> eps_n;
  std::string eps_t;
  std::optional<uint64_t> seed;
  std::string out;
  std::vector<std::string> overrides;
  bool print_config = false;
};

int RunSynthesize(const SynthesizeArgs& args) {
  absl::StatusOr<dpnote::PipelineConfig> config =
      dpnote::LoadPipelineConfig(args.config);
  if (!config.ok()) return Fail(kExitConfig, config.status());
  auto set = [&](const std::string& key, const std::string& value) {
    return dpnote::SetConfigValue(*config, key, value);
  };
  for (const std::string& kv : args.overrides) {
    const size_t eq = kv.find('=');
    if (eq == std::string::npos) {
      return Fail(kExitConfig,
                  absl::InvalidArgumentError("--set expects key=value, got " + kv));
    }
    if (absl::Status s = set(kv.substr(0, eq), kv.substr(eq + 1)); !s.ok()) {
      return Fail(kExitConfig, s);
    }
  }
  std::ostringstream num;
  num.precision(17);
  if (args.eps_n.has_value()) {
    num << *args.eps_n;
    if (absl::Status s = set("privacy.eps_n", num.str()); !s.ok()) {
      return Fail(kExitConfig, s);
    }
  }
  if (!args.eps_t.empty()) {
    if (absl::Status s = set("privacy.eps_t", args.eps_t); !s.ok()) {
      return Fail(kExitConfig, s);
    }
  }
  if (args.seed.has_value()) {
    if (absl::Status s = set("run.seed", std::to_string(*args.seed)); !s.ok()) {
      return Fail(kExitConfig, s);
    }
  }
  if (!args.out.empty()) config->output_dir = args.out;
  if (args.print_config) {
    std::cout << dpnote::FormatPipelineConfig(*config);
    return kExitOk;
  }
  absl::StatusOr<dpnote::PipelineResult> result = dpnote::Synthesize(*config);
  if (!result.ok()) return Fail(kExitStage, result.status());
  const dpnote::RunReport& report = result->report;
  std::cerr << "wrote " << result->synthetic.size() << " notes to "
            << config->output_dir << "; overall budget " << report.overall
            << "\n";
  for (const std::string& caveat : report.caveats) {
    std::cerr << "caveat: " << caveat << "\n";
  }
  return kExitOk;
}

struct EvaluateArgs {
  std::string real;
  std::string synth;
  std::string lexicon;
  std::string train;
  std::string out;
  double bin_width = dpnote::kDefaultLengthBinWidth;
  double threshold = dpnote::kDefaultTermThreshold;
  std::optional<double> mauve;
};

int RunEvaluate(const EvaluateArgs& args) {
  absl::StatusOr<dpnote::Corpus> real =
      dpnote::LoadCorpus(args.real, dpnote::CorpusRole::kPrivateTest);
  if (!real.ok()) return Fail(kExitStage, real.status());
  absl::StatusOr<dpnote::Corpus> synth =
      dpnote::LoadCorpus(args.synth, dpnote::CorpusRole::kSynthetic);
  if (!synth.ok()) return Fail(kExitStage, synth.status());
  absl::StatusOr<dpnote::Lexicon> lexicon = dpnote::LoadLexicon(args.lexicon);
  if (!lexicon.ok()) return Fail(kExitStage, lexicon.status());
  std::optional<dpnote::Corpus> train;
  if (!args.train.empty()) {
    absl::StatusOr<dpnote::Corpus> loaded =
        dpnote::LoadCorpus(args.train, dpnote::CorpusRole::kPrivateTrain);
    if (!loaded.ok()) return Fail(kExitStage, loaded.status());
    train = *std::move(loaded);
  }
  dpnote::EvalOptions options;
  options.length_bin_width = args.bin_width;
  options.term_threshold = args.threshold;
  absl::StatusOr<dpnote::EvalReport> report =
      dpnote::Evaluate(*real, *synth, *lexicon, options,
                       train.has_value() ? &*train : nullptr, nullptr);
  if (!report.ok()) return Fail(kExitStage, report.status());
  report->mauve = args.mauve;
  if (absl::Status s = Emit(args.out, dpnote::SerializeEvalReport(*report));
      !s.ok()) {
    return Fail(kExitStage, s);
  }
  return kExitOk;
}

// "mechanism:epsilon:delta:role[:key]", with epsilon "inf" allowed.
absl::StatusOr<dpnote::LedgerEntry> ParseEntry(const std::string& spec) {
  std::vector<std::string> parts;
  std::stringstream stream(spec);
  for (std::string part; std::getline(stream, part, ':');) parts.push_back(part);
  if (parts.size() < 4 || parts.size() > 5) {
    return absl::InvalidArgumentError(
        "entry must be mechanism:epsilon:delta:role[:key], got " + spec);
  }
  dpnote::LedgerEntry entry;
  entry.mechanism = parts[0];
  try {
    entry.budget.epsilon = parts[1] == "inf" ? dpnote::kInfiniteEpsilon
                                             : std::stod(parts[1]);
    entry.budget.delta = std::stod(parts[2]);
  } catch (const std::exception&) {
    return absl::InvalidArgumentError("bad number in entry " + spec);
  }
  absl::StatusOr<dpnote::CorpusRole> role = dpnote::ParseCorpusRole(parts[3]);
  if (!role.ok()) return role.status();
  entry.partition.role = *role;
  if (parts.size() == 5) entry.partition.key = parts[4];
  return entry;
}

int RunAccountant(const std::string& report_path,
                  const std::vector<std::string>& specs) {
  std::vector<dpnote::LedgerEntry> entries;
  std::optional<ordered_json> reported;
  if (!report_path.empty()) {
    std::ifstream in(report_path);
    if (!in) {
      return Fail(kExitConfig,
                  absl::NotFoundError("cannot open " + report_path));
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    absl::StatusOr<std::vector<dpnote::LedgerEntry>> parsed =
        dpnote::ParseLedgerJson(buffer.str());
    if (!parsed.ok()) return Fail(kExitConfig, parsed.status());
    entries = *std::move(parsed);
    ordered_json doc = ordered_json::parse(buffer.str(), nullptr, false);
    if (doc.is_object() && doc.contains("overall_budget")) {
      reported = doc["overall_budget"];
    }
  }
  dpnote::AccountantLedger ledger;
  for (const std::string& spec : specs) {
    absl::StatusOr<dpnote::LedgerEntry> entry = ParseEntry(spec);
    if (!entry.ok()) return Fail(kExitConfig, entry.status());
    entries.push_back(*std::move(entry));
  }
  for (dpnote::LedgerEntry& entry : entries) {
    absl::Status s = entry.post_processing
                         ? ledger.RecordPostProcessing(entry.mechanism,
                                                       entry.partition)
                         : ledger.Record(entry);
    if (!s.ok()) return Fail(kExitStage, s);
  }
  absl::StatusOr<dpnote::PrivacyBudget> overall = dpnote::Compose(ledger);
  if (!overall.ok()) return Fail(kExitStage, overall.status());
  for (const dpnote::LedgerEntry& e : ledger.entries()) {
    std::cout << e.mechanism << "\t" << dpnote::CorpusRoleName(e.partition.role)
              << (e.partition.key.empty() ? "" : ":" + e.partition.key) << "\t"
              << (e.post_processing ? "post-processing"
                                    : [&] {
                                        std::ostringstream s;
                                        s << e.budget;
                                        return s.str();
                                      }())
              << "\n";
  }
  std::cout << "overall\t" << *overall << "\n";
  for (const std::string& caveat : dpnote::RegimeCaveats(ledger.entries())) {
    std::cout << "caveat\t" << caveat << "\n";
  }
  if (reported.has_value()) {
    const ordered_json& eps = (*reported)["epsilon"];
    const double reported_eps =
        eps.is_string() ? dpnote::kInfiniteEpsilon : eps.get<double>();
    const double reported_delta = (*reported)["delta"].get<double>();
    if (reported_eps != overall->epsilon || reported_delta != overall->delta) {
      return Fail(kExitStage, absl::DataLossError(
                                  "reported overall budget disagrees with "
                                  "the composed ledger"));
    }
  }
  return kExitOk;
}

int RunSplit(const std::string& input, const std::string& rules_path,
             const std::string& out) {
  absl::StatusOr<std::vector<dpnote::TitleRule>> rules = Rules(rules_path);
  if (!rules.ok()) return Fail(kExitConfig, rules.status());
  absl::StatusOr<dpnote::Corpus> corpus =
      dpnote::LoadCorpus(input, dpnote::CorpusRole::kPrivateTrain);
  if (!corpus.ok()) return Fail(kExitStage, corpus.status());
  std::string lines;
  for (const dpnote::Note& note : corpus->notes()) {
    const dpnote::SectionedNote split = dpnote::SplitSections(note, *rules);
    ordered_json sections = ordered_json::array();
    for (const dpnote::Section& s : split.sections) {
      sections.push_back(ordered_json{
          {"group", std::string(dpnote::GroupKey(s.group))},
          {"title", s.title_text},
          {"begin", s.begin},
          {"end", s.end},
          {"body", s.body}});
    }
    lines += ordered_json{{"id", split.note_id},
                          {"degenerate", split.degenerate},
                          {"residual_prefix", split.residual_prefix},
                          {"sections", std::move(sections)}}
                 .dump() +
             "\n";
  }
  if (absl::Status s = Emit(out, lines); !s.ok()) return Fail(kExitStage, s);
  return kExitOk;
}

int RunTerms(const std::string& input, const std::string& lexicon_path,
             const std::string& rules_path, double threshold,
             const std::string& out) {
  absl::StatusOr<std::vector<dpnote::TitleRule>> rules = Rules(rules_path);
  if (!rules.ok()) return Fail(kExitConfig, rules.status());
  absl::StatusOr<dpnote::Lexicon> lexicon = dpnote::LoadLexicon(lexicon_path);
  if (!lexicon.ok()) return Fail(kExitConfig, lexicon.status());
  absl::StatusOr<dpnote::Corpus> corpus =
      dpnote::LoadCorpus(input, dpnote::CorpusRole::kPrivateTrain);
  if (!corpus.ok()) return Fail(kExitStage, corpus.status());
  std::string lines;
  for (const dpnote::Note& note : corpus->notes()) {
    const dpnote::SectionedNote split = dpnote::SplitSections(note, *rules);
    ordered_json sections = ordered_json::object();
    for (const dpnote::Section& s : split.sections) {
      sections[std::string(dpnote::GroupKey(s.group))] =
          dpnote::ExtractTerms(s.body, *lexicon, threshold, s.group).terms;
    }
    lines += ordered_json{{"id", note.id}, {"terms", std::move(sections)}}
                 .dump() +
             "\n";
  }
  if (absl::Status s = Emit(out, lines); !s.ok()) return Fail(kExitStage, s);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Differentially private synthesis of sectioned clinical notes"};
  app.require_subcommand(1);

  SynthesizeArgs synth;
  CLI::App* synthesize =
      app.add_subcommand("synthesize", "Run the full synthesis pipeline");
  synthesize->add_option("--config", synth.config, "Pipeline config file")
      ->required();
  synthesize->add_option("--eps-n", synth.eps_n, "Note-generation epsilon");
  synthesize->add_option("--eps-t", synth.eps_t,
                         "Term-generation epsilon, or 'none'");
  synthesize->add_option("--seed", synth.seed, "Master seed");
  synthesize->add_option("--out", synth.out, "Output directory");
  synthesize->add_option("--set", synth.overrides,
                         "Override a config key: section.key=value");
  synthesize->add_flag("--print-effective-config", synth.print_config,
                       "Print the merged config and exit");

  EvaluateArgs eval;
  CLI::App* evaluate =
      app.add_subcommand("evaluate", "Compare a synthetic corpus to real notes");
  evaluate->add_option("--real", eval.real, "Real notes (JSONL)")->required();
  evaluate->add_option("--synth", eval.synth, "Synthetic notes (JSONL)")
      ->required();
  evaluate->add_option("--lexicon", eval.lexicon, "Term lexicon")->required();
  evaluate->add_option("--train", eval.train,
                       "Training notes for the distance probe");
  evaluate->add_option("--out", eval.out, "Report path (default stdout)");
  evaluate->add_option("--bin-width", eval.bin_width, "Length bin width");
  evaluate->add_option("--threshold", eval.threshold, "Term match threshold");
  evaluate->add_option("--mauve", eval.mauve, "Externally computed MAUVE");

  std::string report_path;
  std::vector<std::string> entries;
  CLI::App* accountant = app.add_subcommand(
      "accountant", "Compose a privacy ledger and check a run report");
  accountant->add_option("--report", report_path, "run_report.json to check");
  accountant->add_option("--entry", entries,
                         "mechanism:epsilon:delta:role[:key]");

  std::string input, rules_path, out, lexicon_path;
  double threshold = dpnote::kDefaultTermThreshold;
  CLI::App* split = app.add_subcommand("split", "Section notes only");
  split->add_option("--input", input, "Notes (JSONL)")->required();
  split->add_option("--rules", rules_path, "Title rules file");
  split->add_option("--out", out, "Output JSONL (default stdout)");

  CLI::App* terms = app.add_subcommand("terms", "Extract section terms only");
  terms->add_option("--input", input, "Notes (JSONL)")->required();
  terms->add_option("--lexicon", lexicon_path, "Term lexicon")->required();
  terms->add_option("--rules", rules_path, "Title rules file");
  terms->add_option("--threshold", threshold, "Match threshold");
  terms->add_option("--out", out, "Output JSONL (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (synthesize->parsed()) return RunSynthesize(synth);
  if (evaluate->parsed()) return RunEvaluate(eval);
  if (accountant->parsed()) {
    if (report_path.empty() && entries.empty()) {
      return Fail(kExitConfig, absl::InvalidArgumentError(
                                   "accountant needs --report or --entry"));
    }
    return RunAccountant(report_path, entries);
  }
  if (split->parsed()) return RunSplit(input, rules_path, out);
  if (terms->parsed()) {
    return RunTerms(input, lexicon_path, rules_path, threshold, out);
  }
  return kExitConfig;
}
