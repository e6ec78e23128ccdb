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

#include "dpnote/pipeline_config.h"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>

#include "absl/strings/ascii.h"
#include "absl/strings/match.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/strip.h"
#include "strings.h"

namespace dpnote {
namespace {

std::string FormatDouble(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

absl::StatusOr<double> ParseDouble(std::string_view text) {
  double v = 0.0;
  if (!absl::SimpleAtod(internal::Av(text), &v) || std::isnan(v)) {
    return absl::InvalidArgumentError(internal::StrCat("not a number: '", text, "'"));
  }
  return v;
}

template <typename Int>
absl::StatusOr<Int> ParseInt(std::string_view text) {
  Int v{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    return absl::InvalidArgumentError(
        internal::StrCat("not an integer: '", text, "'"));
  }
  return v;
}

struct Field {
  std::string_view section;
  std::string_view key;
  std::function<std::string(const PipelineConfig&)> get;
  std::function<absl::Status(PipelineConfig&, std::string_view)> set;
};

Field StringField(std::string_view section, std::string_view key,
                  std::string PipelineConfig::*member) {
  return Field{section, key,
               [member](const PipelineConfig& c) { return c.*member; },
               [member](PipelineConfig& c, std::string_view v) {
                 c.*member = std::string(v);
                 return absl::OkStatus();
               }};
}

Field DoubleField(std::string_view section, std::string_view key,
                  double PipelineConfig::*member) {
  return Field{section, key,
               [member](const PipelineConfig& c) {
                 return FormatDouble(c.*member);
               },
               [member](PipelineConfig& c, std::string_view v) {
                 absl::StatusOr<double> d = ParseDouble(v);
                 if (!d.ok()) return d.status();
                 c.*member = *d;
                 return absl::OkStatus();
               }};
}

Field OptionalDoubleField(std::string_view section, std::string_view key,
                          std::optional<double> PipelineConfig::*member,
                          std::string_view unset) {
  return Field{section, key,
               [member, unset](const PipelineConfig& c) {
                 return (c.*member).has_value() ? FormatDouble(*(c.*member))
                                                : std::string(unset);
               },
               [member, unset](PipelineConfig& c, std::string_view v) {
                 if (v == unset) {
                   c.*member = std::nullopt;
                   return absl::OkStatus();
                 }
                 absl::StatusOr<double> d = ParseDouble(v);
                 if (!d.ok()) return d.status();
                 c.*member = *d;
                 return absl::OkStatus();
               }};
}

template <typename Int>
Field IntField(std::string_view section, std::string_view key,
               Int PipelineConfig::*member) {
  return Field{section, key,
               [member](const PipelineConfig& c) {
                 return std::to_string(c.*member);
               },
               [member](PipelineConfig& c, std::string_view v) {
                 absl::StatusOr<Int> i = ParseInt<Int>(v);
                 if (!i.ok()) return i.status();
                 c.*member = *i;
                 return absl::OkStatus();
               }};
}

const std::vector<Field>& Fields() {
  static const auto* fields = new std::vector<Field>{
      StringField("paths", "public_corpus", &PipelineConfig::public_corpus),
      StringField("paths", "private_train", &PipelineConfig::private_train),
      StringField("paths", "private_test", &PipelineConfig::private_test),
      StringField("paths", "lexicon", &PipelineConfig::lexicon),
      StringField("paths", "section_rules", &PipelineConfig::section_rules),
      StringField("paths", "output_dir", &PipelineConfig::output_dir),
      DoubleField("privacy", "eps_n", &PipelineConfig::eps_n),
      OptionalDoubleField("privacy", "delta_n", &PipelineConfig::delta_n,
                          "auto"),
      OptionalDoubleField("privacy", "eps_t", &PipelineConfig::eps_t, "none"),
      OptionalDoubleField("privacy", "delta_t", &PipelineConfig::delta_t,
                          "auto"),
      IntField("generation", "ngram_order", &PipelineConfig::ngram_order),
      DoubleField("generation", "clip", &PipelineConfig::clip),
      IntField("generation", "candidates", &PipelineConfig::candidates),
      DoubleField("generation", "temperature", &PipelineConfig::temperature),
      DoubleField("generation", "repetition_penalty",
                  &PipelineConfig::repetition_penalty),
      DoubleField("generation", "term_bias", &PipelineConfig::term_bias),
      DoubleField("generation", "eos_bias", &PipelineConfig::eos_bias),
      IntField("generation", "max_tokens", &PipelineConfig::max_tokens),
      IntField("generation", "max_retries", &PipelineConfig::max_retries),
      IntField("generation", "max_sentence_chars",
               &PipelineConfig::max_sentence_chars),
      StringField("generation", "instruction_template",
                  &PipelineConfig::instruction_template),
      IntField("generation", "scorer_order", &PipelineConfig::scorer_order),
      DoubleField("generation", "scorer_add_k", &PipelineConfig::scorer_add_k),
      DoubleField("terms", "threshold", &PipelineConfig::term_threshold),
      IntField("terms", "embedding_dim", &PipelineConfig::embedding_dim),
      DoubleField("terms", "rank_fraction", &PipelineConfig::rank_fraction),
      DoubleField("terms", "allocation", &PipelineConfig::allocation),
      DoubleField("terms", "sigma_emb", &PipelineConfig::sigma_emb),
      Field{"terms", "terms_per_section",
            [](const PipelineConfig& c) {
              return c.terms_per_section.has_value()
                         ? std::to_string(*c.terms_per_section)
                         : std::string("auto");
            },
            [](PipelineConfig& c, std::string_view v) {
              if (v == "auto") {
                c.terms_per_section = std::nullopt;
                return absl::OkStatus();
              }
              absl::StatusOr<int> i = ParseInt<int>(v);
              if (!i.ok()) return i.status();
              c.terms_per_section = *i;
              return absl::OkStatus();
            }},
      IntField("run", "seed", &PipelineConfig::seed),
  };
  return *fields;
}

const Field* FindField(std::string_view section, std::string_view key) {
  for (const Field& f : Fields()) {
    if (f.section == section && f.key == key) return &f;
  }
  return nullptr;
}

absl::Status CheckRange(bool ok, std::string_view what) {
  if (ok) return absl::OkStatus();
  return absl::InvalidArgumentError(internal::StrCat("invalid ", what));
}

}  // namespace

absl::StatusOr<double> DefaultDelta(int64_t n) {
  if (n < 3) {
    return absl::InvalidArgumentError(internal::StrCat(
        "default delta needs a private corpus of at least 3 notes, got ", n));
  }
  const double nd = static_cast<double>(n);
  return 1.0 / (nd * std::log(nd));
}

absl::Status ValidatePipelineConfig(const PipelineConfig& c) {
  auto valid_delta = [](const std::optional<double>& d) {
    return !d.has_value() || (*d > 0.0 && *d < 1.0);
  };
  for (absl::Status s : {
           CheckRange(c.eps_n > 0.0, "privacy.eps_n (must be > 0 or inf)"),
           CheckRange(valid_delta(c.delta_n), "privacy.delta_n (0 < delta < 1)"),
           CheckRange(!c.eps_t.has_value() || *c.eps_t > 0.0,
                      "privacy.eps_t (must be > 0 or inf)"),
           CheckRange(valid_delta(c.delta_t), "privacy.delta_t (0 < delta < 1)"),
           CheckRange(c.ngram_order >= 1 && c.ngram_order <= kMaxNgramOrder,
                      "generation.ngram_order"),
           CheckRange(c.clip > 0.0 && std::isfinite(c.clip), "generation.clip"),
           CheckRange(c.candidates >= 1, "generation.candidates"),
           CheckRange(std::isfinite(c.temperature), "generation.temperature"),
           CheckRange(c.repetition_penalty >= 1.0 &&
                          std::isfinite(c.repetition_penalty),
                      "generation.repetition_penalty (>= 1)"),
           CheckRange(std::isfinite(c.term_bias), "generation.term_bias"),
           CheckRange(std::isfinite(c.eos_bias), "generation.eos_bias"),
           CheckRange(c.max_tokens >= 1, "generation.max_tokens"),
           CheckRange(c.max_retries >= 0, "generation.max_retries"),
           CheckRange(c.max_sentence_chars >= 1,
                      "generation.max_sentence_chars"),
           CheckRange(c.scorer_order >= 1 && c.scorer_order <= kMaxNgramOrder,
                      "generation.scorer_order"),
           CheckRange(c.scorer_add_k > 0.0 && std::isfinite(c.scorer_add_k),
                      "generation.scorer_add_k"),
           CheckRange(c.term_threshold > 0.0 && c.term_threshold <= 1.0,
                      "terms.threshold (0 < t <= 1)"),
           CheckRange(c.embedding_dim >= kMinEmbeddingDim,
                      "terms.embedding_dim"),
           CheckRange(c.rank_fraction > 0.0 && c.rank_fraction <= 1.0,
                      "terms.rank_fraction (0 < r <= 1)"),
           CheckRange(c.allocation > 0.0 && c.allocation < 1.0,
                      "terms.allocation (0 < b < 1)"),
           CheckRange(c.sigma_emb >= 0.0 && std::isfinite(c.sigma_emb),
                      "terms.sigma_emb"),
           CheckRange(!c.terms_per_section.has_value() ||
                          *c.terms_per_section >= 1,
                      "terms.terms_per_section"),
       }) {
    if (!s.ok()) return s;
  }
  return absl::OkStatus();
}

absl::StatusOr<PipelineConfig> ParsePipelineConfig(std::istream& in) {
  PipelineConfig config;
  std::string section;
  std::set<std::string> seen;
  std::string line;
  int line_no = 0;
  auto error = [&line_no](std::string_view msg) {
    return absl::InvalidArgumentError(
        internal::StrCat("config line ", line_no, ": ", msg));
  };
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = internal::StripAsciiWhitespace(line);
    if (view.empty() || view.front() == '#') continue;
    if (view.front() == '[') {
      if (view.back() != ']') return error("unterminated section header");
      section = std::string(internal::StripAsciiWhitespace(
          view.substr(1, view.size() - 2)));
      bool known = false;
      for (const Field& f : Fields()) known |= f.section == section;
      if (!known) return error(internal::StrCat("unknown section [", section, "]"));
      continue;
    }
    const size_t eq = view.find('=');
    if (eq == std::string_view::npos) return error("expected key = value");
    const std::string_view key = internal::StripAsciiWhitespace(view.substr(0, eq));
    const std::string_view value =
        internal::StripAsciiWhitespace(view.substr(eq + 1));
    if (section.empty()) return error("key outside of any section");
    const Field* field = FindField(section, key);
    if (field == nullptr) {
      return error(internal::StrCat("unknown key ", section, ".", key));
    }
    if (!seen.insert(internal::StrCat(section, ".", key)).second) {
      return error(internal::StrCat("repeated key ", section, ".", key));
    }
    if (absl::Status s = field->set(config, value); !s.ok()) {
      return error(internal::StrCat(section, ".", key, ": ", s.message()));
    }
  }
  if (absl::Status s = ValidatePipelineConfig(config); !s.ok()) return s;
  return config;
}

absl::StatusOr<PipelineConfig> LoadPipelineConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) return absl::NotFoundError(internal::StrCat("cannot open ", path));
  absl::StatusOr<PipelineConfig> config = ParsePipelineConfig(in);
  if (!config.ok()) {
    return absl::InvalidArgumentError(
        internal::StrCat(path, ": ", config.status().message()));
  }
  const std::filesystem::path base =
      std::filesystem::absolute(path).parent_path();
  for (std::string* p :
       {&config->public_corpus, &config->private_train, &config->private_test,
        &config->lexicon, &config->section_rules, &config->output_dir}) {
    if (!p->empty() && std::filesystem::path(*p).is_relative()) {
      *p = (base / *p).lexically_normal().string();
    }
  }
  return config;
}

std::string FormatPipelineConfig(const PipelineConfig& config) {
  std::string out;
  std::string_view section;
  for (const Field& f : Fields()) {
    if (f.section != section) {
      if (!section.empty()) out += "\n";
      section = f.section;
      internal::StrAppend(&out, "[", section, "]\n");
    }
    internal::StrAppend(&out, f.key, " = ", f.get(config), "\n");
  }
  return out;
}

absl::Status SetConfigValue(PipelineConfig& config, std::string_view key,
                            std::string_view value) {
  const Field* field = nullptr;
  if (const size_t dot = key.find('.'); dot != std::string_view::npos) {
    field = FindField(key.substr(0, dot), key.substr(dot + 1));
  } else {
    for (const Field& f : Fields()) {
      if (f.key != key) continue;
      if (field != nullptr) {
        return absl::InvalidArgumentError(
            internal::StrCat("ambiguous key ", key, "; use section.key"));
      }
      field = &f;
    }
  }
  if (field == nullptr) {
    return absl::InvalidArgumentError(internal::StrCat("unknown key ", key));
  }
  PipelineConfig updated = config;
  if (absl::Status s = field->set(updated, internal::StripAsciiWhitespace(value));
      !s.ok()) {
    return absl::InvalidArgumentError(internal::StrCat(key, ": ", s.message()));
  }
  if (absl::Status s = ValidatePipelineConfig(updated); !s.ok()) return s;
  config = std::move(updated);
  return absl::OkStatus();
}

std::vector<std::string> ConfigKeys() {
  std::vector<std::string> keys;
  for (const Field& f : Fields()) keys.push_back(internal::StrCat(f.section, ".", f.key));
  return keys;
}

}  // namespace dpnote
