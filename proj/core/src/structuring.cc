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

#include "dpnote/structuring.h"

#include <algorithm>
#include <bitset>
#include <fstream>
#include <sstream>

#include "absl/strings/ascii.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_split.h"
#include "absl/strings/strip.h"
#include "strings.h"

namespace dpnote {
namespace {

using G = SectionGroup;

struct TaxonomyRow {
  G group;
  std::string_view title;
};

constexpr TaxonomyRow kTaxonomy[] = {
    {G::kPatientInformation, "Name"},
    {G::kPatientInformation, "Unit No"},
    {G::kPatientInformation, "Admission Date"},
    {G::kPatientInformation, "Discharge Date"},
    {G::kPatientInformation, "Date of Birth"},
    {G::kPatientInformation, "Sex"},
    {G::kPatientInformation, "Service"},
    {G::kPatientInformation, "Allergies"},
    {G::kPatientInformation, "Attending"},
    {G::kClinicalCourseHistory, "Chief Complaint"},
    {G::kClinicalCourseHistory, "Major Surgical or Invasive Procedure"},
    {G::kClinicalCourseHistory, "History of Present Illness"},
    {G::kClinicalCourseHistory, "Review of Systems"},
    {G::kClinicalCourseHistory, "Past Medical History"},
    {G::kClinicalCourseHistory, "Social History"},
    {G::kClinicalCourseHistory, "Family History"},
    {G::kExaminationsFindings, "Physical Exam"},
    {G::kLaboratoryImagingResults, "Pertinent Results"},
    {G::kHospitalStayTreatment, "Brief Hospital Course"},
    {G::kMedicationsDischargePlan, "Medications on Admission"},
    {G::kMedicationsDischargePlan, "Discharge Medications"},
    {G::kMedicationsDischargePlan, "Discharge Disposition"},
    {G::kMedicationsDischargePlan, "Discharge Diagnosis"},
    {G::kMedicationsDischargePlan, "Discharge Condition"},
    {G::kMedicationsDischargePlan, "Discharge Instructions"},
    {G::kMedicationsDischargePlan, "Followup Instructions"},
};

inline bool IsHorizontalSpace(char c) { return c == ' ' || c == '\t'; }

std::string NormalizeTitle(std::string_view title) {
  std::string out;
  for (absl::string_view word : absl::StrSplit(
           internal::Av(title), absl::ByAnyChar(" \t\r\n"), absl::SkipEmpty())) {
    if (!out.empty()) out += ' ';
    out += absl::AsciiStrToLower(word);
  }
  return out;
}

struct CompiledRule {
  std::vector<std::string> words;  // lowercase
  size_t length;                   // normalized title length
  SectionGroup group;
  size_t order;
};

std::vector<CompiledRule> Compile(std::span<const TitleRule> rules) {
  std::vector<CompiledRule> compiled;
  for (size_t i = 0; i < rules.size(); ++i) {
    const std::string normalized = NormalizeTitle(rules[i].title);
    if (normalized.empty()) continue;
    compiled.push_back(CompiledRule{
        absl::StrSplit(normalized, ' '), normalized.size(), rules[i].group, i});
  }
  // Longer titles first so that a title never shadows a longer one sharing
  // its prefix.
  std::stable_sort(compiled.begin(), compiled.end(),
                   [](const CompiledRule& a, const CompiledRule& b) {
                     return a.length > b.length;
                   });
  return compiled;
}

// Tries to match `rule` at text[pos]. On success returns the end of the title
// (past the colon when there is one).
std::optional<size_t> MatchAt(std::string_view text, size_t pos,
                              const CompiledRule& rule) {
  size_t i = pos;
  for (size_t w = 0; w < rule.words.size(); ++w) {
    if (w > 0) {
      if (i >= text.size() || !IsHorizontalSpace(text[i])) return std::nullopt;
      while (i < text.size() && IsHorizontalSpace(text[i])) ++i;
    }
    const std::string& word = rule.words[w];
    if (text.size() - i < word.size()) return std::nullopt;
    for (size_t k = 0; k < word.size(); ++k) {
      if (absl::ascii_tolower(static_cast<unsigned char>(text[i + k])) !=
          word[k]) {
        return std::nullopt;
      }
    }
    i += word.size();
  }
  const size_t title_end = i;
  while (i < text.size() && IsHorizontalSpace(text[i])) ++i;
  if (i < text.size() && text[i] == ':') return i + 1;
  if (i == text.size() || text[i] == '\n' ||
      (text[i] == '\r' && i + 1 < text.size() && text[i + 1] == '\n')) {
    return title_end;
  }
  return std::nullopt;
}

struct RawSection {
  SectionGroup group;
  size_t begin;
  size_t title_end;
};

}  // namespace

std::string_view DisplayName(SectionGroup group) {
  switch (group) {
    case G::kPatientInformation:
      return "Patient Information";
    case G::kClinicalCourseHistory:
      return "Clinical Course & History";
    case G::kExaminationsFindings:
      return "Examinations & Findings";
    case G::kLaboratoryImagingResults:
      return "Laboratory & Imaging Results";
    case G::kHospitalStayTreatment:
      return "Hospital Stay & Treatment";
    case G::kMedicationsDischargePlan:
      return "Medications & Discharge Plan";
  }
  return "";
}

std::string_view GroupKey(SectionGroup group) {
  switch (group) {
    case G::kPatientInformation:
      return "patient_information";
    case G::kClinicalCourseHistory:
      return "clinical_course_history";
    case G::kExaminationsFindings:
      return "examinations_findings";
    case G::kLaboratoryImagingResults:
      return "laboratory_imaging_results";
    case G::kHospitalStayTreatment:
      return "hospital_stay_treatment";
    case G::kMedicationsDischargePlan:
      return "medications_discharge_plan";
  }
  return "";
}

absl::StatusOr<SectionGroup> ParseGroupKey(std::string_view key) {
  for (SectionGroup group : kAllSectionGroups) {
    if (GroupKey(group) == key) return group;
  }
  return absl::InvalidArgumentError(
      internal::StrCat("unknown section group key '", key, "'"));
}

const std::vector<TitleRule>& DefaultTitleRules() {
  static const std::vector<TitleRule>* rules = [] {
    auto* r = new std::vector<TitleRule>();
    for (const TaxonomyRow& row : kTaxonomy) {
      r->push_back(TitleRule{std::string(row.title), row.group});
    }
    for (SectionGroup group : kAllSectionGroups) {
      r->push_back(TitleRule{std::string(DisplayName(group)), group});
    }
    return r;
  }();
  return *rules;
}

absl::StatusOr<std::vector<TitleRule>> ParseTitleRules(std::istream& in) {
  std::vector<TitleRule> rules;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = internal::StripTrailingAsciiWhitespace(line);
    if (internal::StripLeadingAsciiWhitespace(view).empty() ||
        internal::StartsWith(internal::StripLeadingAsciiWhitespace(view), "#")) {
      continue;
    }
    std::vector<std::string_view> fields = internal::SplitChar(view, '\t');
    if (fields.size() != 2) {
      return absl::InvalidArgumentError(internal::StrCat(
          "rules line ", line_no, ": expected <group-key>TAB<title>"));
    }
    absl::StatusOr<SectionGroup> group = ParseGroupKey(fields[0]);
    if (!group.ok()) {
      return absl::InvalidArgumentError(
          internal::StrCat("rules line ", line_no, ": ", group.status().message()));
    }
    if (NormalizeTitle(fields[1]).empty()) {
      return absl::InvalidArgumentError(
          internal::StrCat("rules line ", line_no, ": empty title"));
    }
    rules.push_back(TitleRule{std::string(fields[1]), *group});
  }
  if (rules.empty()) return absl::InvalidArgumentError("rules file is empty");
  return rules;
}

absl::StatusOr<std::vector<TitleRule>> LoadTitleRules(const std::string& path) {
  std::ifstream in(path);
  if (!in) return absl::NotFoundError(internal::StrCat("cannot open ", path));
  return ParseTitleRules(in);
}

std::string FormatTitleRules(std::span<const TitleRule> rules) {
  std::string out;
  for (const TitleRule& rule : rules) {
    internal::StrAppend(&out, GroupKey(rule.group), "\t", rule.title, "\n");
  }
  return out;
}

std::optional<SectionGroup> GroupOfTitle(std::string_view title) {
  const std::string normalized = NormalizeTitle(title);
  for (const TaxonomyRow& row : kTaxonomy) {
    if (NormalizeTitle(row.title) == normalized) return row.group;
  }
  return std::nullopt;
}

const Section* SectionedNote::Find(SectionGroup group) const {
  for (const Section& section : sections) {
    if (section.group == group) return &section;
  }
  return nullptr;
}

std::string SectionedNote::Render() const {
  std::string out = residual_prefix;
  for (const Section& section : sections) {
    out += section.title_text;
    out += section.body;
  }
  return out;
}

SectionedNote SplitSections(const Note& note, std::span<const TitleRule> rules) {
  const std::vector<CompiledRule> compiled = Compile(rules);
  std::string_view text = note.text;

  std::vector<RawSection> raw;
  for (size_t line_start = 0; line_start <= text.size();) {
    size_t pos = line_start;
    while (pos < text.size() && IsHorizontalSpace(text[pos])) ++pos;
    for (const CompiledRule& rule : compiled) {
      if (std::optional<size_t> end = MatchAt(text, pos, rule)) {
        raw.push_back(RawSection{rule.group, line_start, *end});
        break;
      }
    }
    const size_t newline = text.find('\n', line_start);
    if (newline == std::string_view::npos) break;
    line_start = newline + 1;
  }

  SectionedNote out;
  out.note_id = note.id;
  if (raw.empty()) {
    out.residual_prefix = note.text;
    out.degenerate = true;
    return out;
  }
  out.residual_prefix = std::string(text.substr(0, raw.front().begin));

  struct Span {
    SectionGroup group;
    size_t begin;
    size_t title_end;
    size_t end;
  };
  std::vector<Span> merged;
  std::bitset<kAllSectionGroups.size()> seen;
  for (size_t i = 0; i < raw.size(); ++i) {
    const size_t end = i + 1 < raw.size() ? raw[i + 1].begin : text.size();
    const bool repeat = seen.test(GroupIndex(raw[i].group));
    if (!merged.empty() && repeat) {
      merged.back().end = end;
      continue;
    }
    seen.set(GroupIndex(raw[i].group));
    merged.push_back(Span{raw[i].group, raw[i].begin, raw[i].title_end, end});
  }
  for (const Span& span : merged) {
    out.sections.push_back(Section{
        span.group,
        std::string(text.substr(span.begin, span.title_end - span.begin)),
        std::string(text.substr(span.title_end, span.end - span.title_end)),
        span.begin, span.end});
  }
  return out;
}

}  // namespace dpnote
