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

#ifndef DPNOTE_STRUCTURING_H_
#define DPNOTE_STRUCTURING_H_

#include <array>
#include <cstdint>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "dpnote/corpus.h"

namespace dpnote {

// The six standardized section groups, in taxonomy order.
enum class SectionGroup : uint8_t {
  kPatientInformation,
  kClinicalCourseHistory,
  kExaminationsFindings,
  kLaboratoryImagingResults,
  kHospitalStayTreatment,
  kMedicationsDischargePlan,
};

inline constexpr std::array<SectionGroup, 6> kAllSectionGroups = {
    SectionGroup::kPatientInformation,
    SectionGroup::kClinicalCourseHistory,
    SectionGroup::kExaminationsFindings,
    SectionGroup::kLaboratoryImagingResults,
    SectionGroup::kHospitalStayTreatment,
    SectionGroup::kMedicationsDischargePlan,
};

inline int GroupIndex(SectionGroup group) { return static_cast<int>(group); }

// "Patient Information", "Clinical Course & History", ...
std::string_view DisplayName(SectionGroup group);
// Stable identifier used in rules files and serialized models, e.g.
// "patient_information".
std::string_view GroupKey(SectionGroup group);
absl::StatusOr<SectionGroup> ParseGroupKey(std::string_view key);

// A section title recognized at the start of a line, optionally indented,
// followed by ':' or the end of the line. Matching ignores ASCII case and
// accepts any run of spaces or tabs between the title's words.
struct TitleRule {
  std::string title;
  SectionGroup group;
};

// The curated clinical title taxonomy plus the six group display names (the
// latter so that rendered synthetic notes can be split again).
const std::vector<TitleRule>& DefaultTitleRules();

// Lines of "<group-key>\t<title>"; blank lines and '#' comments are skipped.
absl::StatusOr<std::vector<TitleRule>> ParseTitleRules(std::istream& in);
absl::StatusOr<std::vector<TitleRule>> LoadTitleRules(const std::string& path);
std::string FormatTitleRules(std::span<const TitleRule> rules);

// Case-insensitive, whitespace-normalized lookup of a title in the default
// taxonomy (display names excluded).
std::optional<SectionGroup> GroupOfTitle(std::string_view title);

struct Section {
  SectionGroup group;
  // The title as it appears in the text, including indentation and colon.
  std::string title_text;
  // Everything after the title up to the next section. When several raw
  // sections were merged, later titles are part of the body.
  std::string body;
  // [begin, end) byte span covering title_text + body.
  size_t begin = 0;
  size_t end = 0;

  friend bool operator==(const Section&, const Section&) = default;
};

struct SectionedNote {
  std::string note_id;
  // Text preceding the first detected title.
  std::string residual_prefix;
  // Ordered by position, at most one per group.
  std::vector<Section> sections;
  // No title was detected.
  bool degenerate = false;

  const Section* Find(SectionGroup group) const;
  // residual_prefix followed by every title and body; equals the source text.
  std::string Render() const;

  friend bool operator==(const SectionedNote&, const SectionedNote&) = default;
};

// Greedy rule-based segmentation. Each detected title opens a raw section
// that runs to the next title. Consecutive raw sections of the same group
// merge; a title whose group already closed earlier in the note is folded
// into the current section so that every group appears at most once and the
// byte spans stay contiguous.
SectionedNote SplitSections(const Note& note, std::span<const TitleRule> rules);
inline SectionedNote SplitSections(const Note& note) {
  return SplitSections(note, DefaultTitleRules());
}

}  // namespace dpnote

#endif  // DPNOTE_STRUCTURING_H_
