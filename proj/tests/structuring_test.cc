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

#include <set>
#include <sstream>

#include "fixtures.h"
#include "gtest/gtest.h"

namespace dpnote {
namespace {

using G = SectionGroup;

std::vector<G> Groups(const SectionedNote& s) {
  std::vector<G> out;
  for (const Section& section : s.sections) out.push_back(section.group);
  return out;
}

TEST(SplitSectionsTest, TwoTitles) {
  Note note{"n", "Chief Complaint: chest pain\nPhysical Exam: clear lungs"};
  SectionedNote s = SplitSections(note);
  EXPECT_EQ(Groups(s),
            (std::vector<G>{G::kClinicalCourseHistory, G::kExaminationsFindings}));
  EXPECT_EQ(s.sections[0].title_text, "Chief Complaint:");
  EXPECT_EQ(s.sections[0].body, " chest pain\n");
  EXPECT_EQ(s.sections[1].body, " clear lungs");
  EXPECT_EQ(s.Render(), note.text);
  EXPECT_FALSE(s.degenerate);
}

TEST(SplitSectionsTest, NoTitlesIsDegenerate) {
  Note note{"n", "the chief complaint was chest pain.\nno titles here"};
  SectionedNote s = SplitSections(note);
  EXPECT_TRUE(s.sections.empty());
  EXPECT_TRUE(s.degenerate);
  EXPECT_EQ(s.residual_prefix, note.text);
  EXPECT_EQ(s.Render(), note.text);
}

TEST(SplitSectionsTest, OneTitlePerGroupInTaxonomyOrder) {
  const std::string text =
      "preamble line\n"
      "Name: ___\n"
      "History of Present Illness:\n74F with dyspnea.\n"
      "Physical Exam:\nlungs clear\n"
      "Pertinent Results:\nwbc 9\n"
      "Brief Hospital Course:\ntreated\n"
      "Discharge Medications:\nfurosemide\n";
  SectionedNote s = SplitSections(Note{"n", text});
  ASSERT_EQ(s.sections.size(), 6u);
  for (size_t i = 0; i < 6; ++i) {
    EXPECT_EQ(s.sections[i].group, kAllSectionGroups[i]);
  }
  EXPECT_EQ(s.residual_prefix, "preamble line\n");
  // Hand-computed spans.
  EXPECT_EQ(s.sections[0].begin, 14u);
  EXPECT_EQ(s.sections[0].end, 24u);
  EXPECT_EQ(s.sections[1].begin, 24u);
  EXPECT_EQ(s.sections[5].end, text.size());
  for (const Section& sec : s.sections) {
    EXPECT_EQ(text.substr(sec.begin, sec.end - sec.begin),
              sec.title_text + sec.body);
  }
  EXPECT_EQ(s.Render(), text);
}

TEST(SplitSectionsTest, ConsecutiveSameGroupMerges) {
  const std::string text =
      "Name: ___\nSex: F\nAllergies: none\nChief Complaint: cough\n";
  SectionedNote s = SplitSections(Note{"n", text});
  ASSERT_EQ(s.sections.size(), 2u);
  EXPECT_EQ(s.sections[0].title_text, "Name:");
  EXPECT_EQ(s.sections[0].body, " ___\nSex: F\nAllergies: none\n");
  EXPECT_EQ(s.Render(), text);
}

TEST(SplitSectionsTest, ReturningGroupFoldsIntoOpenSection) {
  const std::string text =
      "Chief Complaint: a\nPhysical Exam: b\nSocial History: c\n"
      "Pertinent Results: d\n";
  SectionedNote s = SplitSections(Note{"n", text});
  EXPECT_EQ(Groups(s),
            (std::vector<G>{G::kClinicalCourseHistory,
                            G::kExaminationsFindings,
                            G::kLaboratoryImagingResults}));
  EXPECT_EQ(s.sections[1].body, " b\nSocial History: c\n");
  EXPECT_EQ(s.Render(), text);
}

TEST(SplitSectionsTest, InlineMentionsAreNotTitles) {
  const std::string text =
      "Chief Complaint:\nthe physical exam was normal.\n"
      "Physical exam unremarkable.\nSeen with Attending: Dr. X\n"
      "Sexually active.\n";
  SectionedNote s = SplitSections(Note{"n", text});
  ASSERT_EQ(s.sections.size(), 1u);
  EXPECT_EQ(s.sections[0].group, G::kClinicalCourseHistory);
}

TEST(SplitSectionsTest, CaseIndentSpacingAndLineEnd) {
  const std::string text =
      "  CHIEF   complaint\r\nfever\r\n\tphysical\texam :\r\nok";
  SectionedNote s = SplitSections(Note{"n", text});
  EXPECT_EQ(Groups(s), (std::vector<G>{G::kClinicalCourseHistory,
                                       G::kExaminationsFindings}));
  EXPECT_EQ(s.sections[0].begin, 0u);
  EXPECT_EQ(s.sections[0].title_text, "  CHIEF   complaint");
  EXPECT_EQ(s.Render(), text);
}

TEST(SplitSectionsTest, LongestTitleWins) {
  SectionedNote s =
      SplitSections(Note{"n", "Discharge Medications:\naspirin\n"});
  ASSERT_EQ(s.sections.size(), 1u);
  EXPECT_EQ(s.sections[0].group, G::kMedicationsDischargePlan);
  EXPECT_EQ(s.sections[0].title_text, "Discharge Medications:");
}

TEST(SplitSectionsTest, DisplayNamesSplitRenderedNotes) {
  const std::string text =
      "Patient Information:\nsex: f\n\nExaminations & Findings:\nok\n";
  SectionedNote s = SplitSections(Note{"n", text});
  EXPECT_EQ(Groups(s), (std::vector<G>{G::kPatientInformation,
                                       G::kExaminationsFindings}));
}

TEST(SplitSectionsTest, IdempotentOnRenderedOutput) {
  for (const auto& fx : testing::MakeSectionFixture(50, 5)) {
    SectionedNote once = SplitSections(fx.note);
    SectionedNote twice = SplitSections(Note{fx.note.id, once.Render()});
    EXPECT_EQ(once, twice);
  }
}

TEST(SplitSectionsTest, GeneratedFixtureMatchesBookkeeping) {
  for (const auto& fx : testing::MakeSectionFixture(200, 20240613)) {
    SectionedNote s = SplitSections(fx.note);
    ASSERT_EQ(s.Render(), fx.note.text) << fx.note.id;
    EXPECT_EQ(s.residual_prefix, fx.residual_prefix) << fx.note.id;
    ASSERT_EQ(s.sections.size(), fx.sections.size()) << fx.note.id;
    std::set<G> seen;
    size_t last_end = s.residual_prefix.size();
    for (size_t i = 0; i < s.sections.size(); ++i) {
      EXPECT_EQ(s.sections[i].group, fx.sections[i].group) << fx.note.id;
      EXPECT_EQ(s.sections[i].begin, fx.sections[i].begin) << fx.note.id;
      EXPECT_EQ(s.sections[i].end, fx.sections[i].end) << fx.note.id;
      EXPECT_EQ(s.sections[i].begin, last_end);
      last_end = s.sections[i].end;
      EXPECT_TRUE(seen.insert(s.sections[i].group).second);
    }
    EXPECT_LE(s.sections.size(), 6u);
  }
}

TEST(SplitSectionsTest, FixtureUsesEveryTitle) {
  std::set<std::string_view> used;
  for (const auto& fx : testing::MakeSectionFixture(200, 20240613)) {
    std::string lower_text;
    for (char c : fx.note.text) {
      if (c == '\t') c = ' ';
      if (c == ' ' && !lower_text.empty() && lower_text.back() == ' ') continue;
      lower_text += static_cast<char>(std::tolower(c));
    }
    for (const auto& t : testing::TaxonomyTitles()) {
      std::string lower_title(t.title);
      for (char& c : lower_title) c = static_cast<char>(std::tolower(c));
      if (lower_text.find(lower_title) != std::string::npos) used.insert(t.title);
    }
  }
  EXPECT_EQ(used.size(), testing::TaxonomyTitles().size());
}

TEST(GroupOfTitleTest, Lookup) {
  EXPECT_EQ(GroupOfTitle("Brief Hospital Course"), G::kHospitalStayTreatment);
  EXPECT_EQ(GroupOfTitle("Discharge Medications"),
            G::kMedicationsDischargePlan);
  EXPECT_EQ(GroupOfTitle("  discharge   MEDICATIONS "),
            G::kMedicationsDischargePlan);
  EXPECT_EQ(GroupOfTitle("Weather Report"), std::nullopt);
  EXPECT_EQ(GroupOfTitle("Patient Information"), std::nullopt);
}

TEST(GroupOfTitleTest, AgreesWithHandWrittenTable) {
  for (const auto& t : testing::TaxonomyTitles()) {
    EXPECT_EQ(GroupOfTitle(t.title), t.group) << t.title;
  }
}

TEST(TitleRulesTest, DefaultRulesHaveEveryTitleOnce) {
  std::set<std::string> titles;
  for (const TitleRule& r : DefaultTitleRules()) {
    EXPECT_TRUE(titles.insert(r.title).second) << r.title;
  }
  EXPECT_EQ(titles.size(), testing::TaxonomyTitles().size() + 6);
}

TEST(TitleRulesTest, FileRoundTripAndShippedFileMatchesDefaults) {
  const std::string formatted = FormatTitleRules(DefaultTitleRules());
  std::istringstream in(formatted);
  auto parsed = ParseTitleRules(in);
  ASSERT_TRUE(parsed.ok());
  ASSERT_EQ(parsed->size(), DefaultTitleRules().size());
  auto shipped = LoadTitleRules(testing::DataDir() + "/section_rules.tsv");
  ASSERT_TRUE(shipped.ok()) << shipped.status();
  EXPECT_EQ(FormatTitleRules(*shipped), formatted);
}

TEST(TitleRulesTest, ParseErrors) {
  std::istringstream bad_key("nowhere\tTitle\n");
  EXPECT_FALSE(ParseTitleRules(bad_key).ok());
  std::istringstream no_tab("patient_information Title\n");
  EXPECT_FALSE(ParseTitleRules(no_tab).ok());
  std::istringstream empty("# only a comment\n\n");
  EXPECT_FALSE(ParseTitleRules(empty).ok());
}

TEST(TitleRulesTest, CustomRules) {
  std::istringstream in("examinations_findings\tVitals\n");
  auto rules = ParseTitleRules(in);
  ASSERT_TRUE(rules.ok());
  SectionedNote s = SplitSections(Note{"n", "Vitals: ok\nName: x\n"}, *rules);
  ASSERT_EQ(s.sections.size(), 1u);
  EXPECT_EQ(s.sections[0].group, G::kExaminationsFindings);
}

TEST(GroupKeyTest, RoundTrip) {
  for (G g : kAllSectionGroups) {
    EXPECT_EQ(*ParseGroupKey(GroupKey(g)), g);
    EXPECT_FALSE(DisplayName(g).empty());
  }
  EXPECT_EQ(DisplayName(G::kMedicationsDischargePlan),
            "Medications & Discharge Plan");
}

}  // namespace
}  // namespace dpnote
