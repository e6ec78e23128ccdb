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

#include "fixtures.h"

#include <algorithm>
#include <cctype>
#include <random>
#include <sstream>

#include "dpnote/tokenizer.h"

namespace dpnote::testing {
namespace {

using G = SectionGroup;

size_t Pick(std::mt19937_64& gen, size_t n) { return gen() % n; }

// Lines that mention titles without forming one: mid-line, followed by more
// words, or sharing a prefix with a title word.
const std::vector<std::string_view> kBodyLines = {
    "the chief complaint was chest pain radiating to the left arm.",
    "Allergies were reviewed with the family.",
    "Sexually active with one partner.",
    "Services: social work consulted.",
    "Discharge date to be determined by the team.",
    "Seen with Attending: Dr. ___ on rounds.",
    "Physical exam unremarkable apart from mild edema.",
    "Reviewed physical exam: unremarkable.",
    "Social history notable for tobacco use.",
    "Names of outside providers were requested.",
    "  Brief hospital course was uneventful.",
    "Patient denies history of present illness: none reported.",
    "wbc 11.2, hgb 9.8, plt 220; creatinine 1.9 (baseline 1.1).",
    "Started on ceftriaxone and azithromycin for pneumonia.",
    "Continue metoprolol 25 mg daily; hold lisinopril.",
    "Follow up with PCP in 1-2 weeks.",
    "Vitals: T 98.6 HR 88 BP 132/78 RR 16 SpO2 97% RA",
    "No acute distress.",
    "\tIndented note about pertinent results pending.",
    "Résumé of prior care attached — see chart.",
    "",
};

std::string RenderTitle(std::string_view title, std::mt19937_64& gen) {
  std::vector<std::string> words;
  std::istringstream in{std::string(title)};
  for (std::string w; in >> w;) words.push_back(w);
  const size_t style = Pick(gen, 3);
  std::string out;
  for (size_t i = 0; i < words.size(); ++i) {
    if (i > 0) {
      const size_t sep = Pick(gen, 5);
      out += sep == 0 ? "  " : sep == 1 ? "\t" : " ";
    }
    for (char c : words[i]) {
      const auto u = static_cast<unsigned char>(c);
      out += style == 1   ? static_cast<char>(std::toupper(u))
             : style == 2 ? static_cast<char>(std::tolower(u))
                          : c;
    }
  }
  return out;
}

bool IsSpace(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

bool IsPunct(char c) {
  return std::ispunct(static_cast<unsigned char>(c)) != 0;
}

std::vector<std::string> NormalizedTokens(std::string_view text) {
  std::vector<std::string> out;
  size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && IsSpace(text[i])) ++i;
    size_t b = i;
    while (i < text.size() && !IsSpace(text[i])) ++i;
    size_t e = i;
    while (b < e && IsPunct(text[b])) ++b;
    while (e > b && IsPunct(text[e - 1])) --e;
    if (b == e) continue;
    std::string token(text.substr(b, e - b));
    for (char& c : token) {
      c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    out.push_back(std::move(token));
  }
  return out;
}

std::string Join(const std::vector<std::string>& tokens, size_t b, size_t n) {
  std::string out;
  for (size_t i = b; i < b + n; ++i) {
    if (i > b) out += ' ';
    out += tokens[i];
  }
  return out;
}

}  // namespace

std::string DataDir() { return DPNOTE_TEST_DATA_DIR; }

const std::vector<TaxonomyTitle>& TaxonomyTitles() {
  static const std::vector<TaxonomyTitle> kTitles = {
      {"Name", G::kPatientInformation},
      {"Unit No", G::kPatientInformation},
      {"Admission Date", G::kPatientInformation},
      {"Discharge Date", G::kPatientInformation},
      {"Date of Birth", G::kPatientInformation},
      {"Sex", G::kPatientInformation},
      {"Service", G::kPatientInformation},
      {"Allergies", G::kPatientInformation},
      {"Attending", G::kPatientInformation},
      {"Chief Complaint", G::kClinicalCourseHistory},
      {"Major Surgical or Invasive Procedure", G::kClinicalCourseHistory},
      {"History of Present Illness", G::kClinicalCourseHistory},
      {"Review of Systems", G::kClinicalCourseHistory},
      {"Past Medical History", G::kClinicalCourseHistory},
      {"Social History", G::kClinicalCourseHistory},
      {"Family History", G::kClinicalCourseHistory},
      {"Physical Exam", G::kExaminationsFindings},
      {"Pertinent Results", G::kLaboratoryImagingResults},
      {"Brief Hospital Course", G::kHospitalStayTreatment},
      {"Medications on Admission", G::kMedicationsDischargePlan},
      {"Discharge Medications", G::kMedicationsDischargePlan},
      {"Discharge Disposition", G::kMedicationsDischargePlan},
      {"Discharge Diagnosis", G::kMedicationsDischargePlan},
      {"Discharge Condition", G::kMedicationsDischargePlan},
      {"Discharge Instructions", G::kMedicationsDischargePlan},
      {"Followup Instructions", G::kMedicationsDischargePlan},
  };
  return kTitles;
}

std::vector<SectionFixtureNote> MakeSectionFixture(int count, uint64_t seed) {
  std::mt19937_64 gen(seed);
  const std::vector<TaxonomyTitle>& titles = TaxonomyTitles();
  std::vector<SectionFixtureNote> out;
  for (int k = 0; k < count; ++k) {
    const std::string nl = Pick(gen, 6) == 0 ? "\r\n" : "\n";
    std::string text;
    for (size_t p = Pick(gen, 3); p > 0; --p) {
      text += kBodyLines[Pick(gen, kBodyLines.size())];
      text += nl;
    }

    struct Raw {
      SectionGroup group;
      size_t begin;
    };
    std::vector<Raw> raw;
    const size_t raw_count = 1 + Pick(gen, 8);
    for (size_t r = 0; r < raw_count; ++r) {
      const TaxonomyTitle& t =
          r == 0 ? titles[static_cast<size_t>(k) % titles.size()]
                 : titles[Pick(gen, titles.size())];
      raw.push_back(Raw{t.group, text.size()});
      const size_t indent = Pick(gen, 4);
      text += indent == 1 ? " " : indent == 2 ? "  " : indent == 3 ? "\t" : "";
      text += RenderTitle(t.title, gen);
      switch (Pick(gen, 4)) {
        case 0:
          text += ": ";
          text += kBodyLines[Pick(gen, kBodyLines.size() - 1)];
          text += nl;
          break;
        case 1:
          text += ":" + nl;
          break;
        case 2:
          text += " :" + nl;
          break;
        default:
          text += nl;
          break;
      }
      for (size_t b = Pick(gen, 4); b > 0; --b) {
        text += kBodyLines[Pick(gen, kBodyLines.size())];
        text += nl;
      }
    }
    if (Pick(gen, 4) == 0) {
      while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) {
        text.pop_back();
      }
    }

    SectionFixtureNote note;
    note.note.id = "sec-" + std::to_string(k);
    note.note.text = text;
    note.residual_prefix = text.substr(0, raw.front().begin);
    std::vector<bool> seen(6, false);
    for (size_t r = 0; r < raw.size(); ++r) {
      const size_t end = r + 1 < raw.size() ? raw[r + 1].begin : text.size();
      const auto g = static_cast<size_t>(raw[r].group);
      if (seen[g]) {
        // A group that already has a section is folded into the open one.
        note.sections.back().end = end;
        continue;
      }
      seen[g] = true;
      note.sections.push_back(ExpectedSection{raw[r].group, raw[r].begin, end});
    }
    out.push_back(std::move(note));
  }
  return out;
}

std::vector<std::string> TermFixtureLexicon() {
  return {"diarrhea",
          "pneumonia",
          "pneumonitis",
          "hypertension",
          "hypotension",
          "chest pain",
          "shortness of breath",
          "atrial fibrillation",
          "acute kidney injury",
          "heart failure",
          "congestive heart failure",
          "diabetes mellitus",
          "urinary tract infection",
          "cellulitis",
          "anemia",
          "sepsis",
          "fever",
          "cough",
          "nausea",
          "vomiting",
          "headache",
          "edema",
          "creatinine",
          "hemoglobin",
          "troponin",
          "furosemide",
          "metoprolol",
          "warfarin",
          "ceftriaxone",
          "acute renal failure"};
}

std::vector<std::string> TermFixtureSentences(int count, uint64_t seed) {
  const std::vector<std::string> lexicon = TermFixtureLexicon();
  const std::map<std::string, std::vector<std::string>> variants = {
      {"diarrhea", {"diarrhoea", "Diarrhea", "diarrhea,"}},
      {"pneumonia", {"pnemonia", "pneumonias", "(pneumonia)"}},
      {"hypertension", {"hypertensive", "HTN", "Hypertension."}},
      {"hemoglobin", {"haemoglobin", "hemoglobin:"}},
      {"edema", {"oedema", "edematous", "Edema;"}},
      {"anemia", {"anaemia", "anemic"}},
      {"creatinine", {"creatinin", "Creatinine"}},
      {"furosemide", {"frusemide", "furosemid"}},
      {"atrial fibrillation", {"atrial fibrilation", "Atrial  Fibrillation"}},
      {"shortness of breath", {"short of breath", "shortness-of breath"}},
      {"heart failure", {"heart failures", "cardiac failure"}},
      {"congestive heart failure", {"congestive heart-failure"}},
      {"urinary tract infection", {"urinary tract infections", "UTI"}},
      {"acute kidney injury", {"acute kidney injuries", "acute kidney"}},
      {"chest pain", {"chest pains", "chest-pain", "CHEST PAIN"}},
  };
  const std::vector<std::string> filler = {
      "patient", "reports", "with",  "noted",   "denies",  "and",
      "history", "of",      "on",    "given",   "started", "-",
      "no",      "new",     "acute", "failure", "breath",  "pain"};
  std::mt19937_64 gen(seed);
  std::vector<std::string> out;
  for (int s = 0; s < count; ++s) {
    std::string sentence;
    const size_t mentions = 1 + Pick(gen, 4);
    for (size_t m = 0; m < mentions; ++m) {
      for (size_t f = Pick(gen, 4); f > 0; --f) {
        sentence += filler[Pick(gen, filler.size())] + " ";
      }
      const std::string& term = lexicon[Pick(gen, lexicon.size())];
      auto it = variants.find(term);
      if (it != variants.end() && Pick(gen, 2) == 0) {
        sentence += it->second[Pick(gen, it->second.size())];
      } else {
        sentence += term;
      }
      sentence += Pick(gen, 3) == 0 ? ", " : " ";
    }
    sentence += filler[Pick(gen, filler.size())] + ".";
    out.push_back(std::move(sentence));
  }
  return out;
}

std::vector<std::string> BruteForceExtract(
    std::string_view text, const std::vector<std::string>& lexicon,
    double threshold, SimilarityFn similarity) {
  std::vector<std::string> normalized;
  size_t max_len = 0;
  for (const std::string& surface : lexicon) {
    std::vector<std::string> tokens = NormalizedTokens(surface);
    max_len = std::max(max_len, tokens.size());
    normalized.push_back(Join(tokens, 0, tokens.size()));
  }
  const std::vector<std::string> tokens = NormalizedTokens(text);

  struct Hit {
    size_t begin, len, entry;
  };
  std::vector<Hit> hits;
  for (size_t b = 0; b < tokens.size(); ++b) {
    for (size_t n = 1; n <= max_len && b + n <= tokens.size(); ++n) {
      const std::string window = Join(tokens, b, n);
      double best = -1.0;
      size_t best_entry = 0;
      for (size_t e = 0; e < normalized.size(); ++e) {
        const double sim = similarity(window, normalized[e]);
        if (sim > best) {
          best = sim;
          best_entry = e;
        }
      }
      if (best >= threshold) hits.push_back(Hit{b, n, best_entry});
    }
  }
  std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) {
    return a.len != b.len ? a.len > b.len : a.begin < b.begin;
  });
  std::vector<bool> used(tokens.size(), false);
  std::vector<Hit> chosen;
  for (const Hit& h : hits) {
    bool free = true;
    for (size_t i = h.begin; i < h.begin + h.len; ++i) free = free && !used[i];
    if (!free) continue;
    for (size_t i = h.begin; i < h.begin + h.len; ++i) used[i] = true;
    chosen.push_back(h);
  }
  std::sort(chosen.begin(), chosen.end(),
            [](const Hit& a, const Hit& b) { return a.begin < b.begin; });
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const Hit& h : chosen) {
    if (seen.insert(normalized[h.entry]).second) {
      out.push_back(lexicon[h.entry]);
    }
  }
  return out;
}

StringCounts CountNgramsOracle(const std::vector<NoteSections>& notes,
                               int order,
                               const std::set<std::string>* vocabulary,
                               const std::set<StringContext>* universe) {
  StringCounts counts;
  const auto width = static_cast<size_t>(order - 1);
  for (const NoteSections& note : notes) {
    NoteSections sorted = note;
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const auto& a, const auto& b) {
                       return static_cast<int>(a.first) <
                              static_cast<int>(b.first);
                     });
    std::vector<std::string> previous;
    for (const auto& [group, body] : sorted) {
      std::vector<std::string> words = Tokenize(body);
      if (vocabulary != nullptr) {
        for (std::string& w : words) {
          if (!vocabulary->contains(w)) w = "<unk>";
        }
      }
      std::vector<std::string> seq(width, "<bos>");
      const size_t take = std::min(width, previous.size());
      for (size_t i = 0; i < take; ++i) {
        seq[width - take + i] = previous[previous.size() - take + i];
      }
      seq.insert(seq.end(), words.begin(), words.end());
      seq.push_back("<eos>");
      for (size_t t = width; t < seq.size(); ++t) {
        for (size_t w = 0; w <= width; ++w) {
          std::vector<std::string> context(seq.begin() + (t - w),
                                           seq.begin() + t);
          if (universe != nullptr &&
              !universe->contains(StringContext{group, context})) {
            continue;
          }
          counts[StringNgram{group, std::move(context), seq[t]}] += 1.0;
        }
      }
      previous = std::move(words);
    }
  }
  return counts;
}

std::vector<Note> MakeSectionedNotes(int count, uint64_t seed,
                                     std::string_view id_prefix) {
  const std::vector<std::vector<std::string_view>> pools = {
      {"sex: f", "sex: m", "service: medicine", "service: cardiology",
       "allergies: penicillin", "allergies: no known drug allergies"},
      {"presented with chest pain and shortness of breath.",
       "history of hypertension and diabetes mellitus.",
       "reports fever and cough for three days.",
       "lives alone, former smoker."},
      {"lungs with crackles at the bases.", "heart regular rate and rhythm.",
       "abdomen soft, nontender.", "trace edema in both legs."},
      {"creatinine 1.9, hemoglobin 9.8.", "chest x-ray with right lower lobe "
       "opacity.", "troponin negative twice.", "urinalysis positive."},
      {"treated with ceftriaxone for pneumonia.",
       "diuresed with furosemide.", "rate controlled with metoprolol.",
       "transfused one unit for anemia."},
      {"discharge home with services.", "continue furosemide 40 mg daily.",
       "follow up with cardiology in two weeks.",
       "discharge diagnosis: heart failure."},
  };
  std::mt19937_64 gen(seed);
  std::vector<Note> notes;
  for (int k = 0; k < count; ++k) {
    std::string text;
    for (SectionGroup group : kAllSectionGroups) {
      const auto g = static_cast<size_t>(group);
      if (!text.empty()) text += "\n";
      text += std::string(DisplayName(group)) + ":\n";
      for (size_t s = 1 + Pick(gen, 3); s > 0; --s) {
        text += std::string(pools[g][Pick(gen, pools[g].size())]) + " ";
      }
      text += "\n";
    }
    notes.push_back(Note{std::string(id_prefix) + std::to_string(k), text,
                         std::vector<std::string>{"I50"}});
  }
  return notes;
}

}  // namespace dpnote::testing
