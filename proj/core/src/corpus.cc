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

#include "dpnote/corpus.h"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "absl/strings/str_cat.h"
#include "json.hpp"
#include "strings.h"

namespace dpnote {

using ordered_json = nlohmann::ordered_json;

std::string_view CorpusRoleName(CorpusRole role) {
  switch (role) {
    case CorpusRole::kPublic:
      return "public";
    case CorpusRole::kPrivateTrain:
      return "private-train";
    case CorpusRole::kPrivateTest:
      return "private-test";
    case CorpusRole::kSynthetic:
      return "synthetic";
  }
  return "unknown";
}

absl::StatusOr<CorpusRole> ParseCorpusRole(std::string_view name) {
  for (CorpusRole role : {CorpusRole::kPublic, CorpusRole::kPrivateTrain,
                          CorpusRole::kPrivateTest, CorpusRole::kSynthetic}) {
    if (CorpusRoleName(role) == name) return role;
  }
  return absl::InvalidArgumentError(
      internal::StrCat("unknown corpus role '", name, "'"));
}

absl::StatusOr<Corpus> Corpus::Create(CorpusRole role,
                                      std::vector<Note> notes) {
  std::unordered_map<std::string_view, size_t> seen;
  for (size_t i = 0; i < notes.size(); ++i) {
    if (notes[i].id.empty()) {
      return absl::InvalidArgumentError(
          internal::StrCat("note ", i, " has an empty id"));
    }
    auto [it, inserted] = seen.emplace(notes[i].id, i);
    if (!inserted) {
      return absl::InvalidArgumentError(
          internal::StrCat("duplicate note id '", notes[i].id, "' at index ", i,
                       " (first seen at index ", it->second, ")"));
    }
  }
  return Corpus(role, std::move(notes));
}

size_t Corpus::degenerate_count() const {
  return std::count_if(notes_.begin(), notes_.end(),
                       [](const Note& n) { return n.degenerate(); });
}

size_t Corpus::unlabeled_count() const {
  return std::count_if(notes_.begin(), notes_.end(), [](const Note& n) {
    return !n.labels.has_value() || n.labels->empty();
  });
}

namespace {

absl::StatusOr<Note> ParseRecord(const std::string& line, size_t line_no) {
  auto fail = [line_no](std::string_view why) {
    return absl::InvalidArgumentError(
        internal::StrCat("line ", line_no, ": ", why));
  };
  ordered_json record;
  try {
    record = ordered_json::parse(line);
  } catch (const ordered_json::parse_error& e) {
    return fail(internal::StrCat("malformed JSON: ", e.what()));
  }
  if (!record.is_object()) return fail("record is not a JSON object");
  for (const auto& [key, value] : record.items()) {
    if (key != "id" && key != "text" && key != "labels") {
      return fail(internal::StrCat("unexpected key '", key, "'"));
    }
  }
  Note note;
  auto id = record.find("id");
  if (id == record.end() || !id->is_string()) {
    return fail("missing string field 'id'");
  }
  note.id = id->get<std::string>();
  if (note.id.empty()) return fail("empty id");
  auto text = record.find("text");
  if (text == record.end() || !text->is_string()) {
    return fail("missing string field 'text'");
  }
  note.text = text->get<std::string>();
  if (auto labels = record.find("labels"); labels != record.end()) {
    if (!labels->is_array()) return fail("'labels' must be an array");
    std::vector<std::string> codes;
    for (const auto& code : *labels) {
      if (!code.is_string()) return fail("'labels' entries must be strings");
      codes.push_back(code.get<std::string>());
    }
    note.labels = std::move(codes);
  }
  return note;
}

}  // namespace

absl::StatusOr<Corpus> ParseCorpus(std::istream& in, CorpusRole role) {
  std::vector<Note> notes;
  std::unordered_map<std::string, size_t> first_line;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    absl::StatusOr<Note> note = ParseRecord(line, line_no);
    if (!note.ok()) return note.status();
    auto [it, inserted] = first_line.emplace(note->id, line_no);
    if (!inserted) {
      return absl::InvalidArgumentError(
          internal::StrCat("line ", line_no, ": duplicate id '", note->id,
                       "' (first defined on line ", it->second, ")"));
    }
    notes.push_back(*std::move(note));
  }
  if (line_no == 0) return absl::InvalidArgumentError("empty corpus file");
  return Corpus::Create(role, std::move(notes));
}

absl::StatusOr<Corpus> LoadCorpus(const std::string& path, CorpusRole role) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return absl::NotFoundError(internal::StrCat("cannot open ", path));
  absl::StatusOr<Corpus> corpus = ParseCorpus(in, role);
  if (!corpus.ok()) {
    return absl::Status(corpus.status().code(),
                        internal::StrCat(path, ": ", corpus.status().message()));
  }
  return corpus;
}

absl::StatusOr<std::string> SerializeCorpus(const Corpus& corpus) {
  std::string out;
  for (const Note& note : corpus.notes()) {
    ordered_json record;
    record["id"] = note.id;
    record["text"] = note.text;
    if (note.labels.has_value()) record["labels"] = *note.labels;
    try {
      out += record.dump();
    } catch (const ordered_json::type_error& e) {
      return absl::InvalidArgumentError(
          internal::StrCat("note '", note.id, "': ", e.what()));
    }
    out += '\n';
  }
  return out;
}

absl::Status SaveCorpus(const Corpus& corpus, const std::string& path) {
  absl::StatusOr<std::string> bytes = SerializeCorpus(corpus);
  if (!bytes.ok()) return bytes.status();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) return absl::UnavailableError(internal::StrCat("cannot write ", path));
  out.write(bytes->data(), static_cast<std::streamsize>(bytes->size()));
  out.close();
  if (!out) return absl::DataLossError(internal::StrCat("write failed: ", path));
  return absl::OkStatus();
}

}  // namespace dpnote
