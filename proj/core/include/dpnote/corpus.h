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

#ifndef DPNOTE_CORPUS_H_
#define DPNOTE_CORPUS_H_

#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"

namespace dpnote {

// Where a corpus came from. The role decides whether reading it costs privacy
// budget: public data is free, private partitions are charged by the
// accountant.
enum class CorpusRole { kPublic, kPrivateTrain, kPrivateTest, kSynthetic };

std::string_view CorpusRoleName(CorpusRole role);
absl::StatusOr<CorpusRole> ParseCorpusRole(std::string_view name);
inline bool IsPrivate(CorpusRole role) {
  return role == CorpusRole::kPrivateTrain || role == CorpusRole::kPrivateTest;
}

struct Note {
  std::string id;
  // Raw UTF-8 bytes, never normalized on load.
  std::string text;
  // Absent and empty are distinct so that files round-trip exactly.
  std::optional<std::vector<std::string>> labels;

  // Empty notes are accepted but skipped by downstream stages.
  bool degenerate() const { return text.empty(); }

  friend bool operator==(const Note&, const Note&) = default;
};

// An ordered, id-unique collection of notes. Immutable once built.
class Corpus {
 public:
  // Fails on an empty or duplicate id.
  static absl::StatusOr<Corpus> Create(CorpusRole role,
                                       std::vector<Note> notes);

  CorpusRole role() const { return role_; }
  const std::vector<Note>& notes() const { return notes_; }
  size_t size() const { return notes_.size(); }
  bool empty() const { return notes_.empty(); }
  const Note& operator[](size_t i) const { return notes_[i]; }

  // Number of notes with empty text.
  size_t degenerate_count() const;
  // Number of notes without any label; the pipeline warns about these.
  size_t unlabeled_count() const;

  friend bool operator==(const Corpus&, const Corpus&) = default;

 private:
  Corpus(CorpusRole role, std::vector<Note> notes)
      : role_(role), notes_(std::move(notes)) {}

  CorpusRole role_;
  std::vector<Note> notes_;
};

// JSON Lines, one {"id","text","labels"} object per line. Errors carry the
// 1-based line number of the offending record.
absl::StatusOr<Corpus> ParseCorpus(std::istream& in, CorpusRole role);
absl::StatusOr<Corpus> LoadCorpus(const std::string& path, CorpusRole role);

// Canonical form: keys in (id, text, labels) order, labels omitted when
// absent, UTF-8 passed through unescaped, LF after every record.
absl::StatusOr<std::string> SerializeCorpus(const Corpus& corpus);
absl::Status SaveCorpus(const Corpus& corpus, const std::string& path);

}  // namespace dpnote

#endif  // DPNOTE_CORPUS_H_
