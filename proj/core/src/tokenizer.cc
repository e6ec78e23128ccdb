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

#include "dpnote/tokenizer.h"

#include "absl/strings/ascii.h"
#include "strings.h"

namespace dpnote {
namespace {

inline bool IsWordByte(unsigned char c) {
  return absl::ascii_isalnum(c) || c >= 0x80;
}

inline bool AttachesLeft(std::string_view token) {
  return token.size() == 1 &&
         std::string_view(".,;:!?)]%").find(token[0]) != std::string_view::npos;
}

inline bool AttachesRight(std::string_view token) {
  return token == "(" || token == "[";
}

}  // namespace

std::vector<std::string> Tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  size_t i = 0;
  while (i < text.size()) {
    const unsigned char c = static_cast<unsigned char>(text[i]);
    if (absl::ascii_isspace(c)) {
      ++i;
    } else if (IsWordByte(c)) {
      const size_t start = i;
      while (i < text.size() && IsWordByte(static_cast<unsigned char>(text[i]))) {
        ++i;
      }
      tokens.push_back(internal::AsciiStrToLower(text.substr(start, i - start)));
    } else {
      tokens.emplace_back(1, static_cast<char>(c));
      ++i;
    }
  }
  return tokens;
}

std::string Detokenize(std::span<const std::string> tokens) {
  std::string out;
  bool glue_next = true;
  for (const std::string& token : tokens) {
    if (!glue_next && !AttachesLeft(token)) out += ' ';
    out += token;
    glue_next = AttachesRight(token);
  }
  return out;
}

}  // namespace dpnote
