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

// Thin adapters over absl string utilities. Some absl builds ship their own
// string_view type instead of aliasing std::string_view, so everything that
// crosses into absl goes through here.

#ifndef DPNOTE_SRC_STRINGS_H_
#define DPNOTE_SRC_STRINGS_H_

#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "absl/strings/ascii.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_split.h"
#include "absl/strings/string_view.h"
#include "absl/strings/strip.h"

namespace dpnote::internal {

inline absl::string_view Av(std::string_view s) { return {s.data(), s.size()}; }
inline std::string_view Sv(absl::string_view s) { return {s.data(), s.size()}; }

template <typename T>
decltype(auto) Bridge(const T& v) {
  if constexpr (std::is_same_v<T, std::string_view>) {
    return Av(v);
  } else {
    return (v);
  }
}

template <typename... Args>
std::string StrCat(const Args&... args) {
  return absl::StrCat(Bridge(args)...);
}

template <typename... Args>
void StrAppend(std::string* out, const Args&... args) {
  absl::StrAppend(out, Bridge(args)...);
}

inline std::string_view StripAsciiWhitespace(std::string_view s) {
  return Sv(absl::StripAsciiWhitespace(Av(s)));
}
inline std::string_view StripLeadingAsciiWhitespace(std::string_view s) {
  return Sv(absl::StripLeadingAsciiWhitespace(Av(s)));
}
inline std::string_view StripTrailingAsciiWhitespace(std::string_view s) {
  return Sv(absl::StripTrailingAsciiWhitespace(Av(s)));
}
inline std::string AsciiStrToLower(std::string_view s) {
  return absl::AsciiStrToLower(Av(s));
}
inline bool StartsWith(std::string_view s, std::string_view prefix) {
  return s.substr(0, prefix.size()) == prefix;
}

// Splits on a single character, keeping empty fields.
inline std::vector<std::string_view> SplitChar(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  for (absl::string_view piece : absl::StrSplit(Av(s), sep)) {
    out.push_back(Sv(piece));
  }
  return out;
}

}  // namespace dpnote::internal

#endif  // DPNOTE_SRC_STRINGS_H_
