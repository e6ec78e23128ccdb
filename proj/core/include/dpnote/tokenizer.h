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

#ifndef DPNOTE_TOKENIZER_H_
#define DPNOTE_TOKENIZER_H_

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dpnote {

// Lowercased word runs (ASCII alphanumerics plus any non-ASCII byte) and
// single-character punctuation tokens. Whitespace separates and is dropped.
std::vector<std::string> Tokenize(std::string_view text);

// Joins tokens with single spaces, attaching closing punctuation to the
// preceding token.
std::string Detokenize(std::span<const std::string> tokens);

}  // namespace dpnote

#endif  // DPNOTE_TOKENIZER_H_
