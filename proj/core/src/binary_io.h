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

// Little-endian primitives shared by the binary container formats.

#ifndef DPNOTE_SRC_BINARY_IO_H_
#define DPNOTE_SRC_BINARY_IO_H_

#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>

namespace dpnote::internal {

template <typename T>
void PutLe(std::ostream& out, T value) {
  char bytes[sizeof(T)];
  for (size_t i = 0; i < sizeof(T); ++i) {
    bytes[i] = static_cast<char>((static_cast<uint64_t>(value) >> (8 * i)) & 0xff);
  }
  out.write(bytes, sizeof(T));
}

template <typename T>
bool GetLe(std::istream& in, T& value) {
  unsigned char bytes[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T))) return false;
  uint64_t v = 0;
  for (size_t i = 0; i < sizeof(T); ++i) v |= static_cast<uint64_t>(bytes[i]) << (8 * i);
  value = static_cast<T>(v);
  return true;
}

inline void PutF64(std::ostream& out, double value) {
  PutLe<uint64_t>(out, std::bit_cast<uint64_t>(value));
}

inline bool GetF64(std::istream& in, double& value) {
  uint64_t bits = 0;
  if (!GetLe(in, bits)) return false;
  value = std::bit_cast<double>(bits);
  return true;
}

inline void PutString(std::ostream& out, const std::string& s) {
  PutLe<uint32_t>(out, static_cast<uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline bool GetString(std::istream& in, std::string& s, uint32_t max_len) {
  uint32_t len = 0;
  if (!GetLe(in, len) || len > max_len) return false;
  s.resize(len);
  return static_cast<bool>(in.read(s.data(), len));
}

}  // namespace dpnote::internal

#endif  // DPNOTE_SRC_BINARY_IO_H_
