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

#ifndef DPNOTE_RNG_H_
#define DPNOTE_RNG_H_

#include <array>
#include <cstdint>
#include <limits>
#include <string_view>

namespace dpnote {

// Counter-based Philox4x32-10 stream. A stream is identified by a 64-bit key;
// Fork() derives child streams deterministically from a label or index, so a
// pipeline can hand every note its own stream regardless of scheduling order.
//
// Distributions are implemented here rather than via <random> so that the
// produced values are identical across standard library implementations.
class Rng {
 public:
  using result_type = uint64_t;

  explicit Rng(uint64_t key) : key_(key) {}

  Rng Fork(std::string_view label) const;
  Rng Fork(uint64_t index) const;

  uint64_t key() const { return key_; }

  uint64_t NextU64();
  // Uniform on [0, 1) with 53 bits of precision.
  double Uniform();
  // Standard normal via Box-Muller.
  double Gaussian();
  double Gaussian(double stddev) { return stddev * Gaussian(); }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }
  result_type operator()() { return NextU64(); }

 private:
  void Refill();

  uint64_t key_;
  uint64_t counter_ = 0;
  std::array<uint32_t, 4> block_{};
  int block_pos_ = 4;
  bool has_spare_gaussian_ = false;
  double spare_gaussian_ = 0.0;
};

}  // namespace dpnote

#endif  // DPNOTE_RNG_H_
