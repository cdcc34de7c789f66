// Copyright 2026 The Pitchgrad Authors. All Rights Reserved.
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

#pragma once

#include <cstdint>

namespace pitchgrad {

/// Counter-based SplitMix64 stream.
///
/// Output i of a stream is a pure function of (key, i), so a trial's draws
/// never depend on how many other trials ran before it or on which thread.
/// Distributions are implemented here rather than with <random> because the
/// standard distributions are not bit-reproducible across library vendors.
class SplitMix64 {
 public:
  static constexpr uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

  constexpr explicit SplitMix64(uint64_t key) : key_(key) {}

  /// Independent substream for work item `index` under run seed `seed`.
  /// `tag` separates unrelated consumers (trials, grid phases, curves).
  static constexpr SplitMix64 substream(uint64_t seed, uint64_t index,
                                        uint64_t tag = 0) {
    return SplitMix64(mix(mix(seed ^ mix(tag + kGamma)) + index * kGamma));
  }

  static constexpr uint64_t mix(uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  constexpr uint64_t next() { return mix(key_ + (++counter_) * kGamma); }

  /// Uniform on [0, 1) with 53 random bits.
  constexpr double uniform() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }
  constexpr double uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform();
  }

  constexpr uint64_t counter() const { return counter_; }

 private:
  uint64_t key_;
  uint64_t counter_ = 0;
};

}  // namespace pitchgrad
