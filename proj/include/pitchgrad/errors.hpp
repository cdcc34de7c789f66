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

#include <stdexcept>
#include <string>

namespace pitchgrad {

/// A spectral frame with no energy was normalized (spectral centroid).
class ZeroEnergyFrame : public std::runtime_error {
 public:
  explicit ZeroEnergyFrame(std::size_t frame)
      : std::runtime_error("zero-energy frame " + std::to_string(frame)), frame_(frame) {}
  std::size_t frame() const { return frame_; }

 private:
  std::size_t frame_;
};

/// A distance evaluated to NaN or infinity.
class NumericFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The external worker violated the wire protocol; the session is unusable.
class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A single external request failed (timeout or worker-reported error); the
/// trial that issued it is marked as errored.
class TrialError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace pitchgrad
