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

#include "pitchgrad/bench.hpp"
#include "pitchgrad/distance.hpp"
#include "pitchgrad/dual.hpp"
#include "pitchgrad/engine.hpp"
#include "pitchgrad/errors.hpp"
#include "pitchgrad/extern.hpp"
#include "pitchgrad/fft.hpp"
#include "pitchgrad/landscape.hpp"
#include "pitchgrad/report.hpp"
#include "pitchgrad/signal.hpp"
#include "pitchgrad/spectral.hpp"

namespace pitchgrad {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace pitchgrad
