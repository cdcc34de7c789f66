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

// Pure-sinusoid generative model: parameters, unit conversions, synthesis
// with an optional derivative seed, and trial sampling.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pitchgrad/dual.hpp"
#include "pitchgrad/rng.hpp"

namespace pitchgrad {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// One point of the search space.
struct SineParams {
  double level_db = 0.0;
  double pitch_hz = 440.0;
  double phase_rad = 0.0;

  friend bool operator==(const SineParams&, const SineParams&) = default;
};

struct Range {
  double low = 0.0;
  double high = 0.0;

  friend bool operator==(const Range&, const Range&) = default;
};

struct BenchConfig {
  double sample_rate_hz = 44100.0;
  std::size_t n_samples = 16384;
  Range pitch_range_hz{30.0, 4000.0};
  Range level_range_db{-25.0, 0.0};
  uint64_t seed = 0;

  /// Largest analysis window any builtin distance uses.
  static constexpr std::size_t kMaxWindow = 2048;

  void validate() const {
    if (!(sample_rate_hz > 0.0)) throw std::invalid_argument("sample_rate_hz must be > 0");
    if (n_samples < kMaxWindow) {
      throw std::invalid_argument("n_samples must be >= " + std::to_string(kMaxWindow));
    }
    if (!(pitch_range_hz.low > 0.0 && pitch_range_hz.low < pitch_range_hz.high)) {
      throw std::invalid_argument("pitch range must satisfy 0 < low < high");
    }
    if (!(pitch_range_hz.high < sample_rate_hz / 2.0)) {
      throw std::invalid_argument("pitch range must stay below the Nyquist frequency");
    }
    if (!(level_range_db.low < level_range_db.high)) {
      throw std::invalid_argument("level range must satisfy low < high");
    }
  }
};

/// Which parameter the derivative channel of a synthesized waveform tracks.
enum class Seed { None, Pitch, Level };
/// Parameter axis of a perturbation or gradient.
enum class Axis { Pitch, Level };

inline std::string_view to_string(Axis a) { return a == Axis::Pitch ? "pitch" : "level"; }

// Level uses 25*log10, so 0 dB is full scale and -25 dB is amplitude 0.1.
inline double level_to_amplitude(double level_db) { return std::pow(10.0, level_db / 25.0); }

inline double amplitude_to_level(double amplitude) {
  if (!(amplitude > 0.0)) throw std::domain_error("amplitude must be > 0");
  return 25.0 * std::log10(amplitude);
}

inline double cents_between(double f1_hz, double f2_hz) {
  if (!(f1_hz > 0.0 && f2_hz > 0.0)) throw std::domain_error("frequencies must be > 0");
  return 1200.0 * std::log2(f2_hz / f1_hz);
}

inline double shift_cents(double f_hz, double cents) {
  return f_hz * std::exp2(cents / 1200.0);
}

/// x[n] = A cos(2 pi f n / fs + phi) with a generic amplitude/pitch scalar.
template <class T>
std::vector<T> render_sine(const T& amplitude, const T& pitch_hz, double phase_rad,
                           double sample_rate_hz, std::size_t n_samples) {
  std::vector<T> out;
  out.reserve(n_samples);
  const double step = kTwoPi / sample_rate_hz;
  for (std::size_t n = 0; n < n_samples; ++n) {
    const T arg = pitch_hz * (step * static_cast<double>(n)) + phase_rad;
    out.push_back(amplitude * cos(arg));
  }
  return out;
}

/// Real-valued waveform for `p`.
inline std::vector<double> synthesize_real(const SineParams& p, const BenchConfig& cfg) {
  return render_sine<double>(level_to_amplitude(p.level_db), p.pitch_hz, p.phase_rad,
                             cfg.sample_rate_hz, cfg.n_samples);
}

/// Waveform whose derivative channel is d/d(log2 pitch) for Seed::Pitch and
/// d/d(level dB) for Seed::Level.
inline std::vector<Dual> synthesize(const SineParams& p, const BenchConfig& cfg, Seed seed) {
  const double amp = level_to_amplitude(p.level_db);
  Dual a{amp};
  Dual f{p.pitch_hz};
  if (seed == Seed::Pitch) f.der = p.pitch_hz * std::numbers::ln2;
  if (seed == Seed::Level) a.der = amp * std::numbers::ln10 / 25.0;
  return render_sine<Dual>(a, f, p.phase_rad, cfg.sample_rate_hz, cfg.n_samples);
}

/// Draws one parameter point: log-uniform pitch, uniform level and phase.
inline SineParams sample_params(SplitMix64& rng, const BenchConfig& cfg) {
  const auto [plo, phi] = cfg.pitch_range_hz;
  const auto [llo, lhi] = cfg.level_range_db;
  SineParams p;
  p.pitch_hz = plo * std::exp2(rng.uniform() * std::log2(phi / plo));
  p.level_db = rng.uniform(llo, lhi);
  p.phase_rad = rng.uniform(0.0, kTwoPi);
  return p;
}

struct TrialParams {
  SineParams target;
  SineParams prediction;

  friend bool operator==(const TrialParams&, const TrialParams&) = default;
};

/// Samples a (target, prediction) pair that differs on both axes.
inline TrialParams sample_trial(SplitMix64& rng, const BenchConfig& cfg) {
  TrialParams t;
  t.target = sample_params(rng, cfg);
  do {
    t.prediction = sample_params(rng, cfg);
  } while (t.prediction.pitch_hz == t.target.pitch_hz ||
           t.prediction.level_db == t.target.level_db);
  return t;
}

/// The pair for trial `index` of a run, drawn from its own substream.
inline TrialParams sample_trial(const BenchConfig& cfg, uint64_t index) {
  SplitMix64 rng = SplitMix64::substream(cfg.seed, index);
  return sample_trial(rng, cfg);
}

/// Moves `prediction` a further `eps` (cents or dB) away from `target` along
/// `axis`. Phase and the other axis are copied from the prediction.
inline SineParams perturb(const SineParams& prediction, const SineParams& target, Axis axis,
                          double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("perturbation eps must be > 0");
  SineParams out = prediction;
  if (axis == Axis::Pitch) {
    const double c = cents_between(target.pitch_hz, prediction.pitch_hz);
    if (c == 0.0) throw std::domain_error("prediction pitch equals target; direction undefined");
    out.pitch_hz = shift_cents(prediction.pitch_hz, c > 0.0 ? eps : -eps);
  } else {
    const double d = prediction.level_db - target.level_db;
    if (d == 0.0) throw std::domain_error("prediction level equals target; direction undefined");
    out.level_db = prediction.level_db + (d > 0.0 ? eps : -eps);
  }
  return out;
}

}  // namespace pitchgrad
