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

// Configured audio-to-audio distances: the builtin spectral catalog plus an
// idealized distance in normalized (log-pitch, level) coordinates.

#include <cmath>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pitchgrad/dual.hpp"
#include "pitchgrad/errors.hpp"
#include "pitchgrad/signal.hpp"
#include "pitchgrad/spectral.hpp"

namespace pitchgrad {

enum class Analyzer {
  Spectrogram,
  LogSpectrogram,
  Mel,
  MFCC,
  MSS,
  LogMSS,
  LogSpectralCentroid,
  Ideal,
  External,
};

enum class Norm { L1, L2 };

inline std::string_view to_string(Norm n) { return n == Norm::L1 ? "l1" : "l2"; }

inline std::string_view to_string(Analyzer a) {
  switch (a) {
    case Analyzer::Spectrogram: return "spectrogram";
    case Analyzer::LogSpectrogram: return "log_spectrogram";
    case Analyzer::Mel: return "mel";
    case Analyzer::MFCC: return "mfcc";
    case Analyzer::MSS: return "mss";
    case Analyzer::LogMSS: return "log_mss";
    case Analyzer::LogSpectralCentroid: return "log_spectral_centroid";
    case Analyzer::Ideal: return "ideal";
    case Analyzer::External: return "external";
  }
  return "?";
}

struct DistanceSpec {
  std::string name;
  std::string display_name;
  Analyzer analyzer = Analyzer::Spectrogram;
  Norm norm = Norm::L1;
  std::vector<std::size_t> nffts{2048};
  double overlap = 0.75;
  std::optional<MelConfig> mel;
  std::size_t n_mfcc = 0;
  /// Exponent applied to STFT magnitudes before comparison (1: |S|, 2: |S|^2).
  double magnitude_power = 1.0;
  double log_offset = 0.0;      // log(|S|^p + offset) analyzers
  double centroid_power = 1.0;  // magnitude exponent of the centroid weights

  bool is_spectral() const {
    return analyzer != Analyzer::Ideal && analyzer != Analyzer::External;
  }

  /// One-line hyperparameter summary, e.g. for a catalog listing.
  std::string describe() const {
    std::ostringstream os;
    os << name << ": " << to_string(norm) << " distance";
    switch (analyzer) {
      case Analyzer::Spectrogram:
      case Analyzer::MSS:
        os << (magnitude_power == 1.0 ? ", |Spectrogram(x)|" : ", |Spectrogram(x)|^2");
        break;
      case Analyzer::LogSpectrogram:
      case Analyzer::LogMSS:
        os << ", log(" << (magnitude_power == 1.0 ? "|Spectrogram(x)|" : "|Spectrogram(x)|^2")
           << " + " << log_offset << ")";
        break;
      case Analyzer::MFCC:
        os << ", power mel in dB (amin=1e-10, top_db=80)";
        break;
      case Analyzer::LogSpectralCentroid:
        os << ", log2 spectral centroid, power=" << centroid_power;
        break;
      case Analyzer::Ideal:
        return name + ": l1 distance in normalized (cents, dB) coordinates";
      case Analyzer::External:
        return name + ": external worker (numeric conditions only)";
      default:
        break;
    }
    if (nffts.size() == 1) {
      os << ", nfft=" << nffts.front();
    } else {
      os << ", nffts=[";
      for (std::size_t i = 0; i < nffts.size(); ++i) os << (i ? ", " : "") << nffts[i];
      os << "]";
    }
    os << ", frame_overlap=" << overlap;
    if (mel) {
      os << ", nmels=" << mel->n_mels;
      if (analyzer == Analyzer::MFCC) os << ", nmfcc=" << n_mfcc << ", norm=None";
      os << ", fmin=" << mel->fmin_hz << ", fmax=" << mel->fmax_hz;
    }
    return os.str();
  }
};

/// The seven spectral distances plus "ideal", in table order.
inline std::vector<DistanceSpec> builtin_registry() {
  const std::vector<std::size_t> kScales{2048, 1024, 512, 256, 128, 64};
  std::vector<DistanceSpec> specs;

  DistanceSpec s;
  s.name = "spectrogram";
  s.display_name = "Spectrogram";
  s.analyzer = Analyzer::Spectrogram;
  s.norm = Norm::L1;
  specs.push_back(s);

  s = {};
  s.name = "log_spectrogram";
  s.display_name = "log(Spectrogram)";
  s.analyzer = Analyzer::LogSpectrogram;
  s.norm = Norm::L2;
  s.log_offset = 1e-4;
  specs.push_back(s);

  s = {};
  s.name = "mel";
  s.display_name = "Mel";
  s.analyzer = Analyzer::Mel;
  s.norm = Norm::L1;
  s.nffts = {1024};
  s.overlap = 0.5;
  s.mel = MelConfig{1024, 30.0, 4000.0};
  specs.push_back(s);

  s = {};
  s.name = "mfcc";
  s.display_name = "MFCC";
  s.analyzer = Analyzer::MFCC;
  s.norm = Norm::L1;
  s.nffts = {1024};
  s.overlap = 0.5;
  s.mel = MelConfig{128, 30.0, 4000.0};
  s.n_mfcc = 128;
  specs.push_back(s);

  s = {};
  s.name = "mss";
  s.display_name = "MSS";
  s.analyzer = Analyzer::MSS;
  s.norm = Norm::L1;
  s.nffts = kScales;
  s.magnitude_power = 2.0;
  specs.push_back(s);

  s = {};
  s.name = "log_mss";
  s.display_name = "log MSS";
  s.analyzer = Analyzer::LogMSS;
  s.norm = Norm::L2;
  s.nffts = kScales;
  s.magnitude_power = 2.0;
  s.log_offset = 1e-4;
  specs.push_back(s);

  s = {};
  s.name = "log_spectral_centroid";
  s.display_name = "log2(Spectral Centroid)";
  s.analyzer = Analyzer::LogSpectralCentroid;
  s.norm = Norm::L1;
  s.centroid_power = 1.0;
  specs.push_back(s);

  s = {};
  s.name = "ideal";
  s.display_name = "ideal";
  s.analyzer = Analyzer::Ideal;
  s.norm = Norm::L1;
  s.nffts = {};
  specs.push_back(s);
  return specs;
}

inline std::optional<DistanceSpec> find_builtin(std::string_view name) {
  for (auto& s : builtin_registry()) {
    if (s.name == name) return s;
  }
  return std::nullopt;
}

/// A representation is a list of blocks; the distance between two
/// representations is the unweighted sum of per-block norms.
template <class T>
using Representation = std::vector<std::vector<T>>;

/// A distance spec bound to a sample rate, with its filterbank built once.
/// Immutable after construction and safe to share between threads.
class SpectralDistance {
 public:
  SpectralDistance(DistanceSpec spec, double sample_rate_hz)
      : spec_(std::move(spec)), sample_rate_hz_(sample_rate_hz) {
    if (!spec_.is_spectral()) {
      throw std::invalid_argument("'" + spec_.name + "' is not a waveform distance");
    }
    if (spec_.nffts.empty()) throw std::invalid_argument("spectral distance needs an nfft");
    for (std::size_t n : spec_.nffts) StftConfig{n, spec_.overlap}.validate();
    if (spec_.mel) {
      filterbank_ = std::make_shared<const MelFilterbank>(
          mel_filterbank(*spec_.mel, spec_.nffts.front(), sample_rate_hz_));
    } else if (spec_.analyzer == Analyzer::Mel || spec_.analyzer == Analyzer::MFCC) {
      throw std::invalid_argument("mel-based distance needs a mel config");
    }
  }

  const DistanceSpec& spec() const { return spec_; }
  double sample_rate_hz() const { return sample_rate_hz_; }
  /// Mel filters that cover no FFT bin (0 when no filterbank is used).
  std::size_t empty_mel_filters() const { return filterbank_ ? filterbank_->empty_filters : 0; }

  template <class T>
  Representation<T> represent(std::span<const T> x) const {
    Representation<T> rep;
    const StftConfig first{spec_.nffts.front(), spec_.overlap};
    switch (spec_.analyzer) {
      case Analyzer::Spectrogram:
      case Analyzer::MSS:
        for (std::size_t n : spec_.nffts) rep.push_back(magnitudes(x, n));
        break;
      case Analyzer::LogSpectrogram:
      case Analyzer::LogMSS:
        for (std::size_t n : spec_.nffts) {
          auto mag = magnitudes(x, n);
          for (T& v : mag) v = log(v + spec_.log_offset);
          rep.push_back(std::move(mag));
        }
        break;
      case Analyzer::Mel:
        rep.push_back(mel_spectrogram(x, first, *filterbank_, sample_rate_hz_).data);
        break;
      case Analyzer::MFCC:
        rep.push_back(mfcc(x, first, *filterbank_, spec_.n_mfcc, sample_rate_hz_).data);
        break;
      case Analyzer::LogSpectralCentroid: {
        auto spec = stft_magnitude(x, first, sample_rate_hz_);
        if (spec_.centroid_power != 1.0) {
          for (T& v : spec.mag.data) v = pow(v, spec_.centroid_power);
        }
        auto c = spectral_centroid(spec);
        for (T& v : c) v = log2(v);
        rep.push_back(std::move(c));
        break;
      }
      case Analyzer::Ideal:
      case Analyzer::External:
        throw std::logic_error("unreachable");
    }
    return rep;
  }

  /// Sum over blocks of the l1 or l2 norm of (b - a).
  template <class A, class B>
  auto compare(const Representation<A>& a, const Representation<B>& b) const {
    using R = std::conditional_t<is_dual_v<A> || is_dual_v<B>, Dual, double>;
    if (a.size() != b.size()) throw std::invalid_argument("representation shape mismatch");
    R total{};
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i].size() != b[i].size()) throw std::invalid_argument("representation shape mismatch");
      R acc{};
      if (spec_.norm == Norm::L1) {
        for (std::size_t j = 0; j < a[i].size(); ++j) acc += abs(R(b[i][j]) - R(a[i][j]));
      } else {
        for (std::size_t j = 0; j < a[i].size(); ++j) {
          const R d = R(b[i][j]) - R(a[i][j]);
          acc += d * d;
        }
        acc = sqrt(acc);
      }
      total += acc;
    }
    if (!std::isfinite(value_of(total)) || !std::isfinite(derivative_of(total))) {
      throw NumericFailure("non-finite distance from '" + spec_.name + "'");
    }
    return total;
  }

  /// Distance between two waveforms; the derivative channel follows the
  /// seeds carried by either input.
  template <class T>
  T evaluate(std::span<const T> target, std::span<const T> prediction) const {
    if (target.size() != prediction.size()) {
      throw std::invalid_argument("waveforms must have equal length");
    }
    return compare(represent(target), represent(prediction));
  }

 private:
  template <class T>
  std::vector<T> magnitudes(std::span<const T> x, std::size_t nfft) const {
    auto mag = stft_magnitude(x, StftConfig{nfft, spec_.overlap}, sample_rate_hz_).mag.data;
    if (spec_.magnitude_power == 2.0) {
      for (T& v : mag) v = v * v;
    } else if (spec_.magnitude_power != 1.0) {
      for (T& v : mag) v = pow(v, spec_.magnitude_power);
    }
    return mag;
  }

  DistanceSpec spec_;
  double sample_rate_hz_;
  std::shared_ptr<const MelFilterbank> filterbank_;
};

/// Convenience wrapper; prefer a long-lived SpectralDistance in loops.
inline Dual evaluate(const DistanceSpec& spec, std::span<const Dual> target,
                     std::span<const Dual> prediction, double sample_rate_hz = 44100.0) {
  if (spec.analyzer == Analyzer::External) {
    throw std::invalid_argument("external distances are evaluated through an extern session");
  }
  if (spec.analyzer == Analyzer::Ideal) {
    throw std::invalid_argument("the ideal distance is defined on parameters, not waveforms");
  }
  return SpectralDistance(spec, sample_rate_hz).evaluate(target, prediction);
}

/// l1 distance in (cents / pitch span, dB / level span) coordinates. The
/// derivative channel is d/d(log2 pitch) or d/d(level dB) of the prediction.
inline Dual ideal_distance(const SineParams& target, const SineParams& prediction, Seed seed,
                           const BenchConfig& cfg = {}) {
  const double range_cents = cents_between(cfg.pitch_range_hz.low, cfg.pitch_range_hz.high);
  const double range_db = cfg.level_range_db.high - cfg.level_range_db.low;
  Dual cents{cents_between(target.pitch_hz, prediction.pitch_hz)};
  Dual level{prediction.level_db - target.level_db};
  if (seed == Seed::Pitch) cents.der = 1200.0;
  if (seed == Seed::Level) level.der = 1.0;
  return abs(cents) / range_cents + abs(level) / range_db;
}

inline double ideal_distance(const SineParams& target, const SineParams& prediction,
                             const BenchConfig& cfg = {}) {
  return ideal_distance(target, prediction, Seed::None, cfg).val;
}

}  // namespace pitchgrad
