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

// Time-frequency analyzers: Hann-windowed STFT magnitude, HTK mel
// filterbank, MFCC and spectral centroid. Every analyzer is a template over
// the scalar type so derivative channels flow from waveform to feature.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pitchgrad/dual.hpp"
#include "pitchgrad/errors.hpp"
#include "pitchgrad/fft.hpp"
#include "pitchgrad/signal.hpp"

namespace pitchgrad {

/// Periodic Hann window, w[k] = 0.5 (1 - cos(2 pi k / n)).
inline std::vector<double> hann_window(std::size_t n) {
  if (n < 2) throw std::invalid_argument("Hann window length must be >= 2");
  std::vector<double> w(n);
  for (std::size_t k = 0; k < n; ++k) {
    w[k] = 0.5 * (1.0 - std::cos(kTwoPi * static_cast<double>(k) / static_cast<double>(n)));
  }
  return w;
}

struct StftConfig {
  std::size_t nfft = 2048;
  double overlap = 0.75;

  std::size_t hop() const {
    return static_cast<std::size_t>(std::llround(static_cast<double>(nfft) * (1.0 - overlap)));
  }

  void validate() const {
    if (nfft < 4 || !std::has_single_bit(nfft)) {
      throw std::invalid_argument("nfft must be a power of two >= 4");
    }
    if (!(overlap >= 0.0 && overlap < 1.0)) throw std::invalid_argument("overlap must be in [0, 1)");
    if (hop() < 1) throw std::invalid_argument("hop must be >= 1");
  }

  std::size_t frames(std::size_t n_samples) const {
    return n_samples < nfft ? 0 : (n_samples - nfft) / hop() + 1;
  }
};

/// Row-major frames x bins matrix.
template <class T>
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<T> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c) {}

  T& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<T> row(std::size_t r) { return {data.data() + r * cols, cols}; }
  std::span<const T> row(std::size_t r) const { return {data.data() + r * cols, cols}; }
};

/// One-sided STFT magnitudes.
template <class T>
struct Spectrogram {
  Matrix<T> mag;      // frames x (nfft/2 + 1)
  double bin_hz = 0;  // sample_rate / nfft

  std::size_t frames() const { return mag.rows; }
  std::size_t bins() const { return mag.cols; }
};

/// Frames start at 0, hop, 2 hop, ...; an incomplete tail frame is dropped.
template <class T>
Spectrogram<T> stft_magnitude(std::span<const T> x, const StftConfig& cfg,
                              double sample_rate_hz) {
  cfg.validate();
  if (x.size() < cfg.nfft) {
    throw std::invalid_argument("waveform (" + std::to_string(x.size()) +
                                " samples) is shorter than nfft " + std::to_string(cfg.nfft));
  }
  const std::vector<double> window = hann_window(cfg.nfft);
  const RealFft fft(cfg.nfft);
  const std::size_t n_frames = cfg.frames(x.size());
  const std::size_t hop = cfg.hop();

  Spectrogram<T> out;
  out.bin_hz = sample_rate_hz / static_cast<double>(cfg.nfft);
  out.mag = Matrix<T>(n_frames, fft.bins());

  std::vector<T> frame(cfg.nfft);
  std::vector<Complex<T>> spectrum;
  std::vector<Complex<T>> scratch;
  for (std::size_t f = 0; f < n_frames; ++f) {
    const std::size_t start = f * hop;
    for (std::size_t k = 0; k < cfg.nfft; ++k) frame[k] = x[start + k] * window[k];
    fft.forward(std::span<const T>(frame), spectrum, scratch);
    auto row = out.mag.row(f);
    for (std::size_t k = 0; k < spectrum.size(); ++k) row[k] = magnitude(spectrum[k]);
  }
  return out;
}

// HTK mel scale.
inline double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
inline double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

struct MelConfig {
  std::size_t n_mels = 128;
  double fmin_hz = 30.0;
  double fmax_hz = 4000.0;
};

/// Triangular filters stored sparsely: row m covers bins
/// [first[m], first[m] + weights[m].size()).
struct MelFilterbank {
  std::size_t n_mels = 0;
  std::size_t n_bins = 0;
  std::vector<std::size_t> first;
  std::vector<std::vector<double>> weights;
  std::size_t empty_filters = 0;

  double weight(std::size_t m, std::size_t bin) const {
    if (bin < first[m] || bin >= first[m] + weights[m].size()) return 0.0;
    return weights[m][bin - first[m]];
  }
};

/// Unnormalized triangles with centers equally spaced in mel between fmin
/// and fmax. Filters narrower than a bin come out empty and are counted in
/// `empty_filters`; callers decide whether to report them.
inline MelFilterbank mel_filterbank(const MelConfig& cfg, std::size_t nfft, double sample_rate_hz) {
  if (cfg.n_mels < 1) throw std::invalid_argument("n_mels must be >= 1");
  if (!(cfg.fmin_hz >= 0.0 && cfg.fmin_hz < cfg.fmax_hz && cfg.fmax_hz <= sample_rate_hz / 2.0)) {
    throw std::invalid_argument("mel range must satisfy 0 <= fmin < fmax <= sample_rate/2");
  }
  const std::size_t n_bins = nfft / 2 + 1;
  const double mlo = hz_to_mel(cfg.fmin_hz);
  const double mhi = hz_to_mel(cfg.fmax_hz);
  std::vector<double> edges(cfg.n_mels + 2);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    edges[i] = mel_to_hz(mlo + (mhi - mlo) * static_cast<double>(i) /
                                   static_cast<double>(cfg.n_mels + 1));
  }
  const double bin_hz = sample_rate_hz / static_cast<double>(nfft);

  MelFilterbank fb;
  fb.n_mels = cfg.n_mels;
  fb.n_bins = n_bins;
  fb.first.assign(cfg.n_mels, 0);
  fb.weights.resize(cfg.n_mels);
  for (std::size_t m = 0; m < cfg.n_mels; ++m) {
    const double lo = edges[m];
    const double mid = edges[m + 1];
    const double hi = edges[m + 2];
    std::vector<double> row;
    std::size_t first = 0;
    for (std::size_t k = 0; k < n_bins; ++k) {
      const double f = bin_hz * static_cast<double>(k);
      const double rise = (f - lo) / (mid - lo);
      const double fall = (hi - f) / (hi - mid);
      const double w = std::max(0.0, std::min(rise, fall));
      if (w > 0.0) {
        if (row.empty()) first = k;
        // Zeros between the first and last positive bin cannot occur for a
        // triangle, so the support is contiguous.
        row.push_back(w);
      }
    }
    if (row.empty()) ++fb.empty_filters;
    fb.first[m] = first;
    fb.weights[m] = std::move(row);
  }
  return fb;
}

/// frames x n_mels.
template <class T>
Matrix<T> apply_filterbank(const Spectrogram<T>& spec, const MelFilterbank& fb) {
  if (spec.bins() != fb.n_bins) throw std::invalid_argument("filterbank/spectrogram bin mismatch");
  Matrix<T> out(spec.frames(), fb.n_mels);
  for (std::size_t f = 0; f < spec.frames(); ++f) {
    auto row = spec.mag.row(f);
    for (std::size_t m = 0; m < fb.n_mels; ++m) {
      T acc{};
      const auto& w = fb.weights[m];
      const std::size_t k0 = fb.first[m];
      for (std::size_t j = 0; j < w.size(); ++j) acc += row[k0 + j] * w[j];
      out(f, m) = acc;
    }
  }
  return out;
}

template <class T>
Matrix<T> mel_spectrogram(std::span<const T> x, const StftConfig& stft, const MelFilterbank& fb,
                          double sample_rate_hz) {
  return apply_filterbank(stft_magnitude(x, stft, sample_rate_hz), fb);
}

/// Unnormalized DCT-II, y[k] = 2 sum_n x[n] cos(pi k (2n + 1) / (2N)), by
/// direct summation.
template <class T>
std::vector<T> dct2_naive(std::span<const T> x) {
  const std::size_t n = x.size();
  std::vector<T> y(n);
  for (std::size_t k = 0; k < n; ++k) {
    T acc{};
    for (std::size_t i = 0; i < n; ++i) {
      acc += x[i] * std::cos(std::numbers::pi * static_cast<double>(k * (2 * i + 1)) /
                             static_cast<double>(2 * n));
    }
    y[k] = acc * 2.0;
  }
  return y;
}

/// Unnormalized DCT-II. Power-of-two lengths use an N-point FFT of the
/// even/odd reordered input; other lengths fall back to direct summation.
template <class T>
std::vector<T> dct2(std::span<const T> x) {
  const std::size_t n = x.size();
  if (n < 2 || !std::has_single_bit(n)) return dct2_naive(x);
  std::vector<Complex<T>> v(n);
  for (std::size_t i = 0; i < n / 2; ++i) {
    v[i].re = x[2 * i];
    v[n - 1 - i].re = x[2 * i + 1];
  }
  fft_plan(n).forward(std::span<Complex<T>>(v));
  std::vector<T> y(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double a = -std::numbers::pi * static_cast<double>(k) / static_cast<double>(2 * n);
    y[k] = (v[k].re * std::cos(a) - v[k].im * std::sin(a)) * 2.0;
  }
  return y;
}

/// Decibel conversion of a power matrix: 10 log10(max(p, amin)), then every
/// entry is raised to at least (global maximum - top_db).
struct DbConfig {
  double amin = 1e-10;
  double top_db = 80.0;
};

template <class T>
Matrix<T> power_to_db(const Matrix<T>& power, const DbConfig& cfg = {}) {
  Matrix<T> out(power.rows, power.cols);
  std::size_t argmax = 0;
  for (std::size_t i = 0; i < power.data.size(); ++i) {
    const T& p = power.data[i];
    out.data[i] = value_of(p) > cfg.amin ? log10(p) * 10.0 : T(10.0 * std::log10(cfg.amin));
    if (value_of(out.data[i]) > value_of(out.data[argmax])) argmax = i;
  }
  if (!out.data.empty()) {
    const T floor = out.data[argmax] - cfg.top_db;
    for (T& v : out.data) {
      if (value_of(v) < value_of(floor)) v = floor;
    }
  }
  return out;
}

/// DCT-II along each row, first n_coeffs coefficients; rows x n_coeffs.
template <class T>
Matrix<T> dct_rows(const Matrix<T>& in, std::size_t n_coeffs) {
  if (n_coeffs > in.cols) throw std::invalid_argument("n_mfcc must be <= n_mels");
  Matrix<T> out(in.rows, n_coeffs);
  for (std::size_t f = 0; f < in.rows; ++f) {
    const std::vector<T> c = dct2(in.row(f));
    std::copy_n(c.begin(), n_coeffs, out.row(f).begin());
  }
  return out;
}

/// Cepstral coefficients: power STFT, mel filterbank, dB with a top-dB
/// clamp, unnormalized DCT-II across mel channels; frames x n_mfcc.
template <class T>
Matrix<T> mfcc(std::span<const T> x, const StftConfig& stft, const MelFilterbank& fb,
               std::size_t n_mfcc, double sample_rate_hz, const DbConfig& db = {}) {
  if (n_mfcc > fb.n_mels) throw std::invalid_argument("n_mfcc must be <= n_mels");
  Spectrogram<T> spec = stft_magnitude(x, stft, sample_rate_hz);
  for (T& v : spec.mag.data) v = v * v;
  return dct_rows(power_to_db(apply_filterbank(spec, fb), db), n_mfcc);
}

/// Per-frame sum_k f_k |X_k| / sum_k |X_k| in Hz (magnitude power 1).
template <class T>
std::vector<T> spectral_centroid(const Spectrogram<T>& spec) {
  std::vector<T> out(spec.frames());
  for (std::size_t f = 0; f < spec.frames(); ++f) {
    T num{};
    T den{};
    auto row = spec.mag.row(f);
    for (std::size_t k = 0; k < row.size(); ++k) {
      num += row[k] * (spec.bin_hz * static_cast<double>(k));
      den += row[k];
    }
    if (!(value_of(den) > 0.0)) throw ZeroEnergyFrame(f);
    out[f] = num / den;
  }
  return out;
}

template <class T>
std::vector<T> spectral_centroid(std::span<const T> x, const StftConfig& stft,
                                 double sample_rate_hz) {
  return spectral_centroid(stft_magnitude(x, stft, sample_rate_hz));
}

}  // namespace pitchgrad
