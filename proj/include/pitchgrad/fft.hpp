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

// Radix-2 FFT generic over double and Dual, plus the O(n^2) direct DFT used
// as its oracle.

#include <bit>
#include <cmath>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <stdexcept>
#include <vector>

#include "pitchgrad/dual.hpp"
#include "pitchgrad/signal.hpp"

namespace pitchgrad {

/// Twiddles and bit-reversal table for one power-of-two size.
class FftPlan {
 public:
  explicit FftPlan(std::size_t n) : n_(n) {
    if (n < 2 || !std::has_single_bit(n)) {
      throw std::invalid_argument("FFT size must be a power of two >= 2");
    }
    twiddle_.resize(n / 2);
    for (std::size_t k = 0; k < n / 2; ++k) {
      const double a = -kTwoPi * static_cast<double>(k) / static_cast<double>(n);
      twiddle_[k] = {std::cos(a), std::sin(a)};
    }
    const int bits = std::countr_zero(n);
    reversed_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t r = 0;
      for (int b = 0; b < bits; ++b) r |= ((i >> b) & 1u) << (bits - 1 - b);
      reversed_[i] = r;
    }
  }

  std::size_t size() const { return n_; }

  /// In-place forward transform, X[k] = sum_t x[t] e^{-2 pi i k t / n}.
  template <class T>
  void forward(std::span<Complex<T>> data) const {
    if (data.size() != n_) throw std::invalid_argument("FFT input size mismatch");
    for (std::size_t i = 0; i < n_; ++i) {
      if (i < reversed_[i]) std::swap(data[i], data[reversed_[i]]);
    }
    for (std::size_t len = 2; len <= n_; len <<= 1) {
      const std::size_t half = len / 2;
      const std::size_t stride = n_ / len;
      for (std::size_t start = 0; start < n_; start += len) {
        for (std::size_t j = 0; j < half; ++j) {
          const Complex<double>& w = twiddle_[j * stride];
          Complex<T>& a = data[start + j];
          Complex<T>& b = data[start + j + half];
          const Complex<T> t{b.re * w.re - b.im * w.im, b.re * w.im + b.im * w.re};
          b = a - t;
          a += t;
        }
      }
    }
  }

  const Complex<double>& twiddle(std::size_t k) const { return twiddle_[k]; }

 private:
  std::size_t n_;
  std::vector<Complex<double>> twiddle_;
  std::vector<std::size_t> reversed_;
};

/// Shared read-only plan for size `n`; built on first use.
inline const FftPlan& fft_plan(std::size_t n) {
  static std::mutex mu;
  static std::map<std::size_t, std::unique_ptr<const FftPlan>> plans;
  std::lock_guard lock(mu);
  auto& slot = plans[n];
  if (!slot) slot = std::make_unique<const FftPlan>(n);
  return *slot;
}

/// Full complex spectrum of a real sequence (length a power of two).
template <class T>
std::vector<Complex<T>> dft(std::span<const T> x) {
  std::vector<Complex<T>> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i].re = x[i];
  fft_plan(x.size()).forward(std::span<Complex<T>>(out));
  return out;
}

/// Direct O(n^2) summation for any n.
template <class T>
std::vector<Complex<T>> dft_naive(std::span<const T> x) {
  const std::size_t n = x.size();
  std::vector<Complex<T>> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    T re{};
    T im{};
    for (std::size_t t = 0; t < n; ++t) {
      // Reduce k*t mod n so the angle stays small and accurate.
      const double a = -kTwoPi * static_cast<double>((k * t) % n) / static_cast<double>(n);
      re += x[t] * std::cos(a);
      im += x[t] * std::sin(a);
    }
    out[k] = {re, im};
  }
  return out;
}

/// One-sided real transform of a fixed power-of-two size (bins 0..n/2),
/// computed with a half-length complex transform.
class RealFft {
 public:
  explicit RealFft(std::size_t n) : n_(n) {
    if (n < 4 || !std::has_single_bit(n)) {
      throw std::invalid_argument("real FFT size must be a power of two >= 4");
    }
    half_ = &fft_plan(n / 2);
    full_ = &fft_plan(n);
  }

  std::size_t size() const { return n_; }
  std::size_t bins() const { return n_ / 2 + 1; }

  /// `out` is resized to bins(); `scratch` is reused across calls.
  template <class T>
  void forward(std::span<const T> x, std::vector<Complex<T>>& out,
               std::vector<Complex<T>>& scratch) const {
    if (x.size() != n_) throw std::invalid_argument("real FFT input size mismatch");
    const std::size_t h = n_ / 2;
    scratch.resize(h);
    for (std::size_t m = 0; m < h; ++m) scratch[m] = {x[2 * m], x[2 * m + 1]};
    half_->forward(std::span<Complex<T>>(scratch));
    out.resize(h + 1);
    for (std::size_t k = 0; k <= h; ++k) {
      const Complex<T>& zk = scratch[k % h];
      const Complex<T>& zc = scratch[(h - k) % h];
      // even = (Z[k] + conj Z[h-k]) / 2, odd = (Z[k] - conj Z[h-k]) / 2i
      const T er = (zk.re + zc.re) * 0.5;
      const T ei = (zk.im - zc.im) * 0.5;
      const T od_re = (zk.im + zc.im) * 0.5;
      const T od_im = (zc.re - zk.re) * 0.5;
      const Complex<double> w = k < h ? full_->twiddle(k) : Complex<double>{-1.0, 0.0};
      out[k] = {er + (od_re * w.re - od_im * w.im), ei + (od_re * w.im + od_im * w.re)};
    }
  }

 private:
  std::size_t n_;
  const FftPlan* half_;
  const FftPlan* full_;
};

/// One-sided spectrum (bins 0..n/2) of a real sequence.
template <class T>
std::vector<Complex<T>> rfft(std::span<const T> x) {
  std::vector<Complex<T>> out;
  std::vector<Complex<T>> scratch;
  RealFft(x.size()).forward(x, out, scratch);
  return out;
}

}  // namespace pitchgrad
