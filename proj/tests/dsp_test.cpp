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


#include <cmath>
#include <complex>
#include <numbers>

#include <gtest/gtest.h>

#include "pitchgrad/spectral.hpp"
#include "support.hpp"

namespace pitchgrad {
namespace {

using testing::random_signal;
using testing::reference_dft;

TEST(Fft, MatchesNaiveOracle) {
  for (std::size_t n : {64u, 256u, 1024u}) {
    const auto x = random_signal(n, n);
    const auto fast = dft<double>(x);
    const auto naive = dft_naive<double>(x);
    const auto ref = reference_dft(x);
    double worst = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      worst = std::max(worst, std::abs(std::complex(fast[k].re, fast[k].im) - ref[k]));
      worst = std::max(worst, std::abs(std::complex(naive[k].re, naive[k].im) - ref[k]));
    }
    EXPECT_LE(worst, 1e-9) << "n=" << n;
  }
}

TEST(Fft, Parseval) {
  for (std::size_t n : {64u, 256u, 1024u}) {
    const auto x = random_signal(n, 100 + n);
    const auto X = dft<double>(x);
    double time = 0, freq = 0;
    for (double v : x) time += v * v;
    for (const auto& z : X) freq += z.re * z.re + z.im * z.im;
    EXPECT_NEAR(freq / static_cast<double>(n), time, 1e-9 * time);
  }
}

TEST(Fft, ConstantAndBinCenteredInputs) {
  const std::vector<double> ones{1, 1, 1, 1};
  const auto X = dft<double>(ones);
  EXPECT_NEAR(X[0].re, 4, 1e-12);
  for (int k = 1; k < 4; ++k) EXPECT_NEAR(std::hypot(X[k].re, X[k].im), 0, 1e-12);

  const std::size_t n = 256, k0 = 17;
  std::vector<double> x(n);
  for (std::size_t t = 0; t < n; ++t) x[t] = std::cos(kTwoPi * double(t * k0) / n);
  const auto Y = dft<double>(x);
  EXPECT_NEAR(std::hypot(Y[k0].re, Y[k0].im), n / 2.0, 1e-9);
}

TEST(Fft, RealTransformMatchesFullTransform) {
  for (std::size_t n : {4u, 8u, 64u, 2048u}) {
    const auto x = random_signal(n, 7 * n);
    const auto half = rfft<double>(x);
    const auto ref = reference_dft(x);
    ASSERT_EQ(half.size(), n / 2 + 1);
    for (std::size_t k = 0; k <= n / 2; ++k) {
      EXPECT_NEAR(half[k].re, ref[k].real(), 1e-9);
      EXPECT_NEAR(half[k].im, ref[k].imag(), 1e-9);
    }
  }
  EXPECT_THROW(RealFft(12), std::invalid_argument);
}

TEST(Fft, DualValuesMatchDoublePath) {
  const auto x = random_signal(512, 9);
  std::vector<Dual> xd(x.begin(), x.end());
  const auto a = rfft<double>(x);
  const auto b = rfft<Dual>(xd);
  for (std::size_t k = 0; k < a.size(); ++k) {
    ASSERT_EQ(a[k].re, b[k].re.val);
    ASSERT_EQ(a[k].im, b[k].im.val);
  }
}

TEST(Hann, ClosedForm) {
  const auto w = hann_window(4);
  const double expected[] = {0, 0.5, 1, 0.5};
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(w[i], expected[i], 1e-15);
  for (std::size_t n : {8u, 64u, 2048u}) EXPECT_EQ(hann_window(n)[0], 0.0);
  double sum = 0;
  for (double v : hann_window(2048)) sum += v;
  EXPECT_NEAR(sum, 1024, 1e-9);
}

TEST(Stft, ToneLandsOnExpectedBin) {
  BenchConfig cfg;
  const auto x = synthesize_real({0.0, 1000.0, 0.0}, cfg);
  const auto s = stft_magnitude<double>(x, {2048, 0.75}, cfg.sample_rate_hz);
  ASSERT_EQ(s.frames(), 29u);
  ASSERT_EQ(s.bins(), 1025u);
  for (std::size_t f = 0; f < s.frames(); ++f) {
    auto row = s.mag.row(f);
    const auto peak = std::max_element(row.begin(), row.end()) - row.begin();
    EXPECT_EQ(peak, 46);
  }
}

TEST(Stft, FrameCountAndZeroInput) {
  EXPECT_EQ((StftConfig{2048, 0.75}.frames(16384)), 29u);
  EXPECT_EQ((StftConfig{1024, 0.5}.frames(16384)), 31u);
  EXPECT_EQ((StftConfig{64, 0.75}.frames(16384)), 1021u);
  const std::vector<double> zero(4096, 0.0);
  const auto s = stft_magnitude<double>(zero, {512, 0.5}, 44100);
  for (double v : s.mag.data) ASSERT_EQ(v, 0.0);
  const std::vector<double> shorter(100, 0.0);
  EXPECT_THROW(stft_magnitude<double>(shorter, {512, 0.5}, 44100), std::invalid_argument);
}

TEST(Stft, MatchesDirectFrameTransform) {
  const auto x = random_signal(1024, 21);
  const StftConfig cfg{256, 0.75};
  const auto s = stft_magnitude<double>(x, cfg, 44100);
  const auto w = hann_window(256);
  for (std::size_t f : {std::size_t{0}, std::size_t{5}, s.frames() - 1}) {
    std::vector<double> frame(256);
    for (std::size_t k = 0; k < 256; ++k) frame[k] = x[f * cfg.hop() + k] * w[k];
    const auto ref = reference_dft(frame);
    for (std::size_t k = 0; k < s.bins(); ++k) EXPECT_NEAR(s.mag(f, k), std::abs(ref[k]), 1e-10);
  }
}

TEST(Mel, ScaleAndFilterProperties) {
  EXPECT_NEAR(hz_to_mel(700), 781.17, 0.01);
  EXPECT_NEAR(mel_to_hz(hz_to_mel(1234.5)), 1234.5, 1e-9);
  const MelConfig cfg{128, 30.0, 4000.0};
  const auto fb = mel_filterbank(cfg, 1024, 44100);
  const double bin_hz = 44100.0 / 1024;
  for (std::size_t m = 0; m < fb.n_mels; ++m) {
    for (std::size_t j = 0; j < fb.weights[m].size(); ++j) {
      const double w = fb.weights[m][j];
      ASSERT_GT(w, 0.0);
      ASSERT_LE(w, 1.0 + 1e-12);
      const double f = bin_hz * double(fb.first[m] + j);
      ASSERT_GT(f, 30.0);
      ASSERT_LT(f, 4000.0);
    }
  }
  // With a fine FFT most centers fall near a bin; a center exactly on a bin
  // gets weight 1. Construct one: nfft = fs so bins are 1 Hz apart and the
  // center of filter 0 is rounded to an integer frequency by choosing fmin.
  const double fs = 8192;
  const double center = 1000;
  const MelConfig one{1, mel_to_hz(2 * hz_to_mel(center) - hz_to_mel(1500)), 1500};
  const auto fb1 = mel_filterbank(one, 8192, fs);
  EXPECT_NEAR(fb1.weight(0, 1000), 1.0, 1e-9);
  EXPECT_THROW(mel_filterbank({16, 30, 30000}, 1024, 44100), std::invalid_argument);
}

TEST(Mel, DenseBankReportsEmptyFilters) {
  const auto fb = mel_filterbank({1024, 30.0, 4000.0}, 1024, 44100);
  EXPECT_GT(fb.empty_filters, 0u);
  EXPECT_LT(fb.empty_filters, 1024u);
}

TEST(Mel, LinearityAndLowToneConcentration) {
  BenchConfig cfg;
  const MelConfig mc{128, 30.0, 4000.0};
  const StftConfig sc{1024, 0.5};
  const auto fb = mel_filterbank(mc, 1024, cfg.sample_rate_hz);
  const auto x = random_signal(16384, 4);
  std::vector<double> x2(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) x2[i] = 2 * x[i];
  const auto a = mel_spectrogram<double>(x, sc, fb, cfg.sample_rate_hz);
  const auto b = mel_spectrogram<double>(x2, sc, fb, cfg.sample_rate_hz);
  for (std::size_t i = 0; i < a.data.size(); ++i) ASSERT_NEAR(b.data[i], 2 * a.data[i], 1e-9);

  const auto low = synthesize_real({0.0, 30.0, 0.0}, cfg);
  const auto m = mel_spectrogram<double>(low, sc, fb, cfg.sample_rate_hz);
  double lowest = 0, total = 0;
  for (std::size_t f = 0; f < m.rows; ++f) {
    for (std::size_t c = 0; c < m.cols; ++c) {
      total += m(f, c);
      if (c < 8) lowest += m(f, c);
    }
  }
  EXPECT_GT(lowest / total, 0.9);

  const std::vector<double> zero(16384, 0.0);
  for (double v : mel_spectrogram<double>(zero, sc, fb, cfg.sample_rate_hz).data) ASSERT_EQ(v, 0.0);
}

TEST(Dct, MatchesDirectSum) {
  const auto x = random_signal(128, 12);
  const auto fast = dct2<double>(x);
  std::vector<double> ref(128);
  for (std::size_t k = 0; k < 128; ++k) {
    double acc = 0;
    for (std::size_t n = 0; n < 128; ++n) {
      acc += x[n] * std::cos(std::numbers::pi * double(k) * (2.0 * n + 1) / 256.0);
    }
    ref[k] = 2 * acc;
  }
  double worst = 0;
  for (std::size_t k = 0; k < 128; ++k) worst = std::max(worst, std::abs(fast[k] - ref[k]));
  EXPECT_LE(worst, 1e-9);
  const auto naive = dct2_naive<double>(x);
  for (std::size_t k = 0; k < 128; ++k) EXPECT_NEAR(naive[k], ref[k], 1e-9);
}

TEST(Dct, ConstantInput) {
  const std::vector<double> c(128, 1.5);
  const auto y = dct2<double>(c);
  EXPECT_NEAR(y[0], 2 * 128 * 1.5, 1e-9);
  for (std::size_t k = 1; k < y.size(); ++k) EXPECT_NEAR(y[k], 0.0, 1e-9);
}

TEST(Mfcc, ZeroWaveformGivesConstantFrames) {
  const MelConfig mc{128, 30.0, 4000.0};
  const auto fb = mel_filterbank(mc, 1024, 44100);
  const std::vector<double> zero(16384, 0.0);
  const auto m = mfcc<double>(zero, {1024, 0.5}, fb, 128, 44100);
  for (std::size_t f = 0; f < m.rows; ++f) {
    EXPECT_NEAR(m(f, 0), m(0, 0), 1e-12);
    for (std::size_t k = 1; k < m.cols; ++k) ASSERT_NEAR(m(f, k), 0.0, 1e-9);
  }
}

TEST(Mfcc, PowerToDbClampsToTopDb) {
  Matrix<double> p(1, 3);
  p.data = {1.0, 1e-3, 1e-12};
  const auto db = power_to_db(p, {1e-10, 20.0});
  EXPECT_NEAR(db.data[0], 0.0, 1e-12);
  EXPECT_NEAR(db.data[1], -20.0, 1e-12);
  EXPECT_NEAR(db.data[2], -20.0, 1e-12);
}

TEST(Centroid, BinCenteredTone) {
  BenchConfig cfg;
  const double f = 48 * cfg.sample_rate_hz / 2048;  // 1033.6 Hz
  const auto x = synthesize_real({-6.0, f, 0.3}, cfg);
  for (double c : spectral_centroid<double>(x, {2048, 0.75}, cfg.sample_rate_hz)) {
    EXPECT_NEAR(c, f, cfg.sample_rate_hz / 2048 / 2);
  }
}

TEST(Centroid, ScaleInvariant) {
  const auto x = random_signal(16384, 31);
  std::vector<double> half(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) half[i] = 0.5 * x[i];
  const auto a = spectral_centroid<double>(x, {2048, 0.75}, 44100);
  const auto b = spectral_centroid<double>(half, {2048, 0.75}, 44100);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-9);
}

TEST(Centroid, ImpulseFrameMatchesDirectSum) {
  std::vector<double> x(2048, 0.0);
  x[1] = 1.0;  // w[0] is zero, so place the impulse one sample in
  const auto c = spectral_centroid<double>(x, {2048, 0.75}, 44100);
  ASSERT_EQ(c.size(), 1u);
  const double w1 = hann_window(2048)[1];
  // |X_k| = w1 for every k.
  double num = 0, den = 0;
  for (std::size_t k = 0; k <= 1024; ++k) {
    num += w1 * (44100.0 / 2048) * double(k);
    den += w1;
  }
  EXPECT_NEAR(c[0], num / den, 1e-9);
}

TEST(Centroid, ZeroFrameThrows) {
  const std::vector<double> zero(4096, 0.0);
  EXPECT_THROW(spectral_centroid<double>(zero, {2048, 0.75}, 44100), ZeroEnergyFrame);
}

}  // namespace
}  // namespace pitchgrad
