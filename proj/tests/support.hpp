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

// Shared helpers for the unit tests and the acceptance runner. Everything
// here is an independent reference, written without the library's DSP code.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <numbers>
#include <string>
#include <vector>

#include "pitchgrad/pitchgrad.hpp"

namespace pitchgrad::testing {

/// Textbook DFT with std::complex.
inline std::vector<std::complex<double>> reference_dft(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<std::complex<double>> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::complex<double> acc = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      acc += x[t] * std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>((k * t) % n) /
                                        static_cast<double>(n));
    }
    out[k] = acc;
  }
  return out;
}

inline std::vector<double> random_signal(std::size_t n, uint64_t seed) {
  SplitMix64 rng(seed);
  std::vector<double> x(n);
  for (double& v : x) v = rng.uniform(-1.0, 1.0);
  return x;
}

/// Central differences on a half-decade step ladder from 1e-4 down to 1e-9,
/// with one Richardson step between neighbours (the O(h^2) term cancels for
/// a step ratio r via (r^2 c_fine - c_coarse) / (r^2 - 1)). Returns the
/// extrapolated value that agrees best with the previous one. Distances here
/// are large sums with small slopes and, for l1 norms, kinks a fraction of a
/// cent apart, so neither a single step nor plain differences are enough.
template <class F>
double converged_central_difference(F&& f) {
  const double r2 = 10.0;  // step ratio sqrt(10), squared
  double best_gap = INFINITY;
  double best = 0.0;
  double prev_c = 0.0;
  double prev_r = 0.0;
  for (int k = 0; k <= 10; ++k) {
    const double h = 1e-4 * std::pow(10.0, -0.5 * k);
    const double c = (f(h) - f(-h)) / (2.0 * h);
    if (k >= 1) {
      const double r = (r2 * c - prev_c) / (r2 - 1.0);
      if (k >= 2 && std::abs(r - prev_r) < best_gap) {
        best_gap = std::abs(r - prev_r);
        best = r;
      }
      prev_r = r;
    }
    prev_c = c;
  }
  return best;
}

/// f(s) = distance after moving the prediction by s (log2 pitch or dB).
inline double shifted_distance(TargetScope& scope, const SineParams& p, Axis axis, double s) {
  SineParams q = p;
  if (axis == Axis::Pitch) {
    q.pitch_hz *= std::exp2(s);
  } else {
    q.level_db += s;
  }
  return scope.distance(q);
}

struct GradientAgreement {
  std::size_t n_checked = 0;  // points with |derivative| > threshold
  std::size_t n_sign_agree = 0;
  std::size_t n_value_ok = 0;
  double worst_relative = 0.0;

  double sign_rate() const { return n_checked ? double(n_sign_agree) / n_checked : 1.0; }
};

/// Forward-mode derivative versus finite differences at the predictions of
/// trials 0..n_points-1 on both axes.
inline GradientAgreement ad_vs_fd(const DistanceEngine& engine, std::size_t n_points,
                                  const BenchConfig& cfg, double rel_tol = 1e-4,
                                  double threshold = 1e-7) {
  GradientAgreement out;
  for (std::size_t i = 0; i < n_points; ++i) {
    const TrialParams t = sample_trial(cfg, i);
    auto scope = engine.bind(t.target, cfg, 0);
    for (Axis axis : {Axis::Pitch, Axis::Level}) {
      const double ad = scope->derivative(t.prediction, axis).der;
      if (std::abs(ad) <= threshold) continue;
      const double fd = converged_central_difference(
          [&](double s) { return shifted_distance(*scope, t.prediction, axis, s); });
      ++out.n_checked;
      if ((ad > 0.0) == (fd > 0.0)) ++out.n_sign_agree;
      const double rel = std::abs(ad - fd) / std::max(std::abs(ad), std::abs(fd));
      out.worst_relative = std::max(out.worst_relative, rel);
      if (rel <= rel_tol) ++out.n_value_ok;
    }
  }
  return out;
}

inline std::string read_text(const std::string& path) {
  std::string out;
  if (FILE* f = std::fopen(path.c_str(), "rb")) {
    char buf[65536];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, f)) > 0) out.append(buf, n);
    std::fclose(f);
  }
  return out;
}

}  // namespace pitchgrad::testing
