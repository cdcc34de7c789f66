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

// Parameter-space view of a distance: given a fixed target sinusoid, how far
// is a candidate prediction and how does that change along one axis. The
// benchmark and the landscape generators only talk to this interface.

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "pitchgrad/distance.hpp"
#include "pitchgrad/dual.hpp"
#include "pitchgrad/signal.hpp"

namespace pitchgrad {

/// Distances to one fixed target. Not thread-safe; one per worker.
class TargetScope {
 public:
  virtual ~TargetScope() = default;
  virtual double distance(const SineParams& prediction) = 0;
  /// Distance with derivative along `axis` (per log2 pitch or per dB).
  virtual Dual derivative(const SineParams& prediction, Axis axis) = 0;
};

class DistanceEngine {
 public:
  virtual ~DistanceEngine() = default;
  virtual const std::string& name() const = 0;
  virtual const std::string& display_name() const = 0;
  virtual bool supports_analytic() const = 0;
  /// `worker` identifies the calling thread (0-based) for engines that keep
  /// per-worker resources.
  virtual std::unique_ptr<TargetScope> bind(const SineParams& target, const BenchConfig& cfg,
                                            std::size_t worker) const = 0;
};

inline Seed seed_for(Axis axis) { return axis == Axis::Pitch ? Seed::Pitch : Seed::Level; }

/// Builtin spectral distance over synthesized waveforms.
class SpectralEngine final : public DistanceEngine {
 public:
  SpectralEngine(DistanceSpec spec, double sample_rate_hz)
      : distance_(std::move(spec), sample_rate_hz) {}

  const std::string& name() const override { return distance_.spec().name; }
  const std::string& display_name() const override { return distance_.spec().display_name; }
  bool supports_analytic() const override { return true; }
  const SpectralDistance& distance() const { return distance_; }

  std::unique_ptr<TargetScope> bind(const SineParams& target, const BenchConfig& cfg,
                                    std::size_t) const override {
    return std::make_unique<Scope>(distance_, target, cfg);
  }

 private:
  class Scope final : public TargetScope {
   public:
    Scope(const SpectralDistance& d, const SineParams& target, const BenchConfig& cfg)
        : d_(d), cfg_(cfg) {
      const auto x = synthesize_real(target, cfg_);
      target_rep_ = d_.represent(std::span<const double>(x));
    }
    double distance(const SineParams& prediction) override {
      const auto x = synthesize_real(prediction, cfg_);
      return d_.compare(target_rep_, d_.represent(std::span<const double>(x)));
    }
    Dual derivative(const SineParams& prediction, Axis axis) override {
      const auto x = synthesize(prediction, cfg_, seed_for(axis));
      return d_.compare(target_rep_, d_.represent(std::span<const Dual>(x)));
    }

   private:
    const SpectralDistance& d_;
    BenchConfig cfg_;
    Representation<double> target_rep_;
  };

  SpectralDistance distance_;
};

/// The idealized distance; waveforms are never synthesized.
class IdealEngine final : public DistanceEngine {
 public:
  IdealEngine() : name_("ideal"), display_("ideal") {}

  const std::string& name() const override { return name_; }
  const std::string& display_name() const override { return display_; }
  bool supports_analytic() const override { return true; }

  std::unique_ptr<TargetScope> bind(const SineParams& target, const BenchConfig& cfg,
                                    std::size_t) const override {
    return std::make_unique<Scope>(target, cfg);
  }

 private:
  class Scope final : public TargetScope {
   public:
    Scope(const SineParams& t, const BenchConfig& cfg) : target_(t), cfg_(cfg) {}
    double distance(const SineParams& p) override { return ideal_distance(target_, p, cfg_); }
    Dual derivative(const SineParams& p, Axis axis) override {
      return ideal_distance(target_, p, seed_for(axis), cfg_);
    }

   private:
    SineParams target_;
    BenchConfig cfg_;
  };

  std::string name_;
  std::string display_;
};

/// Engine for a builtin spec ("ideal" or any spectral distance).
inline std::unique_ptr<DistanceEngine> make_builtin_engine(const DistanceSpec& spec,
                                                           double sample_rate_hz) {
  if (spec.analyzer == Analyzer::Ideal) return std::make_unique<IdealEngine>();
  return std::make_unique<SpectralEngine>(spec, sample_rate_hz);
}

}  // namespace pitchgrad
