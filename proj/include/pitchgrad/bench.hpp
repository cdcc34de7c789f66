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

// Gradient-sign ranking accuracy.
//
// A trial samples a target and a prediction. In a numeric condition the
// prediction is pushed a further eps away from the target along one axis and
// the trial is correct when the unperturbed prediction is strictly closer.
// In the analytic condition the trial is correct when the derivative of the
// distance along the axis has the sign of (prediction - target).

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pitchgrad/engine.hpp"
#include "pitchgrad/errors.hpp"
#include "pitchgrad/parallel.hpp"
#include "pitchgrad/signal.hpp"

namespace pitchgrad {

enum class Mode { Analytic, Numeric };

struct Condition {
  Axis axis = Axis::Pitch;
  Mode mode = Mode::Analytic;
  double eps = 0.0;  // cents (pitch) or dB (level); unused when analytic

  static Condition analytic(Axis a) { return {a, Mode::Analytic, 0.0}; }
  static Condition fine(Axis a) { return {a, Mode::Numeric, a == Axis::Pitch ? 30.0 : 2.0}; }
  static Condition coarse(Axis a) { return {a, Mode::Numeric, a == Axis::Pitch ? 600.0 : 10.0}; }

  /// "analytic", "fine", "coarse", or "numeric" for other eps values.
  std::string label() const {
    if (mode == Mode::Analytic) return "analytic";
    if (*this == fine(axis)) return "fine";
    if (*this == coarse(axis)) return "coarse";
    return "numeric";
  }

  friend bool operator==(const Condition&, const Condition&) = default;
};

/// The six table columns: pitch then level, each analytic, fine, coarse.
inline std::vector<Condition> table_conditions() {
  std::vector<Condition> out;
  for (Axis a : {Axis::Pitch, Axis::Level}) {
    out.push_back(Condition::analytic(a));
    out.push_back(Condition::fine(a));
    out.push_back(Condition::coarse(a));
  }
  return out;
}

struct TrialRecord {
  std::size_t index = 0;
  SineParams target;
  SineParams prediction;
  bool correct = false;
  double d_pred = 0.0;
  /// Perturbed distance (numeric) or signed derivative (analytic).
  double d_pert_or_derivative = 0.0;
  bool error = false;
  /// Numeric only: the perturbed point left the sampling range.
  bool out_of_range = false;

  friend bool operator==(const TrialRecord&, const TrialRecord&) = default;
};

struct AccuracyReport {
  std::string spec_name;
  Condition condition;
  std::size_t n_trials = 0;
  std::size_t n_correct = 0;
  double accuracy = 0.0;
  double ci95_halfwidth = 0.0;
  std::size_t n_errors = 0;
  std::size_t n_out_of_range = 0;
};

/// Normal-approximation binomial half-width.
inline double ci95_halfwidth(double accuracy, std::size_t n) {
  if (n == 0) return 0.0;
  return 1.96 * std::sqrt(accuracy * (1.0 - accuracy) / static_cast<double>(n));
}

struct RunOptions {
  std::size_t workers = 1;
  /// Exclude errored trials from the accuracy denominator instead of
  /// counting them as incorrect.
  bool skip_errors = false;
};

namespace detail {

inline bool outside(const SineParams& p, const BenchConfig& cfg) {
  return p.pitch_hz < cfg.pitch_range_hz.low || p.pitch_hz > cfg.pitch_range_hz.high ||
         p.level_db < cfg.level_range_db.low || p.level_db > cfg.level_range_db.high;
}

inline double axis_direction(const TrialParams& t, Axis axis) {
  const double d = axis == Axis::Pitch ? t.prediction.pitch_hz - t.target.pitch_hz
                                       : t.prediction.level_db - t.target.level_db;
  return d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
}

}  // namespace detail

/// Evaluates every condition for one trial, sharing the target analysis and
/// the unperturbed distance between conditions.
inline std::vector<TrialRecord> evaluate_trial(const DistanceEngine& engine,
                                               std::span<const Condition> conditions,
                                               const TrialParams& trial, std::size_t index,
                                               const BenchConfig& cfg, std::size_t worker = 0) {
  std::vector<TrialRecord> out(conditions.size());
  for (auto& r : out) {
    r.index = index;
    r.target = trial.target;
    r.prediction = trial.prediction;
  }
  std::unique_ptr<TargetScope> scope;
  try {
    scope = engine.bind(trial.target, cfg, worker);
  } catch (const TrialError&) {
    for (auto& r : out) r.error = true;
    return out;
  } catch (const ZeroEnergyFrame&) {
    for (auto& r : out) r.error = true;
    return out;
  }

  std::optional<double> d_pred;
  for (std::size_t c = 0; c < conditions.size(); ++c) {
    const Condition& cond = conditions[c];
    TrialRecord& r = out[c];
    const double direction = detail::axis_direction(trial, cond.axis);
    if (direction == 0.0) throw std::domain_error("prediction equals target on the tested axis");
    try {
      if (cond.mode == Mode::Analytic) {
        if (!engine.supports_analytic()) {
          throw std::invalid_argument("'" + engine.name() + "' has no analytic gradient");
        }
        const Dual d = scope->derivative(trial.prediction, cond.axis);
        r.d_pred = d.val;
        r.d_pert_or_derivative = d.der;
        r.correct = d.der * direction > 0.0;
      } else {
        const SineParams pert = perturb(trial.prediction, trial.target, cond.axis, cond.eps);
        r.out_of_range = detail::outside(pert, cfg);
        if (!d_pred) d_pred = scope->distance(trial.prediction);
        r.d_pred = *d_pred;
        r.d_pert_or_derivative = scope->distance(pert);
        r.correct = r.d_pred < r.d_pert_or_derivative;
      }
    } catch (const TrialError&) {
      r.error = true;
      r.correct = false;
    } catch (const ZeroEnergyFrame&) {
      r.error = true;
      r.correct = false;
    }
  }
  return out;
}

inline TrialRecord run_trial(const DistanceEngine& engine, const Condition& condition,
                             const TrialParams& trial, const BenchConfig& cfg,
                             std::size_t index = 0) {
  return evaluate_trial(engine, std::span<const Condition>(&condition, 1), trial, index, cfg)
      .front();
}

inline AccuracyReport summarize(const std::string& spec_name, const Condition& condition,
                                std::span<const TrialRecord> records, bool skip_errors) {
  AccuracyReport rep;
  rep.spec_name = spec_name;
  rep.condition = condition;
  for (const auto& r : records) {
    if (r.error) ++rep.n_errors;
    if (r.out_of_range) ++rep.n_out_of_range;
    if (r.error && skip_errors) continue;
    ++rep.n_trials;
    if (r.correct) ++rep.n_correct;
  }
  rep.accuracy = rep.n_trials ? static_cast<double>(rep.n_correct) / rep.n_trials : 0.0;
  rep.ci95_halfwidth = ci95_halfwidth(rep.accuracy, rep.n_trials);
  return rep;
}

struct SuiteResult {
  std::vector<AccuracyReport> reports;  // engine-major, condition-minor
  /// records[e][c][i]: engine e, condition c, trial i.
  std::vector<std::vector<std::vector<TrialRecord>>> records;
};

/// Runs the same `n_trials` sampled pairs through every engine and
/// condition. Conditions an engine cannot evaluate (analytic on an external
/// distance) are left out of its reports.
inline SuiteResult run_suite(std::span<const DistanceEngine* const> engines,
                             std::span<const Condition> conditions, std::size_t n_trials,
                             const BenchConfig& cfg, const RunOptions& opts = {}) {
  if (n_trials < 1) throw std::invalid_argument("n_trials must be >= 1");
  cfg.validate();

  std::vector<std::vector<Condition>> active(engines.size());
  for (std::size_t e = 0; e < engines.size(); ++e) {
    for (const auto& c : conditions) {
      if (c.mode == Mode::Analytic && !engines[e]->supports_analytic()) continue;
      active[e].push_back(c);
    }
  }

  // per_trial[i][e] = records for every active condition of engine e
  std::vector<std::vector<std::vector<TrialRecord>>> per_trial(n_trials);
  parallel_for(n_trials, opts.workers, [&](std::size_t i, std::size_t worker) {
    const TrialParams trial = sample_trial(cfg, i);
    auto& slot = per_trial[i];
    slot.resize(engines.size());
    for (std::size_t e = 0; e < engines.size(); ++e) {
      slot[e] = evaluate_trial(*engines[e], active[e], trial, i, cfg, worker);
    }
  });

  SuiteResult result;
  result.records.resize(engines.size());
  for (std::size_t e = 0; e < engines.size(); ++e) {
    result.records[e].resize(active[e].size());
    for (std::size_t c = 0; c < active[e].size(); ++c) {
      auto& column = result.records[e][c];
      column.reserve(n_trials);
      for (std::size_t i = 0; i < n_trials; ++i) column.push_back(per_trial[i][e][c]);
      result.reports.push_back(
          summarize(engines[e]->name(), active[e][c], column, opts.skip_errors));
    }
  }
  return result;
}

}  // namespace pitchgrad
