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

// Distance curves, heatmaps and gradient fields over the (pitch, level)
// plane around a fixed target.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "pitchgrad/engine.hpp"
#include "pitchgrad/format.hpp"
#include "pitchgrad/parallel.hpp"
#include "pitchgrad/rng.hpp"
#include "pitchgrad/signal.hpp"

namespace pitchgrad {

enum class PhasePolicy { Random, Zero };

// Substream tags keep grid, curve and target phases independent of the
// trial sampler and of each other.
inline constexpr uint64_t kTargetPhaseTag = 0x7461726765740001ULL;
inline constexpr uint64_t kGridPhaseTag = 0x6772696400000002ULL;
inline constexpr uint64_t kCurvePhaseTag = 0x6375727665000003ULL;

inline double draw_phase(PhasePolicy policy, uint64_t seed, uint64_t index, uint64_t tag) {
  if (policy == PhasePolicy::Zero) return 0.0;
  SplitMix64 rng = SplitMix64::substream(seed, index, tag);
  return rng.uniform(0.0, kTwoPi);
}

/// Cells are uniform in cents along pitch and in dB along level. The
/// lattice is shifted so the target sits exactly on the center of the cell
/// that contains it; cell widths are span / cells.
struct GridSpec {
  std::size_t pitch_cells = 80;
  std::size_t level_cells = 80;
  Range pitch_range{30.0, 4000.0};
  Range level_range{-25.0, 0.0};
  SineParams target{-12.5, 346.0, 0.0};

  void validate() const {
    if (pitch_cells < 2 || level_cells < 2) throw std::invalid_argument("grid needs >= 2 cells per axis");
    if (!(pitch_range.low > 0.0 && pitch_range.low < pitch_range.high)) {
      throw std::invalid_argument("grid pitch range must satisfy 0 < low < high");
    }
    if (!(level_range.low < level_range.high)) throw std::invalid_argument("grid level range is empty");
    if (target.pitch_hz < pitch_range.low || target.pitch_hz > pitch_range.high ||
        target.level_db < level_range.low || target.level_db > level_range.high) {
      throw std::invalid_argument("grid target lies outside the grid ranges");
    }
  }

  double pitch_step_cents() const {
    return cents_between(pitch_range.low, pitch_range.high) / static_cast<double>(pitch_cells);
  }
  double level_step_db() const {
    return (level_range.high - level_range.low) / static_cast<double>(level_cells);
  }

  std::size_t target_col() const {
    return cell_of(cents_between(pitch_range.low, target.pitch_hz) / pitch_step_cents(), pitch_cells);
  }
  std::size_t target_row() const {
    return cell_of((target.level_db - level_range.low) / level_step_db(), level_cells);
  }

  double pitch_at(std::size_t col) const {
    const double offset = static_cast<double>(col) - static_cast<double>(target_col());
    return shift_cents(target.pitch_hz, offset * pitch_step_cents());
  }
  double level_at(std::size_t row) const {
    const double offset = static_cast<double>(row) - static_cast<double>(target_row());
    return target.level_db + offset * level_step_db();
  }

 private:
  static std::size_t cell_of(double position, std::size_t cells) {
    // Tolerate rounding when the target sits on a cell edge.
    const double p = std::floor(position + 1e-9);
    if (p < 0.0) return 0;
    return std::min(static_cast<std::size_t>(p), cells - 1);
  }
};

struct GridPreset {
  std::string name;
  GridSpec grid;
  /// Numeric gradient step (cents, dB) for fields built from this preset.
  double eps_cents = 0.0;
  double eps_db = 0.0;
};

/// fig3 (346 Hz, -12.5 dB), fig3-supp1 (130 Hz, -7.5 dB), fig3-supp2
/// (922 Hz, -17.5 dB): 80 x 80 over the full space. fig4: 10 x 10 cells of
/// 340 cents and 1 dB around (346 Hz, -12.5 dB).
inline GridPreset grid_preset(const std::string& name) {
  GridPreset p;
  p.name = name;
  if (name == "fig3" || name == "fig3-supp1" || name == "fig3-supp2") {
    if (name == "fig3-supp1") p.grid.target = {-7.5, 130.0, 0.0};
    if (name == "fig3-supp2") p.grid.target = {-17.5, 922.0, 0.0};
    p.eps_cents = p.grid.pitch_step_cents();
    p.eps_db = p.grid.level_step_db();
    return p;
  }
  if (name == "fig4") {
    p.grid.pitch_cells = 10;
    p.grid.level_cells = 10;
    p.grid.target = {-12.5, 346.0, 0.0};
    p.grid.pitch_range = {shift_cents(346.0, -5 * 340.0), shift_cents(346.0, 5 * 340.0)};
    p.grid.level_range = {-17.5, -7.5};
    p.eps_cents = 340.0;
    p.eps_db = 1.0;
    return p;
  }
  throw std::invalid_argument("unknown grid preset '" + name + "'");
}

struct LandscapeOptions {
  PhasePolicy phase = PhasePolicy::Random;
  uint64_t seed = 0;
  std::size_t workers = 1;
};

namespace detail {

/// Lazily binds one target scope per worker thread.
class ScopePool {
 public:
  ScopePool(const DistanceEngine& engine, const SineParams& target, const BenchConfig& cfg,
            std::size_t workers)
      : engine_(engine), target_(target), cfg_(cfg), scopes_(std::max<std::size_t>(workers, 1)) {}

  TargetScope& get(std::size_t worker) {
    auto& s = scopes_[worker];
    if (!s) s = engine_.bind(target_, cfg_, worker);
    return *s;
  }

 private:
  const DistanceEngine& engine_;
  SineParams target_;
  BenchConfig cfg_;
  std::vector<std::unique_ptr<TargetScope>> scopes_;
};

}  // namespace detail

struct CurvePoint {
  double target_hz = 0.0;
  double pred_hz = 0.0;
  double distance = 0.0;
};

/// For each target pitch, distances to `n_points` predictions log-spaced
/// over the configured pitch range (endpoints included), all at `level_db`.
inline std::vector<CurvePoint> distance_curve(const DistanceEngine& engine,
                                              const std::vector<double>& target_pitches,
                                              double level_db, std::size_t n_points,
                                              const BenchConfig& cfg,
                                              const LandscapeOptions& opts = {}) {
  if (n_points < 2) throw std::invalid_argument("a curve needs >= 2 points");
  const auto [lo, hi] = cfg.pitch_range_hz;
  std::vector<CurvePoint> out;
  for (std::size_t t = 0; t < target_pitches.size(); ++t) {
    const double f0 = target_pitches[t];
    if (f0 < lo || f0 > hi) throw std::invalid_argument("curve target outside the pitch range");
    const SineParams target{level_db, f0, draw_phase(opts.phase, opts.seed, t, kTargetPhaseTag)};
    detail::ScopePool pool(engine, target, cfg, opts.workers);
    std::vector<CurvePoint> pts(n_points);
    parallel_for(n_points, opts.workers, [&](std::size_t j, std::size_t worker) {
      const double pitch =
          lo * std::exp2(std::log2(hi / lo) * static_cast<double>(j) / static_cast<double>(n_points - 1));
      const SineParams pred{level_db, pitch,
                            draw_phase(opts.phase, opts.seed, t * n_points + j, kCurvePhaseTag)};
      pts[j] = {f0, pitch, pool.get(worker).distance(pred)};
    });
    out.insert(out.end(), pts.begin(), pts.end());
  }
  return out;
}

struct HeatmapCell {
  std::size_t row = 0;  // level index
  std::size_t col = 0;  // pitch index
  double pred_hz = 0.0;
  double pred_db = 0.0;
  double distance = 0.0;
};

struct Heatmap {
  GridSpec grid;
  std::vector<HeatmapCell> cells;  // row-major

  const HeatmapCell& at(std::size_t row, std::size_t col) const {
    return cells[row * grid.pitch_cells + col];
  }
};

inline SineParams cell_params(const GridSpec& grid, std::size_t row, std::size_t col,
                              const LandscapeOptions& opts) {
  return {grid.level_at(row), grid.pitch_at(col),
          draw_phase(opts.phase, opts.seed, row * grid.pitch_cells + col, kGridPhaseTag)};
}

inline SineParams grid_target(const GridSpec& grid, const LandscapeOptions& opts) {
  SineParams t = grid.target;
  t.phase_rad = draw_phase(opts.phase, opts.seed, 0, kTargetPhaseTag);
  return t;
}

inline Heatmap heatmap(const DistanceEngine& engine, const GridSpec& grid, const BenchConfig& cfg,
                       const LandscapeOptions& opts = {}) {
  grid.validate();
  Heatmap hm;
  hm.grid = grid;
  hm.cells.resize(grid.pitch_cells * grid.level_cells);
  detail::ScopePool pool(engine, grid_target(grid, opts), cfg, opts.workers);
  parallel_for(hm.cells.size(), opts.workers, [&](std::size_t i, std::size_t worker) {
    const std::size_t row = i / grid.pitch_cells;
    const std::size_t col = i % grid.pitch_cells;
    const SineParams p = cell_params(grid, row, col, opts);
    hm.cells[i] = {row, col, p.pitch_hz, p.level_db, pool.get(worker).distance(p)};
  });
  return hm;
}

enum class FieldMode { Analytic, Numeric };

struct FieldCell {
  std::size_t row = 0;
  std::size_t col = 0;
  double pred_hz = 0.0;
  double pred_db = 0.0;
  double d_dpitch_per_cent = 0.0;
  double d_dlevel_per_db = 0.0;
};

/// Per-cell partial derivatives of distance-to-target. Numeric mode uses
/// symmetric differences (d(+eps) - d(-eps)) / (2 eps) in cents and dB.
inline std::vector<FieldCell> gradient_field(const DistanceEngine& engine, const GridSpec& grid,
                                             FieldMode mode, double eps_cents, double eps_db,
                                             const BenchConfig& cfg,
                                             const LandscapeOptions& opts = {}) {
  grid.validate();
  if (mode == FieldMode::Numeric && !(eps_cents > 0.0 && eps_db > 0.0)) {
    throw std::invalid_argument("numeric gradient steps must be > 0");
  }
  if (mode == FieldMode::Analytic && !engine.supports_analytic()) {
    throw std::invalid_argument("'" + engine.name() + "' has no analytic gradient");
  }
  std::vector<FieldCell> out(grid.pitch_cells * grid.level_cells);
  detail::ScopePool pool(engine, grid_target(grid, opts), cfg, opts.workers);
  parallel_for(out.size(), opts.workers, [&](std::size_t i, std::size_t worker) {
    const std::size_t row = i / grid.pitch_cells;
    const std::size_t col = i % grid.pitch_cells;
    const SineParams p = cell_params(grid, row, col, opts);
    TargetScope& scope = pool.get(worker);
    FieldCell c{row, col, p.pitch_hz, p.level_db, 0.0, 0.0};
    if (mode == FieldMode::Analytic) {
      c.d_dpitch_per_cent = scope.derivative(p, Axis::Pitch).der / 1200.0;
      c.d_dlevel_per_db = scope.derivative(p, Axis::Level).der;
    } else {
      SineParams up = p, down = p;
      up.pitch_hz = shift_cents(p.pitch_hz, eps_cents);
      down.pitch_hz = shift_cents(p.pitch_hz, -eps_cents);
      c.d_dpitch_per_cent = (scope.distance(up) - scope.distance(down)) / (2.0 * eps_cents);
      up = down = p;
      up.level_db += eps_db;
      down.level_db -= eps_db;
      c.d_dlevel_per_db = (scope.distance(up) - scope.distance(down)) / (2.0 * eps_db);
    }
    out[i] = c;
  });
  return out;
}

inline void write_curve_csv(std::ostream& os, const std::vector<CurvePoint>& pts) {
  os << "target_hz,pred_hz,distance\n";
  for (const auto& p : pts) {
    os << format_double(p.target_hz) << ',' << format_double(p.pred_hz) << ','
       << format_double(p.distance) << '\n';
  }
}

inline void write_heatmap_csv(std::ostream& os, const Heatmap& hm) {
  os << "row,col,pred_hz,pred_db,distance\n";
  for (const auto& c : hm.cells) {
    os << c.row << ',' << c.col << ',' << format_double(c.pred_hz) << ','
       << format_double(c.pred_db) << ',' << format_double(c.distance) << '\n';
  }
}

inline void write_field_csv(std::ostream& os, const std::vector<FieldCell>& field) {
  os << "row,col,pred_hz,pred_db,d_dpitch_per_cent,d_dlevel_per_db\n";
  for (const auto& c : field) {
    os << c.row << ',' << c.col << ',' << format_double(c.pred_hz) << ','
       << format_double(c.pred_db) << ',' << format_double(c.d_dpitch_per_cent) << ','
       << format_double(c.d_dlevel_per_db) << '\n';
  }
}

}  // namespace pitchgrad
