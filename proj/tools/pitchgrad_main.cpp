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

// pitchgrad: gradient-sign benchmark and loss-landscape exporter.
//
//   pitchgrad list     [--format text|json]
//   pitchgrad trials   [--spec NAME]... [--condition C] [--axis A] ...
//   pitchgrad curve    [--spec NAME] [--preset fig2] ...
//   pitchgrad heatmap  [--spec NAME] [--preset fig3] ...
//   pitchgrad field    [--spec NAME] [--preset fig4] [--mode analytic|numeric] ...
//
// Exit codes: 0 success, 2 usage, 3 external worker failure, 4 numeric failure.

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "pitchgrad/pitchgrad.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace pitchgrad;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitExtern = 3;
constexpr int kExitNumeric = 4;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Options shared by every command that produces files.
struct Common {
  std::string config_path;
  std::string out_dir;
  uint64_t seed = 0;
  std::size_t workers = 1;
  std::size_t n_samples = 16384;
  double sample_rate_hz = 44100.0;
  std::string extern_cmd;
  int extern_timeout_ms = kExternDefaultTimeoutMs;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_path, "JSON file mirroring the flags; flags win");
  cmd->add_option("--out", c.out_dir, "Output directory (default ./out/<timestamp>)");
  cmd->add_option("--seed", c.seed, "Run seed");
  cmd->add_option("--workers", c.workers, "Worker threads; results do not depend on it")
      ->check(CLI::Range(std::size_t{1}, std::size_t{1024}));
  cmd->add_option("--n-samples", c.n_samples, "Samples per synthesized sinusoid");
  cmd->add_option("--sample-rate", c.sample_rate_hz, "Sample rate in Hz");
  cmd->add_option("--extern-cmd", c.extern_cmd, "Command starting an external distance worker");
  cmd->add_option("--extern-timeout-ms", c.extern_timeout_ms, "Per-request worker timeout");
}

/// Copies config-file values into options the user did not pass explicitly.
class ConfigMerger {
 public:
  ConfigMerger(CLI::App* cmd, const std::string& path) : cmd_(cmd) {
    if (path.empty()) return;
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read config file " + path);
    try {
      cfg_ = json::parse(in);
    } catch (const json::exception& e) {
      throw UsageError("config file " + path + ": " + e.what());
    }
    if (!cfg_.is_object()) throw UsageError("config file must hold a JSON object");
  }

  template <class T>
  void merge(const std::string& flag, const std::string& key, T& target) {
    if (!cfg_.contains(key) || cmd_->count(flag) > 0) return;
    try {
      target = cfg_[key].get<T>();
    } catch (const json::exception& e) {
      throw UsageError("config key '" + key + "': " + e.what());
    }
  }

 private:
  CLI::App* cmd_;
  json cfg_;
};

void merge_common(ConfigMerger& m, Common& c) {
  m.merge("--out", "out", c.out_dir);
  m.merge("--seed", "seed", c.seed);
  m.merge("--workers", "workers", c.workers);
  m.merge("--n-samples", "n_samples", c.n_samples);
  m.merge("--sample-rate", "sample_rate_hz", c.sample_rate_hz);
  m.merge("--extern-cmd", "extern_cmd", c.extern_cmd);
  m.merge("--extern-timeout-ms", "extern_timeout_ms", c.extern_timeout_ms);
}

BenchConfig bench_config(const Common& c) {
  BenchConfig cfg;
  cfg.seed = c.seed;
  cfg.n_samples = c.n_samples;
  cfg.sample_rate_hz = c.sample_rate_hz;
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return cfg;
}

std::string utc_timestamp(const char* fmt) {
  std::time_t now = std::time(nullptr);
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) now = std::strtoll(epoch, nullptr, 10);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[64];
  std::strftime(buf, sizeof buf, fmt, &tm);
  return buf;
}

fs::path prepare_out_dir(const Common& c) {
  fs::path dir = c.out_dir.empty() ? fs::path("out") / utc_timestamp("%Y%m%dT%H%M%SZ")
                                   : fs::path(c.out_dir);
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

json config_json(const BenchConfig& cfg) {
  return {
      {"sample_rate_hz", cfg.sample_rate_hz},
      {"n_samples", cfg.n_samples},
      {"pitch_range_hz", {cfg.pitch_range_hz.low, cfg.pitch_range_hz.high}},
      {"level_range_db", {cfg.level_range_db.low, cfg.level_range_db.high}},
      {"seed", cfg.seed},
  };
}

void write_manifest(const fs::path& dir, const std::string& command, const BenchConfig& cfg,
                    const std::vector<std::string>& specs, const json& conditions,
                    const std::vector<std::string>& outputs, const json& extra) {
  json m;
  m["tool"] = "pitchgrad";
  m["tool_version"] = kVersion;
  m["timestamp"] = utc_timestamp("%Y-%m-%dT%H:%M:%SZ");
  m["command"] = command;
  m["config"] = config_json(cfg);
  m["specs"] = specs;
  m["conditions"] = conditions;
  m["outputs"] = outputs;
  for (auto& [k, v] : extra.items()) m[k] = v;
  write_file(dir / "manifest.json", m.dump(2) + "\n");
}

/// Engines for the requested names; "all" expands to the builtin catalog
/// (plus "external" when a worker command is configured).
std::vector<std::unique_ptr<DistanceEngine>> make_engines(std::vector<std::string> names,
                                                          const Common& c) {
  if (names.empty()) names = {"all"};
  std::vector<std::string> expanded;
  for (const auto& n : names) {
    if (n == "all") {
      for (const auto& s : builtin_registry()) expanded.push_back(s.name);
      if (!c.extern_cmd.empty()) expanded.push_back("external");
    } else {
      expanded.push_back(n);
    }
  }
  std::vector<std::unique_ptr<DistanceEngine>> engines;
  for (const auto& n : expanded) {
    if (n == "external") {
      if (c.extern_cmd.empty()) throw UsageError("spec 'external' requires --extern-cmd");
      auto e = std::make_unique<ExternEngine>(c.extern_cmd, c.extern_timeout_ms);
      e->session(0);  // handshake now so failures surface before the run
      engines.push_back(std::move(e));
      continue;
    }
    auto spec = find_builtin(n);
    if (!spec) throw UsageError("unknown spec '" + n + "' (see `pitchgrad list`)");
    auto engine = make_builtin_engine(*spec, c.sample_rate_hz);
    if (auto* se = dynamic_cast<SpectralEngine*>(engine.get()); se && se->distance().empty_mel_filters()) {
      std::cerr << "note: " << n << ": " << se->distance().empty_mel_filters() << " of "
                << spec->mel->n_mels << " mel filters cover no FFT bin at nfft=" << spec->nffts.front()
                << "\n";
    }
    engines.push_back(std::move(engine));
  }
  return engines;
}

json spec_json(const DistanceSpec& s) {
  json j{
      {"name", s.name},
      {"display_name", s.display_name},
      {"analyzer", std::string(to_string(s.analyzer))},
      {"norm", std::string(to_string(s.norm))},
      {"nffts", s.nffts},
      {"overlap", s.overlap},
      {"magnitude_power", s.magnitude_power},
      {"log_offset", s.log_offset},
      {"n_mfcc", s.n_mfcc},
      {"centroid_power", s.centroid_power},
      {"description", s.describe()},
  };
  j["mel"] = s.mel ? json{{"n_mels", s.mel->n_mels}, {"fmin_hz", s.mel->fmin_hz},
                          {"fmax_hz", s.mel->fmax_hz}, {"normalization", "none"}}
                   : json(nullptr);
  return j;
}

int cmd_list(const std::string& format) {
  const auto specs = builtin_registry();
  if (format == "json") {
    json arr = json::array();
    for (const auto& s : specs) arr.push_back(spec_json(s));
    std::cout << arr.dump(2) << "\n";
  } else {
    for (const auto& s : specs) std::cout << s.describe() << "\n";
  }
  return kExitOk;
}

struct TrialsArgs {
  std::vector<std::string> specs;
  std::size_t n_trials = 1000;
  std::string condition = "all";
  std::string axis = "both";
  std::string format = "csv";
  bool skip_errors = false;
};

std::vector<Condition> select_conditions(const std::string& condition, const std::string& axis) {
  std::vector<Axis> axes;
  if (axis == "pitch" || axis == "both") axes.push_back(Axis::Pitch);
  if (axis == "level" || axis == "both") axes.push_back(Axis::Level);
  std::vector<Condition> out;
  for (Axis a : axes) {
    if (condition == "analytic" || condition == "all") out.push_back(Condition::analytic(a));
    if (condition == "fine" || condition == "all") out.push_back(Condition::fine(a));
    if (condition == "coarse" || condition == "all") out.push_back(Condition::coarse(a));
  }
  return out;
}

int cmd_trials(const Common& c, const TrialsArgs& a) {
  const BenchConfig cfg = bench_config(c);
  if (a.n_trials < 1) throw UsageError("--n-trials must be >= 1");
  auto engines = make_engines(a.specs, c);
  std::vector<const DistanceEngine*> ptrs;
  std::vector<std::string> names;
  for (auto& e : engines) {
    ptrs.push_back(e.get());
    names.push_back(e->name());
  }
  const auto conditions = select_conditions(a.condition, a.axis);
  RunOptions opts;
  opts.workers = c.workers;
  opts.skip_errors = a.skip_errors;
  const auto result = run_suite(ptrs, conditions, a.n_trials, cfg, opts);

  const fs::path dir = prepare_out_dir(c);
  std::vector<std::string> outputs;
  if (a.format == "json") {
    write_file(dir / "reports.json", reports_to_json(result.reports).dump(2) + "\n");
    outputs.push_back("reports.json");
  } else {
    std::ostringstream os;
    write_reports_csv(os, result.reports);
    write_file(dir / "reports.csv", os.str());
    outputs.push_back("reports.csv");
  }
  std::ostringstream table;
  write_table_csv(table, names, result.reports);
  write_file(dir / "table.csv", table.str());
  outputs.push_back("table.csv");

  json conds = json::array();
  for (const auto& cond : conditions) {
    conds.push_back({{"axis", std::string(to_string(cond.axis))}, {"mode", cond.label()}, {"eps", cond.eps}});
  }
  json extra{{"n_trials", a.n_trials}, {"workers", c.workers}, {"skip_errors", a.skip_errors}};
  json notes = json::array();
  for (const auto& r : result.reports) {
    if (r.n_out_of_range || r.n_errors) {
      notes.push_back({{"spec", r.spec_name}, {"axis", std::string(to_string(r.condition.axis))},
                       {"mode", r.condition.label()},
                       {"out_of_range_fraction", static_cast<double>(r.n_out_of_range) / a.n_trials},
                       {"errors", r.n_errors}});
    }
  }
  extra["perturbation_notes"] = notes;
  write_manifest(dir, "trials", cfg, names, conds, outputs, extra);

  print_table(std::cout, names, result.reports);
  std::cout << "wrote " << (dir / outputs.front()).string() << "\n";
  return kExitOk;
}

struct LandscapeArgs {
  std::string spec = "spectrogram";
  std::string preset;
  std::vector<double> target_hz;
  std::optional<double> target_db;
  std::size_t points = 200;
  std::size_t pitch_cells = 0;
  std::size_t level_cells = 0;
  std::string phase = "random";
  std::string mode = "numeric";
  double eps_cents = 0.0;
  double eps_db = 0.0;
};

std::unique_ptr<DistanceEngine> single_engine(const std::string& name, const Common& c) {
  if (name == "all") throw UsageError("landscape commands take a single --spec");
  auto engines = make_engines({name}, c);
  return std::move(engines.front());
}

void check_target(const BenchConfig& cfg, double hz, std::optional<double> db) {
  if (hz < cfg.pitch_range_hz.low || hz > cfg.pitch_range_hz.high) {
    throw UsageError("target pitch " + format_double(hz) + " Hz is outside [30, 4000]");
  }
  if (db && (*db < cfg.level_range_db.low || *db > cfg.level_range_db.high)) {
    throw UsageError("target level " + format_double(*db) + " dB is outside [-25, 0]");
  }
}

LandscapeOptions landscape_options(const Common& c, const LandscapeArgs& a) {
  LandscapeOptions o;
  o.seed = c.seed;
  o.workers = c.workers;
  o.phase = a.phase == "zero" ? PhasePolicy::Zero : PhasePolicy::Random;
  return o;
}

int cmd_curve(const Common& c, const LandscapeArgs& a) {
  const BenchConfig cfg = bench_config(c);
  if (!a.preset.empty() && a.preset != "fig2") throw UsageError("curve supports preset fig2 only");
  std::vector<double> targets = a.target_hz.empty() ? std::vector<double>{130.0, 346.0, 922.0} : a.target_hz;
  const double level = a.target_db.value_or(-12.5);
  for (double t : targets) check_target(cfg, t, level);
  auto engine = single_engine(a.spec, c);
  const auto pts = distance_curve(*engine, targets, level, a.points, cfg, landscape_options(c, a));
  const fs::path dir = prepare_out_dir(c);
  std::ostringstream os;
  write_curve_csv(os, pts);
  write_file(dir / "curve.csv", os.str());
  write_manifest(dir, "curve", cfg, {engine->name()}, json::array(), {"curve.csv"},
                 {{"targets_hz", targets}, {"level_db", level}, {"points", a.points}, {"phase", a.phase}});
  std::cout << "wrote " << (dir / "curve.csv").string() << "\n";
  return kExitOk;
}

GridPreset resolve_grid(const BenchConfig& cfg, const LandscapeArgs& a, const std::string& fallback) {
  GridPreset p;
  try {
    p = grid_preset(a.preset.empty() ? fallback : a.preset);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (!a.target_hz.empty() || a.target_db) {
    const double hz = a.target_hz.empty() ? p.grid.target.pitch_hz : a.target_hz.front();
    check_target(cfg, hz, a.target_db);
    p.grid.target.pitch_hz = hz;
    if (a.target_db) p.grid.target.level_db = *a.target_db;
  }
  if (a.pitch_cells) p.grid.pitch_cells = a.pitch_cells;
  if (a.level_cells) p.grid.level_cells = a.level_cells;
  try {
    p.grid.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return p;
}

json grid_json(const GridPreset& p) {
  return {{"preset", p.name},
          {"pitch_cells", p.grid.pitch_cells},
          {"level_cells", p.grid.level_cells},
          {"pitch_range_hz", {p.grid.pitch_range.low, p.grid.pitch_range.high}},
          {"level_range_db", {p.grid.level_range.low, p.grid.level_range.high}},
          {"pitch_step_cents", p.grid.pitch_step_cents()},
          {"level_step_db", p.grid.level_step_db()},
          {"target_hz", p.grid.target.pitch_hz},
          {"target_db", p.grid.target.level_db},
          {"target_row", p.grid.target_row()},
          {"target_col", p.grid.target_col()}};
}

int cmd_heatmap(const Common& c, const LandscapeArgs& a) {
  const BenchConfig cfg = bench_config(c);
  const GridPreset p = resolve_grid(cfg, a, "fig3");
  auto engine = single_engine(a.spec, c);
  const Heatmap hm = heatmap(*engine, p.grid, cfg, landscape_options(c, a));
  const fs::path dir = prepare_out_dir(c);
  std::ostringstream os;
  write_heatmap_csv(os, hm);
  write_file(dir / "heatmap.csv", os.str());
  json extra = grid_json(p);
  extra["phase"] = a.phase;
  write_manifest(dir, "heatmap", cfg, {engine->name()}, json::array(), {"heatmap.csv"}, extra);
  std::cout << "wrote " << (dir / "heatmap.csv").string() << " (" << hm.cells.size() << " cells)\n";
  return kExitOk;
}

int cmd_field(const Common& c, const LandscapeArgs& a) {
  const BenchConfig cfg = bench_config(c);
  const GridPreset p = resolve_grid(cfg, a, "fig4");
  auto engine = single_engine(a.spec, c);
  const FieldMode mode = a.mode == "analytic" ? FieldMode::Analytic : FieldMode::Numeric;
  const double eps_cents = a.eps_cents > 0.0 ? a.eps_cents : p.eps_cents;
  const double eps_db = a.eps_db > 0.0 ? a.eps_db : p.eps_db;
  if (mode == FieldMode::Analytic && !engine->supports_analytic()) {
    throw UsageError("spec '" + engine->name() + "' supports numeric fields only");
  }
  const auto field = gradient_field(*engine, p.grid, mode, eps_cents, eps_db, cfg, landscape_options(c, a));
  const fs::path dir = prepare_out_dir(c);
  std::ostringstream os;
  write_field_csv(os, field);
  write_file(dir / "field.csv", os.str());
  json extra = grid_json(p);
  extra["phase"] = a.phase;
  extra["mode"] = a.mode;
  extra["eps_cents"] = eps_cents;
  extra["eps_db"] = eps_db;
  write_manifest(dir, "field", cfg, {engine->name()}, json::array(), {"field.csv"}, extra);
  std::cout << "wrote " << (dir / "field.csv").string() << " (" << field.size() << " cells)\n";
  return kExitOk;
}

void add_landscape(CLI::App* cmd, LandscapeArgs& a, bool grid, bool field) {
  cmd->add_option("--spec", a.spec, "Distance spec name");
  cmd->add_option("--preset", a.preset, grid ? "fig3, fig3-supp1, fig3-supp2 or fig4" : "fig2");
  cmd->add_option("--target-hz", a.target_hz, "Target pitch in Hz (repeatable for curves)");
  cmd->add_option("--target-db", a.target_db, "Target level in dB");
  cmd->add_option("--phase", a.phase, "Per-point phase policy")->check(CLI::IsMember({"random", "zero"}));
  if (grid) {
    cmd->add_option("--pitch-cells", a.pitch_cells, "Grid columns");
    cmd->add_option("--level-cells", a.level_cells, "Grid rows");
  } else {
    cmd->add_option("--points", a.points, "Sweep points per target");
  }
  if (field) {
    cmd->add_option("--mode", a.mode, "Gradient mode")->check(CLI::IsMember({"analytic", "numeric"}));
    cmd->add_option("--eps-cents", a.eps_cents, "Numeric pitch step (default: preset resolution)");
    cmd->add_option("--eps-db", a.eps_db, "Numeric level step (default: preset resolution)");
  }
}

void merge_landscape(ConfigMerger& m, LandscapeArgs& a) {
  m.merge("--spec", "spec", a.spec);
  m.merge("--preset", "preset", a.preset);
  m.merge("--target-hz", "target_hz", a.target_hz);
  m.merge("--phase", "phase", a.phase);
  m.merge("--points", "points", a.points);
  m.merge("--pitch-cells", "pitch_cells", a.pitch_cells);
  m.merge("--level-cells", "level_cells", a.level_cells);
  m.merge("--mode", "mode", a.mode);
  m.merge("--eps-cents", "eps_cents", a.eps_cents);
  m.merge("--eps-db", "eps_db", a.eps_db);
  double db = 0.0;
  bool has_db = false;
  m.merge("--target-db", "target_db", db);
  has_db = db != 0.0;
  if (has_db && !a.target_db) a.target_db = db;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gradient-sign benchmark for audio distances on pure sinusoids"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  std::string list_format = "text";
  auto* list = app.add_subcommand("list", "Print the builtin distance catalog");
  list->add_option("--format", list_format)->check(CLI::IsMember({"text", "json"}));

  Common common;
  TrialsArgs targs;
  auto* trials = app.add_subcommand("trials", "Gradient-sign ranking accuracy");
  add_common(trials, common);
  trials->add_option("--spec", targs.specs, "Spec name, repeatable, or 'all'");
  trials->add_option("--n-trials", targs.n_trials, "Trials per condition");
  trials->add_option("--condition", targs.condition)
      ->check(CLI::IsMember({"analytic", "fine", "coarse", "all"}));
  trials->add_option("--axis", targs.axis)->check(CLI::IsMember({"pitch", "level", "both"}));
  trials->add_option("--format", targs.format)->check(CLI::IsMember({"csv", "json"}));
  trials->add_flag("--skip-errors", targs.skip_errors, "Exclude errored trials from accuracy");

  LandscapeArgs largs;
  auto* curve = app.add_subcommand("curve", "Distance versus prediction pitch");
  add_common(curve, common);
  add_landscape(curve, largs, false, false);
  auto* heat = app.add_subcommand("heatmap", "Distance over the pitch x level grid");
  add_common(heat, common);
  add_landscape(heat, largs, true, false);
  auto* field = app.add_subcommand("field", "Gradient field over the pitch x level grid");
  add_common(field, common);
  add_landscape(field, largs, true, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (list->parsed()) return cmd_list(list_format);
    CLI::App* cmd = app.get_subcommands().front();
    ConfigMerger merger(cmd, common.config_path);
    merge_common(merger, common);
    if (trials->parsed()) {
      merger.merge("--spec", "specs", targs.specs);
      merger.merge("--n-trials", "n_trials", targs.n_trials);
      merger.merge("--condition", "condition", targs.condition);
      merger.merge("--axis", "axis", targs.axis);
      merger.merge("--format", "format", targs.format);
      merger.merge("--skip-errors", "skip_errors", targs.skip_errors);
      return cmd_trials(common, targs);
    }
    merge_landscape(merger, largs);
    if (curve->parsed()) return cmd_curve(common, largs);
    if (heat->parsed()) return cmd_heatmap(common, largs);
    if (field->parsed()) return cmd_field(common, largs);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ProtocolError& e) {
    std::cerr << "external worker failure: " << e.what() << "\n";
    return kExitExtern;
  } catch (const NumericFailure& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitUsage;
}
