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

// Serialization of accuracy reports.

#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "pitchgrad/bench.hpp"
#include "pitchgrad/format.hpp"

namespace pitchgrad {

inline std::string_view to_string(Mode m) { return m == Mode::Analytic ? "analytic" : "numeric"; }

/// Long format, one row per (spec, condition):
/// spec,axis,mode,eps,n,accuracy,ci95
inline void write_reports_csv(std::ostream& os, const std::vector<AccuracyReport>& reports) {
  os << "spec,axis,mode,eps,n,accuracy,ci95\n";
  for (const auto& r : reports) {
    os << r.spec_name << ',' << to_string(r.condition.axis) << ',' << r.condition.label() << ','
       << format_double(r.condition.eps) << ',' << r.n_trials << ',' << format_double(r.accuracy)
       << ',' << format_double(r.ci95_halfwidth) << '\n';
  }
}

inline nlohmann::json to_json(const AccuracyReport& r) {
  return {
      {"spec", r.spec_name},
      {"axis", std::string(to_string(r.condition.axis))},
      {"mode", r.condition.label()},
      {"eps", r.condition.eps},
      {"n", r.n_trials},
      {"accuracy", r.accuracy},
      {"ci95", r.ci95_halfwidth},
      {"n_correct", r.n_correct},
      {"n_errors", r.n_errors},
      {"n_out_of_range", r.n_out_of_range},
  };
}

inline nlohmann::json reports_to_json(const std::vector<AccuracyReport>& reports) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : reports) arr.push_back(to_json(r));
  return arr;
}

/// Wide layout: one row per spec, one column per table condition (blank
/// where a spec has no report for that condition).
inline void write_table_csv(std::ostream& os, const std::vector<std::string>& spec_order,
                            const std::vector<AccuracyReport>& reports) {
  const auto columns = table_conditions();
  os << "spec,pitch_analytic,pitch_30c,pitch_600c,level_analytic,level_2db,level_10db\n";
  for (const auto& name : spec_order) {
    os << name;
    for (const auto& c : columns) {
      os << ',';
      for (const auto& r : reports) {
        if (r.spec_name == name && r.condition == c) {
          os << format_fixed(r.accuracy, 3);
          break;
        }
      }
    }
    os << '\n';
  }
}

/// Human-readable table for terminals.
inline void print_table(std::ostream& os, const std::vector<std::string>& spec_order,
                        const std::vector<AccuracyReport>& reports) {
  const auto columns = table_conditions();
  os << "spec                     pitch:  eps     30c    600c | level:  eps     2dB    10dB\n";
  for (const auto& name : spec_order) {
    std::string line = name;
    line.resize(24, ' ');
    for (std::size_t i = 0; i < columns.size(); ++i) {
      std::string cell = "   -  ";
      for (const auto& r : reports) {
        if (r.spec_name == name && r.condition == columns[i]) cell = format_fixed(r.accuracy, 3);
      }
      line += (i == 3 ? "  |       " : (i == 0 ? "        " : "   ")) + cell;
    }
    os << line << '\n';
  }
}

}  // namespace pitchgrad
