// Copyright 2026 The signform Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SIGNFORM_REPORTS_HPP_
#define SIGNFORM_REPORTS_HPP_

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "signform/infotheory.hpp"

namespace signform {

// Writes text in binary mode, creating parent directories.
void write_text(const std::filesystem::path& path, const std::string& text);

// One language in the multilingual summary. Significance is decided after
// Benjamini-Hochberg correction across the languages of the batch.
struct AppendixRow {
  std::string language;
  double H_W = 0.0;
  double uncertainty = 0.0;
  std::optional<double> uncertainty_given_pos;
  double p_adjusted = 1.0;
  std::optional<double> p_adjusted_given_pos;
  bool significant = false;
  bool significant_given_pos = false;
};

std::vector<AppendixRow> appendix_rows(std::span<const MIReport> reports, double alpha);

// Four columns: language, H_W, U_W_V, U_W_V_given_POS. Percentages carry a
// trailing '*' when significant.
std::string appendix_tsv(std::span<const AppendixRow> rows);

// Means of the uncertainty coefficients and effect sizes, and significance
// counts.
nlohmann::json aggregate_summary(std::span<const MIReport> reports,
                                 std::span<const AppendixRow> rows, double alpha);

// report.csv, appendix.tsv, aggregate.json and the MI / uncertainty density
// curves (CSV and SVG; curves need at least two languages).
void write_summary_outputs(const std::filesystem::path& out_dir,
                           std::span<const MIReport> reports, double alpha);

}  // namespace signform

#endif  // SIGNFORM_REPORTS_HPP_
