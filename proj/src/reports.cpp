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

#include "signform/reports.hpp"

#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "signform/error.hpp"
#include "signform/stats.hpp"

namespace signform {

namespace {

std::string percent(double v, bool flag) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f%%", v * 100.0);
  std::string s = buf;
  if (s.rfind("-0.00", 0) == 0) s.erase(0, 1);
  return flag ? s + "*" : s;
}

double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

nlohmann::json mean_or_null(const std::vector<double>& v) {
  if (v.empty()) return nullptr;
  return mean_of(v);
}

void write_density(const std::filesystem::path& out_dir, const std::string& stem,
                   const std::string& title, const std::string& x_label,
                   const std::vector<PlotSeries>& series) {
  std::ostringstream csv;
  csv << "series,x,density\n";
  for (const PlotSeries& s : series) {
    std::ostringstream curve;
    write_curve_csv(curve, s.curve);
    std::istringstream lines(curve.str());
    std::string line;
    std::getline(lines, line);  // header
    while (std::getline(lines, line)) csv << s.label << ',' << line << '\n';
  }
  write_text(out_dir / (stem + ".csv"), csv.str());
  write_text(out_dir / (stem + ".svg"), svg_line_plot(series, title, x_label));
}

}  // namespace

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "failed writing " + path.string());
}

std::vector<AppendixRow> appendix_rows(std::span<const MIReport> reports, double alpha) {
  std::vector<AppendixRow> rows;
  if (reports.empty()) return rows;
  std::vector<double> p, p_pos;
  std::vector<std::size_t> pos_index;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const MIReport& r = reports[i];
    AppendixRow row;
    row.language = r.language;
    row.H_W = r.H_W.bits_per_phone;
    row.uncertainty = r.uncertainty;
    row.uncertainty_given_pos = r.uncertainty_given_pos;
    rows.push_back(row);
    p.push_back(r.significance.p_value);
    if (r.significance_given_pos) {
      p_pos.push_back(r.significance_given_pos->p_value);
      pos_index.push_back(i);
    }
  }
  const BHResult bh = bh_correct(p, alpha);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    rows[i].p_adjusted = bh.adjusted[i];
    rows[i].significant = bh.rejected[i];
  }
  if (!p_pos.empty()) {
    const BHResult bh_pos = bh_correct(p_pos, alpha);
    for (std::size_t j = 0; j < pos_index.size(); ++j) {
      rows[pos_index[j]].p_adjusted_given_pos = bh_pos.adjusted[j];
      rows[pos_index[j]].significant_given_pos = bh_pos.rejected[j];
    }
  }
  return rows;
}

std::string appendix_tsv(std::span<const AppendixRow> rows) {
  std::string out = "language\tH_W\tU_W_V\tU_W_V_given_POS\n";
  char buf[64];
  for (const AppendixRow& r : rows) {
    std::snprintf(buf, sizeof buf, "%.4f", r.H_W);
    out += r.language + '\t' + buf + '\t' + percent(r.uncertainty, r.significant) + '\t' +
           (r.uncertainty_given_pos ? percent(*r.uncertainty_given_pos, r.significant_given_pos)
                                    : std::string()) +
           '\n';
  }
  return out;
}

nlohmann::json aggregate_summary(std::span<const MIReport> reports,
                                 std::span<const AppendixRow> rows, double alpha) {
  std::vector<double> u, d, u_pos, d_pos, mi, mi_pos;
  for (const MIReport& r : reports) {
    u.push_back(r.uncertainty);
    mi.push_back(r.mi);
    if (r.cohens_d) d.push_back(*r.cohens_d);
    if (r.uncertainty_given_pos) u_pos.push_back(*r.uncertainty_given_pos);
    if (r.mi_given_pos) mi_pos.push_back(*r.mi_given_pos);
    if (r.cohens_d_given_pos) d_pos.push_back(*r.cohens_d_given_pos);
  }
  int sig = 0, sig_pos = 0;
  for (const AppendixRow& r : rows) {
    sig += r.significant ? 1 : 0;
    sig_pos += r.significant_given_pos ? 1 : 0;
  }
  return {{"languages", reports.size()},
          {"alpha", alpha},
          {"significant", sig},
          {"significant_given_pos", sig_pos},
          {"mean_mi", mean_or_null(mi)},
          {"mean_uncertainty", mean_or_null(u)},
          {"mean_cohens_d", mean_or_null(d)},
          {"mean_mi_given_pos", mean_or_null(mi_pos)},
          {"mean_uncertainty_given_pos", mean_or_null(u_pos)},
          {"mean_cohens_d_given_pos", mean_or_null(d_pos)}};
}

void write_summary_outputs(const std::filesystem::path& out_dir,
                           std::span<const MIReport> reports, double alpha) {
  std::string csv = report_csv_header() + '\n';
  for (const MIReport& r : reports) csv += report_csv_row(r) + '\n';
  write_text(out_dir / "report.csv", csv);
  const auto rows = appendix_rows(reports, alpha);
  write_text(out_dir / "appendix.tsv", appendix_tsv(rows));
  write_text(out_dir / "aggregate.json", aggregate_summary(reports, rows, alpha).dump(2) + "\n");
  if (reports.size() < 2) return;

  std::vector<double> mi, mi_pos, u, u_pos;
  for (const MIReport& r : reports) {
    mi.push_back(r.mi);
    u.push_back(r.uncertainty);
    if (r.mi_given_pos) mi_pos.push_back(*r.mi_given_pos);
    if (r.uncertainty_given_pos) u_pos.push_back(*r.uncertainty_given_pos);
  }
  std::vector<PlotSeries> mi_series{{"MI(W;V)", kde(mi)}};
  if (mi_pos.size() >= 2) mi_series.push_back({"MI(W;V|POS)", kde(mi_pos)});
  write_density(out_dir, "mi_density", "Mutual information across languages", "bits per phone",
                mi_series);
  std::vector<PlotSeries> u_series{{"U(W|V)", kde(u)}};
  if (u_pos.size() >= 2) u_series.push_back({"U(W|V;POS)", kde(u_pos)});
  write_density(out_dir, "u_density", "Uncertainty coefficient across languages", "fraction of bits",
                u_series);
}

}  // namespace signform
