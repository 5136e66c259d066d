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

#include "signform/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>
#include <sstream>

#include "signform/error.hpp"
#include "signform/parallel.hpp"
#include "signform/rng.hpp"

namespace signform {

namespace {

constexpr std::int64_t kPermutationChunk = 1024;

double tie_tolerance(std::span<const double> deltas) {
  double scale = 0.0;
  for (double d : deltas) scale += std::abs(d);
  return 1e-12 * scale;
}

// Sum of the deltas under the sign pattern drawn from `rng`.
double flipped_sum(std::span<const double> deltas, SplitMix64& rng) {
  double sum = 0.0;
  std::size_t i = 0;
  while (i < deltas.size()) {
    std::uint64_t bits = rng();
    const std::size_t end = std::min(deltas.size(), i + 64);
    for (; i < end; ++i, bits >>= 1) {
      sum += (bits & 1U) ? -deltas[i] : deltas[i];
    }
  }
  return sum;
}

double pearson(std::span<const double> a, std::span<const double> b) {
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

PermutationResult permutation_test(std::span<const double> deltas,
                                   std::int64_t n_permutations,
                                   std::uint64_t seed, int threads) {
  if (deltas.empty()) throw Error(ErrorCode::TooFewValues, "no deltas to test");
  if (n_permutations < 1) {
    throw Error(ErrorCode::InvalidArgument, "need at least one permutation");
  }
  const double observed = std::accumulate(deltas.begin(), deltas.end(), 0.0);
  const double threshold = observed - tie_tolerance(deltas);
  const auto chunks = static_cast<std::size_t>(
      (n_permutations + kPermutationChunk - 1) / kPermutationChunk);
  std::vector<std::int64_t> counts(chunks, 0);
  parallel_for(chunks, threads, [&](std::size_t chunk) {
    const std::int64_t begin = static_cast<std::int64_t>(chunk) * kPermutationChunk;
    const std::int64_t end = std::min(n_permutations, begin + kPermutationChunk);
    std::int64_t r = 0;
    for (std::int64_t b = begin; b < end; ++b) {
      SplitMix64 rng(derive_seed(seed, {static_cast<std::uint64_t>(b)}));
      if (flipped_sum(deltas, rng) >= threshold) ++r;
    }
    counts[chunk] = r;
  });
  PermutationResult out;
  out.observed_mean = observed / static_cast<double>(deltas.size());
  out.n_permutations = n_permutations;
  out.n_at_least_as_extreme = std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
  out.p_value = static_cast<double>(out.n_at_least_as_extreme + 1) /
                static_cast<double>(n_permutations + 1);
  out.p_value_two_sided = std::min(
      1.0, 2.0 * static_cast<double>(out.n_at_least_as_extreme) /
               static_cast<double>(n_permutations));
  out.seed = seed;
  return out;
}

double exact_permutation_p(std::span<const double> deltas) {
  if (deltas.empty()) throw Error(ErrorCode::TooFewValues, "no deltas to test");
  if (deltas.size() > 24) {
    throw Error(ErrorCode::InvalidArgument, "exhaustive enumeration limited to 24 deltas");
  }
  const double observed = std::accumulate(deltas.begin(), deltas.end(), 0.0);
  const double threshold = observed - tie_tolerance(deltas);
  const std::uint64_t patterns = std::uint64_t{1} << deltas.size();
  std::uint64_t hits = 0;
  for (std::uint64_t mask = 0; mask < patterns; ++mask) {
    double sum = 0.0;
    for (std::size_t i = 0; i < deltas.size(); ++i) {
      sum += ((mask >> i) & 1U) ? -deltas[i] : deltas[i];
    }
    if (sum >= threshold) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(patterns);
}

KSResult ks_uniform(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::TooFewValues, "no values");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const double n = static_cast<double>(v.size());
  double d = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double x = std::clamp(v[i], 0.0, 1.0);
    d = std::max({d, static_cast<double>(i + 1) / n - x, x - static_cast<double>(i) / n});
  }
  const double sn = std::sqrt(n);
  const double lambda = (sn + 0.12 + 0.11 / sn) * d;
  double q = 0.0;
  if (lambda < 1e-3) {
    q = 1.0;
  } else {
    for (int k = 1; k <= 200; ++k) {
      const double term = std::exp(-2.0 * k * k * lambda * lambda);
      q += (k % 2 ? 2.0 : -2.0) * term;
      if (term < 1e-16) break;
    }
  }
  return {d, std::clamp(q, 0.0, 1.0)};
}

BHResult bh_correct(std::span<const double> p_values, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "alpha must lie in (0, 1)");
  }
  for (double p : p_values) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw Error(ErrorCode::InvalidArgument, "p-value outside [0, 1]");
    }
  }
  const std::size_t m = p_values.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return p_values[a] < p_values[b]; });
  BHResult out;
  out.rejected.assign(m, false);
  out.adjusted.assign(m, 1.0);
  std::size_t k_star = 0;
  for (std::size_t k = 1; k <= m; ++k) {
    if (p_values[order[k - 1]] <= static_cast<double>(k) * alpha / static_cast<double>(m)) {
      k_star = k;
    }
  }
  for (std::size_t k = 0; k < k_star; ++k) out.rejected[order[k]] = true;
  double running = 1.0;
  for (std::size_t k = m; k >= 1; --k) {
    const double scaled = static_cast<double>(m) * p_values[order[k - 1]] / static_cast<double>(k);
    running = std::min(running, scaled);
    out.adjusted[order[k - 1]] = std::min(1.0, running);
  }
  return out;
}

std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double avg = (static_cast<double>(i + j) / 2.0) + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = avg;
    i = j + 1;
  }
  return ranks;
}

SpearmanResult spearman_rho(std::span<const double> x, std::span<const double> y,
                            std::int64_t n_permutations, std::uint64_t seed) {
  if (x.size() != y.size()) {
    throw Error(ErrorCode::DimensionMismatch, "x and y differ in length");
  }
  if (x.size() < 3) throw Error(ErrorCode::TooFewValues, "need at least 3 pairs");
  const auto rx = average_ranks(x);
  auto ry = average_ranks(y);
  auto constant = [](const std::vector<double>& r) {
    return std::all_of(r.begin(), r.end(), [&](double v) { return v == r.front(); });
  };
  if (constant(rx) || constant(ry)) {
    throw Error(ErrorCode::DegenerateRanks, "a coordinate is constant");
  }
  SpearmanResult out;
  out.rho = pearson(rx, ry);
  out.n_permutations = n_permutations;
  out.seed = seed;
  if (n_permutations > 0) {
    const double threshold = std::abs(out.rho) - 1e-12;
    std::int64_t r = 0;
    std::vector<double> perm(ry);
    for (std::int64_t b = 0; b < n_permutations; ++b) {
      SplitMix64 rng(derive_seed(seed, {static_cast<std::uint64_t>(b)}));
      perm = ry;
      for (std::size_t i = perm.size() - 1; i > 0; --i) {
        std::swap(perm[i], perm[rng.below(i + 1)]);
      }
      if (std::abs(pearson(rx, perm)) >= threshold) ++r;
    }
    out.p_value = static_cast<double>(r + 1) / static_cast<double>(n_permutations + 1);
  }
  return out;
}

DensityCurve kde(std::span<const double> values, std::optional<double> bandwidth,
                 int min_grid_points) {
  if (values.size() < 2) throw Error(ErrorCode::TooFewValues, "need at least 2 values");
  const double n = static_cast<double>(values.size());
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  double h = 0.0;
  if (bandwidth) {
    if (!(*bandwidth > 0.0)) throw Error(ErrorCode::InvalidArgument, "bandwidth must be positive");
    h = *bandwidth;
  } else {
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / (n - 1.0));
    h = sd > 0.0 ? 1.06 * sd * std::pow(n, -0.2)
                 : 1e-3 * std::max(1.0, std::abs(mean));
  }
  const double lo = *lo_it - 4.0 * h;
  const double hi = *hi_it + 4.0 * h;
  // At least ten grid points per bandwidth so the trapezoid rule stays exact
  // to well below 1e-3.
  const double wanted = std::ceil((hi - lo) / h * 10.0) + 1.0;
  const int points = static_cast<int>(
      std::clamp(wanted, static_cast<double>(std::max(min_grid_points, 2)), 200001.0));
  DensityCurve c;
  c.bandwidth = h;
  c.x.resize(static_cast<std::size_t>(points));
  c.density.resize(static_cast<std::size_t>(points));
  const double norm = 1.0 / (n * h * std::sqrt(2.0 * std::numbers::pi));
  for (int i = 0; i < points; ++i) {
    const double x = lo + (hi - lo) * static_cast<double>(i) / (points - 1);
    double s = 0.0;
    for (double v : values) {
      const double z = (x - v) / h;
      s += std::exp(-0.5 * z * z);
    }
    c.x[static_cast<std::size_t>(i)] = x;
    c.density[static_cast<std::size_t>(i)] = s * norm;
  }
  return c;
}

double integrate(const DensityCurve& curve) {
  double total = 0.0;
  for (std::size_t i = 1; i < curve.x.size(); ++i) {
    total += 0.5 * (curve.density[i] + curve.density[i - 1]) * (curve.x[i] - curve.x[i - 1]);
  }
  return total;
}

void write_curve_csv(std::ostream& out, const DensityCurve& curve) {
  out << "x,density\n";
  char buf[64];
  for (std::size_t i = 0; i < curve.x.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.10g,%.10g\n", curve.x[i], curve.density[i]);
    out << buf;
  }
}

std::string svg_line_plot(std::span<const PlotSeries> series, const std::string& title,
                          const std::string& x_label) {
  constexpr double kWidth = 640, kHeight = 400;
  constexpr double kLeft = 60, kRight = 20, kTop = 40, kBottom = 50;
  static const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                        "#ff7f0e", "#8c564b"};
  double x0 = 0, x1 = 1, y1 = 1;
  bool first = true;
  for (const PlotSeries& s : series) {
    for (std::size_t i = 0; i < s.curve.x.size(); ++i) {
      if (first) {
        x0 = x1 = s.curve.x[i];
        y1 = 0.0;
        first = false;
      }
      x0 = std::min(x0, s.curve.x[i]);
      x1 = std::max(x1, s.curve.x[i]);
      y1 = std::max(y1, s.curve.density[i]);
    }
  }
  if (x1 <= x0) x1 = x0 + 1.0;
  if (y1 <= 0.0) y1 = 1.0;
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return kTop + ph - y / y1 * ph; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
      << escape_xml(title) << "</text>\n";
  svg << "<line x1=\"" << kLeft << "\" y1=\"" << kTop + ph << "\" x2=\"" << kLeft + pw
      << "\" y2=\"" << kTop + ph << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\""
      << kTop + ph << "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double xv = x0 + (x1 - x0) * t / 4.0;
    svg << "<text x=\"" << num(px(xv)) << "\" y=\"" << kTop + ph + 16
        << "\" text-anchor=\"middle\">" << label(xv) << "</text>\n";
    const double yv = y1 * t / 4.0;
    svg << "<text x=\"" << kLeft - 6 << "\" y=\"" << num(py(yv) + 4)
        << "\" text-anchor=\"end\">" << label(yv) << "</text>\n";
  }
  svg << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 10
      << "\" text-anchor=\"middle\">" << escape_xml(x_label) << "</text>\n";
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kColors[s % std::size(kColors)];
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    const DensityCurve& c = series[s].curve;
    for (std::size_t i = 0; i < c.x.size(); ++i) {
      svg << (i ? " " : "") << num(px(c.x[i])) << ',' << num(py(c.density[i]));
    }
    svg << "\"/>\n";
    const double ly = kTop + 10 + 16.0 * static_cast<double>(s);
    svg << "<line x1=\"" << kLeft + pw - 120 << "\" y1=\"" << ly << "\" x2=\""
        << kLeft + pw - 100 << "\" y2=\"" << ly << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << kLeft + pw - 94 << "\" y=\"" << ly + 4 << "\">"
        << escape_xml(series[s].label) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace signform
