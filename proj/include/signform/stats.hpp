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

#ifndef SIGNFORM_STATS_HPP_
#define SIGNFORM_STATS_HPP_

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace signform {

struct PermutationResult {
  double observed_mean = 0.0;
  std::int64_t n_permutations = 0;
  std::int64_t n_at_least_as_extreme = 0;
  // (r + 1) / (B + 1).
  double p_value = 1.0;
  // min(1, 2 r / B), reported alongside.
  double p_value_two_sided = 1.0;
  std::uint64_t seed = 0;
};

// Sign-flip test of mean(deltas) > 0. Permutation b flips each delta with
// probability 1/2 using bits drawn from a generator keyed by (seed, b), so
// the result does not depend on the thread count. Means within a relative
// 1e-12 of the observed one count as ties, and ties count as extreme.
PermutationResult permutation_test(std::span<const double> deltas,
                                   std::int64_t n_permutations,
                                   std::uint64_t seed, int threads = 1);

// Fraction of all 2^N sign patterns whose mean is at least the observed
// one (same tie rule). Throws InvalidArgument for N > 24.
double exact_permutation_p(std::span<const double> deltas);

// One-sample Kolmogorov-Smirnov test against Uniform(0, 1).
struct KSResult {
  double statistic = 0.0;
  double p_value = 1.0;
};
KSResult ks_uniform(std::span<const double> values);

struct BHResult {
  std::vector<bool> rejected;
  std::vector<double> adjusted;
};

// Benjamini-Hochberg step-up procedure. Outputs follow the input order.
BHResult bh_correct(std::span<const double> p_values, double alpha);

// Average ranks (1-based), ties share the mean of their positions.
std::vector<double> average_ranks(std::span<const double> values);

struct SpearmanResult {
  double rho = 0.0;
  // Two-sided: permutations of the y ranks with |rho| at least as large,
  // (r + 1) / (B + 1).
  double p_value = 1.0;
  std::int64_t n_permutations = 0;
  std::uint64_t seed = 0;
};

// Throws TooFewValues below 3 pairs and DegenerateRanks for a constant
// coordinate.
SpearmanResult spearman_rho(std::span<const double> x,
                            std::span<const double> y,
                            std::int64_t n_permutations = 10000,
                            std::uint64_t seed = 0);

struct DensityCurve {
  std::vector<double> x;
  std::vector<double> density;
  double bandwidth = 0.0;
};

// Gaussian kernel density on a uniform grid spanning the data +-4
// bandwidths. Without a bandwidth, Silverman's rule 1.06 sd n^(-1/5) is used.
DensityCurve kde(std::span<const double> values,
                 std::optional<double> bandwidth = std::nullopt,
                 int min_grid_points = 512);

// Trapezoid rule over the curve's grid.
double integrate(const DensityCurve& curve);

void write_curve_csv(std::ostream& out, const DensityCurve& curve);

struct PlotSeries {
  std::string label;
  DensityCurve curve;
};

// Minimal standalone SVG line plot of one or more curves.
std::string svg_line_plot(std::span<const PlotSeries> series,
                          const std::string& title, const std::string& x_label);

}  // namespace signform

#endif  // SIGNFORM_STATS_HPP_
