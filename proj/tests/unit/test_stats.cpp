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

#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "signform/error.hpp"
#include "signform/stats.hpp"

using namespace signform;

namespace {

// Direct enumeration of all sign vectors, written independently of the
// library routine.
double brute_force_p(const std::vector<double>& d) {
  const double obs = std::accumulate(d.begin(), d.end(), 0.0);
  const int n = static_cast<int>(d.size());
  int hits = 0;
  for (int mask = 0; mask < (1 << n); ++mask) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += (mask & (1 << i)) ? -d[i] : d[i];
    if (s >= obs - 1e-9) ++hits;
  }
  return static_cast<double>(hits) / (1 << n);
}

double rank_formula_rho(const std::vector<double>& rx, const std::vector<double>& ry) {
  const double n = static_cast<double>(rx.size());
  double d2 = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) d2 += (rx[i] - ry[i]) * (rx[i] - ry[i]);
  return 1.0 - 6.0 * d2 / (n * (n * n - 1.0));
}

}  // namespace

TEST_CASE("permutation test degenerate cases") {
  const std::vector<double> zeros(20, 0.0);
  const auto all_tie = permutation_test(zeros, 1000, 1);
  CHECK(all_tie.p_value == 1.0);
  CHECK(all_tie.n_at_least_as_extreme == 1000);

  const std::vector<double> one{1.0};
  const auto single = permutation_test(one, 100000, 7);
  CHECK(single.p_value == doctest::Approx(0.5).epsilon(0.02));
  CHECK(exact_permutation_p(one) == 0.5);

  const std::vector<double> ten(10, 1.0);
  CHECK(exact_permutation_p(ten) == doctest::Approx(1.0 / 1024.0));
  CHECK(permutation_test(ten, 100000, 3).p_value == doctest::Approx(1.0 / 1024.0).epsilon(0.2));
}

TEST_CASE("monte carlo p agrees with exhaustive enumeration") {
  std::mt19937_64 rng(19);
  std::normal_distribution<double> g(0.3, 1.0);
  for (int n : {3, 7, 10, 12}) {
    std::vector<double> d(static_cast<std::size_t>(n));
    for (double& x : d) x = g(rng);
    const double exact = brute_force_p(d);
    CHECK(exact_permutation_p(d) == doctest::Approx(exact));
    CHECK(std::abs(permutation_test(d, 100000, 42 + n).p_value - exact) < 0.01);
  }
}

TEST_CASE("permutation p is scale invariant and schedule independent") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g(0.05, 1.0);
  std::vector<double> d(300);
  for (double& x : d) x = g(rng);
  std::vector<double> scaled = d;
  for (double& x : scaled) x *= 3.7;
  const auto a = permutation_test(d, 5000, 9, 1);
  const auto b = permutation_test(scaled, 5000, 9, 1);
  const auto c = permutation_test(d, 5000, 9, 4);
  CHECK(a.n_at_least_as_extreme == b.n_at_least_as_extreme);
  CHECK(a.n_at_least_as_extreme == c.n_at_least_as_extreme);
  CHECK(a.p_value == (a.n_at_least_as_extreme + 1) / 5001.0);
  CHECK(a.p_value_two_sided == doctest::Approx(std::min(1.0, 2.0 * a.n_at_least_as_extreme / 5000.0)));
  CHECK(a.seed == 9);
}

TEST_CASE("null p-values are uniform") {
  std::mt19937_64 rng(77);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> ps;
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<double> d(50);
    for (double& x : d) x = g(rng);
    ps.push_back(permutation_test(d, 2000, 1000 + rep).p_value);
  }
  CHECK(ks_uniform(ps).p_value > 0.05);
}

TEST_CASE("ks test rejects a concentrated sample") {
  std::vector<double> v(100);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = 0.01 * static_cast<double>(i) * 0.2;
  CHECK(ks_uniform(v).p_value < 1e-6);
  std::vector<double> grid(100);
  for (std::size_t i = 0; i < grid.size(); ++i) grid[i] = (static_cast<double>(i) + 0.5) / 100.0;
  CHECK(ks_uniform(grid).statistic == doctest::Approx(0.005));
  CHECK(ks_uniform(grid).p_value > 0.99);
}

TEST_CASE("benjamini hochberg") {
  const std::vector<double> p{0.01, 0.02, 0.03, 0.04, 0.05};
  const BHResult all = bh_correct(p, 0.05);
  CHECK(std::count(all.rejected.begin(), all.rejected.end(), true) == 5);
  for (double a : all.adjusted) CHECK(a == doctest::Approx(0.05));

  const BHResult single = bh_correct(std::vector<double>{0.04}, 0.05);
  CHECK(single.rejected[0]);
  CHECK(single.adjusted[0] == doctest::Approx(0.04));

  const BHResult none = bh_correct(std::vector<double>{0.6, 0.7}, 0.05);
  CHECK_FALSE(none.rejected[0]);
  CHECK_FALSE(none.rejected[1]);
  CHECK(none.adjusted[0] == doctest::Approx(0.7));

  // Unsorted input: adjusted = min_{j>=k} m p_(j) / j, by hand.
  const BHResult mixed = bh_correct(std::vector<double>{0.04, 0.001, 0.5, 0.03}, 0.05);
  CHECK(mixed.adjusted[1] == doctest::Approx(0.004));
  CHECK(mixed.adjusted[3] == doctest::Approx(0.04 * 4 / 3));
  CHECK(mixed.adjusted[0] == doctest::Approx(0.04 * 4 / 3));
  CHECK(mixed.adjusted[2] == doctest::Approx(0.5));
  CHECK(mixed.rejected == std::vector<bool>{false, true, false, false});

  CHECK_THROWS_AS(bh_correct(std::vector<double>{1.2}, 0.05), Error);
  CHECK_THROWS_AS(bh_correct(std::vector<double>{0.2}, 1.0), Error);
}

TEST_CASE("benjamini hochberg rejections are monotone") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 0.1);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> p(12);
    for (double& x : p) x = u(rng);
    const BHResult before = bh_correct(p, 0.05);
    const auto i = static_cast<std::size_t>(trial % 12);
    p[i] *= 0.5;
    const BHResult after = bh_correct(p, 0.05);
    for (std::size_t j = 0; j < p.size(); ++j) {
      if (before.rejected[j]) CHECK(after.rejected[j]);
    }
  }
}

TEST_CASE("spearman rho") {
  const std::vector<double> x{1, 2, 3}, y_up{2, 4, 9}, y{2, 3, 1};
  CHECK(spearman_rho(x, y_up, 0).rho == doctest::Approx(1.0));
  CHECK(spearman_rho(x, y, 0).rho == -0.5);
  try {
    spearman_rho(x, std::vector<double>{5, 5, 5});
    FAIL("expected DegenerateRanks");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateRanks);
  }
  CHECK(average_ranks(std::vector<double>{3, 1, 3, 2}) == std::vector<double>{3.5, 1, 3.5, 2});
}

TEST_CASE("spearman rho matches the rank-difference formula and is monotone invariant") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> x(40), y(40);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = g(rng);
    y[i] = 0.4 * x[i] + g(rng);
  }
  const SpearmanResult r = spearman_rho(x, y, 2000, 5);
  CHECK(r.rho == doctest::Approx(rank_formula_rho(average_ranks(x), average_ranks(y))));
  std::vector<double> tx = x, ty = y;
  for (double& v : tx) v = std::exp(v);
  for (double& v : ty) v = v * v * v;
  CHECK(spearman_rho(tx, ty, 0).rho == doctest::Approx(r.rho));
  CHECK(r.p_value > 0.0);
  CHECK(r.p_value <= 1.0);
  CHECK(spearman_rho(x, y, 2000, 5).p_value == r.p_value);
}

TEST_CASE("kernel density estimate") {
  const std::vector<double> pair{-1.0, 1.0};
  const DensityCurve c = kde(pair);
  for (std::size_t i = 0; i < c.x.size(); ++i) {
    CHECK(c.x[i] == doctest::Approx(-c.x[c.x.size() - 1 - i]).epsilon(1e-9));
    CHECK(std::abs(c.density[i] - c.density[c.x.size() - 1 - i]) < 1e-9);
  }
  CHECK(std::abs(integrate(c) - 1.0) < 1e-3);

  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> v(106);
  for (double& x : v) x = 0.02 * g(rng);
  const DensityCurve auto_bw = kde(v);
  const double n = static_cast<double>(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  CHECK(auto_bw.bandwidth == doctest::Approx(1.06 * std::sqrt(ss / (n - 1)) * std::pow(n, -0.2)));
  CHECK(std::abs(integrate(auto_bw) - 1.0) < 1e-3);

  const std::vector<double> spike(9, 0.7);
  const DensityCurve s = kde(spike, 0.01);
  const auto mode = std::max_element(s.density.begin(), s.density.end()) - s.density.begin();
  CHECK(s.x[static_cast<std::size_t>(mode)] == doctest::Approx(0.7).epsilon(1e-3));
  CHECK(s.density[static_cast<std::size_t>(mode)] ==
        doctest::Approx(1.0 / (0.01 * std::sqrt(2.0 * M_PI))).epsilon(1e-3));
  CHECK_THROWS_AS(kde(std::vector<double>{1.0}), Error);
}

TEST_CASE("curve emission") {
  const DensityCurve c = kde(std::vector<double>{0.0, 1.0, 2.0});
  std::ostringstream csv;
  write_curve_csv(csv, c);
  CHECK(csv.str().rfind("x,density\n", 0) == 0);
  const std::vector<PlotSeries> series{{"MI", c}};
  const std::string svg = svg_line_plot(series, "density <test>", "bits");
  CHECK(svg.find("<svg") == 0);
  CHECK(svg.find("<polyline") != std::string::npos);
  CHECK(svg.find("&lt;test&gt;") != std::string::npos);
}
