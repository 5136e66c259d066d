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

#include <cmath>
#include <filesystem>
#include <fstream>

#include "signform/error.hpp"
#include "signform/hyperopt.hpp"
#include "signform/rng.hpp"

using namespace signform;
using Eigen::VectorXd;

namespace {

SearchSpace unit_interval() { return SearchSpace{{{"x", DimType::Continuous, 0.0, 1.0}}}; }

double quadratic(const VectorXd& v) { return (v[0] - 0.3) * (v[0] - 0.3); }

VectorXd vec1(double a) { return VectorXd::Constant(1, a); }

GPHyperparameters fixed_hyper(double length, double signal, double noise) {
  return GPHyperparameters{VectorXd::Constant(1, length), signal, noise};
}

}  // namespace

TEST_CASE("search space mapping") {
  const SearchSpace s = SearchSpace::lm_default();
  CHECK(s.size() == 4);
  for (double u : {0.0, 0.2, 0.5, 0.999, 1.0}) {
    const VectorXd native = s.to_native(VectorXd::Constant(4, u));
    CHECK(native[0] >= 1);
    CHECK(native[0] <= 3);
    CHECK(native[1] >= 32);
    CHECK(native[1] <= 512);
    CHECK(native[0] == std::round(native[0]));
    CHECK(native[3] == doctest::Approx(0.5 * u));
    const VectorXd snapped = s.snap(VectorXd::Constant(4, u));
    CHECK(s.to_native(snapped) == native);
    CHECK((snapped.array() >= 0.0).all());
    CHECK((snapped.array() <= 1.0).all());
  }
  // Every integer value owns an equal share of the unit interval.
  CHECK(s.to_native(VectorXd::Constant(4, 0.33))[0] == 1);
  CHECK(s.to_native(VectorXd::Constant(4, 0.34))[0] == 2);
  CHECK(s.to_native(VectorXd::Constant(4, 0.67))[0] == 3);

  const SearchSpace logs{{{"lr", DimType::LogContinuous, 1e-4, 1e-1}}};
  CHECK(logs.to_native(vec1(0.5))[0] == doctest::Approx(std::sqrt(1e-4 * 1e-1)));
  CHECK(logs.to_unit(vec1(1e-2))[0] == doctest::Approx(2.0 / 3.0));

  CHECK(search_space_from_json(to_json(s)).dims.size() == 4);
  CHECK_THROWS_AS(search_space_from_json(nlohmann::json::parse(
                      R"([{"name":"a","type":"continuous","lower":1,"upper":1}])")),
                  Error);
}

TEST_CASE("gp posterior basics") {
  GPOptions opt;
  opt.fixed = fixed_hyper(0.2, 1.0, 1e-12);
  const std::vector<VectorXd> x{vec1(0.4)};
  const std::vector<double> y{2.5};
  const GPPosterior one = gp_fit(x, y, opt);
  CHECK(std::abs(one.predict(vec1(0.4)).mean - 2.5) < 1e-6);
  CHECK(one.predict(vec1(0.4)).variance <= one.predict(vec1(0.95)).variance);

  const GPPosterior prior = gp_fit({}, {}, opt, 0, 1);
  CHECK(prior.predict(vec1(0.1)).mean == 0.0);
  CHECK(prior.predict(vec1(0.1)).variance == doctest::Approx(1.0));
}

TEST_CASE("gp two-point posterior mean matches the closed form") {
  const double l = 0.3, s = 1.7, n = 0.01;
  GPOptions opt;
  opt.fixed = fixed_hyper(l, s, n);
  opt.normalize = false;
  const double x1 = 0.2, x2 = 0.6, y1 = 1.0, y2 = -0.5, xm = 0.4;
  const std::vector<VectorXd> x{vec1(x1), vec1(x2)};
  const std::vector<double> y{y1, y2};
  const GPPosterior gp = gp_fit(x, y, opt);
  auto k = [&](double a, double b) { return s * std::exp(-0.5 * (a - b) * (a - b) / (l * l)); };
  const double a = k(x1, x1) + n, b = k(x1, x2), d = k(x2, x2) + n;
  const double det = a * d - b * b;
  const double alpha1 = (d * y1 - b * y2) / det;
  const double alpha2 = (-b * y1 + a * y2) / det;
  const double expected = k(xm, x1) * alpha1 + k(xm, x2) * alpha2;
  CHECK(gp.predict(vec1(xm)).mean == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("marginal likelihood fitting does not lose to its starting point") {
  std::vector<VectorXd> x;
  std::vector<double> y;
  for (int i = 0; i < 12; ++i) {
    const double t = i / 11.0;
    x.push_back(vec1(t));
    y.push_back(std::sin(6.0 * t));
  }
  GPOptions start;
  start.fixed = fixed_hyper(0.3, 1.0, 1e-4);
  const double start_lml = gp_fit(x, y, start).log_marginal_likelihood();
  const GPPosterior fitted = gp_fit(x, y, GPOptions{}, 3);
  CHECK(fitted.log_marginal_likelihood() >= start_lml - 1e-9);
  CHECK(fitted.predict(vec1(0.5)).mean == doctest::Approx(std::sin(3.0)).epsilon(0.05));
}

TEST_CASE("expected improvement closed form") {
  CHECK(expected_improvement(1.0, 0.0, 1.0) == 0.0);
  CHECK(expected_improvement(0.0, 0.0, 1.0) == 1.0);
  CHECK(std::abs(expected_improvement(2.0, 1.0, 2.0) - 0.3989) < 1e-4);
  SplitMix64 rng(1);
  for (int i = 0; i < 1000; ++i) {
    CHECK(expected_improvement(rng.uniform() * 4 - 2, rng.uniform() * 3, rng.uniform() * 4 - 2) >= 0.0);
  }
}

TEST_CASE("proposals") {
  const SearchSpace s = SearchSpace::lm_default();
  const VectorXd first = propose_next({}, s, 4);
  CHECK((first.array() >= 0.0).all());
  CHECK((first.array() <= 1.0).all());
  CHECK(propose_next({}, s, 4) == first);

  // History with a deep valley around x = 0.3.
  const SearchSpace line = unit_interval();
  std::vector<Trial> hist;
  for (double u : {0.05, 0.25, 0.32, 0.6, 0.9, 0.75}) {
    hist.push_back(Trial{vec1(u), vec1(u), quadratic(vec1(u)), TrialStatus::Ok});
  }
  std::vector<VectorXd> candidates;
  ProposalOptions opt;
  opt.candidates_out = &candidates;
  const VectorXd next = propose_next(hist, line, 9, opt);
  CHECK(propose_next(hist, line, 9) == next);
  REQUIRE(candidates.size() == 4096);

  std::vector<VectorXd> xs;
  std::vector<double> ys;
  for (const Trial& t : hist) {
    xs.push_back(t.unit);
    ys.push_back(t.objective);
  }
  const GPPosterior gp = gp_fit(xs, ys, opt.gp, derive_seed(9, {hist.size(), 1}), 1);
  const double best = quadratic(vec1(0.32));
  const double chosen = expected_improvement(gp, best, next);
  for (const VectorXd& c : candidates) CHECK(chosen >= expected_improvement(gp, best, c));
}

TEST_CASE("search on a quadratic") {
  const SearchSpace line = unit_interval();
  const SearchResult single = run_search(quadratic, line, 1, 3);
  CHECK(single.history.size() == 1);
  CHECK(single.best.unit == single.history[0].unit);

  int close = 0, bo_wins = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const SearchResult bo = run_search(quadratic, line, 20, seed);
    if (std::abs(bo.best.native[0] - 0.3) <= 0.05) ++close;
    SearchOptions random;
    random.mode = SearchMode::Random;
    const SearchResult rs = run_search(quadratic, line, 20, seed, random);
    if (bo.best.objective <= rs.best.objective) ++bo_wins;
  }
  CHECK(close >= 9);
  CHECK(bo_wins >= 6);
}

TEST_CASE("diverged trials") {
  const SearchSpace line = unit_interval();
  int calls = 0;
  const Objective flaky = [&](const VectorXd& v) {
    if (++calls % 3 == 0) throw Error(ErrorCode::TrainingDiverged, "nan");
    return quadratic(v);
  };
  const SearchResult r = run_search(flaky, line, 9, 2);
  int diverged = 0;
  double worst_ok = 0.0;
  for (const Trial& t : r.history) {
    if (t.status == TrialStatus::Diverged) {
      ++diverged;
      CHECK(t.objective > worst_ok);
    } else {
      worst_ok = std::max(worst_ok, t.objective);
    }
  }
  CHECK(diverged == 3);
  CHECK(r.best.status == TrialStatus::Ok);

  const Objective broken = [](const VectorXd&) -> double {
    throw Error(ErrorCode::TrainingDiverged, "nan");
  };
  try {
    run_search(broken, line, 3, 1);
    FAIL("expected AllTrialsDiverged");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::AllTrialsDiverged);
  }
}

TEST_CASE("search log replays to resume an interrupted search") {
  const SearchSpace s = SearchSpace::lm_default();
  const Objective f = [](const VectorXd& v) {
    return std::pow(v[0] - 2, 2) + std::pow((v[1] - 200) / 100, 2) + std::pow((v[2] - 50) / 50, 2) +
           v[3];
  };
  const auto dir = std::filesystem::temp_directory_path() / "signform_hyperopt_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  SearchOptions opt;
  opt.proposal.n_candidates = 512;

  const SearchResult full = run_search(f, s, 9, 11, opt);

  opt.log_path = dir / "search.jsonl";
  run_search(f, s, 6, 11, opt);
  const std::vector<Trial> logged = read_search_log(*opt.log_path, s);
  REQUIRE(logged.size() == 6);
  const SearchResult resumed = run_search(f, s, 9, 11, opt, logged);
  REQUIRE(resumed.history.size() == 9);
  for (std::size_t i = 0; i < 9; ++i) {
    CHECK(resumed.history[i].unit.isApprox(full.history[i].unit, 1e-12));
    CHECK(resumed.history[i].objective == doctest::Approx(full.history[i].objective));
  }
  CHECK(read_search_log(*opt.log_path, s).size() == 9);
  CHECK(read_search_log(dir / "missing.jsonl", s).empty());
  std::filesystem::remove_all(dir);
}
