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
#include <numeric>
#include <random>

#include "signform/error.hpp"
#include "signform/infotheory.hpp"
#include "signform/synthbench.hpp"

using namespace signform;

namespace {

WordLoss word(double bits, int tokens) {
  WordLoss w;
  w.total_bits = bits;
  w.token_count = tokens;
  w.position_bits.assign(static_cast<std::size_t>(tokens), bits / tokens);
  return w;
}

PerWordLoss table(std::vector<int> ids, std::vector<WordLoss> words) {
  return PerWordLoss{std::move(ids), std::move(words)};
}

PerWordLoss random_table(std::mt19937_64& rng, int n, int first_id = 0) {
  std::uniform_real_distribution<double> bits(0.5, 20.0);
  std::uniform_int_distribution<int> len(2, 9);
  PerWordLoss t;
  for (int i = 0; i < n; ++i) {
    t.sign_ids.push_back(first_id + i);
    t.words.push_back(word(bits(rng), len(rng)));
  }
  return t;
}

}  // namespace

TEST_CASE("entropy estimate is the micro average") {
  CHECK(entropy_estimate(table({0}, {word(6, 3)})).bits_per_phone == doctest::Approx(2.0));
  const EntropyEstimate e = entropy_estimate(table({0, 1}, {word(6, 3), word(2, 2)}));
  CHECK(e.bits_per_phone == doctest::Approx(1.6));
  CHECK(e.total_tokens == 5);
  CHECK(e.n_words == 2);
  CHECK_THROWS_AS(entropy_estimate(PerWordLoss{}), Error);
}

TEST_CASE("entropy of the exact uniform single-phone model") {
  const auto spec = synth::uniform_single_phone_spec();
  const auto g = synth::generate(spec, 50, 3);
  std::vector<int> ids(50);
  std::iota(ids.begin(), ids.end(), 0);
  const auto losses = synth::exact_losses(spec, g.lexicon, g.clusters, ids);
  CHECK(entropy_estimate(losses.unconditional).bits_per_phone == doctest::Approx(0.5));
}

TEST_CASE("micro-average identity over concatenated tables") {
  std::mt19937_64 rng(5);
  const PerWordLoss a = random_table(rng, 17);
  const PerWordLoss b = random_table(rng, 9, 100);
  PerWordLoss ab = a;
  ab.sign_ids.insert(ab.sign_ids.end(), b.sign_ids.begin(), b.sign_ids.end());
  ab.words.insert(ab.words.end(), b.words.begin(), b.words.end());
  const auto ea = entropy_estimate(a), eb = entropy_estimate(b);
  const double combined =
      (ea.bits_per_phone * ea.total_tokens + eb.bits_per_phone * eb.total_tokens) /
      static_cast<double>(ea.total_tokens + eb.total_tokens);
  CHECK(entropy_estimate(ab).bits_per_phone == doctest::Approx(combined));
}

PerWordLoss perturbed(const PerWordLoss& t, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  PerWordLoss out = t;
  for (WordLoss& w : out.words) w.total_bits += g(rng);
  return out;
}

TEST_CASE("mi estimate chain consistency") {
  std::mt19937_64 rng(2);
  const PerWordLoss a = random_table(rng, 30);
  const PerWordLoss b = perturbed(a, rng);

  const MIEstimate same = mi_estimate(a, a);
  CHECK(same.mi == 0.0);
  for (double d : same.deltas) CHECK(d == 0.0);

  const MIEstimate ab = mi_estimate(a, b), ba = mi_estimate(b, a);
  CHECK(ab.mi == doctest::Approx(-ba.mi));
  for (std::size_t i = 0; i < ab.deltas.size(); ++i) {
    CHECK(ab.deltas[i] == doctest::Approx(-ba.deltas[i]));
    const WordLoss& wa = a.words[i];
    CHECK(ab.deltas[i] ==
          doctest::Approx((wa.total_bits - b.words[i].total_bits) / wa.token_count));
  }
  const MIEstimate per_word = mi_estimate(a, b, DeltaUnit::PerWord);
  CHECK(per_word.deltas[3] == doctest::Approx(a.words[3].total_bits - b.words[3].total_bits));
  CHECK(per_word.mi == doctest::Approx(ab.mi));
}

TEST_CASE("mi estimate matches signs by identity") {
  const PerWordLoss u = table({4, 9}, {word(10, 5), word(6, 3)});
  const PerWordLoss c = table({9, 4}, {word(3, 3), word(5, 5)});
  const MIEstimate m = mi_estimate(u, c);
  REQUIRE(m.sign_ids == std::vector<int>{4, 9});
  CHECK(m.deltas[0] == doctest::Approx(1.0));
  CHECK(m.deltas[1] == doctest::Approx(1.0));
  CHECK(m.mi == doctest::Approx(1.0));

  const auto code_of = [](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::IoError;
  };
  CHECK(code_of([&] { mi_estimate(u, table({4, 8}, {word(1, 5), word(1, 3)})); }) ==
        ErrorCode::SignSetMismatch);
  CHECK(code_of([&] { mi_estimate(u, table({4}, {word(1, 5)})); }) ==
        ErrorCode::SignSetMismatch);
  CHECK(code_of([&] { mi_estimate(u, table({4, 9}, {word(1, 5), word(1, 4)})); }) ==
        ErrorCode::SignSetMismatch);
}

TEST_CASE("mi from reported entropies") {
  // Synthetic tables whose entropies are 3.401 and 3.291 bits per phone.
  const PerWordLoss u = table({0}, {word(3401, 1000)});
  const PerWordLoss c = table({0}, {word(3291, 1000)});
  CHECK(mi_estimate(u, c).mi == doctest::Approx(0.110).epsilon(1e-9));
  CHECK(conditional_mi(u, u).mi == 0.0);
}

TEST_CASE("exact two-cluster model pair recovers a third of a bit") {
  const auto spec = synth::two_cluster_spec();
  const auto g = synth::generate(spec, 4000, 8);
  std::vector<int> ids(4000);
  std::iota(ids.begin(), ids.end(), 0);
  const auto losses = synth::exact_losses(spec, g.lexicon, g.clusters, ids);
  // Every word has three tokens; the conditional model saves exactly one bit.
  CHECK(mi_estimate(losses.unconditional, losses.conditional).mi == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("uncertainty coefficient") {
  CHECK(uncertainty_coefficient(0.110, 3.401) == doctest::Approx(0.0323).epsilon(2e-3));
  CHECK(uncertainty_coefficient(0.0, 3.0) == 0.0);
  CHECK(uncertainty_coefficient(-0.0388 * 2.5, 2.5) == doctest::Approx(-0.0388));
  CHECK_THROWS_AS(uncertainty_coefficient(0.1, 0.0), Error);
  CHECK_THROWS_AS(uncertainty_coefficient(0.1, -1.0), Error);
}

TEST_CASE("cohens d") {
  const std::vector<double> constant{1, 1, 1};
  try {
    cohens_d(constant);
    FAIL("expected ZeroVariance");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ZeroVariance);
  }
  CHECK(cohens_d(std::vector<double>{0.1, -0.1}) == doctest::Approx(0.0));
  CHECK(cohens_d(std::vector<double>{1, 2, 3}) == doctest::Approx(2.0));
  CHECK_THROWS_AS(cohens_d(std::vector<double>{1.0}), Error);
}

TEST_CASE("report fields satisfy their identities") {
  std::mt19937_64 rng(11);
  const PerWordLoss u = random_table(rng, 40);
  const PerWordLoss v = perturbed(u, rng);
  const PerWordLoss c = perturbed(u, rng);
  const PerWordLoss vc = perturbed(c, rng);
  const MIReport r = make_report("xx", mi_estimate(u, v), conditional_mi(c, vc));
  CHECK(r.mi == r.H_W.bits_per_phone - r.H_W_given_V.bits_per_phone);
  CHECK(r.uncertainty == r.mi / r.H_W.bits_per_phone);
  REQUIRE(r.mi_given_pos);
  CHECK(*r.mi_given_pos == r.H_W_given_C->bits_per_phone - r.H_W_given_VC->bits_per_phone);
  CHECK(*r.uncertainty_given_pos == *r.mi_given_pos / r.H_W_given_C->bits_per_phone);
  CHECK(*r.cohens_d == doctest::Approx(cohens_d(mi_estimate(u, v).deltas)));

  const auto j = to_json(r);
  CHECK(j["mi"].get<double>() == r.mi);
  CHECK(j["H_W"]["total_tokens"].get<std::int64_t>() == r.H_W.total_tokens);

  const MIReport no_pos = make_report("yy", mi_estimate(u, v), std::nullopt);
  CHECK_FALSE(no_pos.mi_given_pos);
  CHECK(to_json(no_pos)["mi_given_pos"].is_null());
}

TEST_CASE("report CSV layout") {
  MIReport r;
  r.language = "eng";
  r.H_W.bits_per_phone = 3.40149;
  r.mi = 0.11012;
  r.uncertainty = 0.032375;
  r.cohens_d = 0.1749;
  r.mi_given_pos = 0.08404;
  r.uncertainty_given_pos = 0.025001;
  r.cohens_d_given_pos = 0.13301;
  CHECK(report_csv_header() ==
        "language,H_W,MI_W_V,U_W_V_pct,cohens_d,MI_W_V_given_POS,U_W_V_given_POS_pct,"
        "cohens_d_given_POS");
  CHECK(report_csv_row(r) == "eng,3.401,0.110,3.24,0.175,0.084,2.50,0.133");
  r.mi = -0.0001;
  r.mi_given_pos.reset();
  r.uncertainty_given_pos.reset();
  r.cohens_d_given_pos.reset();
  CHECK(report_csv_row(r) == "eng,3.401,0.000,3.24,0.175,,,");
}
