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

#include "signform/error.hpp"
#include "signform/infotheory.hpp"
#include "signform/phonesthemes.hpp"
#include "signform/rng.hpp"
#include "signform/stats.hpp"
#include "signform/synthbench.hpp"

using namespace signform;

namespace {

Lexicon words(const std::vector<std::string>& forms) {
  std::vector<Sign> signs;
  for (const std::string& f : forms) {
    Sign s;
    s.lemma = f;
    for (char c : f) s.form.emplace_back(std::string(1, c));
    s.pos = "N";
    signs.push_back(std::move(s));
  }
  return make_lexicon("toy", std::move(signs));
}

std::string affix(const AffixCandidate& c) { return join_form(c.phones); }

std::vector<int> iota_ids(std::size_t n) {
  std::vector<int> ids(n);
  std::iota(ids.begin(), ids.end(), 0);
  return ids;
}

// Table whose savings are iid noise, unrelated to the forms.
PositionTable noise_table(const Lexicon& lex, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  PositionTable t;
  for (const Sign& s : lex.signs) {
    std::vector<double> u, c;
    for (std::size_t i = 0; i <= s.form.size(); ++i) {
      u.push_back(3.0 + g(rng));
      c.push_back(3.0 + g(rng));
    }
    t.uncond.push_back(u);
    t.cond.push_back(c);
  }
  return t;
}

// Probability that a uniformly drawn n-subset of `values` has a sum at least
// `observed`, by enumerating every subset.
double exact_subset_tail(const std::vector<double>& values, int n, double observed) {
  const int m = static_cast<int>(values.size());
  int hits = 0, total = 0;
  for (int mask = 0; mask < (1 << m); ++mask) {
    if (__builtin_popcount(static_cast<unsigned>(mask)) != n) continue;
    double s = 0.0;
    for (int i = 0; i < m; ++i) {
      if (mask & (1 << i)) s += values[static_cast<std::size_t>(i)];
    }
    ++total;
    if (s >= observed - 1e-12) ++hits;
  }
  return static_cast<double>(hits) / total;
}

}  // namespace

TEST_CASE("pointwise affix mi") {
  const std::vector<double> u{3, 2, 1, 0.5}, c{1, 2, 0, 0.5};
  CHECK(pointwise_affix_mi(u, u, 3) == 0.0);
  CHECK(pointwise_affix_mi(u, c, 1) == doctest::Approx(2.0));
  CHECK(pointwise_affix_mi(u, c, 2) == doctest::Approx(1.0));
  CHECK(pointwise_affix_mi(u, c, 3) == doctest::Approx(1.0));
  CHECK_THROWS_AS(pointwise_affix_mi(u, c, 0), Error);
  CHECK_THROWS_AS(pointwise_affix_mi(u, c, 5), Error);

  // Whole word including the end token equals the per-phone delta.
  WordLoss wu{6.5, 4, u}, wc{3.5, 4, c};
  const MIEstimate m = mi_estimate(PerWordLoss{{0}, {wu}}, PerWordLoss{{0}, {wc}});
  CHECK(pointwise_affix_mi(u, c, 4) == doctest::Approx(m.deltas[0]));
}

TEST_CASE("exact two-cluster pair saves one bit on the first phone") {
  const auto spec = synth::two_cluster_spec();
  const auto g = synth::generate(spec, 200, 1);
  const auto losses = synth::exact_losses(spec, g.lexicon, g.clusters, iota_ids(200));
  const PositionTable t = position_table(losses.unconditional, losses.conditional, 200);
  for (std::size_t i = 0; i < 200; ++i) {
    CHECK(pointwise_affix_mi(t.uncond[i], t.cond[i], 1) == doctest::Approx(1.0));
  }
}

TEST_CASE("candidate enumeration") {
  const Lexicon lex = words({"kat", "kam", "tok"});
  auto c = enumerate_candidates(lex, 1, 1, AffixSide::Prefix, 2);
  REQUIRE(c.size() == 1);
  CHECK(affix(c[0]) == "k");
  CHECK(c[0].count == 2);
  CHECK(c[0].word_indices == std::vector<int>{0, 1});

  c = enumerate_candidates(lex, 1, 1, AffixSide::Prefix, 1);
  CHECK(c.size() == 2);

  const Lexicon lex2 = words({"kat", "mat"});
  c = enumerate_candidates(lex2, 2, 2, AffixSide::Suffix, 2);
  REQUIRE(c.size() == 1);
  CHECK(affix(c[0]) == "at");

  // Words shorter than k are never counted.
  const Lexicon lex3 = words({"ka", "k", "ko"});
  c = enumerate_candidates(lex3, 2, 2, AffixSide::Prefix, 1);
  CHECK(c.size() == 2);
}

TEST_CASE("form reversal") {
  const Lexicon lex = words({"banana", "a", "gl"});
  const Lexicon rev = reverse_forms(lex);
  CHECK(join_form(rev.signs[0].form) == "ananab");
  CHECK(join_form(rev.signs[1].form) == "a");
  CHECK(rev.signs[2].lemma == "gl");
  const Lexicon back = reverse_forms(rev);
  for (std::size_t i = 0; i < lex.size(); ++i) CHECK(back.signs[i].form == lex.signs[i].form);
}

TEST_CASE("phonestheme test degenerate cases") {
  AffixCandidate all;
  all.word_indices = {0, 1, 2, 3};
  all.count = 4;
  const std::vector<double> pmi{0.1, 0.5, -0.2, 0.3};
  CHECK(phonestheme_test(all, pmi, 1000, 1) == 1.0);

  AffixCandidate some;
  some.word_indices = {1, 2};
  some.count = 2;
  CHECK(phonestheme_test(some, std::vector<double>(4, 0.25), 1000, 1) == 1.0);

  AffixCandidate too_big;
  too_big.word_indices = {0, 1, 2, 3, 4};
  CHECK_THROWS_AS(phonestheme_test(too_big, pmi, 10, 1), Error);
}

TEST_CASE("phonestheme test matches the exact sampling distribution") {
  const std::vector<double> pmi{0.9, -0.1, 0.4, 0.05, 0.7, -0.6, 0.2};
  for (const std::vector<int>& set : {std::vector<int>{0, 4}, std::vector<int>{2, 3, 6},
                                      std::vector<int>{0, 2, 4, 6, 1}}) {
    AffixCandidate c;
    c.word_indices = set;
    c.count = static_cast<int>(set.size());
    double obs = 0.0;
    for (int i : set) obs += pmi[static_cast<std::size_t>(i)];
    const double exact = exact_subset_tail(pmi, c.count, obs);
    CHECK(std::abs(phonestheme_test(c, pmi, 100000, 5) - exact) < 0.01);
  }
}

TEST_CASE("mining without frequent affixes is empty") {
  const Lexicon lex = words({"kat", "mop", "tul"});
  const PositionTable t = noise_table(lex, 1);
  MiningOptions opt;
  opt.min_count = 2;
  CHECK(mine(lex, &t, &t, opt, 1).empty());
}

TEST_CASE("affix averages partition the lexicon mean") {
  const auto g = synth::generate(synth::null_spec(5), 400, 3);
  const PositionTable t = noise_table(g.lexicon, 2);
  MiningOptions opt;
  opt.k_min = opt.k_max = 2;
  opt.min_count = 1;
  opt.n_samples = 10;
  const auto cands = test_prefixes(g.lexicon, t, opt, 4);
  double weighted = 0.0, words = 0.0;
  for (const auto& c : cands) {
    weighted += c.avg_pmi * c.count;
    words += c.count;
  }
  double direct = 0.0, eligible = 0.0;
  for (std::size_t i = 0; i < g.lexicon.size(); ++i) {
    if (g.lexicon.signs[i].form.size() < 2) continue;
    direct += pointwise_affix_mi(t.uncond[i], t.cond[i], 2);
    eligible += 1.0;
  }
  CHECK(words == eligible);
  CHECK(weighted / words == doctest::Approx(direct / eligible));
}

TEST_CASE("null p-values are uniform") {
  const auto g = synth::generate(synth::null_spec(8), 3000, 6);
  const PositionTable t = noise_table(g.lexicon, 7);
  MiningOptions opt;
  opt.k_min = 1;
  opt.k_max = 2;
  opt.min_count = 5;
  opt.n_samples = 2000;
  const auto cands = test_prefixes(g.lexicon, t, opt, 8);
  REQUIRE(cands.size() >= 40);
  std::vector<double> p;
  for (const auto& c : cands) p.push_back(c.p_value);
  CHECK(ks_uniform(p).p_value > 0.05);
}

TEST_CASE("planted prefix is found and suffix mining equals reversed prefix mining") {
  const auto spec = synth::planted_prefix_spec(4, 6, {2, 0}, 3, 1);
  const auto g = synth::generate(spec, 1500, 9);
  const auto ids = iota_ids(g.lexicon.size());
  const auto fwd = synth::exact_losses(spec, g.lexicon, g.clusters, ids);
  const auto rev = synth::exact_reversed_losses(spec, g.lexicon, g.clusters, ids);
  const PositionTable tf = position_table(fwd.unconditional, fwd.conditional, g.lexicon.size());
  const PositionTable tr = position_table(rev.unconditional, rev.conditional, g.lexicon.size());

  MiningOptions opt;
  opt.k_max = 2;
  opt.n_samples = 20000;
  const auto mined = mine(g.lexicon, &tf, &tr, opt, 21);
  REQUIRE_FALSE(mined.empty());
  const auto planted = std::find_if(mined.begin(), mined.end(), [](const AffixCandidate& c) {
    return c.side == AffixSide::Prefix && join_form(c.phones) == "ca";
  });
  REQUIRE(planted != mined.end());
  CHECK(planted->significant);
  CHECK(planted->p_adjusted <= 0.01);
  CHECK(planted->example_lemmata.size() == 5);
  for (const auto& c : mined) {
    if (c.side == AffixSide::Prefix && c.phones.front().symbol() != "c") CHECK_FALSE(c.significant);
  }

  // Suffix side of the run, against prefix mining of the reversed lexicon.
  const auto direct = test_prefixes(reverse_forms(g.lexicon), tr, opt, derive_seed(21, {1}));
  std::size_t matched = 0;
  for (const auto& c : mined) {
    if (c.side != AffixSide::Suffix) continue;
    Form reversed = c.phones;
    std::reverse(reversed.begin(), reversed.end());
    const auto it = std::find_if(direct.begin(), direct.end(),
                                 [&](const AffixCandidate& d) { return d.phones == reversed; });
    REQUIRE(it != direct.end());
    CHECK(it->p_value == c.p_value);
    CHECK(it->avg_pmi == c.avg_pmi);
    CHECK(it->word_indices == c.word_indices);
    ++matched;
  }
  CHECK(matched == direct.size());

  const std::string row = phonestheme_tsv_row("syn", *planted);
  CHECK(row.rfind("syn\tprefix\tca-\t", 0) == 0);
  CHECK(std::count(row.begin(), row.end(), '\t') == 8);
}
