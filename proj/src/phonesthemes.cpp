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

#include "signform/phonesthemes.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>

#include "signform/error.hpp"
#include "signform/parallel.hpp"
#include "signform/rng.hpp"
#include "signform/stats.hpp"

namespace signform {

namespace {

constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

// Candidates among the words accepted by `eligible`.
template <typename Eligible>
std::vector<AffixCandidate> collect(const Lexicon& lexicon, int k_min, int k_max,
                                    AffixSide side, int min_count, Eligible&& eligible) {
  if (k_min < 1 || k_max < k_min) {
    throw Error(ErrorCode::InvalidArgument, "affix lengths must satisfy 1 <= k_min <= k_max");
  }
  if (min_count < 1) throw Error(ErrorCode::InvalidArgument, "min_count must be >= 1");
  std::vector<AffixCandidate> out;
  for (int k = k_min; k <= k_max; ++k) {
    std::map<Form, std::vector<int>> groups;
    for (std::size_t i = 0; i < lexicon.signs.size(); ++i) {
      const Form& f = lexicon.signs[i].form;
      if (static_cast<int>(f.size()) < k || !eligible(i)) continue;
      const auto ku = static_cast<std::size_t>(k);
      Form affix = side == AffixSide::Prefix ? Form(f.begin(), f.begin() + k)
                                             : Form(f.end() - static_cast<std::ptrdiff_t>(ku), f.end());
      groups[std::move(affix)].push_back(static_cast<int>(i));
    }
    for (auto& [affix, words] : groups) {
      if (static_cast<int>(words.size()) < min_count) continue;
      AffixCandidate c;
      c.phones = affix;
      c.side = side;
      c.count = static_cast<int>(words.size());
      c.word_indices = std::move(words);
      out.push_back(std::move(c));
    }
  }
  return out;
}

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

}  // namespace

std::string_view to_string(AffixSide side) noexcept {
  return side == AffixSide::Prefix ? "prefix" : "suffix";
}

double pointwise_affix_mi(std::span<const double> uncond_bits,
                          std::span<const double> cond_bits, int k) {
  if (uncond_bits.size() != cond_bits.size()) {
    throw Error(ErrorCode::DimensionMismatch, "position vectors differ in length");
  }
  if (k < 1 || static_cast<std::size_t>(k) > uncond_bits.size()) {
    throw Error(ErrorCode::InvalidArgument,
                "k = " + std::to_string(k) + " outside [1, " +
                    std::to_string(uncond_bits.size()) + "]");
  }
  double sum = 0.0;
  for (int i = 0; i < k; ++i) {
    sum += uncond_bits[static_cast<std::size_t>(i)] - cond_bits[static_cast<std::size_t>(i)];
  }
  return sum / k;
}

PositionTable position_table(const PerWordLoss& uncond, const PerWordLoss& cond,
                             std::size_t n_signs) {
  PositionTable t;
  t.uncond.resize(n_signs);
  t.cond.resize(n_signs);
  auto fill = [&](const PerWordLoss& losses, std::vector<std::vector<double>>& dst) {
    if (losses.sign_ids.size() != losses.words.size()) {
      throw Error(ErrorCode::SignSetMismatch, "sign ids do not cover the table");
    }
    for (std::size_t i = 0; i < losses.size(); ++i) {
      const int id = losses.sign_ids[i];
      if (id < 0 || static_cast<std::size_t>(id) >= n_signs) {
        throw Error(ErrorCode::SignSetMismatch, "sign id " + std::to_string(id) + " out of range");
      }
      if (losses.words[i].position_bits.empty()) {
        throw Error(ErrorCode::InvalidArgument, "missing per-position bits");
      }
      dst[static_cast<std::size_t>(id)] = losses.words[i].position_bits;
    }
  };
  fill(uncond, t.uncond);
  fill(cond, t.cond);
  for (std::size_t i = 0; i < n_signs; ++i) {
    if (t.uncond[i].size() != t.cond[i].size()) {
      throw Error(ErrorCode::SignSetMismatch,
                  "sign " + std::to_string(i) + " differs between the two tables");
    }
  }
  return t;
}

std::vector<AffixCandidate> enumerate_candidates(const Lexicon& lexicon, int k_min,
                                                 int k_max, AffixSide side,
                                                 int min_count) {
  return collect(lexicon, k_min, k_max, side, min_count, [](std::size_t) { return true; });
}

double phonestheme_test(const AffixCandidate& candidate, std::span<const double> word_pmis,
                        int n_samples, std::uint64_t seed) {
  if (n_samples < 1) throw Error(ErrorCode::InvalidArgument, "need at least one sample");
  std::vector<double> pool;
  double scale = 0.0;
  for (double v : word_pmis) {
    if (std::isnan(v)) continue;
    pool.push_back(v);
    scale += std::abs(v);
  }
  const std::size_t n = candidate.word_indices.size();
  if (n == 0 || n > pool.size()) {
    throw Error(ErrorCode::InvalidArgument, "candidate larger than the eligible lexicon");
  }
  double observed = 0.0;
  for (int id : candidate.word_indices) {
    const double v = word_pmis[static_cast<std::size_t>(id)];
    if (std::isnan(v)) {
      throw Error(ErrorCode::InvalidArgument, "candidate word without pointwise MI");
    }
    observed += v;
  }
  const double total = std::accumulate(pool.begin(), pool.end(), 0.0);
  const double threshold = observed - 1e-10 * scale;
  // Draw the smaller of the set and its complement.
  const bool complement = 2 * n > pool.size();
  const std::size_t m = complement ? pool.size() - n : n;
  SplitMix64 rng(seed);
  std::int64_t r = 0;
  for (int s = 0; s < n_samples; ++s) {
    double sum = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const std::size_t pick = j + rng.below(pool.size() - j);
      std::swap(pool[j], pool[pick]);
      sum += pool[j];
    }
    const double sample = complement ? total - sum : sum;
    if (sample >= threshold) ++r;
  }
  return static_cast<double>(r + 1) / static_cast<double>(n_samples + 1);
}

Lexicon reverse_forms(const Lexicon& lexicon) {
  Lexicon out = lexicon;
  for (Sign& s : out.signs) std::reverse(s.form.begin(), s.form.end());
  return out;
}

std::vector<AffixCandidate> test_prefixes(const Lexicon& lexicon, const PositionTable& table,
                                          const MiningOptions& options, std::uint64_t seed) {
  std::vector<AffixCandidate> candidates =
      collect(lexicon, options.k_min, options.k_max, AffixSide::Prefix, options.min_count,
              [&](std::size_t i) { return table.covers(i); });
  if (candidates.empty()) return candidates;

  // Pointwise MI per k, indexed by sign id.
  std::map<int, std::vector<double>> pmi_by_k;
  for (int k = options.k_min; k <= options.k_max; ++k) {
    std::vector<double> pmi(lexicon.size(), kMissing);
    for (std::size_t i = 0; i < lexicon.size(); ++i) {
      if (!table.covers(i) || static_cast<int>(lexicon.signs[i].form.size()) < k) continue;
      pmi[i] = pointwise_affix_mi(table.uncond[i], table.cond[i], k);
    }
    pmi_by_k.emplace(k, std::move(pmi));
  }

  parallel_for(candidates.size(), options.threads, [&](std::size_t ci) {
    AffixCandidate& c = candidates[ci];
    const int k = static_cast<int>(c.phones.size());
    const std::vector<double>& pmi = pmi_by_k.at(k);
    double sum = 0.0;
    for (int id : c.word_indices) sum += pmi[static_cast<std::size_t>(id)];
    c.avg_pmi = sum / c.count;
    const std::uint64_t s = derive_seed(
        seed, {static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(c.word_indices.front())});
    c.p_value = phonestheme_test(c, pmi, options.n_samples, s);
    c.p_adjusted = c.p_value;

    std::vector<int> order = c.word_indices;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return pmi[static_cast<std::size_t>(a)] > pmi[static_cast<std::size_t>(b)];
    });
    const auto keep = std::min<std::size_t>(order.size(), static_cast<std::size_t>(options.n_examples));
    for (std::size_t e = 0; e < keep; ++e) {
      c.example_lemmata.push_back(lexicon.signs[static_cast<std::size_t>(order[e])].lemma);
    }
  });
  return candidates;
}

std::vector<AffixCandidate> mine(const Lexicon& lexicon, const PositionTable* forward,
                                 const PositionTable* reversed, const MiningOptions& options,
                                 std::uint64_t seed) {
  std::vector<AffixCandidate> all;
  if (forward) all = test_prefixes(lexicon, *forward, options, derive_seed(seed, {0}));
  if (reversed) {
    for (AffixCandidate& c :
         test_prefixes(reverse_forms(lexicon), *reversed, options, derive_seed(seed, {1}))) {
      c.side = AffixSide::Suffix;
      std::reverse(c.phones.begin(), c.phones.end());
      all.push_back(std::move(c));
    }
  }
  if (all.empty()) return all;
  std::vector<double> p;
  p.reserve(all.size());
  for (const AffixCandidate& c : all) p.push_back(c.p_value);
  const BHResult bh = bh_correct(p, options.alpha);
  for (std::size_t i = 0; i < all.size(); ++i) {
    all[i].p_adjusted = bh.adjusted[i];
    all[i].significant = bh.rejected[i];
  }
  std::stable_sort(all.begin(), all.end(), [](const AffixCandidate& a, const AffixCandidate& b) {
    if (a.p_adjusted != b.p_adjusted) return a.p_adjusted < b.p_adjusted;
    if (a.p_value != b.p_value) return a.p_value < b.p_value;
    return a.avg_pmi > b.avg_pmi;
  });
  return all;
}

std::string phonestheme_tsv_header() {
  return "language\tside\taffix\tcount\tavg_pmi\tp\tp_adjusted\tsignificant\texamples";
}

std::string phonestheme_tsv_row(const std::string& language, const AffixCandidate& c) {
  std::string affix = join_form(c.phones);
  affix = c.side == AffixSide::Prefix ? affix + "-" : "-" + affix;
  std::string examples;
  for (const std::string& e : c.example_lemmata) {
    if (!examples.empty()) examples += ", ";
    examples += e;
  }
  return language + '\t' + std::string(to_string(c.side)) + '\t' + affix + '\t' +
         std::to_string(c.count) + '\t' + fmt("%.3f", c.avg_pmi) + '\t' +
         fmt("%.3g", c.p_value) + '\t' + fmt("%.3g", c.p_adjusted) + '\t' +
         (c.significant ? "yes" : "no") + '\t' + examples;
}

}  // namespace signform
