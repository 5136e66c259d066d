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

#ifndef SIGNFORM_PHONESTHEMES_HPP_
#define SIGNFORM_PHONESTHEMES_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "signform/lexicon.hpp"
#include "signform/loss.hpp"

namespace signform {

enum class AffixSide { Prefix, Suffix };
std::string_view to_string(AffixSide side) noexcept;

// (1/k) sum_{i<k} (uncond[i] - cond[i]). Throws InvalidArgument unless
// 1 <= k <= the number of positions; k = |form| + 1 covers the whole word.
double pointwise_affix_mi(std::span<const double> uncond_bits,
                          std::span<const double> cond_bits, int k);

// Per-position bits of both models, indexed by sign id. Signs the tables
// do not cover stay empty and are left out of mining.
struct PositionTable {
  std::vector<std::vector<double>> uncond;
  std::vector<std::vector<double>> cond;

  bool covers(std::size_t sign) const {
    return sign < uncond.size() && !uncond[sign].empty();
  }
};

// Throws SignSetMismatch when the tables cover different signs or disagree
// on a word's length.
PositionTable position_table(const PerWordLoss& uncond, const PerWordLoss& cond,
                             std::size_t n_signs);

struct AffixCandidate {
  Form phones;  // in reading order, also for suffixes
  AffixSide side = AffixSide::Prefix;
  std::vector<int> word_indices;  // ascending
  int count = 0;
  double avg_pmi = 0.0;
  double p_value = 1.0;
  double p_adjusted = 1.0;
  bool significant = false;
  std::vector<std::string> example_lemmata;
};

// Every word-initial (or word-final) k-phone sequence, k in [k_min, k_max],
// shared by at least min_count words. Words shorter than k never count.
std::vector<AffixCandidate> enumerate_candidates(const Lexicon& lexicon,
                                                 int k_min, int k_max,
                                                 AffixSide side, int min_count);

// Monte Carlo p-value of the candidate's mean pointwise MI against random
// sets of the same size drawn without replacement from all eligible words.
// `word_pmis` holds the same-(k, side) pointwise MI per sign id; NaN marks
// ineligible words. Throws InvalidArgument when the candidate is larger than
// the eligible pool.
double phonestheme_test(const AffixCandidate& candidate,
                        std::span<const double> word_pmis, int n_samples,
                        std::uint64_t seed);

Lexicon reverse_forms(const Lexicon& lexicon);

struct MiningOptions {
  int k_min = 1;
  int k_max = 3;
  int min_count = 20;
  double alpha = 0.05;
  int n_samples = 100000;
  int n_examples = 5;
  int threads = 1;
};

// Tests the prefixes of `lexicon` against `table`. Used for both sides: for
// suffixes pass the reversed lexicon with the reversed-model table. p-values
// are final; adjusted values are filled by mine(). Per-candidate seeds depend
// on (seed, k, first word index) only.
std::vector<AffixCandidate> test_prefixes(const Lexicon& lexicon,
                                          const PositionTable& table,
                                          const MiningOptions& options,
                                          std::uint64_t seed);

// Mines prefixes with the forward table and suffixes with the table of
// models trained on reversed forms (either may be null to skip a side),
// applies Benjamini-Hochberg across everything tested and sorts by adjusted
// p. Prefix and suffix streams use seeds derived from `seed` with tags 0
// and 1.
std::vector<AffixCandidate> mine(const Lexicon& lexicon,
                                 const PositionTable* forward,
                                 const PositionTable* reversed,
                                 const MiningOptions& options,
                                 std::uint64_t seed);

// TSV header and rows: language, side, affix, count, avg_pmi, p,
// p_adjusted, significant, examples.
std::string phonestheme_tsv_header();
std::string phonestheme_tsv_row(const std::string& language,
                                const AffixCandidate& c);

}  // namespace signform

#endif  // SIGNFORM_PHONESTHEMES_HPP_
