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

#ifndef SIGNFORM_INFOTHEORY_HPP_
#define SIGNFORM_INFOTHEORY_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "signform/loss.hpp"

namespace signform {

struct EntropyEstimate {
  double bits_per_phone = 0.0;
  double total_bits = 0.0;
  std::int64_t total_tokens = 0;
  std::int64_t n_words = 0;
};

// Micro-averaged cross-entropy of a loss table: sum of bits over sum of
// tokens. Throws EmptyTable.
EntropyEstimate entropy_estimate(const PerWordLoss& losses);

enum class DeltaUnit { PerPhone, PerWord };

// Difference of two entropy estimates over the same signs, with the
// per-word savings kept for significance testing. Deltas are ordered by
// ascending sign id.
struct MIEstimate {
  double mi = 0.0;
  EntropyEstimate unconditional;
  EntropyEstimate conditional;
  std::vector<int> sign_ids;
  std::vector<double> deltas;
};

// Throws SignSetMismatch unless both tables cover the same signs with the
// same token counts.
MIEstimate mi_estimate(const PerWordLoss& unconditional,
                       const PerWordLoss& conditional,
                       DeltaUnit unit = DeltaUnit::PerPhone);

// MI(W; V | C) from the class-conditioned and the meaning-and-class
// conditioned tables.
MIEstimate conditional_mi(const PerWordLoss& given_class,
                          const PerWordLoss& given_meaning_and_class,
                          DeltaUnit unit = DeltaUnit::PerPhone);

// mi / h. Throws InvalidArgument when h <= 0.
double uncertainty_coefficient(double mi, double h);

// Mean over sample standard deviation (ddof 1). Throws TooFewValues for
// fewer than two deltas and ZeroVariance for constant ones.
double cohens_d(std::span<const double> deltas);

struct SignificanceResult {
  double p_value = 1.0;
  // Twice the fraction of permutations with a mean at least as large,
  // clamped to 1.
  double p_value_two_sided = 1.0;
  std::int64_t n_permutations = 0;
  std::uint64_t seed = 0;
};

// One language's row. The meaning block is always present; the POS block
// only when both class-conditioned models were run.
struct MIReport {
  std::string language;
  EntropyEstimate H_W;
  EntropyEstimate H_W_given_V;
  std::optional<EntropyEstimate> H_W_given_C;
  std::optional<EntropyEstimate> H_W_given_VC;
  double mi = 0.0;
  double uncertainty = 0.0;
  std::optional<double> cohens_d;
  SignificanceResult significance;
  std::optional<double> mi_given_pos;
  // MI(W; V | POS) / H(W | POS).
  std::optional<double> uncertainty_given_pos;
  std::optional<double> cohens_d_given_pos;
  std::optional<SignificanceResult> significance_given_pos;
};

// Fills every derived field from the two estimates. Cohen's d is left empty
// when the deltas have no spread.
MIReport make_report(std::string language, const MIEstimate& meaning,
                     const std::optional<MIEstimate>& given_pos);

nlohmann::json to_json(const EntropyEstimate& e);
nlohmann::json to_json(const SignificanceResult& s);
nlohmann::json to_json(const MIReport& r);
MIReport mi_report_from_json(const nlohmann::json& j);

// Table-style CSV: language plus the seven headline quantities, rounded for
// display (3 decimals, uncertainty coefficients as percentages with 2).
std::string report_csv_header();
std::string report_csv_row(const MIReport& r);

}  // namespace signform

#endif  // SIGNFORM_INFOTHEORY_HPP_
