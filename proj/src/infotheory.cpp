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

#include "signform/infotheory.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "signform/error.hpp"

namespace signform {

namespace {

// Indices of a table's rows in ascending sign-id order.
std::vector<std::size_t> order_by_sign(const PerWordLoss& t) {
  if (t.sign_ids.size() != t.words.size()) {
    throw Error(ErrorCode::SignSetMismatch, "sign ids do not cover the table");
  }
  std::vector<std::size_t> order(t.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return t.sign_ids[a] < t.sign_ids[b]; });
  return order;
}

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  std::string s = buf;
  // Avoid printing "-0.000".
  if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

std::string opt_fixed(const std::optional<double>& v, int decimals, double scale = 1.0) {
  return v ? fixed(*v * scale, decimals) : std::string();
}

}  // namespace

EntropyEstimate entropy_estimate(const PerWordLoss& losses) {
  if (losses.empty()) throw Error(ErrorCode::EmptyTable, "no words to average");
  EntropyEstimate e;
  for (const WordLoss& w : losses.words) {
    e.total_bits += w.total_bits;
    e.total_tokens += w.token_count;
  }
  e.n_words = static_cast<std::int64_t>(losses.size());
  e.bits_per_phone = e.total_bits / static_cast<double>(e.total_tokens);
  return e;
}

MIEstimate mi_estimate(const PerWordLoss& unconditional,
                       const PerWordLoss& conditional, DeltaUnit unit) {
  if (unconditional.size() != conditional.size()) {
    throw Error(ErrorCode::SignSetMismatch, "tables differ in size");
  }
  MIEstimate out;
  out.unconditional = entropy_estimate(unconditional);
  out.conditional = entropy_estimate(conditional);
  out.mi = out.unconditional.bits_per_phone - out.conditional.bits_per_phone;
  const auto ou = order_by_sign(unconditional);
  const auto oc = order_by_sign(conditional);
  out.sign_ids.reserve(ou.size());
  out.deltas.reserve(ou.size());
  for (std::size_t i = 0; i < ou.size(); ++i) {
    const int id = unconditional.sign_ids[ou[i]];
    const WordLoss& u = unconditional.words[ou[i]];
    const WordLoss& c = conditional.words[oc[i]];
    if (conditional.sign_ids[oc[i]] != id || u.token_count != c.token_count) {
      throw Error(ErrorCode::SignSetMismatch,
                  "sign " + std::to_string(id) + " is not matched across tables");
    }
    if (i > 0 && out.sign_ids.back() == id) {
      throw Error(ErrorCode::SignSetMismatch, "sign " + std::to_string(id) + " repeated");
    }
    double d = u.total_bits - c.total_bits;
    if (unit == DeltaUnit::PerPhone) d /= u.token_count;
    out.sign_ids.push_back(id);
    out.deltas.push_back(d);
  }
  return out;
}

MIEstimate conditional_mi(const PerWordLoss& given_class,
                          const PerWordLoss& given_meaning_and_class,
                          DeltaUnit unit) {
  return mi_estimate(given_class, given_meaning_and_class, unit);
}

double uncertainty_coefficient(double mi, double h) {
  if (!(h > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "entropy must be positive");
  }
  return mi / h;
}

double cohens_d(std::span<const double> deltas) {
  if (deltas.size() < 2) throw Error(ErrorCode::TooFewValues, "need two deltas");
  const double n = static_cast<double>(deltas.size());
  const double mean = std::accumulate(deltas.begin(), deltas.end(), 0.0) / n;
  double ss = 0.0;
  for (double d : deltas) ss += (d - mean) * (d - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  if (!(sd > 0.0)) throw Error(ErrorCode::ZeroVariance, "deltas are constant");
  return mean / sd;
}

MIReport make_report(std::string language, const MIEstimate& meaning,
                     const std::optional<MIEstimate>& given_pos) {
  auto d_or_empty = [](const std::vector<double>& deltas) -> std::optional<double> {
    try {
      return cohens_d(deltas);
    } catch (const Error&) {
      return std::nullopt;
    }
  };
  MIReport r;
  r.language = std::move(language);
  r.H_W = meaning.unconditional;
  r.H_W_given_V = meaning.conditional;
  r.mi = meaning.mi;
  r.uncertainty = uncertainty_coefficient(r.mi, r.H_W.bits_per_phone);
  r.cohens_d = d_or_empty(meaning.deltas);
  if (given_pos) {
    r.H_W_given_C = given_pos->unconditional;
    r.H_W_given_VC = given_pos->conditional;
    r.mi_given_pos = given_pos->mi;
    r.uncertainty_given_pos =
        uncertainty_coefficient(given_pos->mi, given_pos->unconditional.bits_per_phone);
    r.cohens_d_given_pos = d_or_empty(given_pos->deltas);
  }
  return r;
}

nlohmann::json to_json(const EntropyEstimate& e) {
  return {{"bits_per_phone", e.bits_per_phone},
          {"total_bits", e.total_bits},
          {"total_tokens", e.total_tokens},
          {"n_words", e.n_words}};
}

nlohmann::json to_json(const SignificanceResult& s) {
  return {{"p_value", s.p_value},
          {"p_value_two_sided", s.p_value_two_sided},
          {"n_permutations", s.n_permutations},
          {"seed", s.seed}};
}

nlohmann::json to_json(const MIReport& r) {
  auto opt = [](const auto& v) -> nlohmann::json {
    if (!v) return nullptr;
    return to_json(*v);
  };
  auto num = [](const std::optional<double>& v) -> nlohmann::json {
    if (!v) return nullptr;
    return *v;
  };
  return {{"language", r.language},
          {"H_W", to_json(r.H_W)},
          {"H_W_given_V", to_json(r.H_W_given_V)},
          {"H_W_given_C", opt(r.H_W_given_C)},
          {"H_W_given_VC", opt(r.H_W_given_VC)},
          {"mi", r.mi},
          {"uncertainty", r.uncertainty},
          {"cohens_d", num(r.cohens_d)},
          {"significance", to_json(r.significance)},
          {"mi_given_pos", num(r.mi_given_pos)},
          {"uncertainty_given_pos", num(r.uncertainty_given_pos)},
          {"cohens_d_given_pos", num(r.cohens_d_given_pos)},
          {"significance_given_pos", opt(r.significance_given_pos)}};
}

namespace {

EntropyEstimate entropy_from_json(const nlohmann::json& j) {
  EntropyEstimate e;
  e.bits_per_phone = j.at("bits_per_phone").get<double>();
  e.total_bits = j.at("total_bits").get<double>();
  e.total_tokens = j.at("total_tokens").get<std::int64_t>();
  e.n_words = j.at("n_words").get<std::int64_t>();
  return e;
}

SignificanceResult significance_from_json(const nlohmann::json& j) {
  SignificanceResult s;
  s.p_value = j.at("p_value").get<double>();
  s.p_value_two_sided = j.at("p_value_two_sided").get<double>();
  s.n_permutations = j.at("n_permutations").get<std::int64_t>();
  s.seed = j.at("seed").get<std::uint64_t>();
  return s;
}

std::optional<double> opt_number(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

}  // namespace

MIReport mi_report_from_json(const nlohmann::json& j) {
  try {
    MIReport r;
    r.language = j.at("language").get<std::string>();
    r.H_W = entropy_from_json(j.at("H_W"));
    r.H_W_given_V = entropy_from_json(j.at("H_W_given_V"));
    if (!j.at("H_W_given_C").is_null()) r.H_W_given_C = entropy_from_json(j.at("H_W_given_C"));
    if (!j.at("H_W_given_VC").is_null()) r.H_W_given_VC = entropy_from_json(j.at("H_W_given_VC"));
    r.mi = j.at("mi").get<double>();
    r.uncertainty = j.at("uncertainty").get<double>();
    r.cohens_d = opt_number(j, "cohens_d");
    r.significance = significance_from_json(j.at("significance"));
    r.mi_given_pos = opt_number(j, "mi_given_pos");
    r.uncertainty_given_pos = opt_number(j, "uncertainty_given_pos");
    r.cohens_d_given_pos = opt_number(j, "cohens_d_given_pos");
    if (j.contains("significance_given_pos") && !j.at("significance_given_pos").is_null()) {
      r.significance_given_pos = significance_from_json(j.at("significance_given_pos"));
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("report: ") + e.what());
  }
}

std::string report_csv_header() {
  return "language,H_W,MI_W_V,U_W_V_pct,cohens_d,MI_W_V_given_POS,"
         "U_W_V_given_POS_pct,cohens_d_given_POS";
}

std::string report_csv_row(const MIReport& r) {
  return r.language + ',' + fixed(r.H_W.bits_per_phone, 3) + ',' + fixed(r.mi, 3) +
         ',' + fixed(r.uncertainty * 100.0, 2) + ',' + opt_fixed(r.cohens_d, 3) +
         ',' + opt_fixed(r.mi_given_pos, 3) + ',' +
         opt_fixed(r.uncertainty_given_pos, 2, 100.0) + ',' +
         opt_fixed(r.cohens_d_given_pos, 3);
}

}  // namespace signform
