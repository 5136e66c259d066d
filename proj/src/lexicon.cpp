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

#include "signform/lexicon.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>
#include <random>
#include <sstream>
#include <tuple>

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include "signform/error.hpp"

namespace signform {

namespace {

constexpr UChar32 kTieAbove = 0x0361;
constexpr UChar32 kTieBelow = 0x035C;

bool is_ascii_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' ||
         c == '\f';
}

bool is_tie_bar(UChar32 cp) { return cp == kTieAbove || cp == kTieBelow; }

bool is_combining(UChar32 cp) {
  const auto category = u_charType(cp);
  return category == U_NON_SPACING_MARK || category == U_ENCLOSING_MARK ||
         category == U_COMBINING_SPACING_MARK;
}

// Spacing modifier letters and symbols (ʰ ʲ ʷ ː ˑ, tone letters). ASCII ^
// and ` are category Sk as well but are not IPA modifiers.
bool is_modifier_letter(UChar32 cp) {
  if (cp < 0x80) return false;
  const auto category = u_charType(cp);
  return category == U_MODIFIER_LETTER || category == U_MODIFIER_SYMBOL;
}

bool is_prosodic_mark(UChar32 cp) {
  return cp == 0x02C8 || cp == 0x02CC || cp == '.';
}

bool has_whitespace(std::string_view s) {
  return std::any_of(s.begin(), s.end(), is_ascii_space);
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::vector<std::string_view> split_whitespace(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_ascii_space(line[i])) ++i;
    const std::size_t start = i;
    while (i < line.size() && !is_ascii_space(line[i])) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

}  // namespace

Phone::Phone(std::string symbol) : symbol_(std::move(symbol)) {
  if (symbol_.empty()) throw Error(ErrorCode::InvalidForm, "empty phone");
  if (has_whitespace(symbol_)) {
    throw Error(ErrorCode::InvalidForm,
                "phone contains whitespace: '" + symbol_ + "'");
  }
}

std::string join_form(const Form& form, std::string_view separator) {
  std::string out;
  for (std::size_t i = 0; i < form.size(); ++i) {
    if (i > 0) out += separator;
    out += form[i].symbol();
  }
  return out;
}

PhoneInventory::PhoneInventory() {
  symbols_.emplace_back(kEosSymbol);
  index_.emplace(std::string(kEosSymbol), kEos);
}

PhoneInventory::PhoneInventory(const std::set<Phone>& phones)
    : PhoneInventory() {
  for (const Phone& p : phones) {
    if (p.symbol() == kEosSymbol) {
      throw Error(ErrorCode::InvalidForm,
                  "phone collides with the end-of-string token");
    }
    index_.emplace(p.symbol(), static_cast<int>(symbols_.size()));
    symbols_.push_back(p.symbol());
  }
}

PhoneInventory PhoneInventory::from_symbols(
    const std::vector<std::string>& symbols) {
  if (symbols.empty() || symbols.front() != kEosSymbol) {
    throw Error(ErrorCode::ArchiveError,
                "inventory must start with the end-of-string token");
  }
  std::set<Phone> phones;
  for (std::size_t i = 1; i < symbols.size(); ++i) phones.emplace(symbols[i]);
  PhoneInventory inv(phones);
  if (inv.symbols_ != symbols) {
    throw Error(ErrorCode::ArchiveError, "inventory symbols not canonical");
  }
  return inv;
}

std::optional<int> PhoneInventory::find(const Phone& phone) const {
  if (phone.symbol() == kEosSymbol) return std::nullopt;
  const auto it = index_.find(phone.symbol());
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<int> PhoneInventory::encode(const Form& form) const {
  std::vector<int> out;
  out.reserve(form.size());
  for (const Phone& p : form) {
    const auto idx = find(p);
    if (!idx) {
      throw Error(ErrorCode::OutOfInventory,
                  "phone '" + p.symbol() + "' not in inventory");
    }
    out.push_back(*idx);
  }
  return out;
}

int Lexicon::class_index(const std::string& pos) const {
  const auto it = std::lower_bound(classes.begin(), classes.end(), pos);
  if (it == classes.end() || *it != pos) {
    throw Error(ErrorCode::UnknownClass, "unknown POS label '" + pos + "'");
  }
  return static_cast<int>(it - classes.begin());
}

int Lexicon::meaning_dim() const {
  return signs.empty() ? 0 : static_cast<int>(signs.front().meaning.size());
}

bool Lexicon::has_meanings() const { return meaning_dim() > 0; }

Lexicon make_lexicon(std::string language, std::vector<Sign> signs) {
  if (signs.empty()) throw Error(ErrorCode::EmptyLexicon, "no signs");
  std::set<Phone> phones;
  std::set<std::string> classes;
  std::set<std::tuple<std::string, std::string, std::string>> keys;
  const auto dim = signs.front().meaning.size();
  for (const Sign& s : signs) {
    if (s.form.empty()) {
      throw Error(ErrorCode::EmptyForm, "sign '" + s.lemma + "' has no form");
    }
    if (s.meaning.size() != dim) {
      throw Error(ErrorCode::DimensionMismatch,
                  "meaning dimension differs for '" + s.lemma + "'");
    }
    if (!keys.emplace(s.lemma, join_form(s.form, " "), s.pos).second) {
      throw Error(ErrorCode::InvalidArgument,
                  "duplicate sign '" + s.lemma + "'");
    }
    phones.insert(s.form.begin(), s.form.end());
    classes.insert(s.pos);
  }
  Lexicon lex;
  lex.language = std::move(language);
  lex.inventory = PhoneInventory(phones);
  lex.signs = std::move(signs);
  lex.classes.assign(classes.begin(), classes.end());
  return lex;
}

std::string nfc_normalize(std::string_view utf8) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) {
    throw Error(ErrorCode::InvalidForm, "ICU NFC normalizer unavailable");
  }
  const auto source = icu::UnicodeString::fromUTF8(
      icu::StringPiece(utf8.data(), static_cast<int32_t>(utf8.size())));
  const icu::UnicodeString normalized = nfc->normalize(source, status);
  if (U_FAILURE(status)) {
    throw Error(ErrorCode::InvalidForm, "cannot normalize input");
  }
  std::string out;
  normalized.toUTF8String(out);
  return out;
}

Form tokenize_ipa(std::string_view raw, const TokenizeOptions& options) {
  if (raw.empty()) throw Error(ErrorCode::EmptyForm, "empty form");

  if (options.pretokenized) {
    Form form;
    for (std::string_view token : split_whitespace(raw)) {
      form.emplace_back(nfc_normalize(token));
    }
    if (form.empty()) throw Error(ErrorCode::EmptyForm, "empty form");
    return form;
  }

  const std::string text = nfc_normalize(raw);
  const auto* bytes = reinterpret_cast<const uint8_t*>(text.data());
  const auto length = static_cast<int32_t>(text.size());

  std::vector<std::string> phones;
  bool join_next = false;
  int32_t i = 0;
  while (i < length) {
    const int32_t start = i;
    UChar32 cp = 0;
    U8_NEXT(bytes, i, length, cp);
    if (cp < 0) throw Error(ErrorCode::InvalidForm, "malformed UTF-8");
    const std::string_view piece(text.data() + start,
                                 static_cast<std::size_t>(i - start));
    if (cp < 0x80 && is_ascii_space(static_cast<char>(cp))) {
      throw Error(ErrorCode::InvalidForm,
                  "whitespace inside form '" + text + "'");
    }
    if (options.strip_prosodic_marks && is_prosodic_mark(cp)) continue;

    if (is_combining(cp)) {
      if (phones.empty()) {
        throw Error(ErrorCode::InvalidForm,
                    "form begins with a combining mark: '" + text + "'");
      }
      phones.back() += piece;
      if (is_tie_bar(cp)) join_next = true;
      continue;
    }
    if (join_next) {
      phones.back() += piece;
      join_next = false;
      continue;
    }
    if (is_modifier_letter(cp) && !phones.empty()) {
      phones.back() += piece;
      continue;
    }
    phones.emplace_back(piece);
  }
  if (join_next) {
    throw Error(ErrorCode::InvalidForm, "dangling tie bar in '" + text + "'");
  }
  if (phones.empty()) throw Error(ErrorCode::EmptyForm, "empty form");

  Form form;
  form.reserve(phones.size());
  for (auto& p : phones) form.emplace_back(std::move(p));
  return form;
}

ParsedLexicon parse_lexicon(std::istream& in, const LexiconSchema& schema,
                            std::string language,
                            const TokenizeOptions& options) {
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorCode::EmptyLexicon, "missing header row");
  }
  strip_cr(line);
  const auto header = split(line, '\t');
  auto column = [&](const std::string& name) -> std::optional<std::size_t> {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) return std::nullopt;
    return static_cast<std::size_t>(it - header.begin());
  };
  auto required = [&](const std::string& name) {
    const auto idx = column(name);
    if (!idx) {
      throw Error(ErrorCode::MissingColumn, "missing column '" + name + "'");
    }
    return *idx;
  };
  const std::size_t lemma_col = required(schema.lemma);
  const std::size_t form_col = required(schema.form);
  const std::size_t pos_col = required(schema.pos);
  const auto concept_col = column(schema.concept_id);

  ParsedLexicon result;
  std::vector<Sign> signs;
  std::set<std::tuple<std::string, std::string, std::string>> seen;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    const auto fields = split(line, '\t');
    const std::size_t needed =
        std::max({lemma_col, form_col, pos_col, concept_col.value_or(0)}) + 1;
    if (fields.size() < needed) {
      result.skipped.push_back({line_no, "too few fields"});
      continue;
    }
    Sign sign;
    sign.lemma = std::string(fields[lemma_col]);
    sign.pos = std::string(fields[pos_col]);
    if (concept_col && !fields[*concept_col].empty()) {
      sign.concept_id = std::string(fields[*concept_col]);
    }
    try {
      sign.form = tokenize_ipa(fields[form_col], options);
    } catch (const Error& e) {
      result.skipped.push_back({line_no, e.what()});
      continue;
    }
    if (!seen.emplace(sign.lemma, join_form(sign.form, " "), sign.pos)
             .second) {
      ++result.duplicates;
      continue;
    }
    signs.push_back(std::move(sign));
  }
  if (signs.empty()) {
    throw Error(ErrorCode::EmptyLexicon, "no usable rows");
  }
  result.lexicon = make_lexicon(std::move(language), std::move(signs));
  return result;
}

EmbeddingTable load_embeddings(std::istream& in,
                               const std::set<std::string>& wanted) {
  EmbeddingTable table;
  std::string line;
  std::size_t line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    const auto fields = split_whitespace(line);
    if (fields.empty()) continue;
    if (first) {
      first = false;
      if (fields.size() == 2) {
        long long count = 0;
        int dim = 0;
        const auto* c_end = fields[0].data() + fields[0].size();
        const auto* d_end = fields[1].data() + fields[1].size();
        const auto rc = std::from_chars(fields[0].data(), c_end, count);
        const auto rd = std::from_chars(fields[1].data(), d_end, dim);
        if (rc.ec == std::errc() && rc.ptr == c_end &&
            rd.ec == std::errc() && rd.ptr == d_end && dim > 0) {
          table.dim = dim;
          continue;
        }
      }
    }
    const int dim = static_cast<int>(fields.size()) - 1;
    if (table.dim == 0) table.dim = dim;
    if (dim != table.dim || dim == 0) {
      throw Error(ErrorCode::DimensionMismatch,
                  "line " + std::to_string(line_no) + " has " +
                      std::to_string(dim) + " values, expected " +
                      std::to_string(table.dim));
    }
    const std::string word(fields[0]);
    if (!wanted.contains(word) || table.vectors.contains(word)) continue;
    Eigen::VectorXd v(dim);
    for (int j = 0; j < dim; ++j) {
      const auto f = fields[static_cast<std::size_t>(j) + 1];
      double x = 0.0;
      const auto r = std::from_chars(f.data(), f.data() + f.size(), x);
      if (r.ec != std::errc() || r.ptr != f.data() + f.size()) {
        throw Error(ErrorCode::NonNumericField,
                    "line " + std::to_string(line_no) + ": '" +
                        std::string(f) + "'");
      }
      v[j] = x;
    }
    table.vectors.emplace(word, std::move(v));
  }
  for (const auto& w : wanted) {
    if (!table.vectors.contains(w)) table.missing.push_back(w);
  }
  return table;
}

AttachResult attach_meanings(const Lexicon& lexicon,
                             const EmbeddingTable& table) {
  AttachResult result;
  std::vector<Sign> kept;
  for (const Sign& s : lexicon.signs) {
    const auto it = table.vectors.find(s.lemma);
    if (it == table.vectors.end()) {
      result.dropped.push_back(s.lemma);
      continue;
    }
    Sign copy = s;
    copy.meaning = it->second;
    kept.push_back(std::move(copy));
  }
  if (kept.empty()) {
    throw Error(ErrorCode::EmptyLexicon, "no sign has an embedding");
  }
  result.lexicon = make_lexicon(lexicon.language, std::move(kept));
  return result;
}

FoldRole FoldAssignment::role(int fold) const {
  if (fold == rotation % k) return FoldRole::Validation;
  if (fold == (rotation + 1) % k) return FoldRole::Test;
  return FoldRole::Train;
}

std::vector<int> FoldAssignment::indices(FoldRole r) const {
  std::vector<int> out;
  for (std::size_t i = 0; i < fold_of.size(); ++i) {
    if (role(fold_of[i]) == r) out.push_back(static_cast<int>(i));
  }
  return out;
}

std::vector<int> FoldAssignment::fold_indices(int fold) const {
  std::vector<int> out;
  for (std::size_t i = 0; i < fold_of.size(); ++i) {
    if (fold_of[i] == fold) out.push_back(static_cast<int>(i));
  }
  return out;
}

FoldAssignment FoldAssignment::rotated(int r) const {
  FoldAssignment copy = *this;
  copy.rotation = ((r % k) + k) % k;
  return copy;
}

FoldAssignment split_folds(std::size_t n_signs, int k, std::uint64_t seed) {
  if (k < 2) throw Error(ErrorCode::InvalidArgument, "need at least 2 folds");
  if (static_cast<std::size_t>(k) > n_signs) {
    throw Error(ErrorCode::TooManyFolds,
                std::to_string(k) + " folds for " + std::to_string(n_signs) +
                    " signs");
  }
  std::vector<int> order(n_signs);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  FoldAssignment folds;
  folds.k = k;
  folds.seed = seed;
  folds.fold_of.assign(n_signs, 0);
  for (std::size_t p = 0; p < n_signs; ++p) {
    folds.fold_of[static_cast<std::size_t>(order[p])] =
        static_cast<int>(p % static_cast<std::size_t>(k));
  }
  return folds;
}

FoldAssignment split_folds(const Lexicon& lexicon, int k, std::uint64_t seed) {
  return split_folds(lexicon.size(), k, seed);
}

}  // namespace signform
