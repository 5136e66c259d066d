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

#ifndef SIGNFORM_LEXICON_HPP_
#define SIGNFORM_LEXICON_HPP_

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

namespace signform {

// One phone: a base character plus any attached modifiers, or a tie-barred
// pair. Compared and hashed by its UTF-8 symbol.
class Phone {
 public:
  Phone() = default;
  explicit Phone(std::string symbol);

  const std::string& symbol() const noexcept { return symbol_; }

  friend bool operator==(const Phone&, const Phone&) = default;
  friend auto operator<=>(const Phone&, const Phone&) = default;

 private:
  std::string symbol_;
};

using Form = std::vector<Phone>;

std::string join_form(const Form& form, std::string_view separator = "");

// Dense phone indexing. Index 0 is always the reserved end-of-string token,
// which doubles as the beginning-of-word input symbol for language models.
class PhoneInventory {
 public:
  static constexpr std::string_view kEosSymbol = "</s>";
  static constexpr int kEos = 0;

  PhoneInventory();
  // Builds an inventory of the given phones (deduplicated, sorted) plus EOS.
  explicit PhoneInventory(const std::set<Phone>& phones);
  static PhoneInventory from_symbols(const std::vector<std::string>& symbols);

  int size() const noexcept { return static_cast<int>(symbols_.size()); }
  int eos_index() const noexcept { return kEos; }
  const std::string& symbol(int index) const { return symbols_.at(index); }
  // All symbols in index order, EOS first.
  const std::vector<std::string>& symbols() const noexcept { return symbols_; }
  std::optional<int> find(const Phone& phone) const;
  bool contains(const Phone& phone) const { return find(phone).has_value(); }
  // Maps a form to indices; throws OutOfInventory on unknown phones.
  std::vector<int> encode(const Form& form) const;

  friend bool operator==(const PhoneInventory& a, const PhoneInventory& b) {
    return a.symbols_ == b.symbols_;
  }

 private:
  std::vector<std::string> symbols_;
  std::unordered_map<std::string, int> index_;
};

struct Sign {
  std::string lemma;
  Form form;
  Eigen::VectorXd meaning;  // empty until embeddings are attached
  std::string pos;
  std::optional<std::string> concept_id;
};

struct Lexicon {
  std::string language;
  PhoneInventory inventory;
  std::vector<Sign> signs;
  std::vector<std::string> classes;  // sorted POS labels

  std::size_t size() const noexcept { return signs.size(); }
  int class_index(const std::string& pos) const;
  int meaning_dim() const;
  bool has_meanings() const;
};

// Rebuilds inventory and class set from the signs; checks every invariant.
Lexicon make_lexicon(std::string language, std::vector<Sign> signs);

struct TokenizeOptions {
  // Space-separated phones; bypasses the modifier attachment rules.
  bool pretokenized = false;
  // Drops stress (ˈ ˌ) and syllable-boundary (.) marks before segmenting.
  bool strip_prosodic_marks = false;
};

std::string nfc_normalize(std::string_view utf8);

// Segments an IPA string into phones. Combining diacritics and spacing
// modifier letters attach to the preceding base; a tie bar joins the two
// flanking bases. Throws EmptyForm or InvalidForm.
Form tokenize_ipa(std::string_view raw, const TokenizeOptions& options = {});

struct LexiconSchema {
  std::string lemma = "lemma";
  std::string form = "ipa";
  std::string pos = "pos";
  std::string concept_id = "concept";  // optional column
};

struct SkippedRow {
  std::size_t line = 0;  // 1-based, header is line 1
  std::string reason;
};

struct ParsedLexicon {
  Lexicon lexicon;
  std::vector<SkippedRow> skipped;
  std::size_t duplicates = 0;
};

ParsedLexicon parse_lexicon(std::istream& in, const LexiconSchema& schema,
                            std::string language,
                            const TokenizeOptions& options = {});

struct EmbeddingTable {
  std::map<std::string, Eigen::VectorXd> vectors;
  std::vector<std::string> missing;  // wanted lemmata without a vector, sorted
  int dim = 0;
};

// Reads word-vector text format ("count dim" header optional), keeping only
// the wanted lemmata.
EmbeddingTable load_embeddings(std::istream& in,
                               const std::set<std::string>& wanted);

struct AttachResult {
  Lexicon lexicon;
  std::vector<std::string> dropped;  // lemmata without embeddings
};

// Sets each sign's meaning from the table and drops signs without one.
AttachResult attach_meanings(const Lexicon& lexicon,
                             const EmbeddingTable& table);

enum class FoldRole { Train, Validation, Test };

struct FoldAssignment {
  std::vector<int> fold_of;  // per sign index
  int k = 0;
  std::uint64_t seed = 0;
  // Role rotation: validation fold = rotation mod k, test = rotation+1 mod k.
  int rotation = 0;

  FoldRole role(int fold) const;
  std::vector<int> indices(FoldRole role) const;
  std::vector<int> fold_indices(int fold) const;
  FoldAssignment rotated(int r) const;
};

// Deterministic shuffle keyed by seed, then round-robin.
FoldAssignment split_folds(std::size_t n_signs, int k, std::uint64_t seed);
FoldAssignment split_folds(const Lexicon& lexicon, int k, std::uint64_t seed);

}  // namespace signform

template <>
struct std::hash<signform::Phone> {
  std::size_t operator()(const signform::Phone& p) const noexcept {
    return std::hash<std::string>{}(p.symbol());
  }
};

#endif  // SIGNFORM_LEXICON_HPP_
