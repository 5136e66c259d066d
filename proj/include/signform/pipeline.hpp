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

#ifndef SIGNFORM_PIPELINE_HPP_
#define SIGNFORM_PIPELINE_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "signform/config.hpp"
#include "signform/hyperopt.hpp"
#include "signform/infotheory.hpp"
#include "signform/lexicon.hpp"
#include "signform/phonesthemes.hpp"
#include "signform/phonolm.hpp"
#include "signform/reports.hpp"

namespace signform {

// Seed tags below a language's seed.
enum class SeedTag : std::uint64_t {
  Training = 1,
  Search = 2,
  Folds = 3,
  Permutation = 4,
  PermutationGivenPos = 5,
  Shuffle = 6,
  Phonesthemes = 7,
  ReversedTraining = 8,
};

// Seed of one language within a run: depends on the master seed and the
// language name only, so batch and single-language runs agree.
std::uint64_t language_seed(std::uint64_t master, const std::string& language);
std::uint64_t language_seed(std::uint64_t master, const std::string& language, SeedTag tag,
                            std::initializer_list<std::uint64_t> rest = {});

struct LoadedLanguage {
  Lexicon lexicon;
  std::size_t skipped_rows = 0;
  std::size_t duplicates = 0;
  std::size_t dropped_without_embedding = 0;
};

LoadedLanguage load_language(const LanguageSource& source, std::uint64_t master_seed);

// LMConfig for one model kind from a search point; dimensions are matched
// by name. The PCA size is capped at the meaning dimension and the hidden
// size rounded up to even when it is split between meaning and class.
LMConfig lm_from_point(const LMConfig& base, const SearchSpace& space,
                       const Eigen::VectorXd& native, Conditioning kind);

// Search space for a model kind: drops pca_d for kinds without meaning and
// caps its upper bound at the meaning dimension.
SearchSpace space_for(const SearchSpace& space, Conditioning kind, int meaning_dim);

// One model trained on one fold rotation and evaluated on its test fold.
struct RotationFit {
  int rotation = 0;
  LMConfig config;
  std::uint64_t seed = 0;
  int best_epoch = 0;
  double valid_bits_per_phone = 0.0;
  PerWordLoss test;
  std::optional<ModelArchive> archive;
};

// Trains on the train folds of `folds` (already rotated), early-stops on the
// validation fold and evaluates the test fold. The PCA, when needed, is fit
// on the training signs only.
RotationFit fit_rotation(const Lexicon& lexicon, const FoldAssignment& folds, LMConfig config,
                         const OptimizerSettings& optimizer, std::uint64_t seed,
                         bool keep_archive);

struct ModelFit {
  Conditioning kind = Conditioning::Nothing;
  LMConfig config;
  std::optional<SearchResult> search;
  std::vector<RotationFit> rotations;
  PerWordLoss test;  // all rotations' test folds
};

struct EstimateResult {
  std::string language;
  LoadedLanguage loaded;
  FoldAssignment folds;
  std::map<Conditioning, ModelFit> models;
  MIReport report;
  nlohmann::json document;  // report.json content for this language
};

// The whole per-language pipeline: folds, optional hyperparameter search,
// training per rotation, test-fold evaluation, estimators and permutation
// tests. Writes model archives and the search log under out_dir when
// enabled.
EstimateResult estimate_language(const RunConfig& cfg, const LanguageSource& source,
                                 const std::filesystem::path& out_dir);

struct PhonesthemeResult {
  std::string language;
  std::vector<AffixCandidate> candidates;
  nlohmann::json document;
};

// Cross-fitted per-position bits for every sign (each sign scored by the
// models whose test fold contains it), forward and on reversed forms, then
// mining. Forward models saved by an earlier estimate run with the same
// folds are reused.
PhonesthemeResult phonesthemes_language(const RunConfig& cfg, const LanguageSource& source,
                                        const std::filesystem::path& out_dir);

// Writes report.csv, report.json, models/ and search.jsonl for every
// language in the config, stopping at the first failure.
std::vector<EstimateResult> cmd_estimate(const RunConfig& cfg);

struct BatchOutcome {
  std::vector<MIReport> reports;
  std::map<std::string, std::string> failures;  // language -> error message
};

// Runs every language in its own sub-directory; a failing language is
// recorded and the batch continues. Writes the aggregate tables and plots.
BatchOutcome cmd_batch(const RunConfig& cfg);

// Writes phonesthemes.tsv and phonesthemes.json.
std::vector<PhonesthemeResult> cmd_phonesthemes(const RunConfig& cfg);

// Runs the configured search for every language and model kind; writes
// search.jsonl and hyperopt.json.
nlohmann::json cmd_hyperopt(const RunConfig& cfg);

// Rebuilds report.csv, appendix.tsv and the density plots from report.json
// documents.
void cmd_report(const std::vector<std::filesystem::path>& report_files,
                const std::filesystem::path& out_dir, double alpha);

// Machine-readable description of a failure.
nlohmann::json error_document(const std::exception& e);

}  // namespace signform

#endif  // SIGNFORM_PIPELINE_HPP_
