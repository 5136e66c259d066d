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

#ifndef SIGNFORM_CONFIG_HPP_
#define SIGNFORM_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "signform/hyperopt.hpp"
#include "signform/infotheory.hpp"
#include "signform/lexicon.hpp"
#include "signform/phonesthemes.hpp"
#include "signform/phonolm.hpp"

namespace signform {

constexpr int kConfigVersion = 1;

struct LanguageSource {
  std::string name;
  std::filesystem::path lexicon;     // TSV
  std::filesystem::path embeddings;  // word-vector text format
  LexiconSchema schema;
  TokenizeOptions tokenize;
  // Control condition: permute meanings across signs before estimating.
  bool shuffle_meanings = false;
};

struct HyperoptSettings {
  int budget = 50;
  SearchMode mode = SearchMode::Bayesian;
  SearchSpace space = SearchSpace::lm_default();
};

struct RunConfig {
  std::vector<LanguageSource> languages;
  std::filesystem::path output_dir = "signform-out";
  int folds = 10;
  // Fold rotations evaluated as test folds; 0 means all of them.
  int rotations = 0;
  std::uint64_t seed = 1;
  std::vector<Conditioning> models = {Conditioning::Nothing, Conditioning::Meaning,
                                      Conditioning::Class, Conditioning::MeaningAndClass};
  // Without a search the explicit `lm` settings are used for every model.
  std::optional<HyperoptSettings> hyperopt = HyperoptSettings{};
  LMConfig lm;
  OptimizerSettings optimizer;
  std::int64_t permutations = 100000;
  DeltaUnit delta_unit = DeltaUnit::PerPhone;
  double alpha = 0.05;
  MiningOptions phonesthemes;
  bool suffixes = true;
  int threads = 1;
  bool save_models = true;

  int effective_rotations() const { return rotations > 0 ? rotations : folds; }
  bool runs(Conditioning c) const;
  bool runs_pos() const;
  // Throws ConfigError; with check_paths also verifies input files exist.
  void validate(bool check_paths) const;
};

// Relative paths are resolved against base_dir.
RunConfig config_from_json(const nlohmann::json& j,
                           const std::filesystem::path& base_dir = {});
// Without the runtime fields (output directory, thread count) the document
// depends only on settings that affect results.
nlohmann::json to_json(const RunConfig& cfg, bool include_runtime = true);
RunConfig load_config(const std::filesystem::path& path);

}  // namespace signform

#endif  // SIGNFORM_CONFIG_HPP_
