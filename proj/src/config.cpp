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

#include "signform/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "signform/error.hpp"

namespace signform {

namespace {

[[noreturn]] void config_error(const std::string& what) {
  throw Error(ErrorCode::ConfigError, what);
}

std::filesystem::path resolve(const std::filesystem::path& p, const std::filesystem::path& base) {
  if (p.empty() || p.is_absolute() || base.empty()) return p;
  return (base / p).lexically_normal();
}

const std::set<std::string> kTopLevelKeys = {
    "version",   "languages", "output_dir", "folds",         "rotations",
    "seed",      "models",    "hyperopt",   "lm",            "optimizer",
    "permutations", "delta_unit", "alpha", "phonesthemes", "threads",
    "save_models"};

}  // namespace

bool RunConfig::runs(Conditioning c) const {
  return std::find(models.begin(), models.end(), c) != models.end();
}

bool RunConfig::runs_pos() const {
  return runs(Conditioning::Class) && runs(Conditioning::MeaningAndClass);
}

void RunConfig::validate(bool check_paths) const {
  if (languages.empty()) config_error("no languages configured");
  std::set<std::string> names;
  for (const LanguageSource& l : languages) {
    if (l.name.empty()) config_error("language without a name");
    if (l.name.find_first_of("/\\\t\n,") != std::string::npos) {
      config_error("language name '" + l.name + "' contains a reserved character");
    }
    if (!names.insert(l.name).second) config_error("language '" + l.name + "' listed twice");
    if (l.lexicon.empty()) config_error("language '" + l.name + "' has no lexicon path");
    if (l.embeddings.empty()) config_error("language '" + l.name + "' has no embeddings path");
    if (check_paths) {
      for (const auto& p : {l.lexicon, l.embeddings}) {
        if (!std::filesystem::exists(p)) config_error("missing input file " + p.string());
      }
    }
  }
  if (folds < 3) config_error("at least 3 folds are needed (train, validation, test)");
  if (rotations < 0 || rotations > folds) config_error("rotations must lie in [0, folds]");
  if (!runs(Conditioning::Nothing) || !runs(Conditioning::Meaning)) {
    config_error("models must include uncond and meaning");
  }
  if (runs(Conditioning::Class) != runs(Conditioning::MeaningAndClass)) {
    config_error("class and meaning_and_class must be enabled together");
  }
  if (hyperopt) {
    if (hyperopt->budget < 1) config_error("hyperopt budget must be >= 1");
    hyperopt->space.validate();
  }
  lm.validate();
  if (permutations < 1) config_error("permutations must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) config_error("alpha must lie in (0, 1)");
  if (phonesthemes.k_min < 1 || phonesthemes.k_max < phonesthemes.k_min) {
    config_error("phonestheme k range must satisfy 1 <= k_min <= k_max");
  }
  if (phonesthemes.min_count < 2) config_error("phonestheme min_count must be >= 2");
  if (phonesthemes.n_samples < 1) config_error("phonestheme samples must be >= 1");
  if (!(phonesthemes.alpha > 0.0 && phonesthemes.alpha < 1.0)) {
    config_error("phonestheme alpha must lie in (0, 1)");
  }
  if (threads < 1) config_error("threads must be >= 1");
}

RunConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) config_error("config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!kTopLevelKeys.count(key)) config_error("unknown config key '" + key + "'");
  }
  const int version = j.value("version", kConfigVersion);
  if (version != kConfigVersion) {
    config_error("unsupported config version " + std::to_string(version));
  }
  RunConfig cfg;
  try {
    for (const auto& jl : j.at("languages")) {
      LanguageSource l;
      l.name = jl.at("name").get<std::string>();
      l.lexicon = resolve(jl.at("lexicon").get<std::string>(), base_dir);
      l.embeddings = resolve(jl.at("embeddings").get<std::string>(), base_dir);
      if (jl.contains("schema")) {
        const auto& s = jl["schema"];
        l.schema.lemma = s.value("lemma", l.schema.lemma);
        l.schema.form = s.value("form", l.schema.form);
        l.schema.pos = s.value("pos", l.schema.pos);
        l.schema.concept_id = s.value("concept", l.schema.concept_id);
      }
      if (jl.contains("tokenize")) {
        l.tokenize.pretokenized = jl["tokenize"].value("pretokenized", false);
        l.tokenize.strip_prosodic_marks = jl["tokenize"].value("strip_prosodic_marks", false);
      }
      l.shuffle_meanings = jl.value("shuffle_meanings", false);
      cfg.languages.push_back(std::move(l));
    }
    if (j.contains("output_dir")) {
      cfg.output_dir = resolve(j["output_dir"].get<std::string>(), base_dir);
    }
    cfg.folds = j.value("folds", cfg.folds);
    cfg.rotations = j.value("rotations", cfg.rotations);
    cfg.seed = j.value("seed", cfg.seed);
    if (j.contains("models")) {
      cfg.models.clear();
      for (const auto& m : j["models"]) {
        const Conditioning c = conditioning_from_string(m.get<std::string>());
        if (std::find(cfg.models.begin(), cfg.models.end(), c) == cfg.models.end()) {
          cfg.models.push_back(c);
        }
      }
      std::sort(cfg.models.begin(), cfg.models.end());
    }
    if (j.contains("hyperopt")) {
      const auto& h = j["hyperopt"];
      if (h.is_null()) {
        cfg.hyperopt.reset();
      } else {
        HyperoptSettings hs;
        hs.budget = h.value("budget", hs.budget);
        const std::string mode = h.value("mode", "bayesian");
        if (mode != "bayesian" && mode != "random") {
          config_error("hyperopt mode must be bayesian or random");
        }
        hs.mode = mode == "bayesian" ? SearchMode::Bayesian : SearchMode::Random;
        if (h.contains("space")) hs.space = search_space_from_json(h["space"]);
        cfg.hyperopt = hs;
      }
    }
    if (j.contains("lm")) cfg.lm = lm_config_from_json(j["lm"]);
    cfg.lm.condition_on = Conditioning::Nothing;
    if (j.contains("optimizer")) cfg.optimizer = optimizer_from_json(j["optimizer"]);
    cfg.permutations = j.value("permutations", cfg.permutations);
    const std::string unit = j.value("delta_unit", "per_phone");
    if (unit != "per_phone" && unit != "per_word") {
      config_error("delta_unit must be per_phone or per_word");
    }
    cfg.delta_unit = unit == "per_phone" ? DeltaUnit::PerPhone : DeltaUnit::PerWord;
    cfg.alpha = j.value("alpha", cfg.alpha);
    if (j.contains("phonesthemes")) {
      const auto& p = j["phonesthemes"];
      cfg.phonesthemes.k_min = p.value("k_min", cfg.phonesthemes.k_min);
      cfg.phonesthemes.k_max = p.value("k_max", cfg.phonesthemes.k_max);
      cfg.phonesthemes.min_count = p.value("min_count", cfg.phonesthemes.min_count);
      cfg.phonesthemes.alpha = p.value("alpha", cfg.phonesthemes.alpha);
      cfg.phonesthemes.n_samples = p.value("samples", cfg.phonesthemes.n_samples);
      cfg.phonesthemes.n_examples = p.value("examples", cfg.phonesthemes.n_examples);
      cfg.suffixes = p.value("suffixes", cfg.suffixes);
    }
    cfg.threads = j.value("threads", cfg.threads);
    cfg.save_models = j.value("save_models", cfg.save_models);
  } catch (const nlohmann::json::exception& e) {
    config_error(e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigError) throw;
    config_error(e.what());
  }
  cfg.phonesthemes.threads = cfg.threads;
  cfg.validate(false);
  return cfg;
}

nlohmann::json to_json(const RunConfig& cfg, bool include_runtime) {
  nlohmann::json langs = nlohmann::json::array();
  for (const LanguageSource& l : cfg.languages) {
    langs.push_back({{"name", l.name},
                     {"lexicon", l.lexicon.generic_string()},
                     {"embeddings", l.embeddings.generic_string()},
                     {"schema",
                      {{"lemma", l.schema.lemma},
                       {"form", l.schema.form},
                       {"pos", l.schema.pos},
                       {"concept", l.schema.concept_id}}},
                     {"tokenize",
                      {{"pretokenized", l.tokenize.pretokenized},
                       {"strip_prosodic_marks", l.tokenize.strip_prosodic_marks}}},
                     {"shuffle_meanings", l.shuffle_meanings}});
  }
  nlohmann::json models = nlohmann::json::array();
  for (Conditioning c : cfg.models) models.push_back(std::string(to_string(c)));
  nlohmann::json lm = to_json(cfg.lm);
  lm.erase("condition_on");
  nlohmann::json j = {
      {"version", kConfigVersion},
      {"languages", langs},
      {"folds", cfg.folds},
      {"rotations", cfg.rotations},
      {"seed", cfg.seed},
      {"models", models},
      {"hyperopt", cfg.hyperopt ? nlohmann::json{{"budget", cfg.hyperopt->budget},
                                                 {"mode", cfg.hyperopt->mode == SearchMode::Bayesian
                                                              ? "bayesian"
                                                              : "random"},
                                                 {"space", to_json(cfg.hyperopt->space)}}
                                : nlohmann::json(nullptr)},
      {"lm", lm},
      {"optimizer", to_json(cfg.optimizer)},
      {"permutations", cfg.permutations},
      {"delta_unit", cfg.delta_unit == DeltaUnit::PerPhone ? "per_phone" : "per_word"},
      {"alpha", cfg.alpha},
      {"phonesthemes",
       {{"k_min", cfg.phonesthemes.k_min},
        {"k_max", cfg.phonesthemes.k_max},
        {"min_count", cfg.phonesthemes.min_count},
        {"alpha", cfg.phonesthemes.alpha},
        {"samples", cfg.phonesthemes.n_samples},
        {"examples", cfg.phonesthemes.n_examples},
        {"suffixes", cfg.suffixes}}},
      {"save_models", cfg.save_models}};
  if (include_runtime) {
    j["output_dir"] = cfg.output_dir.generic_string();
    j["threads"] = cfg.threads;
  }
  return j;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot read config " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    config_error(path.string() + ": " + e.what());
  }
  return config_from_json(j, path.parent_path());
}

}  // namespace signform
