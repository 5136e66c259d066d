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

#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "signform/error.hpp"
#include "signform/pipeline.hpp"
#include "signform/synthbench.hpp"
#include "signform/validation.hpp"

using namespace signform;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "signform-test-pipeline" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunConfig tiny(std::vector<LanguageSource> langs, const fs::path& out) {
  RunConfig cfg = validation::synthetic_run_config(std::move(langs), out);
  cfg.folds = 3;
  cfg.permutations = 500;
  cfg.optimizer.max_epochs = 4;
  cfg.lm.hidden_size = 8;
  cfg.phonesthemes.min_count = 5;
  cfg.phonesthemes.n_samples = 300;
  return cfg;
}

}  // namespace

TEST_CASE("language seeds depend on the master seed, the name and the tag") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t master : {1, 2}) {
    for (const char* name : {"eng", "deu", "nld"}) {
      seen.insert(language_seed(master, name));
      for (SeedTag tag : {SeedTag::Training, SeedTag::Search, SeedTag::Folds}) {
        seen.insert(language_seed(master, name, tag));
        seen.insert(language_seed(master, name, tag, {0}));
        seen.insert(language_seed(master, name, tag, {0, 1}));
      }
    }
  }
  CHECK(seen.size() == 2 * 3 * 10);
  CHECK(language_seed(5, "eng", SeedTag::Training, {1, 2}) ==
        language_seed(5, "eng", SeedTag::Training, {1, 2}));
}

TEST_CASE("search spaces per model kind") {
  const SearchSpace base = SearchSpace::lm_default();
  const SearchSpace uncond = space_for(base, Conditioning::Nothing, 300);
  CHECK_FALSE(uncond.index_of("pca_d"));
  const SearchSpace meaning = space_for(base, Conditioning::Meaning, 50);
  REQUIRE(meaning.index_of("pca_d"));
  CHECK(meaning.dims[*meaning.index_of("pca_d")].upper == 50);

  Eigen::VectorXd point(4);
  point << 2, 33, 7, 0.1;
  const LMConfig mac = lm_from_point(LMConfig{}, base, point, Conditioning::MeaningAndClass);
  CHECK(mac.layers == 2);
  CHECK(mac.hidden_size == 34);
  CHECK(mac.pca_d == 7);
  CHECK(mac.dropout == 0.1);
  CHECK(mac.condition_on == Conditioning::MeaningAndClass);
  CHECK(lm_from_point(LMConfig{}, base, point, Conditioning::Meaning).hidden_size == 33);
}

TEST_CASE("shuffled meanings keep the multiset of vectors") {
  const fs::path dir = scratch("shuffle");
  LanguageSource src = validation::write_synthetic_language(synth::two_cluster_spec(), 200, 1, dir, "syn");
  const Lexicon plain = load_language(src, 1).lexicon;
  src.shuffle_meanings = true;
  const Lexicon shuffled = load_language(src, 1).lexicon;
  REQUIRE(plain.size() == shuffled.size());
  std::vector<std::vector<double>> a, b;
  int moved = 0;
  for (std::size_t i = 0; i < plain.size(); ++i) {
    const auto& x = plain.signs[i].meaning;
    const auto& y = shuffled.signs[i].meaning;
    a.emplace_back(x.data(), x.data() + x.size());
    b.emplace_back(y.data(), y.data() + y.size());
    CHECK(plain.signs[i].form == shuffled.signs[i].form);
    if (x != y) ++moved;
  }
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  CHECK(a == b);
  CHECK(moved > 150);
}

TEST_CASE("estimate writes reports whose numbers obey the definitions") {
  const fs::path dir = scratch("estimate");
  RunConfig cfg = tiny({validation::write_synthetic_language(synth::two_cluster_spec(), 300, 2, dir, "syn")},
                       dir / "out");
  cfg.models = {Conditioning::Nothing, Conditioning::Meaning, Conditioning::Class,
                Conditioning::MeaningAndClass};
  cfg.save_models = true;
  const auto results = cmd_estimate(cfg);
  REQUIRE(results.size() == 1);
  const MIReport& r = results[0].report;
  CHECK(r.mi == doctest::Approx(r.H_W.bits_per_phone - r.H_W_given_V.bits_per_phone));
  CHECK(r.uncertainty == doctest::Approx(r.mi / r.H_W.bits_per_phone));
  REQUIRE(r.mi_given_pos);
  CHECK(*r.mi_given_pos ==
        doctest::Approx(r.H_W_given_C->bits_per_phone - r.H_W_given_VC->bits_per_phone));
  CHECK(r.H_W.n_words == 300);
  for (const auto& [kind, fit] : results[0].models) CHECK(fit.rotations.size() == 3);

  for (const char* f : {"report.csv", "report.json", "models/syn.manifest.json",
                        "models/syn.uncond.fold0.archive", "models/syn.meaning_and_class.fold2.archive"}) {
    CHECK_MESSAGE(fs::exists(dir / "out" / f), f);
  }
  const auto doc = nlohmann::json::parse(slurp(dir / "out" / "report.json"));
  CHECK(doc["format"] == "signform-report");
  CHECK(doc["config"]["seed"] == cfg.seed);
  CHECK(doc["languages"][0]["seeds"]["folds"] ==
        language_seed(cfg.seed, "syn", SeedTag::Folds));
  CHECK(doc["languages"][0]["report"]["mi"].get<double>() == r.mi);

  // Archived models reproduce the test-fold losses.
  const ModelArchive a = load_archive(dir / "out" / "models" / "syn.uncond.fold1.archive");
  const auto& fit = results[0].models.at(Conditioning::Nothing).rotations[1];
  const auto ids = results[0].folds.rotated(1).indices(FoldRole::Test);
  const PerWordLoss again = evaluate(a.model, make_examples(results[0].loaded.lexicon, ids, nullptr), ids);
  CHECK(again.words.size() == fit.test.words.size());
  CHECK(again.words[0].total_bits == doctest::Approx(fit.test.words[0].total_bits));
}

TEST_CASE("batch isolates failing languages") {
  const fs::path dir = scratch("batch");
  const LanguageSource good =
      validation::write_synthetic_language(synth::two_cluster_spec(), 240, 3, dir, "good");
  LanguageSource bad = good;
  bad.name = "bad";
  bad.embeddings = dir / "absent.vec";

  const BatchOutcome both = cmd_batch(tiny({bad, good}, dir / "both"));
  CHECK(both.reports.size() == 1);
  CHECK(both.failures.count("bad") == 1);
  const auto err = nlohmann::json::parse(slurp(dir / "both" / "bad" / "error.json"));
  CHECK(err["error"]["code"] == "ConfigError");
  CHECK(fs::exists(dir / "both" / "batch.json"));

  cmd_batch(tiny({good}, dir / "alone"));
  for (const char* f : {"report.csv", "report.json"}) {
    CHECK(slurp(dir / "both" / "good" / f) == slurp(dir / "alone" / "good" / f));
  }
  // One language: the summary table is that language's row.
  CHECK(slurp(dir / "alone" / "report.csv") == slurp(dir / "alone" / "good" / "report.csv"));

  cmd_report({dir / "alone" / "good" / "report.json"}, dir / "summary", 0.05);
  CHECK(slurp(dir / "summary" / "appendix.tsv") == slurp(dir / "alone" / "appendix.tsv"));
  CHECK_THROWS_AS(cmd_report({dir / "both" / "batch.json"}, dir / "summary", 0.05), Error);
}

TEST_CASE("phonesthemes reuse saved forward models") {
  const fs::path dir = scratch("phonesthemes");
  RunConfig cfg = tiny({validation::write_synthetic_language(
                           synth::planted_prefix_spec(2, 4, {2, 0}, 3, 1), 300, 4, dir, "pl")},
                       dir / "out");
  cfg.save_models = true;
  const auto fresh = cmd_phonesthemes(cfg);
  CHECK(fresh[0].document["reused_forward_models"] == 0);
  CHECK(fs::exists(dir / "out" / "models" / "pl.reversed.meaning.fold0.archive"));

  cmd_estimate(cfg);
  const auto reused = cmd_phonesthemes(cfg);
  CHECK(reused[0].document["reused_forward_models"] == 2 * cfg.folds);
  CHECK_FALSE(reused[0].candidates.empty());
  const std::string tsv = slurp(dir / "out" / "phonesthemes.tsv");
  CHECK(tsv.rfind(phonestheme_tsv_header() + "\n", 0) == 0);
}

TEST_CASE("hyperparameter search logs and resumes") {
  const fs::path dir = scratch("hyperopt");
  RunConfig cfg = tiny({validation::write_synthetic_language(synth::two_cluster_spec(), 200, 5, dir, "syn")},
                       dir / "out");
  cfg.hyperopt = HyperoptSettings{};
  cfg.hyperopt->budget = 2;
  cfg.hyperopt->space = SearchSpace{{{"hidden_size", DimType::Integer, 4, 12}}};
  const auto first = cmd_hyperopt(cfg);
  const auto count_lines = [&] {
    const std::string log = slurp(dir / "out" / "search.jsonl");
    return std::count(log.begin(), log.end(), '\n');
  };
  CHECK(count_lines() == 4);  // two trials for each of two models
  const auto second = cmd_hyperopt(cfg);
  CHECK(count_lines() == 4);
  CHECK(first == second);

  cfg.hyperopt->budget = 3;
  cmd_hyperopt(cfg);
  CHECK(count_lines() == 6);
  const auto line = nlohmann::json::parse(slurp(dir / "out" / "search.jsonl").substr(0, slurp(dir / "out" / "search.jsonl").find('\n')));
  CHECK(line["language"] == "syn");
  CHECK(line.contains("native"));

  cfg.hyperopt.reset();
  CHECK_THROWS_AS(cmd_hyperopt(cfg), Error);
}

TEST_CASE("error documents carry the error code") {
  const auto doc = error_document(Error(ErrorCode::EmptyLexicon, "nothing left"));
  CHECK(doc["error"]["code"] == "EmptyLexicon");
  CHECK(doc["error"]["message"].get<std::string>().find("nothing left") != std::string::npos);
  CHECK(error_document(std::runtime_error("x"))["error"]["code"] == "Internal");
}
