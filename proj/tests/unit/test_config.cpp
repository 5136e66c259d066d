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

#include <filesystem>
#include <fstream>

#include "signform/config.hpp"
#include "signform/error.hpp"

using namespace signform;
namespace fs = std::filesystem;

namespace {

nlohmann::json minimal() {
  return nlohmann::json::parse(R"({
    "languages": [{"name": "eng", "lexicon": "eng.tsv", "embeddings": "eng.vec"}]
  })");
}

void expect_config_error(const nlohmann::json& j) {
  try {
    config_from_json(j).validate(false);
    FAIL("accepted " << j.dump());
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ConfigError);
  }
}

}  // namespace

TEST_CASE("defaults follow the documented values") {
  const RunConfig cfg = config_from_json(minimal());
  CHECK(cfg.folds == 10);
  CHECK(cfg.permutations == 100000);
  REQUIRE(cfg.hyperopt);
  CHECK(cfg.hyperopt->budget == 50);
  CHECK(cfg.models.size() == 4);
  CHECK(cfg.runs_pos());
  CHECK(cfg.effective_rotations() == 10);
  CHECK(cfg.phonesthemes.n_samples == 100000);
  cfg.validate(false);
}

TEST_CASE("relative paths resolve against the config directory") {
  const RunConfig cfg = config_from_json(minimal(), "/data/run");
  CHECK(cfg.languages[0].lexicon == fs::path("/data/run/eng.tsv"));
  CHECK(cfg.languages[0].embeddings == fs::path("/data/run/eng.vec"));
}

TEST_CASE("json round trip") {
  nlohmann::json j = minimal();
  j["folds"] = 5;
  j["rotations"] = 2;
  j["seed"] = 99;
  j["models"] = {"uncond", "meaning"};
  j["hyperopt"] = nullptr;
  j["lm"] = {{"hidden_size", 48}, {"layers", 2}};
  j["phonesthemes"] = {{"k_max", 2}, {"min_count", 7}, {"suffixes", false}};
  j["delta_unit"] = "per_word";
  const RunConfig a = config_from_json(j);
  CHECK_FALSE(a.hyperopt);
  CHECK(a.lm.hidden_size == 48);
  CHECK(a.effective_rotations() == 2);
  CHECK_FALSE(a.suffixes);
  CHECK(a.delta_unit == DeltaUnit::PerWord);
  const RunConfig b = config_from_json(to_json(a));
  CHECK(to_json(a) == to_json(b));

  const auto stable = to_json(a, false);
  CHECK_FALSE(stable.contains("output_dir"));
  CHECK_FALSE(stable.contains("threads"));
}

TEST_CASE("invalid configs are rejected") {
  auto j = minimal();
  j["colour"] = 1;
  expect_config_error(j);

  j = minimal();
  j["version"] = 7;
  expect_config_error(j);

  j = minimal();
  j["folds"] = 2;
  expect_config_error(j);

  j = minimal();
  j["models"] = {"uncond"};
  expect_config_error(j);

  j = minimal();
  j["models"] = {"uncond", "meaning", "class"};
  expect_config_error(j);

  j = minimal();
  j["hyperopt"] = {{"mode", "grid"}};
  expect_config_error(j);

  j = minimal();
  j["languages"].push_back(j["languages"][0]);
  expect_config_error(j);

  j = minimal();
  j["phonesthemes"] = {{"k_min", 3}, {"k_max", 2}};
  expect_config_error(j);
}

TEST_CASE("path checks and file loading") {
  const fs::path dir = fs::temp_directory_path() / "signform-test-config";
  fs::remove_all(dir);
  fs::create_directories(dir);
  {
    std::ofstream(dir / "run.json") << minimal().dump();
  }
  const RunConfig cfg = load_config(dir / "run.json");
  CHECK(cfg.languages[0].lexicon == dir / "eng.tsv");
  CHECK_THROWS_AS(cfg.validate(true), Error);
  std::ofstream(dir / "eng.tsv") << "lemma\tipa\tpos\n";
  std::ofstream(dir / "eng.vec") << "0 3\n";
  CHECK_NOTHROW(cfg.validate(true));
  CHECK_THROWS_AS(load_config(dir / "absent.json"), Error);
  std::ofstream(dir / "broken.json") << "{";
  CHECK_THROWS_AS(load_config(dir / "broken.json"), Error);
}
