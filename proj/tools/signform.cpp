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

// Command-line front end: one subcommand per pipeline stage.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "signform/config.hpp"
#include "signform/error.hpp"
#include "signform/pipeline.hpp"
#include "signform/reports.hpp"
#include "signform/synthbench.hpp"
#include "signform/validation.hpp"

namespace {

using namespace signform;
namespace fs = std::filesystem;

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::string out;
};

template <typename T>
std::optional<T> env_number(const char* name) {
  const char* v = std::getenv(name);
  if (v == nullptr || *v == '\0') return std::nullopt;
  try {
    std::size_t used = 0;
    const unsigned long long n = std::stoull(v, &used);
    if (used != std::string(v).size()) throw std::invalid_argument(v);
    return static_cast<T>(n);
  } catch (const std::exception&) {
    throw Error(ErrorCode::ConfigError, std::string(name) + " is not a number: " + v);
  }
}

// Precedence: command-line flag, then environment, then config file.
RunConfig resolve_config(const Globals& g) {
  if (g.config.empty()) throw Error(ErrorCode::ConfigError, "--config is required");
  RunConfig cfg = load_config(g.config);
  if (auto s = env_number<std::uint64_t>("SIGNFORM_SEED")) cfg.seed = *s;
  if (auto t = env_number<int>("SIGNFORM_THREADS")) cfg.threads = *t;
  if (g.seed) cfg.seed = *g.seed;
  if (g.threads) cfg.threads = *g.threads;
  if (!g.out.empty()) cfg.output_dir = g.out;
  return cfg;
}

int threads_for(const Globals& g) {
  if (g.threads) return *g.threads;
  if (auto t = env_number<int>("SIGNFORM_THREADS")) return *t;
  return 1;
}

void print_report_table(const std::vector<MIReport>& reports) {
  std::cout << report_csv_header() << '\n';
  for (const MIReport& r : reports) std::cout << report_csv_row(r) << '\n';
}

synth::SyntheticSpec preset_spec(const std::string& preset, int clusters, int alphabet, int dim,
                                 double noise, std::uint64_t spec_seed) {
  if (preset == "uniform") return synth::uniform_single_phone_spec();
  if (preset == "two-cluster") return synth::two_cluster_spec(dim, noise);
  if (preset == "null") return synth::null_spec(alphabet, dim, spec_seed);
  if (preset == "mixture") {
    return synth::markov_mixture_spec(clusters, alphabet, 5, dim, noise, spec_seed);
  }
  if (preset == "planted") return synth::planted_prefix_spec(clusters, alphabet, {2, 0}, dim, spec_seed);
  throw Error(ErrorCode::ConfigError, "unknown preset '" + preset + "'");
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  write_text(path, j.dump(2) + "\n");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Measures form-meaning systematicity of lexica with phone-level language models."};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config, "run configuration (JSON)");
  app.add_option("--seed", g.seed, "master seed");
  app.add_option("--threads", g.threads, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--out", g.out, "output directory");

  auto* estimate = app.add_subcommand("estimate", "estimate entropy, MI and significance per language");
  auto* batch = app.add_subcommand("batch", "estimate many languages; aggregate tables and density plots");
  auto* phon = app.add_subcommand("phonesthemes", "mine prefix and suffix phonesthemes");
  auto* hyper = app.add_subcommand("hyperopt", "run only the hyperparameter search");

  auto* synth_cmd = app.add_subcommand("synth", "write a synthetic lexicon with known entropies");
  std::string spec_path, preset = "two-cluster", name;
  std::size_t n_words = 5000;
  int clusters = 2, alphabet = 6, dim = 4;
  double noise = 0.1;
  std::uint64_t spec_seed = 1;
  auto* spec_opt = synth_cmd->add_option("--spec", spec_path, "synthetic spec (JSON)");
  synth_cmd->add_option("--preset", preset, "uniform, two-cluster, null, mixture or planted")
      ->excludes(spec_opt);
  synth_cmd->add_option("--n", n_words, "number of words")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--name", name, "language name (default: from the spec)");
  synth_cmd->add_option("--clusters", clusters, "clusters for mixture and planted presets");
  synth_cmd->add_option("--alphabet", alphabet, "alphabet size for presets");
  synth_cmd->add_option("--dim", dim, "meaning dimension for presets");
  synth_cmd->add_option("--noise", noise, "meaning noise scale for presets");
  synth_cmd->add_option("--spec-seed", spec_seed, "seed drawing the preset's chains and centroids");

  auto* validate = app.add_subcommand("validate", "run the oracle validation battery");
  bool list = false, inject = false;
  std::vector<int> only;
  validate->add_flag("--list", list, "print the criteria without running them");
  validate->add_flag("--inject-gradient-fault", inject, "corrupt one analytic gradient entry");
  validate->add_option("--only", only, "criterion ids to run")->delimiter(',');

  auto* report = app.add_subcommand("report", "summary tables and plots from report.json files");
  std::vector<std::string> report_files;
  double alpha = 0.05;
  report->add_option("files", report_files, "report.json files")->required()->check(CLI::ExistingFile);
  report->add_option("--alpha", alpha, "false discovery rate for significance flags");

  CLI11_PARSE(app, argc, argv);

  try {
    if (estimate->parsed()) {
      const RunConfig cfg = resolve_config(g);
      std::vector<MIReport> reports;
      for (const EstimateResult& r : cmd_estimate(cfg)) reports.push_back(r.report);
      print_report_table(reports);
      return 0;
    }
    if (batch->parsed()) {
      const RunConfig cfg = resolve_config(g);
      const BatchOutcome outcome = cmd_batch(cfg);
      print_report_table(outcome.reports);
      for (const auto& [lang, message] : outcome.failures) {
        std::cerr << "failed: " << lang << ": " << message << '\n';
      }
      return outcome.failures.empty() ? 0 : 3;
    }
    if (phon->parsed()) {
      const RunConfig cfg = resolve_config(g);
      std::cout << phonestheme_tsv_header() << '\n';
      for (const PhonesthemeResult& r : cmd_phonesthemes(cfg)) {
        for (const AffixCandidate& c : r.candidates) {
          if (c.significant) std::cout << phonestheme_tsv_row(r.language, c) << '\n';
        }
      }
      return 0;
    }
    if (hyper->parsed()) {
      std::cout << cmd_hyperopt(resolve_config(g)).at("languages").dump(2) << '\n';
      return 0;
    }
    if (synth_cmd->parsed()) {
      synth::SyntheticSpec spec;
      if (!spec_path.empty()) {
        std::ifstream in(spec_path);
        if (!in) throw Error(ErrorCode::IoError, "cannot read " + spec_path);
        spec = synth::spec_from_json(nlohmann::json::parse(in));
      } else {
        spec = preset_spec(preset, clusters, alphabet, dim, noise, spec_seed);
      }
      if (!name.empty()) spec.language = name;
      std::uint64_t seed = 1;
      if (auto s = env_number<std::uint64_t>("SIGNFORM_SEED")) seed = *s;
      if (g.seed) seed = *g.seed;
      const fs::path out = g.out.empty() ? fs::path(".") : fs::path(g.out);
      fs::create_directories(out);
      const LanguageSource src =
          validation::write_synthetic_language(spec, n_words, seed, out, spec.language);
      const synth::ExactEntropy exact = synth::exact_entropy(spec);
      write_json(out / (spec.language + ".exact.json"),
                 {{"language", spec.language},
                  {"words", n_words},
                  {"seed", seed},
                  {"H_W", exact.bits_per_phone},
                  {"H_W_given_cluster", exact.conditional_bits_per_phone},
                  {"MI_W_cluster", exact.bits_per_phone - exact.conditional_bits_per_phone},
                  {"expected_tokens", exact.expected_tokens},
                  {"spec", synth::to_json(spec)}});
      nlohmann::json cfg = to_json(validation::synthetic_run_config({src}, "results"), false);
      cfg["languages"][0]["lexicon"] = src.lexicon.filename().string();
      cfg["languages"][0]["embeddings"] = src.embeddings.filename().string();
      cfg["output_dir"] = "results";
      write_json(out / (spec.language + ".config.json"), cfg);
      std::cout << "wrote " << src.lexicon.string() << ", " << src.embeddings.string() << '\n'
                << "exact H(W) " << exact.bits_per_phone << " bits/phone, MI "
                << exact.bits_per_phone - exact.conditional_bits_per_phone << '\n';
      return 0;
    }
    if (validate->parsed()) {
      std::vector<int> ids = only;
      if (ids.empty()) {
        for (const auto& c : validation::criteria()) ids.push_back(c.id);
      }
      if (list) {
        for (const auto& c : validation::criteria()) {
          std::cout << c.id << '\t' << c.title << (c.required ? "" : "\t(optional)") << '\n';
        }
        return 0;
      }
      validation::Options opt;
      opt.threads = threads_for(g);
      opt.inject_gradient_fault = inject;
      if (!g.out.empty()) opt.work_dir = g.out;
      bool ok = true;
      for (int id : ids) {
        const validation::Outcome o = validation::run_criterion(id, opt);
        std::cout << validation::format_outcome(o) << std::endl;
        if (!o.skipped && !o.passed) ok = false;
      }
      return ok ? 0 : 1;
    }
    if (report->parsed()) {
      std::vector<fs::path> files(report_files.begin(), report_files.end());
      const fs::path out = g.out.empty() ? fs::path(".") : fs::path(g.out);
      cmd_report(files, out, alpha);
      std::cout << "wrote summary tables to " << out.string() << '\n';
      return 0;
    }
  } catch (const std::exception& e) {
    const nlohmann::json err = error_document(e);
    std::cerr << err.dump() << '\n';
    if (!g.out.empty()) {
      try {
        fs::create_directories(g.out);
        write_json(fs::path(g.out) / "error.json", err);
      } catch (const std::exception&) {
      }
    }
    return dynamic_cast<const Error*>(&e) != nullptr &&
                   static_cast<const Error&>(e).code() == ErrorCode::ConfigError
               ? 2
               : 1;
  }
  return 0;
}
