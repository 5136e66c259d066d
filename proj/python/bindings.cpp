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

// Python bindings. Structured results cross the boundary as JSON text and
// are decoded by the pure-Python layer in signform/__init__.py.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <optional>
#include <string>
#include <vector>

#include "signform/config.hpp"
#include "signform/error.hpp"
#include "signform/infotheory.hpp"
#include "signform/lexicon.hpp"
#include "signform/pipeline.hpp"
#include "signform/stats.hpp"
#include "signform/synthbench.hpp"
#include "signform/validation.hpp"

namespace py = pybind11;
using namespace signform;
namespace fs = std::filesystem;

namespace {

RunConfig parse_config(const std::string& text, const fs::path& base_dir,
                       std::optional<std::uint64_t> seed, std::optional<int> threads,
                       std::optional<fs::path> out) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigError, e.what());
  }
  RunConfig cfg = config_from_json(j, base_dir);
  if (seed) cfg.seed = *seed;
  if (threads) cfg.threads = *threads;
  if (out) cfg.output_dir = *out;
  return cfg;
}

synth::SyntheticSpec spec_of(const std::string& text) {
  return synth::spec_from_json(nlohmann::json::parse(text));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "signform native core";

  static py::exception<Error> error_type(m, "SignformError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::handle(error_type.ptr())(e.what());
      exc.attr("code") = to_string(e.code());
      PyErr_SetObject(error_type.ptr(), exc.ptr());
    }
  });

  // Pipeline commands take the config document as JSON text.

  m.def(
      "estimate",
      [](const std::string& config, const fs::path& base_dir, std::optional<std::uint64_t> seed,
         std::optional<int> threads, std::optional<fs::path> out) {
        const RunConfig cfg = parse_config(config, base_dir, seed, threads, out);
        py::gil_scoped_release release;
        nlohmann::json docs = nlohmann::json::array();
        for (const EstimateResult& r : cmd_estimate(cfg)) docs.push_back(r.document);
        return docs.dump();
      },
      py::arg("config"), py::arg("base_dir") = fs::path(), py::arg("seed") = py::none(),
      py::arg("threads") = py::none(), py::arg("out") = py::none());

  m.def(
      "batch",
      [](const std::string& config, const fs::path& base_dir, std::optional<std::uint64_t> seed,
         std::optional<int> threads, std::optional<fs::path> out) {
        const RunConfig cfg = parse_config(config, base_dir, seed, threads, out);
        py::gil_scoped_release release;
        const BatchOutcome outcome = cmd_batch(cfg);
        nlohmann::json reports = nlohmann::json::array();
        for (const MIReport& r : outcome.reports) reports.push_back(to_json(r));
        return nlohmann::json{{"reports", reports}, {"failures", outcome.failures}}.dump();
      },
      py::arg("config"), py::arg("base_dir") = fs::path(), py::arg("seed") = py::none(),
      py::arg("threads") = py::none(), py::arg("out") = py::none());

  m.def(
      "phonesthemes",
      [](const std::string& config, const fs::path& base_dir, std::optional<std::uint64_t> seed,
         std::optional<int> threads, std::optional<fs::path> out) {
        const RunConfig cfg = parse_config(config, base_dir, seed, threads, out);
        py::gil_scoped_release release;
        nlohmann::json docs = nlohmann::json::array();
        for (const PhonesthemeResult& r : cmd_phonesthemes(cfg)) docs.push_back(r.document);
        return docs.dump();
      },
      py::arg("config"), py::arg("base_dir") = fs::path(), py::arg("seed") = py::none(),
      py::arg("threads") = py::none(), py::arg("out") = py::none());

  m.def(
      "hyperopt",
      [](const std::string& config, const fs::path& base_dir, std::optional<std::uint64_t> seed,
         std::optional<int> threads, std::optional<fs::path> out) {
        const RunConfig cfg = parse_config(config, base_dir, seed, threads, out);
        py::gil_scoped_release release;
        return cmd_hyperopt(cfg).dump();
      },
      py::arg("config"), py::arg("base_dir") = fs::path(), py::arg("seed") = py::none(),
      py::arg("threads") = py::none(), py::arg("out") = py::none());

  m.def(
      "report",
      [](const std::vector<fs::path>& files, const fs::path& out, double alpha) {
        py::gil_scoped_release release;
        cmd_report(files, out, alpha);
      },
      py::arg("files"), py::arg("out"), py::arg("alpha") = 0.05);

  m.def(
      "resolve_config",
      [](const std::string& config, const fs::path& base_dir) {
        const RunConfig cfg = config_from_json(nlohmann::json::parse(config), base_dir);
        cfg.validate(false);
        return to_json(cfg).dump();
      },
      py::arg("config"), py::arg("base_dir") = fs::path());

  m.def(
      "synth_preset",
      [](const std::string& name, int clusters, int alphabet, int dim, double noise,
         std::uint64_t spec_seed) {
        synth::SyntheticSpec s;
        if (name == "uniform") {
          s = synth::uniform_single_phone_spec();
        } else if (name == "two-cluster") {
          s = synth::two_cluster_spec(dim, noise);
        } else if (name == "null") {
          s = synth::null_spec(alphabet, dim, spec_seed);
        } else if (name == "mixture") {
          s = synth::markov_mixture_spec(clusters, alphabet, 5, dim, noise, spec_seed);
        } else if (name == "planted") {
          s = synth::planted_prefix_spec(clusters, alphabet, {2, 0}, dim, spec_seed);
        } else {
          throw Error(ErrorCode::InvalidArgument, "unknown preset '" + name + "'");
        }
        return synth::to_json(s).dump();
      },
      py::arg("name"), py::arg("clusters") = 2, py::arg("alphabet") = 6, py::arg("dim") = 4,
      py::arg("noise") = 0.1, py::arg("spec_seed") = 1);

  m.def(
      "synth_exact",
      [](const std::string& spec) {
        const synth::ExactEntropy e = synth::exact_entropy(spec_of(spec));
        return nlohmann::json{{"H_W", e.bits_per_phone},
                              {"H_W_given_cluster", e.conditional_bits_per_phone},
                              {"MI_W_cluster", e.bits_per_phone - e.conditional_bits_per_phone},
                              {"expected_tokens", e.expected_tokens},
                              {"total_bits", e.total_bits}}
            .dump();
      },
      py::arg("spec"));

  m.def(
      "synth_write",
      [](const std::string& spec, std::size_t n_words, std::uint64_t seed, const fs::path& dir,
         const std::string& name) {
        const LanguageSource src =
            validation::write_synthetic_language(spec_of(spec), n_words, seed, dir, name);
        return std::make_pair(src.lexicon, src.embeddings);
      },
      py::arg("spec"), py::arg("n_words"), py::arg("seed"), py::arg("dir"), py::arg("name"));

  m.def(
      "synthetic_config",
      [](const std::string& name, const fs::path& lexicon, const fs::path& embeddings,
         const fs::path& out) {
        LanguageSource src;
        src.name = name;
        src.lexicon = lexicon;
        src.embeddings = embeddings;
        return to_json(validation::synthetic_run_config({src}, out)).dump();
      },
      py::arg("name"), py::arg("lexicon"), py::arg("embeddings"), py::arg("out"));

  m.def(
      "tokenize_ipa",
      [](const std::string& raw, bool strip_prosodic_marks) {
        TokenizeOptions opt;
        opt.strip_prosodic_marks = strip_prosodic_marks;
        std::vector<std::string> out;
        for (const Phone& p : tokenize_ipa(raw, opt)) out.push_back(p.symbol());
        return out;
      },
      py::arg("ipa"), py::arg("strip_prosodic_marks") = false);

  m.def(
      "permutation_test",
      [](const std::vector<double>& deltas, std::int64_t n_permutations, std::uint64_t seed,
         int threads) {
        const PermutationResult r = [&] {
          py::gil_scoped_release release;
          return signform::permutation_test(deltas, n_permutations, seed, threads);
        }();
        py::dict d;
        d["observed_mean"] = r.observed_mean;
        d["n_permutations"] = r.n_permutations;
        d["n_at_least_as_extreme"] = r.n_at_least_as_extreme;
        d["p_value"] = r.p_value;
        d["p_value_two_sided"] = r.p_value_two_sided;
        d["seed"] = r.seed;
        return d;
      },
      py::arg("deltas"), py::arg("n_permutations") = 100000, py::arg("seed") = 1,
      py::arg("threads") = 1);

  m.def(
      "exact_permutation_p",
      [](const std::vector<double>& deltas) { return signform::exact_permutation_p(deltas); },
      py::arg("deltas"));

  m.def(
      "bh_correct",
      [](const std::vector<double>& p, double alpha) {
        const BHResult r = signform::bh_correct(p, alpha);
        return std::make_pair(std::vector<bool>(r.rejected.begin(), r.rejected.end()), r.adjusted);
      },
      py::arg("p_values"), py::arg("alpha") = 0.05);

  m.def(
      "spearman_rho",
      [](const std::vector<double>& x, const std::vector<double>& y, std::int64_t n_permutations,
         std::uint64_t seed) {
        const SpearmanResult r = signform::spearman_rho(x, y, n_permutations, seed);
        return std::make_pair(r.rho, r.p_value);
      },
      py::arg("x"), py::arg("y"), py::arg("n_permutations") = 10000, py::arg("seed") = 1);

  m.def(
      "kde",
      [](const std::vector<double>& values, std::optional<double> bandwidth) {
        const DensityCurve c = signform::kde(values, bandwidth);
        return std::make_tuple(c.x, c.density, c.bandwidth);
      },
      py::arg("values"), py::arg("bandwidth") = py::none());

  m.def("uncertainty_coefficient", &signform::uncertainty_coefficient, py::arg("mi"),
        py::arg("h"));
  m.def(
      "cohens_d", [](const std::vector<double>& d) { return signform::cohens_d(d); },
      py::arg("deltas"));

  m.def("criteria", [] {
    std::vector<std::tuple<int, std::string, bool>> out;
    for (const auto& c : validation::criteria()) out.emplace_back(c.id, c.title, c.required);
    return out;
  });
  m.def(
      "validate",
      [](int id, const fs::path& work_dir, int threads) {
        validation::Options opt;
        opt.work_dir = work_dir;
        opt.threads = threads;
        const validation::Outcome o = [&] {
          py::gil_scoped_release release;
          return validation::run_criterion(id, opt);
        }();
        py::dict d;
        d["id"] = o.id;
        d["passed"] = o.passed;
        d["skipped"] = o.skipped;
        d["detail"] = o.detail;
        d["seconds"] = o.seconds;
        return d;
      },
      py::arg("criterion"), py::arg("work_dir"), py::arg("threads") = 1);
}
