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

#include "signform/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <mutex>
#include <random>
#include <set>

#include "signform/error.hpp"
#include "signform/parallel.hpp"
#include "signform/rng.hpp"
#include "signform/semspace.hpp"
#include "signform/stats.hpp"

namespace signform {

namespace {

constexpr int kReportVersion = 1;

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string kind_name(Conditioning c) { return std::string(to_string(c)); }

std::filesystem::path archive_path(const std::filesystem::path& out_dir, const std::string& language,
                                   const std::string& prefix, Conditioning kind, int rotation) {
  return out_dir / "models" /
         (language + '.' + prefix + kind_name(kind) + ".fold" + std::to_string(rotation) +
          ".archive");
}

std::filesystem::path manifest_path(const std::filesystem::path& out_dir,
                                    const std::string& language) {
  return out_dir / "models" / (language + ".manifest.json");
}

PerWordLoss concatenate(const std::vector<RotationFit>& fits) {
  PerWordLoss all;
  for (const RotationFit& f : fits) {
    all.sign_ids.insert(all.sign_ids.end(), f.test.sign_ids.begin(), f.test.sign_ids.end());
    all.words.insert(all.words.end(), f.test.words.begin(), f.test.words.end());
  }
  return all;
}

SignificanceResult significance(const MIEstimate& est, std::int64_t permutations,
                                std::uint64_t seed, int threads) {
  const PermutationResult p = permutation_test(est.deltas, permutations, seed, threads);
  SignificanceResult s;
  s.p_value = p.p_value;
  s.p_value_two_sided = p.p_value_two_sided;
  s.n_permutations = p.n_permutations;
  s.seed = p.seed;
  return s;
}

// Appends trials to the combined search log and reads back those of one
// (language, model, seed) for resuming.
class SearchLog {
 public:
  explicit SearchLog(std::filesystem::path path) : path_(std::move(path)) {}

  std::vector<Trial> replay(const std::string& language, Conditioning kind, std::uint64_t seed,
                            const SearchSpace& space) const {
    std::vector<Trial> out;
    std::ifstream in(path_);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(line);
      } catch (const nlohmann::json::exception&) {
        continue;  // a torn final line from an interrupted run
      }
      if (j.value("language", "") != language || j.value("model", "") != kind_name(kind) ||
          j.value("search_seed", std::uint64_t{0}) != seed) {
        continue;
      }
      out.push_back(trial_from_json(j, space));
    }
    return out;
  }

  void append(const std::string& language, Conditioning kind, std::uint64_t seed,
              const Trial& trial, const SearchSpace& space) {
    nlohmann::json j = to_json(trial, space);
    j["language"] = language;
    j["model"] = kind_name(kind);
    j["search_seed"] = seed;
    std::lock_guard lock(mutex_);
    if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
    std::ofstream out(path_, std::ios::app | std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path_.string());
    out << j.dump() << '\n';
  }

 private:
  std::filesystem::path path_;
  std::mutex mutex_;
};

// Chooses the LMConfig of one model kind, searching when configured.
ModelFit resolve_model(const RunConfig& cfg, const Lexicon& lex, const FoldAssignment& folds,
                       Conditioning kind, SearchLog& log) {
  ModelFit mf;
  mf.kind = kind;
  mf.config = cfg.lm;
  mf.config.condition_on = kind;
  if (!cfg.hyperopt) return mf;

  const SearchSpace space = space_for(cfg.hyperopt->space, kind, lex.meaning_dim());
  const std::uint64_t seed = language_seed(cfg.seed, lex.language, SeedTag::Search,
                                           {static_cast<std::uint64_t>(kind)});
  const FoldAssignment first = folds.rotated(0);
  std::uint64_t step = 0;
  const Objective objective = [&](const Eigen::VectorXd& native) {
    const LMConfig c = lm_from_point(mf.config, space, native, kind);
    return fit_rotation(lex, first, c, cfg.optimizer, derive_seed(seed, {step++}), false)
        .valid_bits_per_phone;
  };
  SearchOptions opt;
  opt.mode = cfg.hyperopt->mode;
  opt.on_trial = [&](const Trial& t) { log.append(lex.language, kind, seed, t, space); };
  std::vector<Trial> resume = log.replay(lex.language, kind, seed, space);
  if (static_cast<int>(resume.size()) > cfg.hyperopt->budget) resume.resize(static_cast<std::size_t>(cfg.hyperopt->budget));
  step = resume.size();
  SearchResult result = run_search(objective, space, cfg.hyperopt->budget, seed, opt, std::move(resume));
  mf.config = lm_from_point(mf.config, space, result.best.native, kind);
  mf.search = std::move(result);
  return mf;
}

struct Manifest {
  int folds = 0;
  std::uint64_t fold_seed = 0;
  std::size_t n_signs = 0;
  std::map<std::string, nlohmann::json> configs;  // kind -> LMConfig json
  std::set<int> rotations;
};

nlohmann::json to_json(const Manifest& m) {
  nlohmann::json configs = nlohmann::json::object();
  for (const auto& [k, v] : m.configs) configs[k] = v;
  return {{"folds", m.folds},
          {"fold_seed", m.fold_seed},
          {"n_signs", m.n_signs},
          {"models", configs},
          {"rotations", m.rotations}};
}

std::optional<Manifest> read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) return std::nullopt;
  try {
    const auto j = nlohmann::json::parse(in);
    Manifest m;
    m.folds = j.at("folds").get<int>();
    m.fold_seed = j.at("fold_seed").get<std::uint64_t>();
    m.n_signs = j.at("n_signs").get<std::size_t>();
    for (const auto& [k, v] : j.at("models").items()) m.configs[k] = v;
    m.rotations = j.at("rotations").get<std::set<int>>();
    return m;
  } catch (const nlohmann::json::exception&) {
    return std::nullopt;
  }
}

nlohmann::json rotation_json(const RotationFit& f) {
  return {{"rotation", f.rotation},
          {"seed", f.seed},
          {"best_epoch", f.best_epoch},
          {"valid_bits_per_phone", f.valid_bits_per_phone},
          {"pca_d", f.config.pca_d},
          {"test", to_json(entropy_estimate(f.test))}};
}

nlohmann::json lexicon_json(const LoadedLanguage& l) {
  return {{"signs", l.lexicon.size()},
          {"phones", l.lexicon.inventory.size() - 1},
          {"classes", l.lexicon.classes.size()},
          {"meaning_dim", l.lexicon.meaning_dim()},
          {"skipped_rows", l.skipped_rows},
          {"duplicates", l.duplicates},
          {"dropped_without_embedding", l.dropped_without_embedding}};
}

const nlohmann::json kNotes = {
    {"bits_per_phone", "sum of bits over sum of tokens; every word contributes |form| + 1 tokens"},
    {"cohens_d",
     "mean of per-word savings (bits per phone) divided by their sample standard deviation"},
    {"uncertainty_given_pos", "MI(W;V|POS) / H(W|POS)"},
    {"p_value", "one-sided sign-flip test, (r + 1) / (B + 1) with ties counted as extreme"}};

void write_estimate_outputs(const RunConfig& cfg, const std::filesystem::path& out_dir,
                            const std::vector<EstimateResult>& results) {
  std::string csv = report_csv_header() + '\n';
  nlohmann::json langs = nlohmann::json::array();
  for (const EstimateResult& r : results) {
    csv += report_csv_row(r.report) + '\n';
    langs.push_back(r.document);
  }
  write_text(out_dir / "report.csv", csv);
  const nlohmann::json doc = {{"format", "signform-report"},
                              {"version", kReportVersion},
                              {"config", to_json(cfg, false)},
                              {"languages", langs}};
  write_text(out_dir / "report.json", doc.dump(2) + "\n");
}

RunConfig single_language(const RunConfig& cfg, const LanguageSource& source) {
  RunConfig one = cfg;
  one.languages = {source};
  return one;
}

}  // namespace

std::uint64_t language_seed(std::uint64_t master, const std::string& language) {
  return derive_seed(master, {fnv1a(language)});
}

std::uint64_t language_seed(std::uint64_t master, const std::string& language, SeedTag tag,
                            std::initializer_list<std::uint64_t> rest) {
  std::uint64_t s = derive_seed(language_seed(master, language), {static_cast<std::uint64_t>(tag)});
  for (std::uint64_t r : rest) s = derive_seed(s, {r});
  return s;
}

LoadedLanguage load_language(const LanguageSource& source, std::uint64_t master_seed) {
  std::ifstream lex_in(source.lexicon, std::ios::binary);
  if (!lex_in) throw Error(ErrorCode::IoError, "cannot read " + source.lexicon.string());
  ParsedLexicon parsed = parse_lexicon(lex_in, source.schema, source.name, source.tokenize);

  std::set<std::string> wanted;
  for (const Sign& s : parsed.lexicon.signs) wanted.insert(s.lemma);
  std::ifstream emb_in(source.embeddings, std::ios::binary);
  if (!emb_in) throw Error(ErrorCode::IoError, "cannot read " + source.embeddings.string());
  const EmbeddingTable table = load_embeddings(emb_in, wanted);
  AttachResult attached = attach_meanings(parsed.lexicon, table);

  LoadedLanguage out;
  out.skipped_rows = parsed.skipped.size();
  out.duplicates = parsed.duplicates;
  out.dropped_without_embedding = attached.dropped.size();
  out.lexicon = std::move(attached.lexicon);
  if (source.shuffle_meanings) {
    std::vector<std::size_t> order(out.lexicon.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(language_seed(master_seed, source.name, SeedTag::Shuffle));
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<Eigen::VectorXd> meanings;
    for (std::size_t i : order) meanings.push_back(out.lexicon.signs[i].meaning);
    for (std::size_t i = 0; i < order.size(); ++i) out.lexicon.signs[i].meaning = meanings[i];
  }
  return out;
}

SearchSpace space_for(const SearchSpace& space, Conditioning kind, int meaning_dim) {
  SearchSpace out;
  for (Dimension d : space.dims) {
    if (d.name == "pca_d") {
      if (!uses_meaning(kind)) continue;
      d.upper = std::min(d.upper, static_cast<double>(meaning_dim));
      d.lower = std::min(d.lower, d.upper);
      if (d.lower == d.upper) continue;  // nothing to search
    }
    out.dims.push_back(d);
  }
  out.validate();
  return out;
}

LMConfig lm_from_point(const LMConfig& base, const SearchSpace& space,
                       const Eigen::VectorXd& native, Conditioning kind) {
  LMConfig c = base;
  c.condition_on = kind;
  for (int i = 0; i < space.size(); ++i) {
    const std::string& name = space.dims[static_cast<std::size_t>(i)].name;
    const double v = native[i];
    if (name == "layers") {
      c.layers = static_cast<int>(std::lround(v));
    } else if (name == "hidden_size") {
      c.hidden_size = static_cast<int>(std::lround(v));
    } else if (name == "pca_d") {
      c.pca_d = static_cast<int>(std::lround(v));
    } else if (name == "dropout") {
      c.dropout = v;
    } else if (name == "phone_embed_size") {
      c.phone_embed_size = static_cast<int>(std::lround(v));
    } else {
      throw Error(ErrorCode::ConfigError, "unknown search dimension '" + name + "'");
    }
  }
  if (kind == Conditioning::MeaningAndClass && c.hidden_size % 2 != 0) ++c.hidden_size;
  c.validate();
  return c;
}

RotationFit fit_rotation(const Lexicon& lexicon, const FoldAssignment& folds, LMConfig config,
                         const OptimizerSettings& optimizer, std::uint64_t seed,
                         bool keep_archive) {
  const std::vector<int> train_ids = folds.indices(FoldRole::Train);
  const std::vector<int> valid_ids = folds.indices(FoldRole::Validation);
  const std::vector<int> test_ids = folds.indices(FoldRole::Test);
  if (train_ids.empty() || valid_ids.empty() || test_ids.empty()) {
    throw Error(ErrorCode::TooManyFolds, "a fold is empty");
  }
  std::optional<PCAModel> pca;
  if (uses_meaning(config.condition_on)) {
    const int dim = lexicon.meaning_dim();
    if (dim < 1) throw Error(ErrorCode::DimensionMismatch, "lexicon has no meanings");
    config.pca_d = std::min({config.pca_d, dim, static_cast<int>(train_ids.size())});
    Eigen::MatrixXd data(static_cast<Eigen::Index>(train_ids.size()), dim);
    for (std::size_t i = 0; i < train_ids.size(); ++i) {
      data.row(static_cast<Eigen::Index>(i)) =
          lexicon.signs[static_cast<std::size_t>(train_ids[i])].meaning.transpose();
    }
    pca = pca_fit(data, config.pca_d);
  }
  const PCAModel* p = pca ? &*pca : nullptr;
  const auto train_ex = make_examples(lexicon, train_ids, p);
  const auto valid_ex = make_examples(lexicon, valid_ids, p);
  const auto test_ex = make_examples(lexicon, test_ids, p);
  TrainResult tr = train(config, lexicon.inventory.size(), static_cast<int>(lexicon.classes.size()),
                         train_ex, valid_ex, optimizer, seed);
  RotationFit fit;
  fit.rotation = folds.rotation;
  fit.config = config;
  fit.seed = seed;
  fit.best_epoch = tr.best_epoch;
  fit.valid_bits_per_phone = tr.best_valid_bits_per_phone;
  fit.test = evaluate(tr.model, test_ex, test_ids);
  if (keep_archive) {
    fit.archive = ModelArchive{std::move(tr.model), lexicon.inventory.symbols(), lexicon.classes, pca};
  }
  return fit;
}

EstimateResult estimate_language(const RunConfig& cfg, const LanguageSource& source,
                                 const std::filesystem::path& out_dir) {
  EstimateResult res;
  res.language = source.name;
  res.loaded = load_language(source, cfg.seed);
  const Lexicon& lex = res.loaded.lexicon;
  const std::uint64_t fold_seed = language_seed(cfg.seed, source.name, SeedTag::Folds);
  res.folds = split_folds(lex, cfg.folds, fold_seed);
  const int rotations = cfg.effective_rotations();

  SearchLog log(out_dir / "search.jsonl");
  for (Conditioning kind : cfg.models) {
    res.models.emplace(kind, resolve_model(cfg, lex, res.folds, kind, log));
  }

  struct Job {
    Conditioning kind;
    int rotation;
  };
  std::vector<Job> jobs;
  for (Conditioning kind : cfg.models) {
    for (int r = 0; r < rotations; ++r) jobs.push_back({kind, r});
  }
  std::vector<RotationFit> fits(jobs.size());
  parallel_for(jobs.size(), cfg.threads, [&](std::size_t i) {
    const Job& job = jobs[i];
    const std::uint64_t seed = language_seed(
        cfg.seed, source.name, SeedTag::Training,
        {static_cast<std::uint64_t>(job.kind), static_cast<std::uint64_t>(job.rotation)});
    fits[i] = fit_rotation(lex, res.folds.rotated(job.rotation), res.models.at(job.kind).config,
                           cfg.optimizer, seed, cfg.save_models);
  });

  Manifest manifest;
  manifest.folds = cfg.folds;
  manifest.fold_seed = fold_seed;
  manifest.n_signs = lex.size();
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    ModelFit& mf = res.models.at(jobs[i].kind);
    if (fits[i].archive) {
      save_archive(*fits[i].archive,
                   archive_path(out_dir, source.name, "", jobs[i].kind, jobs[i].rotation));
      fits[i].archive.reset();
      manifest.rotations.insert(jobs[i].rotation);
    }
    mf.rotations.push_back(std::move(fits[i]));
  }
  for (auto& [kind, mf] : res.models) {
    mf.test = concatenate(mf.rotations);
    manifest.configs[kind_name(kind)] = to_json(mf.config);
  }
  if (cfg.save_models) {
    write_text(manifest_path(out_dir, source.name), to_json(manifest).dump(2) + "\n");
  }

  const MIEstimate mi = mi_estimate(res.models.at(Conditioning::Nothing).test,
                                    res.models.at(Conditioning::Meaning).test, cfg.delta_unit);
  std::optional<MIEstimate> pos;
  if (cfg.runs_pos()) {
    pos = conditional_mi(res.models.at(Conditioning::Class).test,
                         res.models.at(Conditioning::MeaningAndClass).test, cfg.delta_unit);
  }
  res.report = make_report(source.name, mi, pos);
  const std::uint64_t perm_seed = language_seed(cfg.seed, source.name, SeedTag::Permutation);
  res.report.significance = significance(mi, cfg.permutations, perm_seed, cfg.threads);
  std::uint64_t perm_pos_seed = 0;
  if (pos) {
    perm_pos_seed = language_seed(cfg.seed, source.name, SeedTag::PermutationGivenPos);
    res.report.significance_given_pos =
        significance(*pos, cfg.permutations, perm_pos_seed, cfg.threads);
  }

  nlohmann::json models = nlohmann::json::object();
  nlohmann::json training_seeds = nlohmann::json::object();
  for (const auto& [kind, mf] : res.models) {
    nlohmann::json rot = nlohmann::json::array();
    nlohmann::json seeds = nlohmann::json::array();
    for (const RotationFit& f : mf.rotations) {
      rot.push_back(rotation_json(f));
      seeds.push_back(f.seed);
    }
    nlohmann::json m = {{"config", to_json(mf.config)},
                        {"rotations", rot},
                        {"test", to_json(entropy_estimate(mf.test))}};
    if (mf.search) {
      m["search"] = {{"trials", mf.search->history.size()},
                     {"best", to_json(mf.search->best, space_for(cfg.hyperopt->space, kind,
                                                                 lex.meaning_dim()))}};
    }
    models[kind_name(kind)] = m;
    training_seeds[kind_name(kind)] = seeds;
  }
  res.document = {{"language", source.name},
                  {"lexicon", lexicon_json(res.loaded)},
                  {"seeds",
                   {{"master", cfg.seed},
                    {"language", language_seed(cfg.seed, source.name)},
                    {"folds", fold_seed},
                    {"training", training_seeds},
                    {"permutation", perm_seed},
                    {"permutation_given_pos", pos ? nlohmann::json(perm_pos_seed) : nlohmann::json(nullptr)}}},
                  {"models", models},
                  {"report", to_json(res.report)},
                  {"notes", kNotes}};
  return res;
}

PhonesthemeResult phonesthemes_language(const RunConfig& cfg, const LanguageSource& source,
                                        const std::filesystem::path& out_dir) {
  PhonesthemeResult res;
  res.language = source.name;
  const LoadedLanguage loaded = load_language(source, cfg.seed);
  const Lexicon& lex = loaded.lexicon;
  const std::uint64_t fold_seed = language_seed(cfg.seed, source.name, SeedTag::Folds);
  const FoldAssignment folds = split_folds(lex, cfg.folds, fold_seed);
  const int rotations = cfg.effective_rotations();
  const Lexicon reversed = reverse_forms(lex);
  const std::vector<Conditioning> kinds = {Conditioning::Nothing, Conditioning::Meaning};

  const auto manifest = read_manifest(manifest_path(out_dir, source.name));
  const bool reuse = manifest && manifest->folds == cfg.folds && manifest->fold_seed == fold_seed &&
                     manifest->n_signs == lex.size();

  SearchLog log(out_dir / "search.jsonl");
  std::map<Conditioning, LMConfig> configs;
  for (Conditioning kind : kinds) {
    if (reuse && manifest->configs.count(kind_name(kind))) {
      configs[kind] = lm_config_from_json(manifest->configs.at(kind_name(kind)));
    } else {
      configs[kind] = resolve_model(cfg, lex, folds, kind, log).config;
    }
  }

  struct Job {
    bool reversed;
    Conditioning kind;
    int rotation;
  };
  std::vector<Job> jobs;
  for (bool rev : {false, true}) {
    if (rev && !cfg.suffixes) continue;
    for (Conditioning kind : kinds) {
      for (int r = 0; r < rotations; ++r) jobs.push_back({rev, kind, r});
    }
  }
  std::vector<PerWordLoss> tests(jobs.size());
  std::vector<std::optional<ModelArchive>> archives(jobs.size());
  std::vector<bool> reused(jobs.size(), false);
  parallel_for(jobs.size(), cfg.threads, [&](std::size_t i) {
    const Job& job = jobs[i];
    const FoldAssignment fa = folds.rotated(job.rotation);
    const auto saved = archive_path(out_dir, source.name, "", job.kind, job.rotation);
    if (!job.reversed && reuse && manifest->rotations.count(job.rotation) &&
        std::filesystem::exists(saved)) {
      const ModelArchive a = load_archive(saved);
      const auto ids = fa.indices(FoldRole::Test);
      const auto ex = make_examples(lex, ids, a.pca ? &*a.pca : nullptr);
      tests[i] = evaluate(a.model, ex, ids);
      reused[i] = true;
      return;
    }
    const SeedTag tag = job.reversed ? SeedTag::ReversedTraining : SeedTag::Training;
    const std::uint64_t seed = language_seed(
        cfg.seed, source.name, tag,
        {static_cast<std::uint64_t>(job.kind), static_cast<std::uint64_t>(job.rotation)});
    RotationFit fit = fit_rotation(job.reversed ? reversed : lex, fa, configs.at(job.kind),
                                   cfg.optimizer, seed, cfg.save_models);
    tests[i] = std::move(fit.test);
    archives[i] = std::move(fit.archive);
  });

  std::map<std::pair<bool, Conditioning>, PerWordLoss> tables;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (archives[i]) {
      save_archive(*archives[i], archive_path(out_dir, source.name, jobs[i].reversed ? "reversed." : "",
                                              jobs[i].kind, jobs[i].rotation));
    }
    PerWordLoss& t = tables[{jobs[i].reversed, jobs[i].kind}];
    t.sign_ids.insert(t.sign_ids.end(), tests[i].sign_ids.begin(), tests[i].sign_ids.end());
    t.words.insert(t.words.end(), tests[i].words.begin(), tests[i].words.end());
  }
  const PositionTable forward = position_table(tables.at({false, Conditioning::Nothing}),
                                               tables.at({false, Conditioning::Meaning}), lex.size());
  std::optional<PositionTable> backward;
  if (cfg.suffixes) {
    backward = position_table(tables.at({true, Conditioning::Nothing}),
                              tables.at({true, Conditioning::Meaning}), lex.size());
  }
  MiningOptions mining = cfg.phonesthemes;
  mining.threads = cfg.threads;
  const std::uint64_t seed = language_seed(cfg.seed, source.name, SeedTag::Phonesthemes);
  res.candidates = mine(lex, &forward, backward ? &*backward : nullptr, mining, seed);

  nlohmann::json cands = nlohmann::json::array();
  for (const AffixCandidate& c : res.candidates) {
    cands.push_back({{"side", std::string(to_string(c.side))},
                     {"affix", join_form(c.phones, " ")},
                     {"count", c.count},
                     {"avg_pmi", c.avg_pmi},
                     {"p_value", c.p_value},
                     {"p_adjusted", c.p_adjusted},
                     {"significant", c.significant},
                     {"examples", c.example_lemmata}});
  }
  nlohmann::json cfg_json = nlohmann::json::object();
  for (const auto& [kind, c] : configs) cfg_json[kind_name(kind)] = to_json(c);
  res.document = {{"language", source.name},
                  {"lexicon", lexicon_json(loaded)},
                  {"seed", seed},
                  {"fold_seed", fold_seed},
                  {"rotations", rotations},
                  {"reused_forward_models",
                   std::count(reused.begin(), reused.end(), true)},
                  {"models", cfg_json},
                  {"candidates", cands}};
  return res;
}

std::vector<EstimateResult> cmd_estimate(const RunConfig& cfg) {
  cfg.validate(true);
  std::filesystem::create_directories(cfg.output_dir);
  std::vector<EstimateResult> results;
  for (const LanguageSource& source : cfg.languages) {
    results.push_back(estimate_language(cfg, source, cfg.output_dir));
  }
  write_estimate_outputs(cfg, cfg.output_dir, results);
  return results;
}

BatchOutcome cmd_batch(const RunConfig& cfg) {
  cfg.validate(false);
  std::filesystem::create_directories(cfg.output_dir);
  BatchOutcome outcome;
  nlohmann::json status = nlohmann::json::array();
  for (const LanguageSource& source : cfg.languages) {
    const std::filesystem::path dir = cfg.output_dir / source.name;
    std::filesystem::remove(dir / "error.json");
    try {
      const RunConfig one = single_language(cfg, source);
      one.validate(true);
      std::vector<EstimateResult> r{estimate_language(one, source, dir)};
      write_estimate_outputs(one, dir, r);
      outcome.reports.push_back(r.front().report);
      status.push_back({{"language", source.name}, {"status", "ok"}});
    } catch (const std::exception& e) {
      const nlohmann::json err = error_document(e);
      write_text(dir / "error.json", err.dump(2) + "\n");
      outcome.failures[source.name] = e.what();
      status.push_back({{"language", source.name}, {"status", "failed"}, {"error", err["error"]}});
    }
  }
  write_summary_outputs(cfg.output_dir, outcome.reports, cfg.alpha);
  const nlohmann::json doc = {{"format", "signform-batch"},
                              {"version", kReportVersion},
                              {"config", to_json(cfg, false)},
                              {"languages", status}};
  write_text(cfg.output_dir / "batch.json", doc.dump(2) + "\n");
  return outcome;
}

std::vector<PhonesthemeResult> cmd_phonesthemes(const RunConfig& cfg) {
  cfg.validate(true);
  std::filesystem::create_directories(cfg.output_dir);
  std::vector<PhonesthemeResult> results;
  std::string tsv = phonestheme_tsv_header() + '\n';
  nlohmann::json langs = nlohmann::json::array();
  for (const LanguageSource& source : cfg.languages) {
    results.push_back(phonesthemes_language(cfg, source, cfg.output_dir));
    for (const AffixCandidate& c : results.back().candidates) {
      tsv += phonestheme_tsv_row(source.name, c) + '\n';
    }
    langs.push_back(results.back().document);
  }
  write_text(cfg.output_dir / "phonesthemes.tsv", tsv);
  const nlohmann::json doc = {{"format", "signform-phonesthemes"},
                              {"version", kReportVersion},
                              {"config", to_json(cfg, false)},
                              {"languages", langs}};
  write_text(cfg.output_dir / "phonesthemes.json", doc.dump(2) + "\n");
  return results;
}

nlohmann::json cmd_hyperopt(const RunConfig& cfg) {
  cfg.validate(true);
  if (!cfg.hyperopt) throw Error(ErrorCode::ConfigError, "config has no hyperopt section");
  std::filesystem::create_directories(cfg.output_dir);
  SearchLog log(cfg.output_dir / "search.jsonl");
  nlohmann::json out = nlohmann::json::object();
  for (const LanguageSource& source : cfg.languages) {
    const LoadedLanguage loaded = load_language(source, cfg.seed);
    const FoldAssignment folds = split_folds(
        loaded.lexicon, cfg.folds, language_seed(cfg.seed, source.name, SeedTag::Folds));
    nlohmann::json kinds = nlohmann::json::object();
    for (Conditioning kind : cfg.models) {
      const ModelFit mf = resolve_model(cfg, loaded.lexicon, folds, kind, log);
      const SearchSpace space = space_for(cfg.hyperopt->space, kind, loaded.lexicon.meaning_dim());
      kinds[kind_name(kind)] = {{"config", to_json(mf.config)},
                                {"trials", mf.search->history.size()},
                                {"best", to_json(mf.search->best, space)}};
    }
    out[source.name] = kinds;
  }
  const nlohmann::json doc = {{"format", "signform-hyperopt"},
                              {"version", kReportVersion},
                              {"config", to_json(cfg, false)},
                              {"languages", out}};
  write_text(cfg.output_dir / "hyperopt.json", doc.dump(2) + "\n");
  return doc;
}

void cmd_report(const std::vector<std::filesystem::path>& report_files,
                const std::filesystem::path& out_dir, double alpha) {
  std::vector<MIReport> reports;
  for (const auto& path : report_files) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::ConfigError, path.string() + ": " + e.what());
    }
    if (j.value("format", "") != "signform-report") {
      throw Error(ErrorCode::ConfigError, path.string() + " is not a signform report");
    }
    for (const auto& lang : j.at("languages")) reports.push_back(mi_report_from_json(lang.at("report")));
  }
  if (reports.empty()) throw Error(ErrorCode::EmptyTable, "no reports given");
  std::stable_sort(reports.begin(), reports.end(),
                   [](const MIReport& a, const MIReport& b) { return a.language < b.language; });
  write_summary_outputs(out_dir, reports, alpha);
}

nlohmann::json error_document(const std::exception& e) {
  std::string code = "Internal";
  if (const auto* err = dynamic_cast<const Error*>(&e)) code = to_string(err->code());
  return {{"error", {{"code", code}, {"message", e.what()}}}};
}

}  // namespace signform
