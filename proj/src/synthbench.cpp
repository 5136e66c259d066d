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

#include "signform/synthbench.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <random>
#include <sstream>

#include "signform/error.hpp"
#include "signform/rng.hpp"

namespace signform::synth {

namespace {

constexpr int kEndOfWord = -1;

const std::vector<std::string>& symbol_table() {
  static const std::vector<std::string> table = [] {
    std::vector<std::string> t;
    for (char c = 'a'; c <= 'z'; ++c) t.emplace_back(1, c);
    for (const char* g : {"α", "β", "γ", "δ", "ε", "ζ", "η", "θ", "ι", "κ",
                          "λ", "μ", "ν", "ξ", "ο", "π", "ρ", "σ", "τ", "υ",
                          "φ", "χ", "ψ", "ω"}) {
      t.emplace_back(g);
    }
    return t;
  }();
  return table;
}

bool is_distribution(const Eigen::VectorXd& p) {
  return (p.array() >= 0.0).all() && std::abs(p.sum() - 1.0) < 1e-9;
}

// Probability that cluster c emits `next` (a phone, or kEndOfWord) after a
// prefix of length `len` ending in `last`.
double step_prob(const SyntheticSpec& spec, int c, int len, int last,
                 int next) {
  const MarkovChain& chain = spec.chains[static_cast<std::size_t>(c)];
  const bool planted = spec.planted && spec.planted->cluster == c;
  const auto prefix_len =
      planted ? static_cast<int>(spec.planted->prefix.size()) : 0;
  if (len < prefix_len) {
    return next == spec.planted->prefix[static_cast<std::size_t>(len)] ? 1.0 : 0.0;
  }
  if (len == 0) return next == kEndOfWord ? 0.0 : chain.initial[next];
  if (len >= spec.max_length) return next == kEndOfWord ? 1.0 : 0.0;
  if (len < spec.min_length) {
    return next == kEndOfWord ? 0.0 : chain.transition(last, next);
  }
  const double stop = chain.stop[last];
  if (next == kEndOfWord) return stop;
  return (1.0 - stop) * chain.transition(last, next);
}

int sample_index(const Eigen::VectorXd& p, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double x = u(rng);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    acc += p[i];
    if (x < acc) return static_cast<int>(i);
  }
  for (Eigen::Index i = p.size() - 1; i >= 0; --i) {
    if (p[i] > 0) return static_cast<int>(i);
  }
  return 0;
}

std::vector<int> sample_form(const SyntheticSpec& spec, int c,
                             std::mt19937_64& rng) {
  std::vector<int> form;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::VectorXd dist(spec.alphabet_size + 1);  // last slot = end of word
  while (true) {
    const int len = static_cast<int>(form.size());
    const int last = form.empty() ? 0 : form.back();
    for (int x = 0; x < spec.alphabet_size; ++x) {
      dist[x] = step_prob(spec, c, len, last, x);
    }
    dist[spec.alphabet_size] = step_prob(spec, c, len, last, kEndOfWord);
    const int pick = sample_index(dist, rng);
    if (pick == spec.alphabet_size) return form;
    form.push_back(pick);
  }
}

double count_strings(int alphabet, int max_length) {
  double total = 0.0, level = 1.0;
  for (int l = 1; l <= max_length; ++l) {
    level *= alphabet;
    total += level;
  }
  return total;
}

// Visits every string of length 1..max_length with its per-cluster
// probability of being generated in full.
template <typename Visit>
void enumerate(const SyntheticSpec& spec, Visit&& visit) {
  if (count_strings(spec.alphabet_size, spec.max_length) > kMaxEnumeration) {
    throw Error(ErrorCode::EnumerationTooLarge,
                "alphabet^max_length exceeds the enumeration bound");
  }
  const int m = spec.n_clusters();
  std::vector<int> word;
  std::vector<double> running(static_cast<std::size_t>(m));
  for (int c = 0; c < m; ++c) running[static_cast<std::size_t>(c)] = 1.0;
  std::vector<double> done(static_cast<std::size_t>(m));
  auto recurse = [&](auto&& self, std::vector<double> prefix_prob) -> void {
    const int len = static_cast<int>(word.size());
    if (len > 0) {
      const int last = word.back();
      for (int c = 0; c < m; ++c) {
        done[static_cast<std::size_t>(c)] =
            prefix_prob[static_cast<std::size_t>(c)] *
            step_prob(spec, c, len, last, kEndOfWord);
      }
      visit(word, done);
    }
    if (len == spec.max_length) return;
    for (int x = 0; x < spec.alphabet_size; ++x) {
      std::vector<double> next(static_cast<std::size_t>(m));
      bool any = false;
      for (int c = 0; c < m; ++c) {
        const double p = prefix_prob[static_cast<std::size_t>(c)] *
                         step_prob(spec, c, len, len ? word.back() : 0, x);
        next[static_cast<std::size_t>(c)] = p;
        any = any || p > 0.0;
      }
      if (!any) continue;
      word.push_back(x);
      self(self, std::move(next));
      word.pop_back();
    }
  };
  recurse(recurse, running);
}

std::vector<int> to_alphabet(const Form& form) {
  std::vector<int> out;
  for (const Phone& p : form) {
    const auto idx = alphabet_index(p.symbol());
    if (!idx) {
      throw Error(ErrorCode::OutOfInventory,
                  "'" + p.symbol() + "' is not a synthetic phone");
    }
    out.push_back(*idx);
  }
  return out;
}

WordLoss word_loss(const std::vector<double>& probs) {
  WordLoss wl;
  wl.token_count = static_cast<int>(probs.size());
  for (double p : probs) {
    const double bits = -std::log2(p);
    wl.position_bits.push_back(bits);
    wl.total_bits += bits;
  }
  return wl;
}

Eigen::VectorXd dirichletish(std::mt19937_64& rng, int n, double concentration) {
  std::gamma_distribution<double> g(concentration, 1.0);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = g(rng) + 1e-6;
  return v / v.sum();
}

std::vector<Eigen::VectorXd> draw_centroids(int m, int dim, double scale,
                                            std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<Eigen::VectorXd> out;
  for (int c = 0; c < m; ++c) {
    Eigen::VectorXd v(dim);
    for (int i = 0; i < dim; ++i) v[i] = scale * g(rng);
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace

std::string phone_symbol(int i) {
  const auto& table = symbol_table();
  if (i < 0 || i >= static_cast<int>(table.size())) {
    throw Error(ErrorCode::InfeasibleSpec, "alphabet larger than 50 symbols");
  }
  return table[static_cast<std::size_t>(i)];
}

std::optional<int> alphabet_index(const std::string& symbol) {
  const auto& table = symbol_table();
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (table[i] == symbol) return static_cast<int>(i);
  }
  return std::nullopt;
}

void SyntheticSpec::validate() const {
  auto fail = [](const std::string& what) {
    throw Error(ErrorCode::InfeasibleSpec, what);
  };
  if (alphabet_size < 1 || alphabet_size > static_cast<int>(symbol_table().size())) {
    fail("alphabet size must lie in [1, 50]");
  }
  if (cluster_prior.empty()) fail("need at least one cluster");
  if (chains.size() != cluster_prior.size()) fail("one chain per cluster");
  double total = 0.0;
  for (double p : cluster_prior) {
    if (!(p >= 0.0 && p <= 1.0)) fail("cluster prior outside [0, 1]");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) fail("cluster prior does not sum to 1");
  if (min_length < 1 || max_length < min_length) fail("bad length bounds");
  for (const MarkovChain& ch : chains) {
    if (ch.initial.size() != alphabet_size || ch.stop.size() != alphabet_size ||
        ch.transition.rows() != alphabet_size ||
        ch.transition.cols() != alphabet_size) {
      fail("chain shape does not match alphabet");
    }
    if (!is_distribution(ch.initial)) fail("initial distribution not normalized");
    for (Eigen::Index r = 0; r < ch.transition.rows(); ++r) {
      if (!is_distribution(ch.transition.row(r).transpose())) {
        fail("transition row not normalized");
      }
    }
    if (!((ch.stop.array() >= 0.0).all() && (ch.stop.array() <= 1.0).all())) {
      fail("stop probability outside [0, 1]");
    }
  }
  if (!centroids.empty() && centroids.size() != cluster_prior.size()) {
    fail("one centroid per cluster");
  }
  for (const auto& c : centroids) {
    if (c.size() != meaning_dim()) fail("centroid dimensions differ");
  }
  if (noise_scale < 0.0) fail("negative noise scale");
  if (planted) {
    if (planted->cluster < 0 || planted->cluster >= n_clusters()) {
      fail("planted cluster out of range");
    }
    if (planted->prefix.empty() ||
        static_cast<int>(planted->prefix.size()) > max_length) {
      fail("planted prefix length outside [1, max_length]");
    }
    for (int x : planted->prefix) {
      if (x < 0 || x >= alphabet_size) fail("planted prefix symbol out of range");
    }
  }
}

nlohmann::json to_json(const SyntheticSpec& spec) {
  auto vec = [](const Eigen::VectorXd& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
  };
  nlohmann::json clusters = nlohmann::json::array();
  for (std::size_t c = 0; c < spec.chains.size(); ++c) {
    const auto& ch = spec.chains[c];
    std::vector<std::vector<double>> rows;
    for (Eigen::Index r = 0; r < ch.transition.rows(); ++r) {
      rows.push_back(vec(ch.transition.row(r).transpose()));
    }
    nlohmann::json jc = {{"prior", spec.cluster_prior[c]},
                         {"initial", vec(ch.initial)},
                         {"transition", rows},
                         {"stop", vec(ch.stop)}};
    if (!spec.centroids.empty()) jc["centroid"] = vec(spec.centroids[c]);
    clusters.push_back(jc);
  }
  nlohmann::json j = {{"language", spec.language},
                      {"alphabet_size", spec.alphabet_size},
                      {"min_length", spec.min_length},
                      {"max_length", spec.max_length},
                      {"noise_scale", spec.noise_scale},
                      {"pos_source", spec.pos_source == PosSource::Cluster ? "cluster" : "single"},
                      {"clusters", clusters}};
  if (spec.planted) {
    j["planted"] = {{"cluster", spec.planted->cluster},
                    {"prefix", spec.planted->prefix}};
  }
  return j;
}

SyntheticSpec spec_from_json(const nlohmann::json& j) {
  auto vec = [](const nlohmann::json& a) {
    const auto v = a.get<std::vector<double>>();
    return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(
        v.data(), static_cast<Eigen::Index>(v.size())));
  };
  try {
    SyntheticSpec spec;
    spec.language = j.value("language", spec.language);
    spec.alphabet_size = j.at("alphabet_size").get<int>();
    spec.min_length = j.value("min_length", 1);
    spec.max_length = j.at("max_length").get<int>();
    spec.noise_scale = j.value("noise_scale", 0.0);
    const std::string pos = j.value("pos_source", "cluster");
    if (pos != "cluster" && pos != "single") {
      throw Error(ErrorCode::ConfigError, "pos_source must be cluster or single");
    }
    spec.pos_source = pos == "cluster" ? PosSource::Cluster : PosSource::Single;
    for (const auto& jc : j.at("clusters")) {
      spec.cluster_prior.push_back(jc.at("prior").get<double>());
      MarkovChain ch;
      ch.initial = vec(jc.at("initial"));
      const auto& rows = jc.at("transition");
      ch.transition.resize(static_cast<Eigen::Index>(rows.size()), spec.alphabet_size);
      for (std::size_t r = 0; r < rows.size(); ++r) {
        const Eigen::VectorXd row = vec(rows[r]);
        if (row.size() != spec.alphabet_size) {
          throw Error(ErrorCode::InfeasibleSpec, "transition row has wrong size");
        }
        ch.transition.row(static_cast<Eigen::Index>(r)) = row.transpose();
      }
      ch.stop = vec(jc.at("stop"));
      spec.chains.push_back(std::move(ch));
      if (jc.contains("centroid")) spec.centroids.push_back(vec(jc.at("centroid")));
    }
    if (spec.centroids.empty() && j.contains("meaning_dim")) {
      spec.centroids = draw_centroids(spec.n_clusters(), j.at("meaning_dim").get<int>(),
                                      j.value("centroid_scale", 1.0),
                                      j.value("centroid_seed", std::uint64_t{0}));
    }
    if (j.contains("planted")) {
      spec.planted = PlantedAffix{j["planted"].at("cluster").get<int>(),
                                  j["planted"].at("prefix").get<std::vector<int>>()};
    }
    spec.validate();
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("synthetic spec: ") + e.what());
  }
}

GeneratedLexicon generate(const SyntheticSpec& spec, std::size_t n_words,
                          std::uint64_t seed) {
  spec.validate();
  if (n_words < 1) throw Error(ErrorCode::InvalidArgument, "n_words must be >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  const Eigen::VectorXd prior = Eigen::Map<const Eigen::VectorXd>(
      spec.cluster_prior.data(), static_cast<Eigen::Index>(spec.cluster_prior.size()));
  const int digits = static_cast<int>(std::to_string(n_words).size());

  GeneratedLexicon out;
  std::vector<Sign> signs;
  signs.reserve(n_words);
  for (std::size_t i = 0; i < n_words; ++i) {
    const int c = sample_index(prior, rng);
    Sign s;
    std::ostringstream lemma;
    lemma << 'w' << std::setw(digits) << std::setfill('0') << i;
    s.lemma = lemma.str();
    for (int x : sample_form(spec, c, rng)) s.form.emplace_back(phone_symbol(x));
    if (spec.meaning_dim() > 0) {
      s.meaning = spec.centroids[static_cast<std::size_t>(c)];
      for (Eigen::Index d = 0; d < s.meaning.size(); ++d) {
        s.meaning[d] += spec.noise_scale * noise(rng);
      }
    }
    s.pos = spec.pos_source == PosSource::Cluster ? "C" + std::to_string(c) : "X";
    s.concept_id = s.lemma;
    signs.push_back(std::move(s));
    out.clusters.push_back(c);
  }
  out.lexicon = make_lexicon(spec.language, std::move(signs));
  return out;
}

ExactEntropy exact_entropy(const SyntheticSpec& spec) {
  spec.validate();
  const auto m = static_cast<std::size_t>(spec.n_clusters());
  ExactEntropy out;
  out.cluster_total_bits.assign(m, 0.0);
  double mass = 0.0;
  enumerate(spec, [&](const std::vector<int>& word, const std::vector<double>& pc) {
    double p = 0.0;
    for (std::size_t c = 0; c < m; ++c) {
      p += spec.cluster_prior[c] * pc[c];
      if (pc[c] > 0.0) out.cluster_total_bits[c] -= pc[c] * std::log2(pc[c]);
    }
    if (p <= 0.0) return;
    mass += p;
    out.total_bits -= p * std::log2(p);
    out.expected_tokens += p * static_cast<double>(word.size() + 1);
  });
  if (std::abs(mass - 1.0) > 1e-6) {
    throw Error(ErrorCode::InfeasibleSpec, "enumerated mass " + std::to_string(mass));
  }
  out.bits_per_phone = out.total_bits / out.expected_tokens;
  double cond = 0.0;
  for (std::size_t c = 0; c < m; ++c) cond += spec.cluster_prior[c] * out.cluster_total_bits[c];
  out.conditional_bits_per_phone = cond / out.expected_tokens;
  return out;
}

double exact_mi(const SyntheticSpec& spec) {
  const ExactEntropy e = exact_entropy(spec);
  return e.bits_per_phone - e.conditional_bits_per_phone;
}

ExactLosses exact_losses(const SyntheticSpec& spec, const Lexicon& lexicon,
                         const std::vector<int>& clusters,
                         const std::vector<int>& sign_ids) {
  spec.validate();
  const auto m = static_cast<std::size_t>(spec.n_clusters());
  ExactLosses out;
  for (int id : sign_ids) {
    const auto idx = static_cast<std::size_t>(id);
    const std::vector<int> word = to_alphabet(lexicon.signs.at(idx).form);
    const int own = clusters.at(idx);
    std::vector<double> weight(spec.cluster_prior);
    std::vector<double> mix_probs, own_probs;
    for (std::size_t t = 0; t <= word.size(); ++t) {
      const int next = t < word.size() ? word[t] : kEndOfWord;
      const int last = t == 0 ? 0 : word[t - 1];
      const int len = static_cast<int>(t);
      double num = 0.0, den = 0.0;
      for (std::size_t c = 0; c < m; ++c) {
        const double step = step_prob(spec, static_cast<int>(c), len, last, next);
        num += weight[c] * step;
        den += weight[c];
        weight[c] *= step;
      }
      mix_probs.push_back(num / den);
      own_probs.push_back(step_prob(spec, own, len, last, next));
    }
    out.unconditional.sign_ids.push_back(id);
    out.unconditional.words.push_back(word_loss(mix_probs));
    out.conditional.sign_ids.push_back(id);
    out.conditional.words.push_back(word_loss(own_probs));
  }
  return out;
}

ExactLosses exact_reversed_losses(const SyntheticSpec& spec,
                                  const Lexicon& lexicon,
                                  const std::vector<int>& clusters,
                                  const std::vector<int>& sign_ids) {
  spec.validate();
  const auto m = static_cast<std::size_t>(spec.n_clusters());
  // Mass of every reversed prefix, per cluster, and of every full word.
  std::map<std::vector<int>, std::vector<double>> prefix_mass;
  std::map<std::vector<int>, std::vector<double>> word_mass;
  enumerate(spec, [&](const std::vector<int>& word, const std::vector<double>& pc) {
    std::vector<int> rev(word.rbegin(), word.rend());
    word_mass[rev] = pc;
    std::vector<int> key;
    auto add = [&](const std::vector<int>& k) {
      auto& slot = prefix_mass[k];
      if (slot.empty()) slot.assign(m, 0.0);
      for (std::size_t c = 0; c < m; ++c) slot[c] += pc[c];
    };
    add(key);
    for (int x : rev) {
      key.push_back(x);
      add(key);
    }
  });

  auto mixture = [&](const std::vector<double>& pc) {
    double p = 0.0;
    for (std::size_t c = 0; c < m; ++c) p += spec.cluster_prior[c] * pc[c];
    return p;
  };
  ExactLosses out;
  for (int id : sign_ids) {
    const auto idx = static_cast<std::size_t>(id);
    const std::vector<int> word = to_alphabet(lexicon.signs.at(idx).form);
    const std::vector<int> rev(word.rbegin(), word.rend());
    const auto own = static_cast<std::size_t>(clusters.at(idx));
    std::vector<double> mix_probs, own_probs;
    std::vector<int> key;
    for (std::size_t t = 0; t <= rev.size(); ++t) {
      const std::vector<double>& before = prefix_mass.at(key);
      const std::vector<double>* after = nullptr;
      if (t < rev.size()) {
        key.push_back(rev[t]);
        after = &prefix_mass.at(key);
      } else {
        after = &word_mass.at(rev);
      }
      mix_probs.push_back(mixture(*after) / mixture(before));
      own_probs.push_back((*after)[own] / before[own]);
    }
    out.unconditional.sign_ids.push_back(id);
    out.unconditional.words.push_back(word_loss(mix_probs));
    out.conditional.sign_ids.push_back(id);
    out.conditional.words.push_back(word_loss(own_probs));
  }
  return out;
}

void write_lexicon_files(const GeneratedLexicon& generated,
                         const std::filesystem::path& tsv_path,
                         const std::filesystem::path& vec_path) {
  const Lexicon& lex = generated.lexicon;
  std::ofstream tsv(tsv_path, std::ios::binary);
  if (!tsv) throw Error(ErrorCode::IoError, "cannot write " + tsv_path.string());
  tsv << "lemma\tipa\tpos\tconcept\n";
  for (const Sign& s : lex.signs) {
    tsv << s.lemma << '\t' << join_form(s.form) << '\t' << s.pos << '\t'
        << s.concept_id.value_or("") << '\n';
  }
  std::ofstream vec(vec_path, std::ios::binary);
  if (!vec) throw Error(ErrorCode::IoError, "cannot write " + vec_path.string());
  vec << lex.size() << ' ' << lex.meaning_dim() << '\n';
  vec << std::setprecision(17);
  for (const Sign& s : lex.signs) {
    vec << s.lemma;
    for (Eigen::Index d = 0; d < s.meaning.size(); ++d) vec << ' ' << s.meaning[d];
    vec << '\n';
  }
}

SyntheticSpec uniform_single_phone_spec() {
  SyntheticSpec spec;
  spec.language = "syn-uniform";
  spec.alphabet_size = 2;
  spec.cluster_prior = {1.0};
  MarkovChain ch;
  ch.initial = Eigen::VectorXd::Constant(2, 0.5);
  ch.transition = Eigen::MatrixXd::Constant(2, 2, 0.5);
  ch.stop = Eigen::VectorXd::Ones(2);
  spec.chains = {ch};
  spec.min_length = 1;
  spec.max_length = 1;
  return spec;
}

SyntheticSpec two_cluster_spec(int meaning_dim, double noise_scale) {
  SyntheticSpec spec;
  spec.language = "syn-two-cluster";
  spec.alphabet_size = 2;
  spec.cluster_prior = {0.5, 0.5};
  for (int c = 0; c < 2; ++c) {
    MarkovChain ch;
    ch.initial = Eigen::VectorXd::Zero(2);
    ch.initial[c] = 1.0;
    ch.transition = Eigen::MatrixXd::Constant(2, 2, 0.5);
    ch.stop = Eigen::VectorXd::Ones(2);
    spec.chains.push_back(ch);
    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(meaning_dim);
    centroid[0] = c == 0 ? -1.0 : 1.0;
    spec.centroids.push_back(centroid);
  }
  spec.min_length = 2;
  spec.max_length = 2;
  spec.noise_scale = noise_scale;
  return spec;
}

SyntheticSpec markov_mixture_spec(int n_clusters, int alphabet_size,
                                  int max_length, int meaning_dim,
                                  double noise_scale, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  SyntheticSpec spec;
  spec.language = "syn-mixture";
  spec.alphabet_size = alphabet_size;
  spec.min_length = 1;
  spec.max_length = max_length;
  spec.noise_scale = noise_scale;
  std::uniform_real_distribution<double> u(0.15, 0.45);
  for (int c = 0; c < n_clusters; ++c) {
    spec.cluster_prior.push_back(1.0 / n_clusters);
    MarkovChain ch;
    ch.initial = dirichletish(rng, alphabet_size, 0.5);
    ch.transition.resize(alphabet_size, alphabet_size);
    for (int r = 0; r < alphabet_size; ++r) {
      ch.transition.row(r) = dirichletish(rng, alphabet_size, 0.7).transpose();
    }
    ch.stop.resize(alphabet_size);
    for (int x = 0; x < alphabet_size; ++x) ch.stop[x] = u(rng);
    spec.chains.push_back(std::move(ch));
  }
  spec.centroids = draw_centroids(n_clusters, meaning_dim, 2.0, mix64(seed));
  return spec;
}

SyntheticSpec null_spec(int alphabet_size, int meaning_dim, std::uint64_t seed) {
  SyntheticSpec spec = markov_mixture_spec(1, alphabet_size, 5, meaning_dim, 1.0, seed);
  spec.language = "syn-null";
  return spec;
}

SyntheticSpec planted_prefix_spec(int n_clusters, int alphabet_size,
                                  std::vector<int> prefix, int meaning_dim,
                                  std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  SyntheticSpec spec;
  spec.language = "syn-planted";
  spec.alphabet_size = alphabet_size;
  spec.min_length = static_cast<int>(prefix.size()) + 1;
  spec.max_length = static_cast<int>(prefix.size()) + 3;
  spec.noise_scale = 0.1;
  MarkovChain shared;
  shared.initial = Eigen::VectorXd::Constant(alphabet_size, 1.0 / alphabet_size);
  shared.transition = Eigen::MatrixXd::Constant(alphabet_size, alphabet_size,
                                                1.0 / alphabet_size);
  shared.stop = Eigen::VectorXd::Constant(alphabet_size, 0.5);
  for (int c = 0; c < n_clusters; ++c) {
    spec.cluster_prior.push_back(1.0 / n_clusters);
    spec.chains.push_back(shared);
  }
  spec.centroids = draw_centroids(n_clusters, meaning_dim, 2.0, mix64(seed));
  spec.planted = PlantedAffix{0, std::move(prefix)};
  return spec;
}

}  // namespace signform::synth
