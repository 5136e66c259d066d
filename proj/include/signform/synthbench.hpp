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

#ifndef SIGNFORM_SYNTHBENCH_HPP_
#define SIGNFORM_SYNTHBENCH_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "signform/lexicon.hpp"
#include "signform/loss.hpp"

namespace signform::synth {

// First-order Markov chain over the alphabet with a per-phone stopping
// probability applied once the word has reached the minimum length.
struct MarkovChain {
  Eigen::VectorXd initial;     // alphabet
  Eigen::MatrixXd transition;  // alphabet x alphabet, rows sum to 1
  Eigen::VectorXd stop;        // alphabet
};

struct PlantedAffix {
  int cluster = 0;
  std::vector<int> prefix;  // alphabet indices
};

enum class PosSource { Cluster, Single };

// Generative description of an artificial lexicon. Words of cluster c are
// drawn from chains[c], truncated at max_length; meanings are the cluster's
// centroid plus isotropic Gaussian noise.
struct SyntheticSpec {
  std::string language = "syn";
  int alphabet_size = 2;
  std::vector<double> cluster_prior;
  std::vector<MarkovChain> chains;
  int min_length = 1;
  int max_length = 1;
  std::vector<Eigen::VectorXd> centroids;
  double noise_scale = 0.0;
  std::optional<PlantedAffix> planted;
  PosSource pos_source = PosSource::Cluster;

  int n_clusters() const { return static_cast<int>(cluster_prior.size()); }
  int meaning_dim() const {
    return centroids.empty() ? 0 : static_cast<int>(centroids.front().size());
  }
  void validate() const;
};

nlohmann::json to_json(const SyntheticSpec& spec);
// Accepts explicit centroids or {"centroid_scale", "centroid_seed",
// "meaning_dim"} to draw them.
SyntheticSpec spec_from_json(const nlohmann::json& j);

// Symbol used for alphabet index i ("a".."z", then Greek letters).
std::string phone_symbol(int i);
std::optional<int> alphabet_index(const std::string& symbol);

struct GeneratedLexicon {
  Lexicon lexicon;
  std::vector<int> clusters;  // latent cluster per sign
};

GeneratedLexicon generate(const SyntheticSpec& spec, std::size_t n_words,
                          std::uint64_t seed);

struct ExactEntropy {
  double total_bits = 0.0;       // H(W) per word
  double expected_tokens = 0.0;  // E[|w| + 1]
  double bits_per_phone = 0.0;
  std::vector<double> cluster_total_bits;  // H(W | cluster = c) per word
  double conditional_bits_per_phone = 0.0;  // sum_c prior H(W|c) / E[tokens]
};

constexpr double kMaxEnumeration = 1e7;

ExactEntropy exact_entropy(const SyntheticSpec& spec);
double exact_mi(const SyntheticSpec& spec);

// Per-position bits of the generating distribution: `unconditional` uses
// the cluster mixture, `conditional` the word's own cluster.
struct ExactLosses {
  PerWordLoss unconditional;
  PerWordLoss conditional;
};

ExactLosses exact_losses(const SyntheticSpec& spec, const Lexicon& lexicon,
                         const std::vector<int>& clusters,
                         const std::vector<int>& sign_ids);

// The same pair for the reversed-form distribution, i.e. the distribution
// of reversed words. Per-position bits refer to the reversed order.
ExactLosses exact_reversed_losses(const SyntheticSpec& spec,
                                  const Lexicon& lexicon,
                                  const std::vector<int>& clusters,
                                  const std::vector<int>& sign_ids);

// Writes <stem>.tsv (lemma, ipa, pos, concept) and <stem>.vec (word-vector
// text format) so the main pipeline can consume a synthetic language.
void write_lexicon_files(const GeneratedLexicon& generated,
                         const std::filesystem::path& tsv_path,
                         const std::filesystem::path& vec_path);

// Ready-made specs used across tests and the validation battery.
SyntheticSpec uniform_single_phone_spec();
// Two equiprobable clusters, words of exactly two phones over {a, b}; the
// cluster fixes the first phone, the second is uniform.
SyntheticSpec two_cluster_spec(int meaning_dim = 4, double noise_scale = 0.1);
// One cluster: forms and meanings independent.
SyntheticSpec null_spec(int alphabet_size = 6, int meaning_dim = 4,
                        std::uint64_t seed = 1);
// Random chains per cluster, drawn from a seeded generator.
SyntheticSpec markov_mixture_spec(int n_clusters, int alphabet_size,
                                  int max_length, int meaning_dim,
                                  double noise_scale, std::uint64_t seed);
// All clusters share one chain except that `planted.cluster` always starts
// with the planted prefix.
SyntheticSpec planted_prefix_spec(int n_clusters, int alphabet_size,
                                  std::vector<int> prefix, int meaning_dim,
                                  std::uint64_t seed);

}  // namespace signform::synth

#endif  // SIGNFORM_SYNTHBENCH_HPP_
