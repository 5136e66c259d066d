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

#ifndef SIGNFORM_PHONOLM_HPP_
#define SIGNFORM_PHONOLM_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "signform/lexicon.hpp"
#include "signform/loss.hpp"
#include "signform/semspace.hpp"

namespace signform {

enum class Conditioning { Nothing, Meaning, Class, MeaningAndClass };

std::string_view to_string(Conditioning c) noexcept;
Conditioning conditioning_from_string(std::string_view s);
bool uses_meaning(Conditioning c) noexcept;
bool uses_class(Conditioning c) noexcept;

// Which recurrent state of the LSTM receives the conditioning vector.
enum class H0Target { Hidden, Cell, Both };

struct LMConfig {
  int layers = 1;
  int hidden_size = 64;
  int phone_embed_size = 16;
  double dropout = 0.0;
  int pca_d = 8;
  Conditioning condition_on = Conditioning::Nothing;
  H0Target h0_target = H0Target::Both;
  // Feed the conditioning vector to every layer instead of the first only.
  bool h0_all_layers = false;

  void validate() const;
};

nlohmann::json to_json(const LMConfig& cfg);
LMConfig lm_config_from_json(const nlohmann::json& j);

struct OptimizerSettings {
  double learning_rate = 1e-2;
  int batch_size = 64;
  int patience = 10;
  int max_epochs = 200;
  double clip_norm = 5.0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

nlohmann::json to_json(const OptimizerSettings& opt);
OptimizerSettings optimizer_from_json(const nlohmann::json& j);

// Named dense tensors laid out back to back in one buffer, so optimizers and
// gradient checks can treat the whole model as a flat vector.
class ParameterSet {
 public:
  struct Tensor {
    std::string name;
    int rows = 0;
    int cols = 0;
    std::size_t offset = 0;
    std::size_t size() const {
      return static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
    }
  };

  int add(std::string name, int rows, int cols);

  Eigen::Map<Eigen::MatrixXd> matrix(int id);
  Eigen::Map<const Eigen::MatrixXd> matrix(int id) const;
  Eigen::Map<Eigen::VectorXd> flat();
  Eigen::Map<const Eigen::VectorXd> flat() const;

  const std::vector<Tensor>& tensors() const noexcept { return tensors_; }
  std::optional<int> find(std::string_view name) const;
  std::size_t size() const noexcept { return values_.size(); }
  void set_zero();
  bool all_finite() const;
  // FNV-1a over the raw bytes of every value.
  std::uint64_t hash() const;
  // Same layout, all zeros.
  ParameterSet zeros_like() const;

 private:
  std::vector<Tensor> tensors_;
  std::vector<double> values_;
};

// One word ready for the model: phone indices (no EOS), its PCA-compressed
// meaning and its POS class index. Unused conditioning fields may be empty.
struct Example {
  std::vector<int> phones;
  Eigen::VectorXd meaning;
  int class_id = -1;
};

// LSTM language model over phone indices. Index 0 (end of string) is both
// the first input symbol and the final prediction target.
class PhoneLM {
 public:
  PhoneLM(LMConfig config, int vocab_size, int n_classes);

  // Uniform in +-1/sqrt(fan_in) for every matrix, forget-gate bias 1.
  void initialize(std::uint64_t seed);

  const LMConfig& config() const noexcept { return config_; }
  int vocab_size() const noexcept { return vocab_; }
  int n_classes() const noexcept { return n_classes_; }
  ParameterSet& parameters() noexcept { return params_; }
  const ParameterSet& parameters() const noexcept { return params_; }

  struct TensorIds {
    int embed = -1;
    std::vector<int> wx, wh, bias;
    int out_w = -1, out_b = -1;
    int cond_w = -1, cond_b = -1;
    int class_embed = -1;
  };
  const TensorIds& ids() const noexcept { return ids_; }

 private:
  LMConfig config_;
  int vocab_ = 0;
  int n_classes_ = 0;
  ParameterSet params_;
  TensorIds ids_;
};

// Initial recurrent state derived from the conditioning inputs. Meaning must
// be given iff the model conditions on meaning, class iff on class.
Eigen::VectorXd condition_init(const PhoneLM& model,
                               const Eigen::VectorXd* meaning,
                               std::optional<int> class_id);

// log2 Pr(w_i | w_<i, conditioning) for every phone and the final EOS.
std::vector<double> log_prob(const PhoneLM& model, const Example& word);

// Full predictive distributions, one column per position (vocab x |w|+1),
// in log2 units.
Eigen::MatrixXd next_log2_distributions(const PhoneLM& model,
                                        const Example& word);

PerWordLoss evaluate(const PhoneLM& model, std::span<const Example> words,
                     std::span<const int> sign_ids = {});

// Total negative log-likelihood in nats over the words (no dropout).
double total_nll(const PhoneLM& model, std::span<const Example> words);

// Gradient of total_nll with respect to every parameter.
ParameterSet nll_gradient(const PhoneLM& model,
                          std::span<const Example> words);

struct TrainResult {
  PhoneLM model;
  // Entry 0 is the untrained model; entry e is after epoch e.
  std::vector<double> train_bits_per_phone;
  std::vector<double> valid_bits_per_phone;
  int best_epoch = 0;
  double best_valid_bits_per_phone = 0.0;
};

// Mini-batch Adam on the mean per-token cross-entropy with early stopping on
// validation bits per phone. Deterministic given the seed; throws
// TrainingDiverged on a non-finite loss.
TrainResult train(const LMConfig& config, int vocab_size, int n_classes,
                  std::span<const Example> train_words,
                  std::span<const Example> valid_words,
                  const OptimizerSettings& optimizer, std::uint64_t seed);

// Micro-averaged bits per token.
double bits_per_phone(const PerWordLoss& losses);

// Converts signs to model inputs. `pca` may be null when the config does not
// use meaning; classes are resolved against the lexicon's class list.
std::vector<Example> make_examples(const Lexicon& lexicon,
                                   std::span<const int> sign_ids,
                                   const PCAModel* pca);

struct ModelArchive {
  PhoneLM model;
  std::vector<std::string> inventory;
  std::vector<std::string> classes;
  std::optional<PCAModel> pca;
};

constexpr int kArchiveVersion = 1;

nlohmann::json to_json(const ModelArchive& archive);
ModelArchive archive_from_json(const nlohmann::json& j);
void save_archive(const ModelArchive& archive,
                  const std::filesystem::path& path);
ModelArchive load_archive(const std::filesystem::path& path);

}  // namespace signform

#endif  // SIGNFORM_PHONOLM_HPP_
