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

#ifndef SIGNFORM_HYPEROPT_HPP_
#define SIGNFORM_HYPEROPT_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace signform {

enum class DimType { Integer, Continuous, LogContinuous };

struct Dimension {
  std::string name;
  DimType type = DimType::Continuous;
  double lower = 0.0;
  double upper = 1.0;
};

// Box of hyperparameters, searched on the unit cube. Integer dimensions map
// each value to an equal-width cell of the unit interval.
struct SearchSpace {
  std::vector<Dimension> dims;

  // layers 1..3, hidden_size 32..512, pca_d 2..300, dropout 0..0.5.
  static SearchSpace lm_default();

  int size() const noexcept { return static_cast<int>(dims.size()); }
  void validate() const;
  std::optional<int> index_of(const std::string& name) const;
  Eigen::VectorXd to_native(const Eigen::VectorXd& unit) const;
  Eigen::VectorXd to_unit(const Eigen::VectorXd& native) const;
  // Rounds integer coordinates to their cell centre and clamps to [0, 1].
  Eigen::VectorXd snap(const Eigen::VectorXd& unit) const;
};

nlohmann::json to_json(const SearchSpace& space);
SearchSpace search_space_from_json(const nlohmann::json& j);

enum class TrialStatus { Ok, Diverged };

struct Trial {
  Eigen::VectorXd unit;
  Eigen::VectorXd native;
  double objective = 0.0;  // penalty value when diverged
  TrialStatus status = TrialStatus::Ok;
};

struct GPHyperparameters {
  Eigen::VectorXd length_scales;
  double signal_variance = 1.0;
  double noise_variance = 1e-6;
};

struct GPOptions {
  // Fixed hyperparameters skip marginal-likelihood fitting.
  std::optional<GPHyperparameters> fixed;
  int restarts = 4;
  int iterations = 60;
  double min_noise = 1e-6;
  // Standardize targets before fitting (mean 0, unit variance).
  bool normalize = true;
};

// Zero-mean GP with a squared-exponential ARD kernel on the unit cube.
class GPPosterior {
 public:
  struct Prediction {
    double mean = 0.0;
    double variance = 0.0;
  };

  Prediction predict(const Eigen::VectorXd& x) const;
  const GPHyperparameters& hyperparameters() const noexcept { return hyper_; }
  double log_marginal_likelihood() const noexcept { return lml_; }
  int n_observations() const noexcept { return static_cast<int>(x_.cols()); }

 private:
  friend GPPosterior gp_fit(std::span<const Eigen::VectorXd>, std::span<const double>,
                            const GPOptions&, std::uint64_t, int);
  GPHyperparameters hyper_;
  Eigen::MatrixXd x_;  // dims x n
  Eigen::VectorXd alpha_;
  Eigen::MatrixXd chol_l_;
  double y_mean_ = 0.0;
  double y_scale_ = 1.0;
  double lml_ = 0.0;
};

double se_kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                 const GPHyperparameters& h);

// With no observations the posterior is the prior. Fitting maximizes the
// log marginal likelihood by multi-start gradient ascent in log space; a
// kernel matrix that stays singular after jitter escalation throws
// SingularKernel.
GPPosterior gp_fit(std::span<const Eigen::VectorXd> x, std::span<const double> y,
                   const GPOptions& options = {}, std::uint64_t seed = 0,
                   int dims = -1);

// Minimization convention: improvement = best - f.
double expected_improvement(double mean, double sd, double best);
double expected_improvement(const GPPosterior& gp, double best, const Eigen::VectorXd& x);

struct ProposalOptions {
  int n_init = 5;
  int n_candidates = 4096;
  int n_refine = 5;
  GPOptions gp;
  // Receives the scored (snapped) random candidates when set.
  std::vector<Eigen::VectorXd>* candidates_out = nullptr;
};

// Unit-cube point for the next trial; snapped. The first n_init proposals
// follow a randomly shifted Halton sequence, later ones maximize EI over
// random candidates refined by pattern search.
Eigen::VectorXd propose_next(std::span<const Trial> trials, const SearchSpace& space,
                             std::uint64_t seed, const ProposalOptions& options = {});

enum class SearchMode { Bayesian, Random };

struct SearchOptions {
  SearchMode mode = SearchMode::Bayesian;
  ProposalOptions proposal;
  // Diverged trials are recorded at worst-ok + penalty_margin (or at
  // penalty_margin when nothing has succeeded yet).
  double penalty_margin = 1.0;
  // Appended to after every trial when set.
  std::optional<std::filesystem::path> log_path;
  // Called after every new trial.
  std::function<void(const Trial&)> on_trial;
};

struct SearchResult {
  Trial best;
  std::vector<Trial> history;
};

// The objective returns the value to minimize and throws
// Error(TrainingDiverged) for a failed trial. `resume` trials count against
// the budget and are not re-evaluated.
using Objective = std::function<double(const Eigen::VectorXd& native)>;
SearchResult run_search(const Objective& objective, const SearchSpace& space, int budget,
                        std::uint64_t seed, const SearchOptions& options = {},
                        std::vector<Trial> resume = {});

nlohmann::json to_json(const Trial& trial, const SearchSpace& space);
Trial trial_from_json(const nlohmann::json& j, const SearchSpace& space);
// One JSON object per line; a missing file yields no trials.
std::vector<Trial> read_search_log(const std::filesystem::path& path, const SearchSpace& space);

}  // namespace signform

#endif  // SIGNFORM_HYPEROPT_HPP_
