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

#include "signform/hyperopt.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>

#include "signform/error.hpp"
#include "signform/rng.hpp"

namespace signform {

namespace {

constexpr double kMinLengthScale = 0.01, kMaxLengthScale = 10.0;
constexpr double kMinSignal = 0.05, kMaxSignal = 20.0;
constexpr double kMaxNoise = 1.0;

double uniform_unit(SplitMix64& rng) { return rng.uniform(); }

Eigen::VectorXd random_point(int dims, SplitMix64& rng) {
  Eigen::VectorXd x(dims);
  for (int d = 0; d < dims; ++d) x[d] = uniform_unit(rng);
  return x;
}

double radical_inverse(std::uint64_t index, int base) {
  double result = 0.0, f = 1.0 / base;
  while (index > 0) {
    result += f * static_cast<double>(index % static_cast<std::uint64_t>(base));
    index /= static_cast<std::uint64_t>(base);
    f /= base;
  }
  return result;
}

constexpr int kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47};

Eigen::VectorXd halton_point(std::uint64_t index, int dims, std::uint64_t seed) {
  if (dims > static_cast<int>(std::size(kPrimes))) {
    throw Error(ErrorCode::InvalidArgument, "too many search dimensions");
  }
  SplitMix64 rng(derive_seed(seed, {0x4a17u}));
  Eigen::VectorXd x(dims);
  for (int d = 0; d < dims; ++d) {
    const double shift = rng.uniform();
    x[d] = std::fmod(radical_inverse(index + 1, kPrimes[d]) + shift, 1.0);
  }
  return x;
}

// Kernel matrix, its Cholesky factor and the log marginal likelihood with
// its gradient with respect to (log lengths..., log signal, log noise).
struct Evaluation {
  Eigen::LLT<Eigen::MatrixXd> llt;
  Eigen::VectorXd alpha;
  double lml = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd grad;
  bool ok = false;
};

GPHyperparameters unpack(const Eigen::VectorXd& theta, int dims) {
  GPHyperparameters h;
  h.length_scales = theta.head(dims).array().exp();
  h.signal_variance = std::exp(theta[dims]);
  h.noise_variance = std::exp(theta[dims + 1]);
  return h;
}

Eigen::VectorXd pack(const GPHyperparameters& h) {
  const auto dims = h.length_scales.size();
  Eigen::VectorXd theta(dims + 2);
  theta.head(dims) = h.length_scales.array().log();
  theta[dims] = std::log(h.signal_variance);
  theta[dims + 1] = std::log(h.noise_variance);
  return theta;
}

Eigen::LLT<Eigen::MatrixXd> factorize(Eigen::MatrixXd k, double scale) {
  Eigen::LLT<Eigen::MatrixXd> llt(k);
  double jitter = 1e-10 * scale;
  while (llt.info() != Eigen::Success) {
    if (jitter > 1e-2 * scale) {
      throw Error(ErrorCode::SingularKernel, "kernel matrix not positive definite");
    }
    k.diagonal().array() += jitter;
    llt.compute(k);
    jitter *= 10.0;
  }
  return llt;
}

Evaluation evaluate_lml(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                        const GPHyperparameters& h, bool with_gradient) {
  const auto n = x.cols();
  const auto dims = x.rows();
  Eigen::MatrixXd kse(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      kse(i, j) = kse(j, i) = se_kernel(x.col(i), x.col(j), h);
    }
  }
  Eigen::MatrixXd k = kse;
  k.diagonal().array() += h.noise_variance;
  Evaluation e;
  e.llt = factorize(k, h.signal_variance);
  e.alpha = e.llt.solve(y);
  const Eigen::MatrixXd& l = e.llt.matrixLLT();
  e.lml = -0.5 * y.dot(e.alpha) - l.diagonal().array().log().sum() -
          0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
  e.ok = std::isfinite(e.lml);
  if (!with_gradient || !e.ok) return e;
  const Eigen::MatrixXd inner =
      e.alpha * e.alpha.transpose() - e.llt.solve(Eigen::MatrixXd::Identity(n, n));
  e.grad.resize(dims + 2);
  for (Eigen::Index d = 0; d < dims; ++d) {
    const double l2 = h.length_scales[d] * h.length_scales[d];
    double g = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        const double diff = x(d, i) - x(d, j);
        g += inner(i, j) * kse(i, j) * diff * diff / l2;
      }
    }
    e.grad[d] = 0.5 * g;
  }
  e.grad[dims] = 0.5 * (inner.array() * kse.array()).sum();
  e.grad[dims + 1] = 0.5 * h.noise_variance * inner.trace();
  return e;
}

Eigen::VectorXd clamp_theta(Eigen::VectorXd theta, int dims, double min_noise) {
  for (int d = 0; d < dims; ++d) {
    theta[d] = std::clamp(theta[d], std::log(kMinLengthScale), std::log(kMaxLengthScale));
  }
  theta[dims] = std::clamp(theta[dims], std::log(kMinSignal), std::log(kMaxSignal));
  theta[dims + 1] = std::clamp(theta[dims + 1], std::log(min_noise), std::log(kMaxNoise));
  return theta;
}

// Gradient ascent with Adam steps in log-parameter space.
Eigen::VectorXd ascend(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, Eigen::VectorXd theta,
                       int dims, const GPOptions& options, double& best_lml) {
  theta = clamp_theta(theta, dims, options.min_noise);
  Eigen::VectorXd best = theta;
  best_lml = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd m = Eigen::VectorXd::Zero(theta.size());
  Eigen::VectorXd v = Eigen::VectorXd::Zero(theta.size());
  constexpr double kRate = 0.1, kB1 = 0.9, kB2 = 0.999;
  for (int it = 1; it <= options.iterations; ++it) {
    Evaluation e;
    try {
      e = evaluate_lml(x, y, unpack(theta, dims), true);
    } catch (const Error&) {
      break;
    }
    if (!e.ok || !e.grad.allFinite()) break;
    if (e.lml > best_lml) {
      best_lml = e.lml;
      best = theta;
    }
    m = kB1 * m + (1 - kB1) * e.grad;
    v = kB2 * v + (1 - kB2) * e.grad.cwiseAbs2();
    const Eigen::VectorXd mh = m / (1 - std::pow(kB1, it));
    const Eigen::VectorXd vh = v / (1 - std::pow(kB2, it));
    theta = clamp_theta(theta + kRate * (mh.array() / (vh.array().sqrt() + 1e-8)).matrix(), dims,
                        options.min_noise);
  }
  return best;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }
double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

}  // namespace

SearchSpace SearchSpace::lm_default() {
  return SearchSpace{{{"layers", DimType::Integer, 1, 3},
                      {"hidden_size", DimType::Integer, 32, 512},
                      {"pca_d", DimType::Integer, 2, 300},
                      {"dropout", DimType::Continuous, 0.0, 0.5}}};
}

void SearchSpace::validate() const {
  if (dims.empty()) throw Error(ErrorCode::ConfigError, "empty search space");
  if (dims.size() > std::size(kPrimes)) throw Error(ErrorCode::ConfigError, "too many dimensions");
  for (const Dimension& d : dims) {
    if (!std::isfinite(d.lower) || !std::isfinite(d.upper) || !(d.lower < d.upper)) {
      throw Error(ErrorCode::ConfigError, "dimension '" + d.name + "' needs finite lower < upper");
    }
    if (d.type == DimType::LogContinuous && d.lower <= 0.0) {
      throw Error(ErrorCode::ConfigError, "log dimension '" + d.name + "' must be positive");
    }
    if (d.type == DimType::Integer &&
        (d.lower != std::round(d.lower) || d.upper != std::round(d.upper))) {
      throw Error(ErrorCode::ConfigError, "integer dimension '" + d.name + "' needs integer bounds");
    }
  }
}

std::optional<int> SearchSpace::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (dims[i].name == name) return static_cast<int>(i);
  }
  return std::nullopt;
}

Eigen::VectorXd SearchSpace::to_native(const Eigen::VectorXd& unit) const {
  Eigen::VectorXd out(size());
  for (int i = 0; i < size(); ++i) {
    const Dimension& d = dims[static_cast<std::size_t>(i)];
    const double u = std::clamp(unit[i], 0.0, 1.0);
    switch (d.type) {
      case DimType::Integer:
        out[i] = std::clamp(std::floor(d.lower + u * (d.upper - d.lower + 1.0)), d.lower, d.upper);
        break;
      case DimType::Continuous:
        out[i] = d.lower + u * (d.upper - d.lower);
        break;
      case DimType::LogContinuous:
        out[i] = std::exp(std::log(d.lower) + u * (std::log(d.upper) - std::log(d.lower)));
        break;
    }
  }
  return out;
}

Eigen::VectorXd SearchSpace::to_unit(const Eigen::VectorXd& native) const {
  Eigen::VectorXd out(size());
  for (int i = 0; i < size(); ++i) {
    const Dimension& d = dims[static_cast<std::size_t>(i)];
    const double v = std::clamp(native[i], d.lower, d.upper);
    switch (d.type) {
      case DimType::Integer:
        out[i] = (std::round(v) - d.lower + 0.5) / (d.upper - d.lower + 1.0);
        break;
      case DimType::Continuous:
        out[i] = (v - d.lower) / (d.upper - d.lower);
        break;
      case DimType::LogContinuous:
        out[i] = (std::log(v) - std::log(d.lower)) / (std::log(d.upper) - std::log(d.lower));
        break;
    }
  }
  return out;
}

Eigen::VectorXd SearchSpace::snap(const Eigen::VectorXd& unit) const {
  Eigen::VectorXd out = unit.cwiseMax(0.0).cwiseMin(1.0);
  const Eigen::VectorXd native = to_native(out);
  const Eigen::VectorXd back = to_unit(native);
  for (int i = 0; i < size(); ++i) {
    if (dims[static_cast<std::size_t>(i)].type == DimType::Integer) out[i] = back[i];
  }
  return out;
}

nlohmann::json to_json(const SearchSpace& space) {
  nlohmann::json dims = nlohmann::json::array();
  for (const Dimension& d : space.dims) {
    const char* type = d.type == DimType::Integer      ? "integer"
                       : d.type == DimType::Continuous ? "continuous"
                                                       : "log-continuous";
    dims.push_back({{"name", d.name}, {"type", type}, {"lower", d.lower}, {"upper", d.upper}});
  }
  return dims;
}

SearchSpace search_space_from_json(const nlohmann::json& j) {
  SearchSpace space;
  try {
    for (const auto& jd : j) {
      Dimension d;
      d.name = jd.at("name").get<std::string>();
      const std::string type = jd.at("type").get<std::string>();
      if (type == "integer") {
        d.type = DimType::Integer;
      } else if (type == "continuous") {
        d.type = DimType::Continuous;
      } else if (type == "log-continuous") {
        d.type = DimType::LogContinuous;
      } else {
        throw Error(ErrorCode::ConfigError, "unknown dimension type '" + type + "'");
      }
      d.lower = jd.at("lower").get<double>();
      d.upper = jd.at("upper").get<double>();
      space.dims.push_back(std::move(d));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("search space: ") + e.what());
  }
  space.validate();
  return space;
}

double se_kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const GPHyperparameters& h) {
  const double r2 = ((a - b).array() / h.length_scales.array()).square().sum();
  return h.signal_variance * std::exp(-0.5 * r2);
}

GPPosterior gp_fit(std::span<const Eigen::VectorXd> x, std::span<const double> y,
                   const GPOptions& options, std::uint64_t seed, int dims) {
  if (x.size() != y.size()) throw Error(ErrorCode::DimensionMismatch, "x and y differ in length");
  if (dims < 0) {
    if (x.empty()) throw Error(ErrorCode::InvalidArgument, "dimension unknown without data");
    dims = static_cast<int>(x.front().size());
  }
  const auto n = static_cast<Eigen::Index>(x.size());
  GPPosterior post;
  post.x_.resize(dims, n);
  Eigen::VectorXd yv(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (x[static_cast<std::size_t>(i)].size() != dims) {
      throw Error(ErrorCode::DimensionMismatch, "point of wrong dimension");
    }
    post.x_.col(i) = x[static_cast<std::size_t>(i)];
    yv[i] = y[static_cast<std::size_t>(i)];
  }
  if (options.normalize && n > 0) {
    post.y_mean_ = yv.mean();
    const double sd = std::sqrt((yv.array() - post.y_mean_).square().mean());
    post.y_scale_ = sd > 1e-12 ? sd : 1.0;
  }
  const Eigen::VectorXd yn = (yv.array() - post.y_mean_) / post.y_scale_;

  if (options.fixed) {
    post.hyper_ = *options.fixed;
    if (post.hyper_.length_scales.size() != dims) {
      throw Error(ErrorCode::DimensionMismatch, "length scales do not match the dimension");
    }
  } else {
    GPHyperparameters start;
    start.length_scales = Eigen::VectorXd::Constant(dims, 0.3);
    start.signal_variance = 1.0;
    start.noise_variance = std::max(options.min_noise, 1e-4);
    post.hyper_ = start;
    if (n >= 2) {
      SplitMix64 rng(derive_seed(seed, {0x6b1u}));
      double best_lml = -std::numeric_limits<double>::infinity();
      for (int r = 0; r < std::max(1, options.restarts); ++r) {
        Eigen::VectorXd theta = pack(start);
        if (r > 0) {
          for (int d = 0; d < dims; ++d) {
            theta[d] = std::log(0.05) + rng.uniform() * (std::log(2.0) - std::log(0.05));
          }
          theta[dims] = std::log(0.3) + rng.uniform() * (std::log(3.0) - std::log(0.3));
          theta[dims + 1] = std::log(options.min_noise) +
                            rng.uniform() * (std::log(0.1) - std::log(options.min_noise));
        }
        double lml = 0.0;
        const Eigen::VectorXd found = ascend(post.x_, yn, theta, dims, options, lml);
        if (lml > best_lml) {
          best_lml = lml;
          post.hyper_ = unpack(found, dims);
        }
      }
    }
  }
  if (n > 0) {
    const Evaluation e = evaluate_lml(post.x_, yn, post.hyper_, false);
    post.alpha_ = e.alpha;
    post.chol_l_ = e.llt.matrixL();
    post.lml_ = e.lml;
  }
  return post;
}

GPPosterior::Prediction GPPosterior::predict(const Eigen::VectorXd& x) const {
  Prediction p;
  const auto n = x_.cols();
  if (n == 0) {
    p.mean = y_mean_;
    p.variance = hyper_.signal_variance * y_scale_ * y_scale_;
    return p;
  }
  Eigen::VectorXd k(n);
  for (Eigen::Index i = 0; i < n; ++i) k[i] = se_kernel(x, x_.col(i), hyper_);
  p.mean = y_mean_ + y_scale_ * k.dot(alpha_);
  const Eigen::VectorXd v = chol_l_.triangularView<Eigen::Lower>().solve(k);
  p.variance = std::max(0.0, hyper_.signal_variance - v.squaredNorm()) * y_scale_ * y_scale_;
  return p;
}

double expected_improvement(double mean, double sd, double best) {
  if (!(sd > 1e-12)) return std::max(best - mean, 0.0);
  const double z = (best - mean) / sd;
  return std::max(0.0, sd * (z * normal_cdf(z) + normal_pdf(z)));
}

double expected_improvement(const GPPosterior& gp, double best, const Eigen::VectorXd& x) {
  const auto p = gp.predict(x);
  return expected_improvement(p.mean, std::sqrt(p.variance), best);
}

Eigen::VectorXd propose_next(std::span<const Trial> trials, const SearchSpace& space,
                             std::uint64_t seed, const ProposalOptions& options) {
  space.validate();
  const int dims = space.size();
  const auto step = static_cast<std::uint64_t>(trials.size());
  bool any_ok = false;
  double best = std::numeric_limits<double>::infinity();
  for (const Trial& t : trials) {
    if (t.status == TrialStatus::Ok) {
      any_ok = true;
      best = std::min(best, t.objective);
    }
  }
  if (static_cast<int>(trials.size()) < options.n_init || !any_ok) {
    return space.snap(halton_point(step, dims, seed));
  }

  std::vector<Eigen::VectorXd> xs;
  std::vector<double> ys;
  for (const Trial& t : trials) {
    xs.push_back(t.unit);
    ys.push_back(t.objective);
  }
  const GPPosterior gp = gp_fit(xs, ys, options.gp, derive_seed(seed, {step, 1}), dims);
  auto score = [&](const Eigen::VectorXd& u) { return expected_improvement(gp, best, u); };

  SplitMix64 rng(derive_seed(seed, {step, 2}));
  std::vector<std::pair<double, Eigen::VectorXd>> scored;
  scored.reserve(static_cast<std::size_t>(options.n_candidates));
  for (int c = 0; c < options.n_candidates; ++c) {
    Eigen::VectorXd u = space.snap(random_point(dims, rng));
    if (options.candidates_out) options.candidates_out->push_back(u);
    scored.emplace_back(score(u), std::move(u));
  }
  std::stable_sort(scored.begin(), scored.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  std::pair<double, Eigen::VectorXd> winner = scored.front();
  const int refine = std::min<int>(options.n_refine, static_cast<int>(scored.size()));
  for (int r = 0; r < refine; ++r) {
    Eigen::VectorXd x = scored[static_cast<std::size_t>(r)].second;
    double fx = scored[static_cast<std::size_t>(r)].first;
    // Compass search on the relaxed cube, scored at snapped points.
    for (double delta = 0.1; delta > 1e-3;) {
      bool improved = false;
      for (int d = 0; d < dims && !improved; ++d) {
        for (double sign : {1.0, -1.0}) {
          Eigen::VectorXd y = x;
          y[d] = std::clamp(y[d] + sign * delta, 0.0, 1.0);
          y = space.snap(y);
          const double fy = score(y);
          if (fy > fx) {
            x = y;
            fx = fy;
            improved = true;
            break;
          }
        }
      }
      if (!improved) delta *= 0.5;
    }
    if (fx > winner.first) winner = {fx, x};
  }
  return winner.second;
}

nlohmann::json to_json(const Trial& trial, const SearchSpace& space) {
  nlohmann::json native = nlohmann::json::object();
  for (int i = 0; i < space.size(); ++i) {
    native[space.dims[static_cast<std::size_t>(i)].name] = trial.native[i];
  }
  return {{"unit", std::vector<double>(trial.unit.data(), trial.unit.data() + trial.unit.size())},
          {"native", native},
          {"objective", trial.objective},
          {"status", trial.status == TrialStatus::Ok ? "ok" : "diverged"}};
}

Trial trial_from_json(const nlohmann::json& j, const SearchSpace& space) {
  try {
    Trial t;
    const auto unit = j.at("unit").get<std::vector<double>>();
    if (static_cast<int>(unit.size()) != space.size()) {
      throw Error(ErrorCode::DimensionMismatch, "logged trial has the wrong dimension");
    }
    t.unit = Eigen::Map<const Eigen::VectorXd>(unit.data(), space.size());
    t.native.resize(space.size());
    for (int i = 0; i < space.size(); ++i) {
      t.native[i] = j.at("native").at(space.dims[static_cast<std::size_t>(i)].name).get<double>();
    }
    t.objective = j.at("objective").get<double>();
    const std::string status = j.at("status").get<std::string>();
    if (status != "ok" && status != "diverged") {
      throw Error(ErrorCode::ConfigError, "unknown trial status '" + status + "'");
    }
    t.status = status == "ok" ? TrialStatus::Ok : TrialStatus::Diverged;
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("search log: ") + e.what());
  }
}

std::vector<Trial> read_search_log(const std::filesystem::path& path, const SearchSpace& space) {
  std::vector<Trial> out;
  std::ifstream in(path);
  if (!in) return out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::ConfigError, "search log line " + std::to_string(out.size() + 1) +
                                              ": " + e.what());
    }
    out.push_back(trial_from_json(j, space));
  }
  return out;
}

SearchResult run_search(const Objective& objective, const SearchSpace& space, int budget,
                        std::uint64_t seed, const SearchOptions& options,
                        std::vector<Trial> resume) {
  space.validate();
  if (budget < 1) throw Error(ErrorCode::InvalidArgument, "budget must be >= 1");
  SearchResult result;
  result.history = std::move(resume);
  std::ofstream log;
  if (options.log_path) {
    log.open(*options.log_path, std::ios::app | std::ios::binary);
    if (!log) throw Error(ErrorCode::IoError, "cannot write " + options.log_path->string());
  }
  while (static_cast<int>(result.history.size()) < budget) {
    const auto step = static_cast<std::uint64_t>(result.history.size());
    Trial t;
    if (options.mode == SearchMode::Random) {
      SplitMix64 rng(derive_seed(seed, {step, 3}));
      t.unit = space.snap(random_point(space.size(), rng));
    } else {
      t.unit = propose_next(result.history, space, seed, options.proposal);
    }
    t.native = space.to_native(t.unit);
    bool diverged = false;
    try {
      t.objective = objective(t.native);
      diverged = !std::isfinite(t.objective);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::TrainingDiverged) throw;
      diverged = true;
    }
    if (diverged) {
      double worst = -std::numeric_limits<double>::infinity();
      for (const Trial& h : result.history) {
        if (h.status == TrialStatus::Ok) worst = std::max(worst, h.objective);
      }
      t.status = TrialStatus::Diverged;
      t.objective = std::isfinite(worst) ? worst + options.penalty_margin : options.penalty_margin;
    }
    if (log.is_open()) {
      log << to_json(t, space).dump() << '\n';
      log.flush();
    }
    if (options.on_trial) options.on_trial(t);
    result.history.push_back(std::move(t));
  }
  const Trial* best = nullptr;
  for (const Trial& t : result.history) {
    if (t.status == TrialStatus::Ok && (!best || t.objective < best->objective)) best = &t;
  }
  if (!best) throw Error(ErrorCode::AllTrialsDiverged, "every trial diverged");
  result.best = *best;
  return result;
}

}  // namespace signform
