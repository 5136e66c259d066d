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

#include "signform/phonolm.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "signform/error.hpp"
#include "signform/rng.hpp"

namespace signform {

using Eigen::MatrixXd;
using Eigen::VectorXd;

std::string_view to_string(Conditioning c) noexcept {
  switch (c) {
    case Conditioning::Nothing: return "uncond";
    case Conditioning::Meaning: return "meaning";
    case Conditioning::Class: return "class";
    case Conditioning::MeaningAndClass: return "meaning_and_class";
  }
  return "uncond";
}

Conditioning conditioning_from_string(std::string_view s) {
  if (s == "nothing" || s == "uncond") return Conditioning::Nothing;
  if (s == "meaning") return Conditioning::Meaning;
  if (s == "class") return Conditioning::Class;
  if (s == "meaning_and_class") return Conditioning::MeaningAndClass;
  throw Error(ErrorCode::ConfigError,
              "unknown conditioning '" + std::string(s) + "'");
}

bool uses_meaning(Conditioning c) noexcept {
  return c == Conditioning::Meaning || c == Conditioning::MeaningAndClass;
}

bool uses_class(Conditioning c) noexcept {
  return c == Conditioning::Class || c == Conditioning::MeaningAndClass;
}

namespace {

std::string_view h0_name(H0Target t) {
  switch (t) {
    case H0Target::Hidden: return "hidden";
    case H0Target::Cell: return "cell";
    case H0Target::Both: return "both";
  }
  return "both";
}

H0Target h0_from_string(std::string_view s) {
  if (s == "hidden") return H0Target::Hidden;
  if (s == "cell") return H0Target::Cell;
  if (s == "both") return H0Target::Both;
  throw Error(ErrorCode::ConfigError, "unknown h0 target '" + std::string(s) + "'");
}

}  // namespace

void LMConfig::validate() const {
  if (layers < 1 || hidden_size < 1 || phone_embed_size < 1 || pca_d < 1) {
    throw Error(ErrorCode::InvalidArgument, "LM sizes must be >= 1");
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "dropout must lie in [0, 1)");
  }
  if (condition_on == Conditioning::MeaningAndClass && hidden_size % 2 != 0) {
    throw Error(ErrorCode::OddHiddenSplit,
                "hidden size " + std::to_string(hidden_size) +
                    " cannot be split between meaning and class");
  }
}

nlohmann::json to_json(const LMConfig& cfg) {
  return {{"layers", cfg.layers},
          {"hidden_size", cfg.hidden_size},
          {"phone_embed_size", cfg.phone_embed_size},
          {"dropout", cfg.dropout},
          {"pca_d", cfg.pca_d},
          {"condition_on", std::string(to_string(cfg.condition_on))},
          {"h0_target", std::string(h0_name(cfg.h0_target))},
          {"h0_all_layers", cfg.h0_all_layers}};
}

LMConfig lm_config_from_json(const nlohmann::json& j) {
  LMConfig cfg;
  cfg.layers = j.value("layers", cfg.layers);
  cfg.hidden_size = j.value("hidden_size", cfg.hidden_size);
  cfg.phone_embed_size = j.value("phone_embed_size", cfg.phone_embed_size);
  cfg.dropout = j.value("dropout", cfg.dropout);
  cfg.pca_d = j.value("pca_d", cfg.pca_d);
  if (j.contains("condition_on")) {
    cfg.condition_on =
        conditioning_from_string(j.at("condition_on").get<std::string>());
  }
  if (j.contains("h0_target")) {
    cfg.h0_target = h0_from_string(j.at("h0_target").get<std::string>());
  }
  cfg.h0_all_layers = j.value("h0_all_layers", cfg.h0_all_layers);
  return cfg;
}

nlohmann::json to_json(const OptimizerSettings& opt) {
  return {{"learning_rate", opt.learning_rate}, {"batch_size", opt.batch_size},
          {"patience", opt.patience},           {"max_epochs", opt.max_epochs},
          {"clip_norm", opt.clip_norm},         {"beta1", opt.beta1},
          {"beta2", opt.beta2},                 {"epsilon", opt.epsilon}};
}

OptimizerSettings optimizer_from_json(const nlohmann::json& j) {
  OptimizerSettings opt;
  opt.learning_rate = j.value("learning_rate", opt.learning_rate);
  opt.batch_size = j.value("batch_size", opt.batch_size);
  opt.patience = j.value("patience", opt.patience);
  opt.max_epochs = j.value("max_epochs", opt.max_epochs);
  opt.clip_norm = j.value("clip_norm", opt.clip_norm);
  opt.beta1 = j.value("beta1", opt.beta1);
  opt.beta2 = j.value("beta2", opt.beta2);
  opt.epsilon = j.value("epsilon", opt.epsilon);
  if (opt.learning_rate <= 0 || opt.batch_size < 1 || opt.patience < 1 ||
      opt.max_epochs < 0) {
    throw Error(ErrorCode::ConfigError, "invalid optimizer settings");
  }
  return opt;
}

// ---------------------------------------------------------------------------
// ParameterSet

int ParameterSet::add(std::string name, int rows, int cols) {
  Tensor t{std::move(name), rows, cols, values_.size()};
  values_.resize(values_.size() + t.size(), 0.0);
  tensors_.push_back(std::move(t));
  return static_cast<int>(tensors_.size()) - 1;
}

Eigen::Map<MatrixXd> ParameterSet::matrix(int id) {
  const Tensor& t = tensors_.at(static_cast<std::size_t>(id));
  return {values_.data() + t.offset, t.rows, t.cols};
}

Eigen::Map<const MatrixXd> ParameterSet::matrix(int id) const {
  const Tensor& t = tensors_.at(static_cast<std::size_t>(id));
  return {values_.data() + t.offset, t.rows, t.cols};
}

Eigen::Map<VectorXd> ParameterSet::flat() {
  return {values_.data(), static_cast<Eigen::Index>(values_.size())};
}

Eigen::Map<const VectorXd> ParameterSet::flat() const {
  return {values_.data(), static_cast<Eigen::Index>(values_.size())};
}

std::optional<int> ParameterSet::find(std::string_view name) const {
  for (std::size_t i = 0; i < tensors_.size(); ++i) {
    if (tensors_[i].name == name) return static_cast<int>(i);
  }
  return std::nullopt;
}

void ParameterSet::set_zero() { std::fill(values_.begin(), values_.end(), 0.0); }

bool ParameterSet::all_finite() const {
  return std::all_of(values_.begin(), values_.end(),
                     [](double x) { return std::isfinite(x); });
}

std::uint64_t ParameterSet::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const auto* bytes = reinterpret_cast<const unsigned char*>(values_.data());
  for (std::size_t i = 0; i < values_.size() * sizeof(double); ++i) {
    h ^= bytes[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

ParameterSet ParameterSet::zeros_like() const {
  ParameterSet out = *this;
  out.set_zero();
  return out;
}

// ---------------------------------------------------------------------------
// PhoneLM

PhoneLM::PhoneLM(LMConfig config, int vocab_size, int n_classes)
    : config_(config), vocab_(vocab_size), n_classes_(n_classes) {
  config_.validate();
  if (vocab_ < 2) {
    throw Error(ErrorCode::InvalidArgument, "vocabulary needs >= 2 symbols");
  }
  if (uses_class(config_.condition_on) && n_classes_ < 1) {
    throw Error(ErrorCode::InvalidArgument, "class conditioning needs classes");
  }
  const int H = config_.hidden_size;
  const int E = config_.phone_embed_size;
  ids_.embed = params_.add("embed", E, vocab_);
  for (int l = 0; l < config_.layers; ++l) {
    const std::string prefix = "lstm" + std::to_string(l) + ".";
    ids_.wx.push_back(params_.add(prefix + "wx", 4 * H, l == 0 ? E : H));
    ids_.wh.push_back(params_.add(prefix + "wh", 4 * H, H));
    ids_.bias.push_back(params_.add(prefix + "b", 4 * H, 1));
  }
  ids_.out_w = params_.add("out.w", vocab_, H);
  ids_.out_b = params_.add("out.b", vocab_, 1);
  const bool split = config_.condition_on == Conditioning::MeaningAndClass;
  const int part = split ? H / 2 : H;
  if (uses_meaning(config_.condition_on)) {
    ids_.cond_w = params_.add("cond.w", part, config_.pca_d);
    ids_.cond_b = params_.add("cond.b", part, 1);
  }
  if (uses_class(config_.condition_on)) {
    ids_.class_embed = params_.add("class.embed", part, n_classes_);
  }
}

void PhoneLM::initialize(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < params_.tensors().size(); ++i) {
    const auto& t = params_.tensors()[i];
    auto m = params_.matrix(static_cast<int>(i));
    if (t.cols == 1) {
      m.setZero();
      continue;
    }
    const double bound = 1.0 / std::sqrt(static_cast<double>(t.cols));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = dist(rng);
    }
  }
  const int H = config_.hidden_size;
  for (int id : ids_.bias) params_.matrix(id).middleRows(H, H).setConstant(1.0);
}

// ---------------------------------------------------------------------------
// Batched forward / backward

namespace {

struct Batch {
  int size = 0;
  int steps = 0;
  std::vector<std::vector<int>> inputs;   // [t][b]
  std::vector<std::vector<int>> targets;  // [t][b]
  std::vector<Eigen::RowVectorXd> mask;   // [t], 1 where position is real
  MatrixXd meaning;                       // pca_d x B
  std::vector<int> classes;
};

Batch make_batch(const PhoneLM& model, std::span<const Example* const> words) {
  const LMConfig& cfg = model.config();
  Batch batch;
  batch.size = static_cast<int>(words.size());
  std::size_t max_len = 0;
  for (const Example* w : words) {
    if (w->phones.empty()) {
      throw Error(ErrorCode::EmptyForm, "cannot score an empty word");
    }
    for (int p : w->phones) {
      if (p <= 0 || p >= model.vocab_size()) {
        throw Error(ErrorCode::OutOfInventory,
                    "phone index " + std::to_string(p) + " outside vocabulary");
      }
    }
    max_len = std::max(max_len, w->phones.size());
  }
  batch.steps = static_cast<int>(max_len) + 1;
  const auto T = static_cast<std::size_t>(batch.steps);
  const auto B = static_cast<std::size_t>(batch.size);
  batch.inputs.assign(T, std::vector<int>(B, 0));
  batch.targets.assign(T, std::vector<int>(B, 0));
  batch.mask.assign(T, Eigen::RowVectorXd::Zero(batch.size));
  for (std::size_t b = 0; b < B; ++b) {
    const auto& ph = words[b]->phones;
    for (std::size_t t = 0; t <= ph.size(); ++t) {
      batch.inputs[t][b] = t == 0 ? PhoneInventory::kEos : ph[t - 1];
      batch.targets[t][b] = t < ph.size() ? ph[t] : PhoneInventory::kEos;
      batch.mask[t][static_cast<Eigen::Index>(b)] = 1.0;
    }
  }
  if (uses_meaning(cfg.condition_on)) {
    batch.meaning.resize(cfg.pca_d, batch.size);
    for (std::size_t b = 0; b < B; ++b) {
      if (words[b]->meaning.size() != cfg.pca_d) {
        throw Error(ErrorCode::DimensionMismatch,
                    "meaning has dimension " +
                        std::to_string(words[b]->meaning.size()) +
                        ", model expects " + std::to_string(cfg.pca_d));
      }
      batch.meaning.col(static_cast<Eigen::Index>(b)) = words[b]->meaning;
    }
  }
  if (uses_class(cfg.condition_on)) {
    for (const Example* w : words) {
      if (w->class_id < 0 || w->class_id >= model.n_classes()) {
        throw Error(ErrorCode::UnknownClass,
                    "class index " + std::to_string(w->class_id));
      }
      batch.classes.push_back(w->class_id);
    }
  }
  return batch;
}

// Conditioning vectors for a batch, hidden_size x B.
MatrixXd batch_init(const PhoneLM& model, const Batch& batch) {
  const LMConfig& cfg = model.config();
  const auto& p = model.parameters();
  const auto& ids = model.ids();
  const int H = cfg.hidden_size;
  MatrixXd init = MatrixXd::Zero(H, batch.size);
  const int part = cfg.condition_on == Conditioning::MeaningAndClass ? H / 2 : H;
  const int meaning_row = cfg.condition_on == Conditioning::MeaningAndClass ? H / 2 : 0;
  if (uses_class(cfg.condition_on)) {
    const auto emb = p.matrix(ids.class_embed);
    for (int b = 0; b < batch.size; ++b) {
      init.col(b).head(part) = emb.col(batch.classes[static_cast<std::size_t>(b)]);
    }
  }
  if (uses_meaning(cfg.condition_on)) {
    init.middleRows(meaning_row, part) =
        (p.matrix(ids.cond_w) * batch.meaning).colwise() +
        VectorXd(p.matrix(ids.cond_b).col(0));
  }
  return init;
}

bool conditions_layer(const LMConfig& cfg, int layer) {
  return cfg.condition_on != Conditioning::Nothing &&
         (layer == 0 || cfg.h0_all_layers);
}

struct LayerTrace {
  MatrixXd h0, c0;
  std::vector<MatrixXd> x, gates, c, tanh_c, h, drop;
};

MatrixXd sigmoid(const MatrixXd& a) {
  return (1.0 + (-a.array()).exp()).inverse().matrix();
}

class DropoutSource {
 public:
  DropoutSource(double rate, std::uint64_t seed) : keep_(1.0 - rate), rng_(seed) {}
  MatrixXd mask(Eigen::Index rows, Eigen::Index cols) {
    MatrixXd m(rows, cols);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (Eigen::Index c = 0; c < cols; ++c) {
      for (Eigen::Index r = 0; r < rows; ++r) {
        m(r, c) = u(rng_) < keep_ ? 1.0 / keep_ : 0.0;
      }
    }
    return m;
  }

 private:
  double keep_;
  std::mt19937_64 rng_;
};

// Runs the model over a batch. Returns total NLL in nats. When `grad` is set
// its tensors accumulate d(NLL)/d(param) scaled by `grad_scale`. When
// `log_probs` is set it receives the natural-log predictive distribution per
// step (vocab x B).
double run_batch(const PhoneLM& model, const Batch& batch, ParameterSet* grad,
                 double grad_scale, DropoutSource* dropout,
                 std::vector<MatrixXd>* log_probs) {
  const LMConfig& cfg = model.config();
  const auto& P = model.parameters();
  const auto& ids = model.ids();
  const int H = cfg.hidden_size;
  const int L = cfg.layers;
  const int T = batch.steps;
  const int B = batch.size;

  const MatrixXd init = batch_init(model, batch);
  const bool init_hidden = cfg.h0_target != H0Target::Cell;
  const bool init_cell = cfg.h0_target != H0Target::Hidden;

  std::vector<LayerTrace> trace(static_cast<std::size_t>(L));
  const auto embed = P.matrix(ids.embed);
  for (int l = 0; l < L; ++l) {
    auto& tr = trace[static_cast<std::size_t>(l)];
    const bool conditioned = conditions_layer(cfg, l);
    tr.h0 = conditioned && init_hidden ? init : MatrixXd::Zero(H, B);
    tr.c0 = conditioned && init_cell ? init : MatrixXd::Zero(H, B);
    tr.x.resize(static_cast<std::size_t>(T));
    tr.gates.resize(static_cast<std::size_t>(T));
    tr.c.resize(static_cast<std::size_t>(T));
    tr.tanh_c.resize(static_cast<std::size_t>(T));
    tr.h.resize(static_cast<std::size_t>(T));
    if (dropout) tr.drop.resize(static_cast<std::size_t>(T));
  }

  const auto wo = P.matrix(ids.out_w);
  const VectorXd bo = P.matrix(ids.out_b).col(0);
  std::vector<MatrixXd> dlogits;
  if (grad) dlogits.resize(static_cast<std::size_t>(T));
  if (log_probs) log_probs->assign(static_cast<std::size_t>(T), MatrixXd());

  double nll = 0.0;
  for (int t = 0; t < T; ++t) {
    const auto ts = static_cast<std::size_t>(t);
    MatrixXd below(embed.rows(), B);
    for (int b = 0; b < B; ++b) {
      below.col(b) = embed.col(batch.inputs[ts][static_cast<std::size_t>(b)]);
    }
    for (int l = 0; l < L; ++l) {
      auto& tr = trace[static_cast<std::size_t>(l)];
      if (dropout) {
        tr.drop[ts] = dropout->mask(below.rows(), B);
        below.array() *= tr.drop[ts].array();
      }
      tr.x[ts] = std::move(below);
      const MatrixXd& h_prev = t == 0 ? tr.h0 : tr.h[ts - 1];
      const MatrixXd& c_prev = t == 0 ? tr.c0 : tr.c[ts - 1];
      MatrixXd a = P.matrix(ids.wx[static_cast<std::size_t>(l)]) * tr.x[ts] +
                   P.matrix(ids.wh[static_cast<std::size_t>(l)]) * h_prev;
      a.colwise() += VectorXd(P.matrix(ids.bias[static_cast<std::size_t>(l)]).col(0));
      MatrixXd gates(4 * H, B);
      gates.topRows(2 * H) = sigmoid(a.topRows(2 * H));
      gates.middleRows(2 * H, H) = a.middleRows(2 * H, H).array().tanh().matrix();
      gates.bottomRows(H) = sigmoid(a.bottomRows(H));
      tr.c[ts] = (gates.middleRows(H, H).array() * c_prev.array() +
                  gates.topRows(H).array() * gates.middleRows(2 * H, H).array())
                     .matrix();
      tr.tanh_c[ts] = tr.c[ts].array().tanh().matrix();
      tr.h[ts] = (gates.bottomRows(H).array() * tr.tanh_c[ts].array()).matrix();
      tr.gates[ts] = std::move(gates);
      below = tr.h[ts];
    }

    MatrixXd logits = wo * below;
    logits.colwise() += bo;
    const Eigen::RowVectorXd max = logits.colwise().maxCoeff();
    logits.rowwise() -= max;
    const Eigen::RowVectorXd lse = logits.array().exp().colwise().sum().log().matrix();
    logits.rowwise() -= lse;  // now log-probabilities
    for (int b = 0; b < B; ++b) {
      if (batch.mask[ts][b] != 0.0) {
        nll -= logits(batch.targets[ts][static_cast<std::size_t>(b)], b);
      }
    }
    if (grad) {
      MatrixXd d = logits.array().exp().matrix();
      for (int b = 0; b < B; ++b) {
        d(batch.targets[ts][static_cast<std::size_t>(b)], b) -= 1.0;
      }
      d.array().rowwise() *= (batch.mask[ts] * grad_scale).array();
      dlogits[ts] = std::move(d);
    }
    if (log_probs) (*log_probs)[ts] = std::move(logits);
  }
  if (!grad) return nll;

  // Backward pass.
  ParameterSet& G = *grad;
  std::vector<MatrixXd> d_above(static_cast<std::size_t>(T));
  {
    auto gwo = G.matrix(ids.out_w);
    auto gbo = G.matrix(ids.out_b);
    const auto& top = trace.back();
    for (int t = 0; t < T; ++t) {
      const auto ts = static_cast<std::size_t>(t);
      gwo.noalias() += dlogits[ts] * top.h[ts].transpose();
      gbo.col(0) += dlogits[ts].rowwise().sum();
      d_above[ts] = wo.transpose() * dlogits[ts];
    }
  }

  MatrixXd d_init = MatrixXd::Zero(H, B);
  auto gembed = G.matrix(ids.embed);
  for (int l = L - 1; l >= 0; --l) {
    const auto ls = static_cast<std::size_t>(l);
    const auto& tr = trace[ls];
    const auto wx = P.matrix(ids.wx[ls]);
    const auto wh = P.matrix(ids.wh[ls]);
    auto gwx = G.matrix(ids.wx[ls]);
    auto gwh = G.matrix(ids.wh[ls]);
    auto gb = G.matrix(ids.bias[ls]);
    MatrixXd dh_next = MatrixXd::Zero(H, B);
    MatrixXd dc_next = MatrixXd::Zero(H, B);
    std::vector<MatrixXd> d_below(static_cast<std::size_t>(T));
    for (int t = T - 1; t >= 0; --t) {
      const auto ts = static_cast<std::size_t>(t);
      const MatrixXd& gates = tr.gates[ts];
      const MatrixXd& c_prev = t == 0 ? tr.c0 : tr.c[ts - 1];
      const MatrixXd& h_prev = t == 0 ? tr.h0 : tr.h[ts - 1];
      const auto i = gates.topRows(H).array();
      const auto f = gates.middleRows(H, H).array();
      const auto g = gates.middleRows(2 * H, H).array();
      const auto o = gates.bottomRows(H).array();
      const auto tc = tr.tanh_c[ts].array();

      const Eigen::ArrayXXd dh = d_above[ts].array() + dh_next.array();
      const Eigen::ArrayXXd dc = dh * o * (1.0 - tc.square()) + dc_next.array();
      MatrixXd da(4 * H, B);
      da.topRows(H) = (dc * g * i * (1.0 - i)).matrix();
      da.middleRows(H, H) = (dc * c_prev.array() * f * (1.0 - f)).matrix();
      da.middleRows(2 * H, H) = (dc * i * (1.0 - g.square())).matrix();
      da.bottomRows(H) = (dh * tc * o * (1.0 - o)).matrix();
      dc_next = (dc * f).matrix();

      gwx.noalias() += da * tr.x[ts].transpose();
      gwh.noalias() += da * h_prev.transpose();
      gb.col(0) += da.rowwise().sum();
      MatrixXd dx = wx.transpose() * da;
      if (dropout) dx.array() *= tr.drop[ts].array();
      if (l > 0) {
        d_below[ts] = std::move(dx);
      } else {
        for (int b = 0; b < B; ++b) {
          gembed.col(batch.inputs[ts][static_cast<std::size_t>(b)]) += dx.col(b);
        }
      }
      dh_next = wh.transpose() * da;
    }
    if (conditions_layer(cfg, l)) {
      if (init_hidden) d_init += dh_next;
      if (init_cell) d_init += dc_next;
    }
    if (l > 0) d_above = std::move(d_below);
  }

  if (cfg.condition_on != Conditioning::Nothing) {
    const bool split = cfg.condition_on == Conditioning::MeaningAndClass;
    const int part = split ? H / 2 : H;
    if (uses_class(cfg.condition_on)) {
      auto gce = G.matrix(ids.class_embed);
      for (int b = 0; b < B; ++b) {
        gce.col(batch.classes[static_cast<std::size_t>(b)]) += d_init.col(b).head(part);
      }
    }
    if (uses_meaning(cfg.condition_on)) {
      const auto dm = d_init.middleRows(split ? H / 2 : 0, part);
      G.matrix(ids.cond_w).noalias() += dm * batch.meaning.transpose();
      G.matrix(ids.cond_b).col(0) += dm.rowwise().sum();
    }
  }
  return nll;
}

std::vector<const Example*> pointers(std::span<const Example> words) {
  std::vector<const Example*> out;
  out.reserve(words.size());
  for (const Example& w : words) out.push_back(&w);
  return out;
}

constexpr std::size_t kEvalBatch = 256;

}  // namespace

Eigen::VectorXd condition_init(const PhoneLM& model,
                               const Eigen::VectorXd* meaning,
                               std::optional<int> class_id) {
  const LMConfig& cfg = model.config();
  const bool want_meaning = uses_meaning(cfg.condition_on);
  const bool want_class = uses_class(cfg.condition_on);
  if (want_meaning != (meaning != nullptr)) {
    throw Error(ErrorCode::InvalidArgument,
                want_meaning ? "meaning vector required" : "unexpected meaning vector");
  }
  if (want_class != class_id.has_value()) {
    throw Error(ErrorCode::InvalidArgument,
                want_class ? "class label required" : "unexpected class label");
  }
  Example ex;
  ex.phones = {1};
  if (meaning) {
    if (meaning->size() != cfg.pca_d) {
      throw Error(ErrorCode::DimensionMismatch, "meaning dimension mismatch");
    }
    ex.meaning = *meaning;
  }
  if (class_id) {
    if (*class_id < 0 || *class_id >= model.n_classes()) {
      throw Error(ErrorCode::UnknownClass, "class index out of range");
    }
    ex.class_id = *class_id;
  }
  const Example* ptr = &ex;
  const Batch batch = make_batch(model, std::span<const Example* const>(&ptr, 1));
  return batch_init(model, batch).col(0);
}

Eigen::MatrixXd next_log2_distributions(const PhoneLM& model,
                                        const Example& word) {
  const Example* ptr = &word;
  const Batch batch = make_batch(model, std::span<const Example* const>(&ptr, 1));
  std::vector<MatrixXd> lp;
  run_batch(model, batch, nullptr, 0.0, nullptr, &lp);
  MatrixXd out(model.vocab_size(), batch.steps);
  for (int t = 0; t < batch.steps; ++t) {
    out.col(t) = lp[static_cast<std::size_t>(t)].col(0) / std::log(2.0);
  }
  return out;
}

std::vector<double> log_prob(const PhoneLM& model, const Example& word) {
  const MatrixXd dist = next_log2_distributions(model, word);
  std::vector<double> out;
  for (std::size_t t = 0; t <= word.phones.size(); ++t) {
    const int target = t < word.phones.size() ? word.phones[t] : PhoneInventory::kEos;
    out.push_back(dist(target, static_cast<Eigen::Index>(t)));
  }
  return out;
}

PerWordLoss evaluate(const PhoneLM& model, std::span<const Example> words,
                     std::span<const int> sign_ids) {
  if (!sign_ids.empty() && sign_ids.size() != words.size()) {
    throw Error(ErrorCode::InvalidArgument, "sign id count mismatch");
  }
  PerWordLoss out;
  out.words.resize(words.size());
  out.sign_ids.resize(words.size());
  const double inv_ln2 = 1.0 / std::log(2.0);
  const auto ptrs = pointers(words);
  for (std::size_t start = 0; start < words.size(); start += kEvalBatch) {
    const std::size_t n = std::min(kEvalBatch, words.size() - start);
    const Batch batch = make_batch(
        model, std::span<const Example* const>(ptrs.data() + start, n));
    std::vector<MatrixXd> lp;
    run_batch(model, batch, nullptr, 0.0, nullptr, &lp);
    for (std::size_t b = 0; b < n; ++b) {
      const Example& w = words[start + b];
      WordLoss& wl = out.words[start + b];
      wl.token_count = static_cast<int>(w.phones.size()) + 1;
      wl.position_bits.resize(static_cast<std::size_t>(wl.token_count));
      double total = 0.0;
      for (std::size_t t = 0; t <= w.phones.size(); ++t) {
        const int target = batch.targets[t][b];
        const double bits = -lp[t](target, static_cast<Eigen::Index>(b)) * inv_ln2;
        wl.position_bits[t] = bits;
        total += bits;
      }
      wl.total_bits = total;
      out.sign_ids[start + b] =
          sign_ids.empty() ? static_cast<int>(start + b) : sign_ids[start + b];
    }
  }
  return out;
}

double total_nll(const PhoneLM& model, std::span<const Example> words) {
  const auto ptrs = pointers(words);
  double total = 0.0;
  for (std::size_t start = 0; start < words.size(); start += kEvalBatch) {
    const std::size_t n = std::min(kEvalBatch, words.size() - start);
    const Batch batch = make_batch(
        model, std::span<const Example* const>(ptrs.data() + start, n));
    total += run_batch(model, batch, nullptr, 0.0, nullptr, nullptr);
  }
  return total;
}

ParameterSet nll_gradient(const PhoneLM& model, std::span<const Example> words) {
  ParameterSet grad = model.parameters().zeros_like();
  const auto ptrs = pointers(words);
  for (std::size_t start = 0; start < words.size(); start += kEvalBatch) {
    const std::size_t n = std::min(kEvalBatch, words.size() - start);
    const Batch batch = make_batch(
        model, std::span<const Example* const>(ptrs.data() + start, n));
    run_batch(model, batch, &grad, 1.0, nullptr, nullptr);
  }
  return grad;
}

double bits_per_phone(const PerWordLoss& losses) {
  if (losses.empty()) throw Error(ErrorCode::EmptyTable, "no words");
  double bits = 0.0;
  long long tokens = 0;
  for (const WordLoss& w : losses.words) {
    bits += w.total_bits;
    tokens += w.token_count;
  }
  return bits / static_cast<double>(tokens);
}

TrainResult train(const LMConfig& config, int vocab_size, int n_classes,
                  std::span<const Example> train_words,
                  std::span<const Example> valid_words,
                  const OptimizerSettings& opt, std::uint64_t seed) {
  if (train_words.empty() || valid_words.empty()) {
    throw Error(ErrorCode::InvalidArgument,
                "training and validation sets must be non-empty");
  }
  PhoneLM model(config, vocab_size, n_classes);
  model.initialize(derive_seed(seed, {1}));
  std::mt19937_64 shuffle_rng(derive_seed(seed, {2}));
  DropoutSource dropout(config.dropout, derive_seed(seed, {3}));
  DropoutSource* dropout_ptr = config.dropout > 0.0 ? &dropout : nullptr;

  auto valid_bpp = [&](const PhoneLM& m) {
    return bits_per_phone(evaluate(m, valid_words));
  };
  TrainResult result{model, {}, {}, 0, 0.0};
  result.train_bits_per_phone.push_back(
      bits_per_phone(evaluate(model, train_words)));
  result.valid_bits_per_phone.push_back(valid_bpp(model));
  result.best_valid_bits_per_phone = result.valid_bits_per_phone.back();

  const std::size_t n_params = model.parameters().size();
  VectorXd m1 = VectorXd::Zero(static_cast<Eigen::Index>(n_params));
  VectorXd m2 = VectorXd::Zero(static_cast<Eigen::Index>(n_params));
  long long step = 0;

  std::vector<const Example*> order = pointers(train_words);
  ParameterSet grad = model.parameters().zeros_like();
  const double inv_ln2 = 1.0 / std::log(2.0);
  int since_best = 0;
  for (int epoch = 1; epoch <= opt.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double epoch_nats = 0.0;
    long long epoch_tokens = 0;
    const auto bs = static_cast<std::size_t>(opt.batch_size);
    for (std::size_t start = 0; start < order.size(); start += bs) {
      const std::size_t n = std::min(bs, order.size() - start);
      const Batch batch = make_batch(
          model, std::span<const Example* const>(order.data() + start, n));
      long long tokens = 0;
      for (const auto& m : batch.mask) tokens += static_cast<long long>(m.sum());
      grad.set_zero();
      const double nats = run_batch(model, batch, &grad,
                                    1.0 / static_cast<double>(tokens),
                                    dropout_ptr, nullptr);
      if (!std::isfinite(nats) || !grad.all_finite()) {
        throw Error(ErrorCode::TrainingDiverged,
                    "non-finite loss at epoch " + std::to_string(epoch) +
                        ", batch starting at " + std::to_string(start) +
                        " (lr " + std::to_string(opt.learning_rate) + ")");
      }
      epoch_nats += nats;
      epoch_tokens += tokens;

      auto g = grad.flat();
      const double norm = g.norm();
      if (opt.clip_norm > 0.0 && norm > opt.clip_norm) g *= opt.clip_norm / norm;
      ++step;
      m1 = opt.beta1 * m1 + (1.0 - opt.beta1) * g;
      m2 = opt.beta2 * m2 + (1.0 - opt.beta2) * g.cwiseAbs2();
      const double c1 = 1.0 - std::pow(opt.beta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(opt.beta2, static_cast<double>(step));
      model.parameters().flat().array() -=
          opt.learning_rate * (m1.array() / c1) /
          ((m2.array() / c2).sqrt() + opt.epsilon);
    }
    const double valid = valid_bpp(model);
    if (!std::isfinite(valid)) {
      throw Error(ErrorCode::TrainingDiverged,
                  "non-finite validation loss at epoch " + std::to_string(epoch));
    }
    result.train_bits_per_phone.push_back(
        epoch_nats * inv_ln2 / static_cast<double>(epoch_tokens));
    result.valid_bits_per_phone.push_back(valid);
    if (valid < result.best_valid_bits_per_phone) {
      result.best_valid_bits_per_phone = valid;
      result.best_epoch = epoch;
      result.model = model;
      since_best = 0;
    } else if (++since_best >= opt.patience) {
      break;
    }
  }
  return result;
}

std::vector<Example> make_examples(const Lexicon& lexicon,
                                   std::span<const int> sign_ids,
                                   const PCAModel* pca) {
  std::vector<Example> out;
  out.reserve(sign_ids.size());
  for (int id : sign_ids) {
    const Sign& s = lexicon.signs.at(static_cast<std::size_t>(id));
    Example ex;
    ex.phones = lexicon.inventory.encode(s.form);
    if (pca) ex.meaning = pca_transform(*pca, s.meaning);
    ex.class_id = lexicon.class_index(s.pos);
    out.push_back(std::move(ex));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Archive

nlohmann::json to_json(const ModelArchive& archive) {
  const PhoneLM& m = archive.model;
  nlohmann::json tensors = nlohmann::json::array();
  for (std::size_t i = 0; i < m.parameters().tensors().size(); ++i) {
    const auto& t = m.parameters().tensors()[i];
    const auto mat = m.parameters().matrix(static_cast<int>(i));
    std::vector<double> data(mat.data(), mat.data() + mat.size());
    tensors.push_back({{"name", t.name},
                       {"shape", {t.rows, t.cols}},
                       {"layout", "column_major"},
                       {"data", data}});
  }
  nlohmann::json j = {{"format", "signform-model"},
                      {"version", kArchiveVersion},
                      {"config", to_json(m.config())},
                      {"vocab_size", m.vocab_size()},
                      {"n_classes", m.n_classes()},
                      {"inventory", archive.inventory},
                      {"classes", archive.classes},
                      {"tensors", tensors}};
  if (archive.pca) j["pca"] = to_json(*archive.pca);
  return j;
}

ModelArchive archive_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "signform-model") {
    throw Error(ErrorCode::ArchiveError, "not a signform model archive");
  }
  if (j.value("version", 0) != kArchiveVersion) {
    throw Error(ErrorCode::ArchiveError, "unsupported archive version");
  }
  PhoneLM model(lm_config_from_json(j.at("config")), j.at("vocab_size").get<int>(),
                j.at("n_classes").get<int>());
  const auto& tensors = j.at("tensors");
  if (tensors.size() != model.parameters().tensors().size()) {
    throw Error(ErrorCode::ArchiveError, "tensor count mismatch");
  }
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    const auto& t = model.parameters().tensors()[i];
    const auto& jt = tensors[i];
    const auto shape = jt.at("shape").get<std::vector<int>>();
    if (jt.at("name").get<std::string>() != t.name || shape.size() != 2 ||
        shape[0] != t.rows || shape[1] != t.cols) {
      throw Error(ErrorCode::ArchiveError, "tensor '" + t.name + "' mismatch");
    }
    const auto data = jt.at("data").get<std::vector<double>>();
    if (data.size() != t.size()) {
      throw Error(ErrorCode::ArchiveError, "tensor '" + t.name + "' data size");
    }
    auto mat = model.parameters().matrix(static_cast<int>(i));
    std::copy(data.begin(), data.end(), mat.data());
  }
  ModelArchive archive{std::move(model), j.at("inventory").get<std::vector<std::string>>(),
                       j.at("classes").get<std::vector<std::string>>(), std::nullopt};
  if (j.contains("pca")) archive.pca = pca_from_json(j.at("pca"));
  return archive;
}

void save_archive(const ModelArchive& archive, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << to_json(archive).dump() << '\n';
}

ModelArchive load_archive(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  try {
    return archive_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ArchiveError, e.what());
  }
}

}  // namespace signform
