#include "socialgat/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "socialgat/errors.hpp"
#include "socialgat/io.hpp"

namespace socialgat::train {

using num::Parameter;
using num::Tensor;

Adam::Adam(std::vector<Parameter*> params, AdamConfig cfg) : params_(std::move(params)), cfg_(cfg) {
  if (!(cfg_.learning_rate >= 0.0) || !(cfg_.beta1 >= 0.0 && cfg_.beta1 < 1.0) ||
      !(cfg_.beta2 >= 0.0 && cfg_.beta2 < 1.0) || !(cfg_.epsilon > 0.0)) {
    throw ParameterError("invalid Adam hyperparameters");
  }
  for (const Parameter* p : params_) {
    m_.push_back(Tensor::zeros_like(p->value));
    v_.push_back(Tensor::zeros_like(p->value));
  }
}

void Adam::zero_grad() {
  for (Parameter* p : params_) p->zero_grad();
}

void Adam::step(double l2) {
  ++t_;
  const double b1 = cfg_.beta1, b2 = cfg_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (std::size_t k = 0; k < params_.size(); ++k) {
    Parameter& p = *params_[k];
    if (!p.trainable) continue;
    if (p.grad.shape() != p.value.shape()) {
      throw ShapeError("gradient of '" + p.name + "' has shape " + p.grad.shape().str() +
                       ", parameter has " + p.value.shape().str());
    }
    const double decay = p.decays ? 2.0 * l2 : 0.0;
    auto theta = p.value.data();
    const auto grad = p.grad.data();
    auto m = m_[k].data();
    auto v = v_[k].data();
    for (std::size_t i = 0; i < theta.size(); ++i) {
      const double g = grad[i] + decay * theta[i];
      m[i] = b1 * m[i] + (1.0 - b1) * g;
      v[i] = b2 * v[i] + (1.0 - b2) * g * g;
      theta[i] -= cfg_.learning_rate * (m[i] / c1) / (std::sqrt(v[i] / c2) + cfg_.epsilon);
    }
  }
}

void TrainConfig::validate() const {
  if (batch_size == 0) throw ParameterError("batch_size must be positive");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ParameterError("dropout must be in [0, 1)");
  if (!(l2 >= 0.0)) throw ParameterError("l2 must be nonnegative");
  if (max_epochs == 0) throw ParameterError("max_epochs must be positive");
  if (patience == 0) throw ParameterError("patience must be positive");
  if (!(learning_rate > 0.0)) throw ParameterError("learning_rate must be positive");
}

EarlyStopping::EarlyStopping(std::size_t patience) : patience_(patience) {
  if (patience == 0) throw ParameterError("patience must be positive");
}

bool EarlyStopping::update(double metric) {
  ++epoch_;
  if (best_epoch_ == 0 || metric > best_) {
    best_ = metric;
    best_epoch_ = epoch_;
    since_best_ = 0;
    return true;
  }
  ++since_best_;
  return false;
}

eval::ConfusionMatrix confusion(model::Model& m, const text::LabeledCorpus& corpus, text::Split split) {
  eval::ConfusionMatrix cm(text::class_count(corpus.task));
  for (std::size_t i : corpus.indices(split)) {
    const auto& ex = corpus.examples[i];
    cm.add(ex.label, m.predict(ex).cls);
  }
  return cm;
}

namespace {

std::vector<Tensor> snapshot(const std::vector<Parameter*>& params) {
  std::vector<Tensor> out;
  out.reserve(params.size());
  for (const Parameter* p : params) out.push_back(p->value);
  return out;
}

void restore(const std::vector<Parameter*>& params, const std::vector<Tensor>& values) {
  for (std::size_t k = 0; k < params.size(); ++k) params[k]->value = values[k];
}

}  // namespace

RunResult train_model(const TrainConfig& cfg, model::Model& m, const text::LabeledCorpus& corpus,
                      const EpochCallback& on_epoch) {
  cfg.validate();
  if (m.config().task != corpus.task) {
    throw ParameterError(std::string("model task ") + text::task_name(m.config().task) +
                         " does not match corpus task " + text::task_name(corpus.task));
  }
  std::vector<std::size_t> train_idx = corpus.indices(text::Split::kTrain);
  if (train_idx.empty()) throw StateError("corpus has no training examples");
  if (corpus.count(text::Split::kVal) == 0) throw StateError("corpus has no validation examples");

  RunResult result;
  result.seed = cfg.seed;
  const text::Task task = corpus.task;

  if (m.config().variant == model::Variant::kFrequency) {
    std::vector<std::size_t> labels;
    for (std::size_t i : train_idx) labels.push_back(corpus.examples[i].label);
    m.fit_frequency(labels);
    result.best_val = eval::task_metric(task, confusion(m, corpus, text::Split::kVal));
    result.val_history.push_back(result.best_val);
    const auto cm = confusion(m, corpus, text::Split::kTest);
    result.test_report = eval::report(task, cm);
    result.test_metric = result.test_report.metric;
    return result;
  }

  num::Rng shuffle_rng(num::Rng::derive(cfg.seed, 1));
  num::Rng dropout_rng(num::Rng::derive(cfg.seed, 2));
  const auto params = m.parameters();
  Adam adam(params, AdamConfig{cfg.learning_rate});
  EarlyStopping stopper(cfg.patience);
  std::vector<Tensor> best = snapshot(params);

  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    shuffle_rng.shuffle(std::span<std::size_t>(train_idx));
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < train_idx.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(train_idx.size(), start + cfg.batch_size);
      adam.zero_grad();
      for (std::size_t k = start; k < end; ++k) {
        const auto& ex = corpus.examples[train_idx[k]];
        num::Tape tape;
        const num::Var loss = tape.cross_entropy(m.logits(tape, ex, true, cfg.dropout, dropout_rng), ex.label);
        const double value = tape.value(loss).item();
        if (!std::isfinite(value)) {
          throw NumericError("non-finite loss " + io::format_double(value) + " at epoch " +
                             std::to_string(epoch) + " on example '" + ex.id + "'");
        }
        epoch_loss += value;
        tape.backward(loss);
      }
      const double inv = 1.0 / static_cast<double>(end - start);
      for (Parameter* p : params) {
        for (double& g : p->grad.data()) g *= inv;
      }
      adam.step(cfg.l2);
    }
    m.mark_trained();
    const double val = eval::task_metric(task, confusion(m, corpus, text::Split::kVal));
    const double mean_loss = epoch_loss / static_cast<double>(train_idx.size());
    result.val_history.push_back(val);
    result.train_loss.push_back(mean_loss);
    if (stopper.update(val)) best = snapshot(params);
    if (on_epoch) on_epoch(epoch, mean_loss, val);
    if (stopper.should_stop()) break;
  }
  restore(params, best);
  adam.zero_grad();
  result.best_val = stopper.best();
  result.best_epoch = stopper.best_epoch();
  result.epochs_trained = stopper.epochs();
  result.test_report = eval::report(task, confusion(m, corpus, text::Split::kTest));
  result.test_metric = result.test_report.metric;
  return result;
}

std::string GridPoint::str() const {
  std::ostringstream os;
  os << "batch_size=" << batch_size << " dropout=" << io::format_double(dropout)
     << " l2=" << io::format_double(l2);
  if (gat_heads) os << " gat_hidden=" << gat_hidden << " gat_heads=" << gat_heads;
  return os.str();
}

Grid Grid::standard() {
  Grid g;
  g.batch_sizes = {4, 8, 16, 32, 64};
  for (int i = 0; i <= 9; ++i) g.dropouts.push_back(i / 10.0);
  g.l2s = {0.0, 1e-5, 1e-4};
  g.gat_hidden = {10, 15, 20, 25, 30, 50};
  g.gat_heads = {1, 2, 3, 4};
  return g;
}

std::vector<GridPoint> Grid::points(model::Variant variant) const {
  std::vector<GridPoint> out;
  const bool gat = variant == model::Variant::kLingGat;
  const std::vector<std::size_t> none = {0};
  for (std::size_t b : batch_sizes)
    for (double d : dropouts)
      for (double l : l2s)
        for (std::size_t h : gat ? gat_hidden : none)
          for (std::size_t k : gat ? gat_heads : none) out.push_back(GridPoint{b, d, l, h, k});
  std::sort(out.begin(), out.end());
  return out;
}

GridResult grid_search(const Grid& grid, const model::ModelConfig& base_model,
                       const TrainConfig& base_train, const ModelFactory& factory,
                       const text::LabeledCorpus& corpus) {
  const auto points = grid.points(base_model.variant);
  if (points.empty()) throw ParameterError("grid is empty");
  GridResult out;
  for (const GridPoint& pt : points) {
    model::ModelConfig mc = base_model;
    if (pt.gat_heads) {
      mc.gat_hidden = pt.gat_hidden;
      mc.gat_heads = pt.gat_heads;
    }
    TrainConfig tc = base_train;
    tc.batch_size = pt.batch_size;
    tc.dropout = pt.dropout;
    tc.l2 = pt.l2;
    model::Model m = factory(mc, num::Rng::derive(tc.seed, 0));
    out.leaderboard.push_back(GridEntry{pt, train_model(tc, m, corpus)});
  }
  // Points were generated in ascending order, so a stable sort keeps ties
  // in lexicographic config order.
  std::stable_sort(out.leaderboard.begin(), out.leaderboard.end(),
                   [](const GridEntry& a, const GridEntry& b) { return a.result.best_val > b.result.best_val; });
  out.best = out.leaderboard.front().point;
  return out;
}

MultiRunResult multi_run(const model::ModelConfig& mcfg, const TrainConfig& tcfg,
                         const ModelFactory& factory, const text::LabeledCorpus& corpus,
                         std::span<const std::uint64_t> seeds) {
  if (seeds.size() < 2) throw ParameterError("multi_run needs at least 2 seeds");
  MultiRunResult out;
  std::vector<double> metrics;
  for (std::uint64_t seed : seeds) {
    TrainConfig tc = tcfg;
    tc.seed = seed;
    model::Model m = factory(mcfg, num::Rng::derive(seed, 0));
    out.runs.push_back(train_model(tc, m, corpus));
    metrics.push_back(out.runs.back().test_metric);
  }
  out.mean = eval::mean(metrics);
  out.std = eval::sample_std(metrics);
  return out;
}

}  // namespace socialgat::train
