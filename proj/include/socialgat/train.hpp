#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "socialgat/eval.hpp"
#include "socialgat/model.hpp"
#include "socialgat/numcore/tape.hpp"
#include "socialgat/text.hpp"

namespace socialgat::train {

struct AdamConfig {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Bias-corrected Adam over a fixed parameter list. L2 enters as the
/// gradient 2 * l2 * theta of the loss term l2 * |theta|^2, for parameters
/// flagged `decays`.
class Adam {
 public:
  explicit Adam(std::vector<num::Parameter*> params, AdamConfig cfg = {});

  void step(double l2 = 0.0);
  void zero_grad();
  std::size_t steps() const noexcept { return t_; }

 private:
  std::vector<num::Parameter*> params_;
  AdamConfig cfg_;
  std::vector<num::Tensor> m_;
  std::vector<num::Tensor> v_;
  std::size_t t_ = 0;
};

struct TrainConfig {
  std::size_t batch_size = 32;
  double dropout = 0.0;
  double l2 = 0.0;
  std::size_t max_epochs = 50;
  std::size_t patience = 5;
  std::uint64_t seed = 1;
  double learning_rate = 0.001;

  void validate() const;
};

/// Tracks the best metric so far; a strictly greater value counts as an
/// improvement. Epochs are 1-based.
class EarlyStopping {
 public:
  explicit EarlyStopping(std::size_t patience);

  /// Returns true when `metric` improves on the best so far.
  bool update(double metric);
  bool should_stop() const noexcept { return since_best_ >= patience_; }
  std::size_t best_epoch() const noexcept { return best_epoch_; }
  std::size_t epochs() const noexcept { return epoch_; }
  double best() const noexcept { return best_; }

 private:
  std::size_t patience_;
  std::size_t epoch_ = 0;
  std::size_t best_epoch_ = 0;
  std::size_t since_best_ = 0;
  double best_ = 0.0;
};

struct RunResult {
  std::uint64_t seed = 0;
  double best_val = 0.0;
  double test_metric = 0.0;
  eval::MetricReport test_report;
  std::size_t epochs_trained = 0;
  std::size_t best_epoch = 0;
  std::vector<double> val_history;
  std::vector<double> train_loss;
};

eval::ConfusionMatrix confusion(model::Model& m, const text::LabeledCorpus& corpus, text::Split split);

using EpochCallback = std::function<void(std::size_t epoch, double train_loss, double val_metric)>;

/// Seeded mini-batch training with early stopping on the validation task
/// metric. Parameters end at the best epoch's values. FREQUENCY models are
/// fitted on the training labels instead.
RunResult train_model(const TrainConfig& cfg, model::Model& m, const text::LabeledCorpus& corpus,
                      const EpochCallback& on_epoch = {});

/// Builds a freshly initialized model for a config and seed.
using ModelFactory = std::function<model::Model(const model::ModelConfig&, std::uint64_t seed)>;

struct GridPoint {
  std::size_t batch_size = 32;
  double dropout = 0.0;
  double l2 = 0.0;
  std::size_t gat_hidden = 0;
  std::size_t gat_heads = 0;

  friend auto operator<=>(const GridPoint&, const GridPoint&) = default;
  std::string str() const;
};

struct Grid {
  std::vector<std::size_t> batch_sizes;
  std::vector<double> dropouts;
  std::vector<double> l2s;
  std::vector<std::size_t> gat_hidden;  // used only for LING_GAT
  std::vector<std::size_t> gat_heads;

  /// Batch {4..64}, dropout {0.0..0.9}, L2 {0, 1e-5, 1e-4}, GAT d' {10..50} x heads {1..4}.
  static Grid standard();
  std::vector<GridPoint> points(model::Variant variant) const;
};

struct GridEntry {
  GridPoint point;
  RunResult result;
};

struct GridResult {
  GridPoint best;
  std::vector<GridEntry> leaderboard;  // by validation metric, descending; ties by point order
};

GridResult grid_search(const Grid& grid, const model::ModelConfig& base_model,
                       const TrainConfig& base_train, const ModelFactory& factory,
                       const text::LabeledCorpus& corpus);

struct MultiRunResult {
  double mean = 0.0;
  double std = 0.0;
  std::vector<RunResult> runs;
};

/// One training run per seed; mean and sample std of the test metric.
MultiRunResult multi_run(const model::ModelConfig& mcfg, const TrainConfig& tcfg,
                         const ModelFactory& factory, const text::LabeledCorpus& corpus,
                         std::span<const std::uint64_t> seeds);

}  // namespace socialgat::train
