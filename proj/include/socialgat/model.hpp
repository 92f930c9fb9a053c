#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "socialgat/embed.hpp"
#include "socialgat/gat.hpp"
#include "socialgat/graph.hpp"
#include "socialgat/numcore/rng.hpp"
#include "socialgat/numcore/tape.hpp"
#include "socialgat/text.hpp"

namespace socialgat::model {

enum class Variant { kFrequency, kLing, kLingRandom, kLingPv, kLingN2v, kLingGat };

Variant parse_variant(std::string_view name);
const char* variant_name(Variant v);
/// True for every variant that consumes an author vector.
bool uses_author(Variant v);

struct ModelConfig {
  Variant variant = Variant::kLing;
  text::Task task = text::Task::kSentiment;
  std::size_t text_hidden = 50;
  std::size_t author_dim = 200;
  std::size_t gat_hidden = 50;
  std::size_t gat_heads = 1;
  std::size_t clf_hidden = 50;

  std::size_t classes() const { return text::class_count(task); }
  /// Length of s: 0 for LING, heads * d' for LING_GAT, author_dim otherwise.
  std::size_t social_dim() const;
  std::size_t classifier_input() const { return 2 * text_hidden + social_dim(); }
  void validate() const;
};

struct Prediction {
  std::size_t cls = 0;
  std::vector<double> probabilities;
};

/// Class = first index holding the maximum probability.
Prediction make_prediction(const num::Tensor& probabilities);

/// Two-layer fusion head: softmax(W2 . relu(W1 . x)), x = l or (l ; s).
struct Classifier {
  num::Parameter w1;  // [in x c]
  num::Parameter w2;  // [c x o]
};

Classifier init_classifier(std::size_t in, std::size_t hidden, std::size_t out, num::Rng& rng);

/// Pre-softmax scores. Dropout (rate `dropout`, only when training) hits the
/// fused input and the hidden activation.
num::Var classifier_logits(num::Tape& tape, Classifier& clf, num::Var l, std::optional<num::Var> s,
                           double dropout, bool training, num::Rng& rng);

Prediction fuse_and_classify(const num::Tensor& l, const num::Tensor* s, Classifier& clf);

/// Draws class indices with their empirical training frequency.
class FrequencySampler {
 public:
  FrequencySampler(std::span<const std::size_t> labels, std::size_t classes);
  explicit FrequencySampler(std::vector<double> frequencies);

  std::size_t sample(num::Rng& rng) const;
  const std::vector<double>& frequencies() const noexcept { return freq_; }

 private:
  std::vector<double> freq_;
};

/// Inputs that live outside the model: frozen tables and the graph. The
/// pointed-to objects must outlive the model.
struct AuthorResources {
  const embed::EmbeddingTable* table = nullptr;  // PV, N2V, or GAT input vectors
  const graph::SocialGraph* graph = nullptr;     // LING_GAT
  std::vector<std::string> author_ids;           // LING_RANDOM
};

class Model {
 public:
  Model(ModelConfig cfg, const embed::EmbeddingTable& words, AuthorResources resources,
        std::uint64_t init_seed);

  const ModelConfig& config() const noexcept { return cfg_; }
  bool trained() const noexcept { return trained_; }
  void mark_trained() noexcept { trained_ = true; }

  /// Every parameter the optimizer updates.
  std::vector<num::Parameter*> parameters();

  num::Var logits(num::Tape& tape, const text::LabeledExample& ex, bool training, double dropout,
                  num::Rng& rng);
  Prediction predict(const text::LabeledExample& ex);

  /// Fits the label sampler of the FREQUENCY variant.
  void fit_frequency(std::span<const std::size_t> train_labels);

  /// Author vector s fed to the classifier (empty tensor for LING).
  num::Tensor social_vector(const std::string& author);
  gat::AttentionRecord attention(const std::string& author);

  std::string checkpoint() const;
  void write_checkpoint(const std::filesystem::path& path) const;
  /// Loads parameter values; config and shapes must match this model.
  void load_checkpoint(std::string_view content);
  void load_checkpoint(const std::filesystem::path& path);

  text::WordInputs& words() noexcept { return words_; }

 private:
  num::Var social(num::Tape& tape, const std::string& author);
  num::Tensor author_centroid() const;

  ModelConfig cfg_;
  text::WordInputs words_;
  AuthorResources res_;
  text::BiLstm lstm_;
  Classifier clf_;
  gat::GatLayer gat_;
  std::vector<num::Parameter> authors_;
  std::unordered_map<std::string, std::size_t> author_index_;
  std::unordered_map<std::string, gat::Neighborhood> neighborhoods_;
  std::optional<FrequencySampler> sampler_;
  num::Rng sample_rng_;
  bool trained_ = false;
};

/// Config stored in a checkpoint header.
ModelConfig read_checkpoint_config(const std::filesystem::path& path);

std::string config_json(const ModelConfig& cfg);
ModelConfig config_from_json(std::string_view json);

}  // namespace socialgat::model
