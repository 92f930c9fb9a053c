#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "socialgat/graph.hpp"
#include "socialgat/numcore/rng.hpp"
#include "socialgat/numcore/tensor.hpp"

namespace socialgat::embed {

/// id -> fixed-length vector store. Ids keep insertion order, which is also
/// the order they are written to disk.
class EmbeddingTable {
 public:
  explicit EmbeddingTable(std::size_t dim = 200, bool trainable = false);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return ids_.size(); }
  bool empty() const noexcept { return ids_.empty(); }
  bool trainable() const noexcept { return trainable_; }
  void set_trainable(bool t) noexcept { trainable_ = t; }

  void set(const std::string& id, std::span<const double> values);
  bool contains(std::string_view id) const;
  std::span<const double> vector(std::string_view id) const;
  num::Tensor tensor(std::string_view id) const;
  const std::vector<std::string>& ids() const noexcept { return ids_; }

  /// Vector for id, or the centroid of all stored vectors when id is absent.
  num::Tensor lookup_or_centroid(std::string_view id) const;

  friend bool operator==(const EmbeddingTable& a, const EmbeddingTable& b) {
    return a.dim_ == b.dim_ && a.ids_ == b.ids_ && a.data_ == b.data_;
  }

 private:
  std::size_t dim_;
  bool trainable_;
  std::vector<std::string> ids_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<double> data_;
};

/// Arithmetic mean of every stored vector.
num::Tensor centroid_fallback(const EmbeddingTable& table);

struct WalkConfig {
  double p = 1.0;
  double q = 1.0;
  std::size_t walk_length = 80;
  std::size_t walks_per_node = 10;

  void validate() const;
};

struct SkipgramConfig {
  std::size_t dim = 200;
  std::size_t window = 10;
  std::size_t negatives = 5;
  std::size_t epochs = 20;
  double learning_rate = 0.025;
  std::size_t min_count = 0;

  void validate() const;
};

/// Skip-gram settings used for paragraph vectors: 30 epochs, min count 5,
/// 200 dimensions.
SkipgramConfig pv_defaults();

/// Probability of moving from `cur` to each neighbor, given the previous node
/// of the walk (nullopt at the walk start). Unnormalized weights are 1/p for
/// a return to prev, 1 for neighbors of prev, 1/q otherwise.
std::vector<std::pair<std::size_t, double>> next_step_distribution(
    const graph::SocialGraph& g, std::optional<std::size_t> prev, std::size_t cur,
    const WalkConfig& cfg);

using Walk = std::vector<std::size_t>;

/// walks_per_node biased walks from every node; node order is reshuffled
/// each round. Isolated nodes yield single-node walks.
std::vector<Walk> generate_walks(const graph::SocialGraph& g, const WalkConfig& cfg,
                                 num::Rng& rng);

/// Vectors uniform in [-0.5/dim, 0.5/dim], drawn in id order.
EmbeddingTable uniform_table(std::span<const std::string> ids, std::size_t dim, num::Rng& rng);

/// Skip-gram with negative sampling (unigram^0.75 noise). Returns the
/// input-side vectors for every token kept by min_count. When given,
/// `epoch_losses` receives the mean per-pair loss of each epoch.
EmbeddingTable train_skipgram(std::span<const std::vector<std::string>> sequences,
                              const SkipgramConfig& cfg, num::Rng& rng,
                              std::vector<double>* epoch_losses = nullptr);

EmbeddingTable node2vec(const graph::SocialGraph& g, const WalkConfig& wc,
                        const SkipgramConfig& sc, num::Rng& rng);

/// Distributed bag-of-words paragraph vectors, one per author. Authors whose
/// timeline is empty after min_count filtering are left out of the table.
EmbeddingTable train_pv_dbow(const std::map<std::string, std::vector<std::string>>& author_docs,
                             const SkipgramConfig& sc, num::Rng& rng,
                             std::vector<double>* epoch_losses = nullptr);

/// Independent uniform vectors, flagged trainable.
EmbeddingTable random_author_embeddings(std::span<const std::string> ids, std::size_t dim,
                                        num::Rng& rng);

/// "id v1 ... vd" per line; dimension taken from the first line.
EmbeddingTable load_word_vectors(const std::filesystem::path& path);
void write_embeddings(const EmbeddingTable& table, const std::filesystem::path& path);
std::string format_embeddings(const EmbeddingTable& table);

double cosine(std::span<const double> a, std::span<const double> b);

/// Mean-centered projection onto the top two principal components, found by
/// power iteration with deflation. Rows follow table order. Needs at least 3
/// vectors.
std::vector<std::array<double, 2>> pca2d(const EmbeddingTable& table);

}  // namespace socialgat::embed
