#pragma once

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

namespace socialgat::graph {

struct NodeMeta {
  bool is_external = false;
  /// Class indices of every tweet this user authored (a multiset, sorted).
  std::vector<std::size_t> tweet_labels;
};

struct RetweetEvent {
  std::string retweeter;
  std::string retweeted;
};

using Edge = std::pair<std::size_t, std::size_t>;

/// Undirected, unweighted, simple user graph. Node ids are opaque strings;
/// dense indices follow sorted id order so every build is reproducible.
/// Self-loops are never stored.
class SocialGraph {
 public:
  SocialGraph() = default;

  /// Validates endpoints, drops duplicates, rejects self-loops.
  static SocialGraph from_edges(std::map<std::string, NodeMeta> nodes,
                                std::span<const std::pair<std::string, std::string>> edges);

  std::size_t node_count() const noexcept { return ids_.size(); }
  std::size_t edge_count() const noexcept { return edge_count_; }

  const std::string& id(std::size_t index) const { return ids_.at(index); }
  const std::vector<std::string>& ids() const noexcept { return ids_; }
  std::optional<std::size_t> index_of(std::string_view id) const;
  bool contains(std::string_view id) const { return index_of(id).has_value(); }

  const NodeMeta& meta(std::size_t index) const { return meta_.at(index); }
  /// Sorted neighbor indices.
  std::span<const std::size_t> neighbors(std::size_t index) const { return adj_.at(index); }
  std::size_t degree(std::size_t index) const { return adj_.at(index).size(); }
  bool adjacent(std::size_t u, std::size_t v) const;

  /// Each undirected edge once, as (u, v) with u < v, in index order.
  std::vector<Edge> edges() const;
  bool is_symmetric() const;

 private:
  std::vector<std::string> ids_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<NodeMeta> meta_;
  std::vector<std::vector<std::size_t>> adj_;
  std::size_t edge_count_ = 0;
};

/// Author id -> labels of the tweets they wrote in the corpus.
using AuthorLabels = std::map<std::string, std::vector<std::size_t>>;

/// Nodes are the dataset authors plus every external user retweeted by
/// dataset authors at least `external_threshold` times. Only events whose
/// retweeter is a dataset author are considered; an edge joins two retained
/// users when any such event links them, in either direction.
SocialGraph build_social_graph(const AuthorLabels& authors, std::span<const RetweetEvent> events,
                               std::size_t external_threshold = 100);

struct GraphStats {
  std::size_t node_count = 0;
  std::size_t edge_count = 0;
  std::optional<double> density;
  std::size_t component_count = 0;
  std::optional<double> homophily;
};

double density(std::size_t node_count, std::size_t edge_count);
double density(const SocialGraph& g);
std::size_t connected_components(const SocialGraph& g);
/// Fraction of edges between two labeled users whose label multisets
/// intersect; nullopt when no edge has two labeled endpoints.
std::optional<double> homophily(const SocialGraph& g);
GraphStats stats(const SocialGraph& g);
/// Table-style text block for terminals.
std::string format_stats(const GraphStats& s);

struct EventParseResult {
  std::vector<RetweetEvent> events;
  std::vector<std::string> errors;  // "line N: ..."
};

/// JSON Lines, one {"retweeter": ..., "retweeted": ...} per line. Malformed
/// lines are reported and skipped.
EventParseResult read_retweet_events(const std::filesystem::path& path);
void write_retweet_events(const std::filesystem::path& path, std::span<const RetweetEvent> events);

/// Edge list ("u v" per line, lexicographically sorted) plus a JSON sidecar
/// holding NodeMeta for every node, isolated ones included.
void write_graph(const SocialGraph& g, const std::filesystem::path& edge_list,
                 const std::filesystem::path& sidecar);
SocialGraph read_graph(const std::filesystem::path& edge_list,
                       const std::filesystem::path& sidecar);

}  // namespace socialgat::graph
