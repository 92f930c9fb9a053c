#include <numeric>

#include "socialgat/embed.hpp"
#include "socialgat/errors.hpp"

namespace socialgat::embed {

void WalkConfig::validate() const {
  if (!(p > 0.0) || !(q > 0.0)) throw ParameterError("walk biases p and q must be positive");
  if (walk_length == 0 || walks_per_node == 0) {
    throw ParameterError("walk_length and walks_per_node must be positive");
  }
}

std::vector<std::pair<std::size_t, double>> next_step_distribution(
    const graph::SocialGraph& g, std::optional<std::size_t> prev, std::size_t cur,
    const WalkConfig& cfg) {
  const auto nbrs = g.neighbors(cur);
  if (nbrs.empty()) {
    throw EmptyNeighborhoodError("node '" + g.id(cur) + "' has no neighbors");
  }
  std::vector<std::pair<std::size_t, double>> dist;
  dist.reserve(nbrs.size());
  double total = 0.0;
  for (std::size_t x : nbrs) {
    double w = 1.0;
    if (prev) {
      if (x == *prev) w = 1.0 / cfg.p;
      else if (!g.adjacent(*prev, x)) w = 1.0 / cfg.q;
    }
    dist.emplace_back(x, w);
    total += w;
  }
  for (auto& [x, w] : dist) w /= total;
  return dist;
}

namespace {

std::size_t sample_step(const graph::SocialGraph& g, std::optional<std::size_t> prev,
                        std::size_t cur, const WalkConfig& cfg, num::Rng& rng,
                        std::vector<double>& cumulative) {
  const auto nbrs = g.neighbors(cur);
  if (!prev || (cfg.p == 1.0 && cfg.q == 1.0)) return nbrs[rng.below(nbrs.size())];
  cumulative.resize(nbrs.size());
  double total = 0.0;
  for (std::size_t i = 0; i < nbrs.size(); ++i) {
    const std::size_t x = nbrs[i];
    double w = 1.0;
    if (x == *prev) w = 1.0 / cfg.p;
    else if (!g.adjacent(*prev, x)) w = 1.0 / cfg.q;
    total += w;
    cumulative[i] = total;
  }
  const double u = rng.uniform() * total;
  for (std::size_t i = 0; i < nbrs.size(); ++i) {
    if (u < cumulative[i]) return nbrs[i];
  }
  return nbrs.back();
}

}  // namespace

std::vector<Walk> generate_walks(const graph::SocialGraph& g, const WalkConfig& cfg,
                                 num::Rng& rng) {
  cfg.validate();
  std::vector<std::size_t> order(g.node_count());
  std::iota(order.begin(), order.end(), 0);
  std::vector<Walk> walks;
  walks.reserve(order.size() * cfg.walks_per_node);
  std::vector<double> scratch;
  for (std::size_t round = 0; round < cfg.walks_per_node; ++round) {
    rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t start : order) {
      Walk walk{start};
      walk.reserve(cfg.walk_length);
      std::optional<std::size_t> prev;
      while (walk.size() < cfg.walk_length) {
        const std::size_t cur = walk.back();
        if (g.degree(cur) == 0) break;
        const std::size_t next = sample_step(g, prev, cur, cfg, rng, scratch);
        prev = cur;
        walk.push_back(next);
      }
      walks.push_back(std::move(walk));
    }
  }
  return walks;
}

EmbeddingTable node2vec(const graph::SocialGraph& g, const WalkConfig& wc,
                        const SkipgramConfig& sc, num::Rng& rng) {
  const auto walks = generate_walks(g, wc, rng);
  std::vector<std::vector<std::string>> sequences;
  sequences.reserve(walks.size());
  for (const auto& w : walks) {
    std::vector<std::string> seq;
    seq.reserve(w.size());
    for (std::size_t v : w) seq.push_back(g.id(v));
    sequences.push_back(std::move(seq));
  }
  SkipgramConfig cfg = sc;
  cfg.min_count = 0;
  const EmbeddingTable trained = train_skipgram(sequences, cfg, rng);
  // Re-key in graph order so that the table layout does not depend on walks.
  EmbeddingTable table(cfg.dim);
  for (const auto& id : g.ids()) table.set(id, trained.vector(id));
  return table;
}

}  // namespace socialgat::embed
