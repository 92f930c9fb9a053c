#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "socialgat/embed.hpp"
#include "socialgat/graph.hpp"
#include "socialgat/numcore/rng.hpp"
#include "socialgat/numcore/tape.hpp"

namespace socialgat::gat {

inline constexpr double kLeakyAlpha = 0.2;

struct GatHead {
  num::Parameter w;  // [d x d']
  num::Parameter a;  // [2d']: first half scores the target, second half the neighbor
  num::Parameter b;  // [d']
};

struct GatLayer {
  std::size_t in_dim = 0;
  std::size_t hidden = 0;
  std::vector<GatHead> heads;

  std::size_t out_dim() const noexcept { return hidden * heads.size(); }
  std::vector<num::Parameter*> parameters();
};

/// Independent per-head parameters, uniform in [-1/sqrt(d'), 1/sqrt(d')].
GatLayer init_gat(std::size_t in_dim, std::size_t hidden, std::size_t heads, num::Rng& rng);

/// Rows of the node matrix fed to the layer: the target first, then its
/// neighbors in index order. `members[k]` names row k.
struct Neighborhood {
  std::vector<std::string> members;
  num::Tensor features;  // [(1 + |N(v)|) x d]
};

/// Target v's neighborhood from graph and table. A target missing from the
/// graph becomes a virtual node with only its self-loop, seeded by the table
/// centroid. Missing vectors for graph nodes raise LookupError.
Neighborhood gather(const graph::SocialGraph& g, const embed::EmbeddingTable& table,
                    const std::string& target);

struct GatOutput {
  num::Var out;                 // [heads * d']
  std::vector<num::Var> alpha;  // per head, [rows]
};

/// One-hop attention update of row 0 of `h`:
/// per head, P = H W, e = leaky_relu(a1 . P_0 + P a2), alpha = softmax(e),
/// out = relu(alpha^T P + b); heads concatenated.
GatOutput node_update(num::Tape& tape, GatLayer& layer, num::Var h);

struct AttentionEntry {
  std::string neighbor;
  double weight = 0.0;
};

struct AttentionRecord {
  std::string target;
  std::vector<std::vector<AttentionEntry>> heads;  // each sorted by weight, descending
};

/// Normalized weights of `head` over the rows of `h`, in row order.
std::vector<double> attention_weights(GatLayer& layer, std::size_t head, const num::Tensor& h);

AttentionRecord extract_attention(GatLayer& layer, const graph::SocialGraph& g,
                                  const embed::EmbeddingTable& table, const std::string& target);

/// {"schema_version": 1, "target": ..., "heads": [[{"neighbor": ..., "weight": ...}, ...], ...]}
std::string attention_json(const AttentionRecord& rec);

}  // namespace socialgat::gat
