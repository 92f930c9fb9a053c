#include "socialgat/gat.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"
#include "socialgat/errors.hpp"

namespace socialgat::gat {

using num::Parameter;
using num::Shape;
using num::Tape;
using num::Tensor;
using num::Var;

std::vector<Parameter*> GatLayer::parameters() {
  std::vector<Parameter*> out;
  for (auto& h : heads) {
    out.push_back(&h.w);
    out.push_back(&h.a);
    out.push_back(&h.b);
  }
  return out;
}

GatLayer init_gat(std::size_t in_dim, std::size_t hidden, std::size_t heads, num::Rng& rng) {
  if (in_dim == 0 || hidden == 0) throw ParameterError("GAT dimensions must be positive");
  if (heads < 1 || heads > 4) {
    throw ParameterError("GAT heads must be in 1..4, got " + std::to_string(heads));
  }
  GatLayer layer;
  layer.in_dim = in_dim;
  layer.hidden = hidden;
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
  const auto uniform = [&](Shape s) {
    Tensor t(s);
    for (double& x : t.data()) x = rng.uniform(-bound, bound);
    return t;
  };
  for (std::size_t k = 0; k < heads; ++k) {
    const std::string p = "gat.head" + std::to_string(k);
    layer.heads.push_back(GatHead{Parameter(p + ".w", uniform(Shape::matrix(in_dim, hidden))),
                                  Parameter(p + ".a", uniform(Shape::vector(2 * hidden))),
                                  Parameter(p + ".b", uniform(Shape::vector(hidden)), false)});
  }
  return layer;
}

Neighborhood gather(const graph::SocialGraph& g, const embed::EmbeddingTable& table,
                    const std::string& target) {
  Neighborhood nb;
  const auto idx = g.index_of(target);
  if (!idx) {
    nb.members.push_back(target);
    const Tensor c = embed::centroid_fallback(table);
    nb.features = c.reshaped(Shape::matrix(1, table.dim()));
    return nb;
  }
  const auto nbrs = g.neighbors(*idx);
  nb.members.reserve(nbrs.size() + 1);
  nb.members.push_back(target);
  for (std::size_t u : nbrs) nb.members.push_back(g.id(u));
  const std::size_t d = table.dim();
  std::vector<double> data;
  data.reserve(nb.members.size() * d);
  for (const auto& m : nb.members) {
    const auto v = table.vector(m);
    data.insert(data.end(), v.begin(), v.end());
  }
  nb.features = Tensor(Shape::matrix(nb.members.size(), d), std::move(data));
  return nb;
}

GatOutput node_update(Tape& tape, GatLayer& layer, Var h) {
  const Shape& s = tape.value(h).shape();
  if (s.rank() != 2 || s[1] != layer.in_dim || s[0] == 0) {
    throw ShapeError("GAT input has shape " + s.str() + ", expected [n x " +
                     std::to_string(layer.in_dim) + "] with n >= 1");
  }
  const std::size_t dp = layer.hidden;
  GatOutput out;
  std::vector<Var> parts;
  for (auto& head : layer.heads) {
    const Var w = tape.param(head.w);
    const Var a = tape.param(head.a);
    const Var b = tape.param(head.b);
    const Var p = tape.matmul(h, w);
    const Var self_score = tape.dot(tape.row(p, 0), tape.slice(a, 0, dp));
    const Var scores = tape.add_scalar(tape.matvec(p, tape.slice(a, dp, dp)), self_score);
    const Var alpha = tape.softmax(tape.leaky_relu(scores, kLeakyAlpha));
    parts.push_back(tape.relu(tape.add(tape.vecmat(alpha, p), b)));
    out.alpha.push_back(alpha);
  }
  out.out = parts.size() == 1 ? parts[0] : tape.concat(parts);
  return out;
}

std::vector<double> attention_weights(GatLayer& layer, std::size_t head, const Tensor& h) {
  if (head >= layer.heads.size()) {
    throw IndexError("head " + std::to_string(head) + " of " + std::to_string(layer.heads.size()));
  }
  Tape tape;
  const GatOutput o = node_update(tape, layer, tape.constant(h));
  return tape.value(o.alpha[head]).values();
}

AttentionRecord extract_attention(GatLayer& layer, const graph::SocialGraph& g,
                                  const embed::EmbeddingTable& table, const std::string& target) {
  const Neighborhood nb = gather(g, table, target);
  Tape tape;
  const GatOutput o = node_update(tape, layer, tape.constant(nb.features));
  AttentionRecord rec;
  rec.target = target;
  for (const Var a : o.alpha) {
    const Tensor& w = tape.value(a);
    std::vector<AttentionEntry> entries;
    for (std::size_t k = 0; k < nb.members.size(); ++k) entries.push_back({nb.members[k], w[k]});
    std::stable_sort(entries.begin(), entries.end(),
                     [](const auto& x, const auto& y) { return x.weight > y.weight; });
    rec.heads.push_back(std::move(entries));
  }
  return rec;
}

std::string attention_json(const AttentionRecord& rec) {
  nlohmann::json heads = nlohmann::json::array();
  for (const auto& h : rec.heads) {
    nlohmann::json list = nlohmann::json::array();
    for (const auto& e : h) list.push_back({{"neighbor", e.neighbor}, {"weight", e.weight}});
    heads.push_back(std::move(list));
  }
  return nlohmann::json{{"schema_version", 1}, {"target", rec.target}, {"heads", heads}}.dump();
}

}  // namespace socialgat::gat
