#include <cmath>
#include <filesystem>
#include <map>

#include "doctest.h"
#include "socialgat/embed.hpp"
#include "socialgat/errors.hpp"
#include "socialgat/io.hpp"
#include "socialgat/numcore/rng.hpp"

using namespace socialgat;
using namespace socialgat::embed;
using graph::NodeMeta;
using graph::SocialGraph;

namespace {

SocialGraph make_graph(const std::vector<std::string>& ids,
                       const std::vector<std::pair<std::string, std::string>>& edges) {
  std::map<std::string, NodeMeta> nodes;
  for (const auto& id : ids) nodes[id] = NodeMeta{};
  return SocialGraph::from_edges(std::move(nodes), edges);
}

// Two 5-cliques a0..a4 and b0..b4, optionally joined by a0-b0.
SocialGraph two_cliques(bool bridge) {
  std::vector<std::string> ids;
  std::vector<std::pair<std::string, std::string>> edges;
  for (char side : {'a', 'b'}) {
    for (int i = 0; i < 5; ++i) ids.push_back(std::string(1, side) + std::to_string(i));
    for (int i = 0; i < 5; ++i)
      for (int j = i + 1; j < 5; ++j)
        edges.emplace_back(std::string(1, side) + std::to_string(i),
                           std::string(1, side) + std::to_string(j));
  }
  if (bridge) edges.emplace_back("a0", "b0");
  return make_graph(ids, edges);
}

std::pair<double, double> intra_inter(const EmbeddingTable& t) {
  double intra = 0, inter = 0;
  int ni = 0, nx = 0;
  const auto& ids = t.ids();
  for (std::size_t i = 0; i < ids.size(); ++i) {
    for (std::size_t j = i + 1; j < ids.size(); ++j) {
      const double c = cosine(t.vector(ids[i]), t.vector(ids[j]));
      if (ids[i][0] == ids[j][0]) {
        intra += c;
        ++ni;
      } else {
        inter += c;
        ++nx;
      }
    }
  }
  return {intra / ni, inter / nx};
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("socialgat_embed_" + name);
}

}  // namespace

TEST_CASE("next_step_distribution applies return and in-out biases") {
  const SocialGraph g = make_graph({"A", "B", "C"}, {{"A", "B"}, {"B", "C"}});
  const std::size_t a = *g.index_of("A"), b = *g.index_of("B"), c = *g.index_of("C");

  auto uniform = next_step_distribution(g, a, b, WalkConfig{});
  REQUIRE(uniform.size() == 2);
  for (const auto& [x, w] : uniform) CHECK(w == doctest::Approx(0.5).epsilon(1e-15));

  WalkConfig biased;
  biased.p = 2.0;
  biased.q = 0.5;
  std::map<std::size_t, double> d;
  for (const auto& [x, w] : next_step_distribution(g, a, b, biased)) d[x] = w;
  CHECK(std::abs(d[a] - 0.2) < 1e-12);
  CHECK(std::abs(d[c] - 0.8) < 1e-12);

  const SocialGraph star = make_graph({"h", "1", "2", "3", "4"},
                                      {{"h", "1"}, {"h", "2"}, {"h", "3"}, {"h", "4"}});
  const auto start = next_step_distribution(star, std::nullopt, *star.index_of("h"), biased);
  REQUIRE(start.size() == 4);
  for (const auto& [x, w] : start) CHECK(w == 0.25);

  CHECK_THROWS_AS(next_step_distribution(make_graph({"z"}, {}), std::nullopt, 0, WalkConfig{}),
                  EmptyNeighborhoodError);
}

TEST_CASE("next_step_distribution sums to one and is 1/degree when unbiased") {
  num::Rng rng(3);
  std::vector<std::string> ids;
  for (int i = 0; i < 30; ++i) ids.push_back("n" + std::to_string(i));
  std::vector<std::pair<std::string, std::string>> edges;
  for (int i = 0; i < 30; ++i)
    for (int j = i + 1; j < 30; ++j)
      if (rng.bernoulli(0.2)) edges.emplace_back(ids[i], ids[j]);
  const SocialGraph g = make_graph(ids, edges);
  WalkConfig biased;
  biased.p = 0.3;
  biased.q = 4.0;
  for (std::size_t cur = 0; cur < g.node_count(); ++cur) {
    if (g.degree(cur) == 0) continue;
    for (std::size_t prev : g.neighbors(cur)) {
      double sum = 0;
      for (const auto& [x, w] : next_step_distribution(g, prev, cur, biased)) sum += w;
      CHECK(std::abs(sum - 1.0) < 1e-12);
      for (const auto& [x, w] : next_step_distribution(g, prev, cur, WalkConfig{})) {
        CHECK(w == 1.0 / static_cast<double>(g.degree(cur)));
      }
    }
  }
}

TEST_CASE("generate_walks basics") {
  const SocialGraph lone = make_graph({"x"}, {});
  num::Rng rng(1);
  WalkConfig cfg;
  cfg.walks_per_node = 3;
  const auto walks = generate_walks(lone, cfg, rng);
  REQUIRE(walks.size() == 3);
  for (const auto& w : walks) CHECK(w.size() == 1);

  const SocialGraph g = two_cliques(true);
  num::Rng r1(9), r2(9);
  CHECK(generate_walks(g, cfg, r1) == generate_walks(g, cfg, r2));
  for (const auto& w : generate_walks(g, cfg, r1)) {
    CHECK(w.size() == cfg.walk_length);
    for (std::size_t i = 1; i < w.size(); ++i) CHECK(g.adjacent(w[i - 1], w[i]));
  }

  cfg.walk_length = 0;
  CHECK_THROWS_AS(generate_walks(g, cfg, rng), ParameterError);
}

TEST_CASE("unbiased walks on a cycle step uniformly") {
  std::vector<std::string> ids;
  std::vector<std::pair<std::string, std::string>> edges;
  const int n = 10;
  for (int i = 0; i < n; ++i) ids.push_back("c" + std::to_string(i));
  for (int i = 0; i < n; ++i) edges.emplace_back(ids[i], ids[(i + 1) % n]);
  const SocialGraph g = make_graph(ids, edges);
  WalkConfig cfg;
  cfg.walk_length = 101;
  cfg.walks_per_node = 100;
  num::Rng rng(17);
  const auto walks = generate_walks(g, cfg, rng);
  std::size_t forward = 0, steps = 0;
  for (const auto& w : walks) {
    for (std::size_t i = 1; i < w.size(); ++i, ++steps) {
      if (w[i] == (w[i - 1] + 1) % n) ++forward;
    }
  }
  CHECK(steps == 100000);
  CHECK(std::abs(static_cast<double>(forward) / steps - 0.5) < 0.02);
}

TEST_CASE("skip-gram separates disjoint cliques") {
  const SocialGraph g = two_cliques(false);
  WalkConfig wc;
  wc.walk_length = 20;
  wc.walks_per_node = 10;
  SkipgramConfig sc;
  sc.dim = 16;
  sc.window = 3;
  sc.epochs = 5;
  num::Rng rng(5);
  const EmbeddingTable t = node2vec(g, wc, sc, rng);
  const auto [intra, inter] = intra_inter(t);
  CHECK(intra > inter);
}

TEST_CASE("node2vec covers every node, separates bridged cliques, reproduces") {
  std::map<std::string, NodeMeta> nodes;
  nodes["a"] = NodeMeta{};
  nodes["b"] = NodeMeta{};
  nodes["ext"] = NodeMeta{true, {}};
  const SocialGraph small = SocialGraph::from_edges(nodes, std::vector<std::pair<std::string, std::string>>{
                                                               {"a", "b"}, {"b", "ext"}});
  WalkConfig wc;
  wc.walk_length = 10;
  wc.walks_per_node = 2;
  SkipgramConfig sc;
  sc.epochs = 1;
  num::Rng rng(2);
  const EmbeddingTable full = node2vec(small, wc, sc, rng);
  CHECK(full.size() == 3);
  CHECK(full.dim() == 200);
  CHECK(full.contains("ext"));

  const SocialGraph g = two_cliques(true);
  wc.walk_length = 20;
  wc.walks_per_node = 10;
  sc.dim = 16;
  sc.window = 3;
  sc.epochs = 5;
  num::Rng r1(8), r2(8);
  const EmbeddingTable t1 = node2vec(g, wc, sc, r1);
  const EmbeddingTable t2 = node2vec(g, wc, sc, r2);
  CHECK(t1 == t2);
  const auto [intra, inter] = intra_inter(t1);
  CHECK(intra > inter);
}

TEST_CASE("skip-gram epochs=0 returns the initialization") {
  const std::vector<std::vector<std::string>> corpus = {{"b", "a", "c"}, {"c", "a"}};
  SkipgramConfig sc;
  sc.dim = 4;
  sc.epochs = 0;
  num::Rng r1(11), r2(11);
  const EmbeddingTable trained = train_skipgram(corpus, sc, r1);
  const std::vector<std::string> sorted = {"a", "b", "c"};
  CHECK(trained == uniform_table(sorted, 4, r2));
}

TEST_CASE("skip-gram min_count filtering and empty corpus") {
  const std::vector<std::vector<std::string>> corpus = {{"a", "a", "b"}};
  SkipgramConfig sc;
  sc.dim = 4;
  sc.min_count = 2;
  sc.epochs = 1;
  num::Rng rng(1);
  const EmbeddingTable t = train_skipgram(corpus, sc, rng);
  CHECK(t.contains("a"));
  CHECK_FALSE(t.contains("b"));
  sc.min_count = 3;
  CHECK_THROWS_AS(train_skipgram(corpus, sc, rng), ParameterError);
  CHECK_THROWS_AS(train_skipgram(std::vector<std::vector<std::string>>{}, sc, rng), ParameterError);
}

TEST_CASE("skip-gram loss is finite and smoothed loss does not increase") {
  const std::vector<std::vector<std::string>> sentences = {
      {"the", "cat", "sat", "on", "the", "mat"},
      {"the", "dog", "sat", "on", "the", "log"},
      {"a", "cat", "and", "a", "dog", "met"},
      {"birds", "fly", "over", "the", "log"},
  };
  std::vector<std::vector<std::string>> corpus;
  for (int r = 0; r < 10; ++r) corpus.insert(corpus.end(), sentences.begin(), sentences.end());
  SkipgramConfig sc;
  sc.dim = 8;
  sc.window = 2;
  sc.epochs = 30;
  num::Rng rng(4);
  std::vector<double> losses;
  train_skipgram(corpus, sc, rng, &losses);
  REQUIRE(losses.size() == 30);
  for (double l : losses) CHECK(std::isfinite(l));
  std::vector<double> smooth;
  for (std::size_t i = 0; i + 5 <= losses.size(); i += 5) {
    double s = 0;
    for (std::size_t k = i; k < i + 5; ++k) s += losses[k];
    smooth.push_back(s / 5);
  }
  for (std::size_t i = 1; i < smooth.size(); ++i) CHECK(smooth[i] <= smooth[i - 1]);
}

TEST_CASE("PV-DBOW: identical timelines end up closest") {
  std::map<std::string, std::vector<std::string>> docs;
  const std::vector<std::string> shared = {"red", "green", "blue", "red", "cyan", "green",
                                           "blue", "red", "cyan", "green", "blue", "cyan"};
  docs["u1"] = shared;
  docs["u2"] = shared;
  docs["v"] = {"one", "two", "three", "four", "one", "two", "three", "four", "one", "two"};
  SkipgramConfig sc;
  sc.dim = 16;
  sc.epochs = 40;
  sc.min_count = 1;
  num::Rng rng(6);
  const EmbeddingTable t = train_pv_dbow(docs, sc, rng);
  const double same = cosine(t.vector("u1"), t.vector("u2"));
  CHECK(same > cosine(t.vector("u1"), t.vector("v")));
  CHECK(same > cosine(t.vector("u2"), t.vector("v")));

  sc.epochs = 0;
  num::Rng r1(6), r2(6);
  const std::vector<std::string> authors = {"u1", "u2", "v"};
  CHECK(train_pv_dbow(docs, sc, r1) == uniform_table(authors, 16, r2));
}

TEST_CASE("PV-DBOW: topic clusters are separable and empty authors are excluded") {
  num::Rng gen(12);
  std::map<std::string, std::vector<std::string>> docs;
  std::map<std::string, int> topic;
  for (int a = 0; a < 40; ++a) {
    const int t = a % 2;
    const std::string id = "author" + std::to_string(a);
    topic[id] = t;
    for (int i = 0; i < 30; ++i) {
      docs[id].push_back((t ? "sport" : "music") + std::to_string(gen.below(15)));
    }
  }
  docs["silent"] = {"rareword"};
  SkipgramConfig sc = pv_defaults();
  sc.dim = 16;
  sc.epochs = 20;
  num::Rng rng(13);
  std::vector<double> losses;
  const EmbeddingTable t = train_pv_dbow(docs, sc, rng, &losses);
  CHECK_FALSE(t.contains("silent"));
  CHECK(t.size() == 40);
  for (double l : losses) CHECK(std::isfinite(l));

  std::vector<std::vector<double>> centroid(2, std::vector<double>(16, 0.0));
  std::vector<int> count(2, 0);
  for (const auto& [id, k] : topic) {
    const auto v = t.vector(id);
    for (std::size_t d = 0; d < 16; ++d) centroid[k][d] += v[d];
    ++count[k];
  }
  for (int k = 0; k < 2; ++k)
    for (double& x : centroid[k]) x /= count[k];
  int correct = 0;
  for (const auto& [id, k] : topic) {
    const auto v = t.vector(id);
    const int nearest = cosine(v, centroid[0]) >= cosine(v, centroid[1]) ? 0 : 1;
    correct += nearest == k;
  }
  CHECK(static_cast<double>(correct) / 40.0 > 0.9);
}

TEST_CASE("pv_defaults") {
  const SkipgramConfig sc = pv_defaults();
  CHECK(sc.epochs == 30);
  CHECK(sc.min_count == 5);
  CHECK(sc.dim == 200);
}

TEST_CASE("random_author_embeddings") {
  const std::vector<std::string> ids = {"p", "q"};
  num::Rng r1(31), r2(31);
  const EmbeddingTable t = random_author_embeddings(ids, 200, r1);
  CHECK(t.trainable());
  CHECK(t.vector("p").size() == 200);
  CHECK(t.tensor("p") != t.tensor("q"));
  for (double x : t.vector("q")) CHECK(std::abs(x) <= 0.5 / 200);
  CHECK(t == random_author_embeddings(ids, 200, r2));
}

TEST_CASE("centroid_fallback") {
  EmbeddingTable t(2);
  t.set("x", std::vector<double>{1, 0});
  t.set("y", std::vector<double>{0, 1});
  CHECK(centroid_fallback(t) == num::Tensor::vector({0.5, 0.5}));
  CHECK(t.lookup_or_centroid("missing") == num::Tensor::vector({0.5, 0.5}));
  CHECK(t.lookup_or_centroid("x") == num::Tensor::vector({1, 0}));

  EmbeddingTable single(3);
  single.set("s", std::vector<double>{0.1, -2, 7});
  CHECK(centroid_fallback(single) == num::Tensor::vector({0.1, -2, 7}));

  CHECK_THROWS_AS(centroid_fallback(EmbeddingTable(4)), StateError);

  num::Rng rng(44);
  EmbeddingTable big(7);
  std::vector<double> oracle(7, 0.0);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> v(7);
    for (double& x : v) x = rng.normal();
    big.set("r" + std::to_string(i), v);
  }
  // Recompute column by column in reverse insertion order.
  for (std::size_t d = 0; d < 7; ++d) {
    long double s = 0;
    for (int i = 99; i >= 0; --i) s += big.vector("r" + std::to_string(i))[d];
    oracle[d] = static_cast<double>(s / 100);
  }
  const num::Tensor c = centroid_fallback(big);
  for (std::size_t d = 0; d < 7; ++d) CHECK(std::abs(c[d] - oracle[d]) < 1e-12);
}

TEST_CASE("word vector files") {
  const auto path = temp_path("cat.txt");
  io::write_file_atomic(path, "cat 1.0 2.0\n");
  const EmbeddingTable t = load_word_vectors(path);
  CHECK(t.dim() == 2);
  CHECK(t.tensor("cat") == num::Tensor::vector({1, 2}));

  io::write_file_atomic(path, "cat 1.0 2.0\ndog 1.0\n");
  try {
    load_word_vectors(path);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }

  num::Rng rng(3);
  EmbeddingTable src(5);
  for (int i = 0; i < 20; ++i) {
    std::vector<double> v(5);
    for (double& x : v) x = rng.normal() * 1e-3 + rng.uniform();
    src.set("w" + std::to_string(i), v);
  }
  write_embeddings(src, path);
  CHECK(load_word_vectors(path) == src);
  std::filesystem::remove(path);

  CHECK_THROWS_AS(load_word_vectors(temp_path("does_not_exist.txt")), IoError);
}
