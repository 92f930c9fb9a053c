#include <cmath>
#include <set>

#include "doctest.h"
#include "socialgat/errors.hpp"
#include "socialgat/synth.hpp"
#include "socialgat/train.hpp"

using namespace socialgat;
using synth::SynthSpec;

namespace {

SynthSpec small_spec(double h, std::uint64_t seed) {
  SynthSpec s;
  s.n_users = 600;
  s.homophily = h;
  s.seed = seed;
  return s;
}

}  // namespace

TEST_CASE("label overlap probability matches a sampling estimate") {
  SynthSpec s;
  s.n_classes = 3;
  s.author_signal = 0.7;
  s.tweets_per_user = 3;
  num::Rng rng(5);
  const auto draw_set = [&](std::size_t c) {
    std::set<std::size_t> labels;
    for (std::size_t t = 0; t < s.tweets_per_user; ++t) {
      if (rng.bernoulli(s.author_signal)) {
        labels.insert(c);
      } else {
        const std::size_t o = rng.below(2);
        labels.insert(o < c ? o : o + 1);
      }
    }
    return labels;
  };
  for (auto [a, b] : {std::pair<std::size_t, std::size_t>{0, 0}, {0, 2}}) {
    const int trials = 200000;
    int hits = 0;
    for (int i = 0; i < trials; ++i) {
      const auto x = draw_set(a);
      const auto y = draw_set(b);
      bool meet = false;
      for (auto l : x) meet = meet || y.count(l);
      hits += meet;
    }
    CHECK(std::abs(synth::label_overlap_probability(a, b, s) - hits / double(trials)) < 0.005);
  }
  s.author_signal = 1.0;
  CHECK(synth::label_overlap_probability(1, 1, s) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(synth::label_overlap_probability(0, 1, s) == 0.0);
}

TEST_CASE("fully homophilous spec yields homophily 1") {
  SynthSpec s = small_spec(1.0, 3);
  s.author_signal = 1.0;
  const auto d = synth::synthesize(s);
  const auto g = d.graph();
  CHECK(g.edge_count() > 0);
  CHECK(graph::homophily(g) == 1.0);
  for (const auto& [u, v] : g.edges())
    CHECK(d.community.at(g.id(u)) % 2 == d.community.at(g.id(v)) % 2);
}

TEST_CASE("measured homophily tracks the request") {
  for (double h : {0.9, 0.6}) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      SynthSpec s = small_spec(h, seed);
      s.n_users = 2000;
      const auto d = synth::synthesize(s);
      const auto measured = graph::homophily(d.graph());
      REQUIRE(measured.has_value());
      CHECK(std::abs(*measured - h) <= 0.05);
    }
  }
}

TEST_CASE("infeasible homophily names the feasible range") {
  SynthSpec s = small_spec(0.05, 1);
  try {
    synth::solve_edge_rates(s);
    FAIL("expected an error");
  } catch (const ParameterError& e) {
    CHECK(std::string(e.what()).find("feasible range is [") != std::string::npos);
  }
  s.homophily = 1.0;  // author_signal 0.9 leaves some same-community pairs disjoint
  CHECK_THROWS_AS(synth::solve_edge_rates(s), ParameterError);
  s.homophily = 0.9;
  s.author_signal = 1.5;
  CHECK_THROWS_AS(synth::solve_edge_rates(s), ParameterError);
}

TEST_CASE("generator is seeded and self-consistent") {
  const auto a = synth::synthesize(small_spec(0.9, 7));
  const auto b = synth::synthesize(small_spec(0.9, 7));
  CHECK(text::format_corpus(a.corpus) == text::format_corpus(b.corpus));
  CHECK(a.events.size() == b.events.size());
  CHECK(a.words == b.words);
  const auto c = synth::synthesize(small_spec(0.9, 8));
  CHECK(text::format_corpus(a.corpus) != text::format_corpus(c.corpus));

  CHECK(a.corpus.examples.size() == 1200);
  CHECK(a.corpus.count(text::Split::kTrain) == 960);
  CHECK(a.timelines.size() == 600);
  // Withheld community: its test tweets use only noise words.
  const std::size_t first_noise = 2 * 20;
  for (const auto& ex : a.corpus.examples) {
    if (ex.split != text::Split::kTest || a.community.at(ex.author) != 0) continue;
    for (const auto& tok : ex.tokens) CHECK(std::stoul(tok.substr(1)) >= first_noise);
  }
  for (const auto& ex : a.corpus.examples)
    for (const auto& tok : ex.tokens) CHECK(a.words.contains(tok));
}

TEST_CASE("text signal 1 lets LING solve the task") {
  SynthSpec s = small_spec(0.9, 2);
  s.text_signal = 1.0;
  s.withheld_communities = 0;
  s.word_dim = 8;
  const auto d = synth::synthesize(s);
  model::ModelConfig mc;
  mc.variant = model::Variant::kLing;
  mc.task = d.corpus.task;
  mc.text_hidden = 8;
  mc.clf_hidden = 8;
  model::Model m(mc, d.words, {}, 1);
  train::TrainConfig tc;
  tc.max_epochs = 5;
  tc.batch_size = 16;
  tc.learning_rate = 0.01;
  CHECK(train::train_model(tc, m, d.corpus).test_metric > 0.95);
}

TEST_CASE("planted-signal fixture layout") {
  synth::PlantedSpec ps;
  ps.targets = 50;
  ps.distractors = 40;
  const auto d = synth::planted_signal(ps);
  const auto g = d.graph();
  REQUIRE(d.features.has_value());
  for (const auto& [target, inf] : d.informant) {
    const auto t = *g.index_of(target);
    CHECK(g.degree(t) == 6);
    CHECK(g.adjacent(t, *g.index_of(inf)));
    CHECK(d.features->vector(inf)[0] > 0.5);
    for (std::size_t nb : g.neighbors(t)) {
      if (g.id(nb) != inf) CHECK(d.features->vector(g.id(nb))[0] < 0.5);
    }
  }
  for (const auto& ex : d.corpus.examples) {
    if (auto it = d.informant.find(ex.author); it != d.informant.end())
      CHECK(ex.label == d.community.at(it->second));
  }
  ps.distractors_per_target = 4;
  CHECK_THROWS_AS(synth::planted_signal(ps), ParameterError);
}

TEST_CASE("pca2d") {
  embed::EmbeddingTable same(4);
  for (int i = 0; i < 5; ++i) same.set("s" + std::to_string(i), std::vector<double>{1, 2, 3, 4});
  for (const auto& p : embed::pca2d(same)) CHECK((p[0] == 0.0 && p[1] == 0.0));

  num::Rng rng(3);
  embed::EmbeddingTable flat(2);
  for (int i = 0; i < 30; ++i) flat.set("p" + std::to_string(i), std::vector<double>{rng.normal() * 3, rng.normal()});
  const auto proj = embed::pca2d(flat);
  for (std::size_t i = 0; i < 30; ++i) {
    for (std::size_t j = i + 1; j < 30; ++j) {
      const auto a = flat.vector(flat.ids()[i]);
      const auto b = flat.vector(flat.ids()[j]);
      const double d0 = std::hypot(a[0] - b[0], a[1] - b[1]);
      const double d1 = std::hypot(proj[i][0] - proj[j][0], proj[i][1] - proj[j][1]);
      CHECK(std::abs(d0 - d1) < 1e-9);
    }
  }
  // The first component carries the larger variance.
  double v0 = 0, v1 = 0;
  for (const auto& p : proj) {
    v0 += p[0] * p[0];
    v1 += p[1] * p[1];
  }
  CHECK(v0 >= v1);

  embed::EmbeddingTable two(3);
  two.set("a", std::vector<double>{1, 0, 0});
  two.set("b", std::vector<double>{0, 1, 0});
  CHECK_THROWS_AS(embed::pca2d(two), ParameterError);
}
