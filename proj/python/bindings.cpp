#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "socialgat/embed.hpp"
#include "socialgat/errors.hpp"
#include "socialgat/eval.hpp"
#include "socialgat/graph.hpp"
#include "socialgat/model.hpp"
#include "socialgat/synth.hpp"
#include "socialgat/train.hpp"

namespace py = pybind11;
using namespace socialgat;

namespace {

py::dict run_result(const train::RunResult& r) {
  py::dict d;
  d["seed"] = r.seed;
  d["best_val"] = r.best_val;
  d["test_metric"] = r.test_metric;
  d["metric_name"] = eval::task_metric_name(r.test_report.task);
  d["epochs_trained"] = r.epochs_trained;
  d["best_epoch"] = r.best_epoch;
  d["val_history"] = r.val_history;
  d["train_loss"] = r.train_loss;
  return d;
}

graph::SocialGraph graph_from(const std::vector<std::string>& nodes,
                              const std::vector<std::pair<std::string, std::string>>& edges,
                              const std::map<std::string, std::vector<std::size_t>>& labels) {
  std::map<std::string, graph::NodeMeta> meta;
  for (const auto& id : nodes) meta[id] = graph::NodeMeta{};
  for (const auto& [id, ls] : labels) {
    auto& m = meta[id];
    m.tweet_labels = ls;
    std::sort(m.tweet_labels.begin(), m.tweet_labels.end());
  }
  return graph::SocialGraph::from_edges(std::move(meta), edges);
}

std::size_t node_index(const graph::SocialGraph& g, const std::string& id) {
  const auto i = g.index_of(id);
  if (!i) throw LookupError("unknown node '" + id + "'");
  return *i;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Socially-aware text classification with graph attention";
  m.attr("__version__") = SOCIALGAT_VERSION;

  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);

  // Metrics and significance.
  m.def("avg_rec", py::overload_cast<double, double, double>(&eval::avg_rec), py::arg("r_positive"),
        py::arg("r_negative"), py::arg("r_neutral"));
  m.def("f_avg", py::overload_cast<double, double>(&eval::f_avg), py::arg("f_favor"), py::arg("f_against"));
  m.def("f1_from", &eval::f1_from, py::arg("precision"), py::arg("recall"));
  m.def("mean", [](const std::vector<double>& xs) { return eval::mean(xs); });
  m.def("sample_std", [](const std::vector<double>& xs) { return eval::sample_std(xs); });
  m.def("t_two_sided_p", &eval::t_two_sided_p, py::arg("t"), py::arg("df"));

  py::class_<eval::WelchResult>(m, "WelchResult")
      .def_readonly("t", &eval::WelchResult::t)
      .def_readonly("df", &eval::WelchResult::df)
      .def_readonly("p", &eval::WelchResult::p)
      .def("__repr__", [](const eval::WelchResult& r) {
        return "WelchResult(t=" + std::to_string(r.t) + ", df=" + std::to_string(r.df) +
               ", p=" + std::to_string(r.p) + ")";
      });
  m.def("welch_t_test", [](const std::vector<double>& a, const std::vector<double>& b) {
    return eval::welch_t_test(a, b);
  });

  // Graphs.
  m.def("density", py::overload_cast<std::size_t, std::size_t>(&graph::density), py::arg("nodes"),
        py::arg("edges"));

  py::class_<graph::SocialGraph>(m, "SocialGraph")
      .def(py::init(&graph_from), py::arg("nodes"), py::arg("edges"),
           py::arg("labels") = std::map<std::string, std::vector<std::size_t>>{},
           "Undirected graph; `labels` maps a user to the labels of its tweets.")
      .def_property_readonly("node_count", &graph::SocialGraph::node_count)
      .def_property_readonly("edge_count", &graph::SocialGraph::edge_count)
      .def_property_readonly("ids", &graph::SocialGraph::ids)
      .def("__contains__", [](const graph::SocialGraph& g, const std::string& id) { return g.contains(id); })
      .def("degree", [](const graph::SocialGraph& g, const std::string& id) { return g.degree(node_index(g, id)); })
      .def("neighbors",
           [](const graph::SocialGraph& g, const std::string& id) {
             std::vector<std::string> out;
             for (std::size_t v : g.neighbors(node_index(g, id))) out.push_back(g.id(v));
             return out;
           })
      .def("density", [](const graph::SocialGraph& g) { return graph::density(g); })
      .def("homophily", [](const graph::SocialGraph& g) { return graph::homophily(g); })
      .def("components", [](const graph::SocialGraph& g) { return graph::connected_components(g); })
      .def_static("read", &graph::read_graph, py::arg("edge_list"), py::arg("meta"));

  // Embeddings.
  py::class_<embed::EmbeddingTable>(m, "EmbeddingTable")
      .def(py::init<std::size_t>(), py::arg("dim"))
      .def_property_readonly("dim", &embed::EmbeddingTable::dim)
      .def_property_readonly("ids", &embed::EmbeddingTable::ids)
      .def("__len__", &embed::EmbeddingTable::size)
      .def("__contains__", [](const embed::EmbeddingTable& t, const std::string& id) { return t.contains(id); })
      .def("__getitem__",
           [](const embed::EmbeddingTable& t, const std::string& id) {
             if (!t.contains(id)) throw py::key_error(id);
             const auto v = t.vector(id);
             return std::vector<double>(v.begin(), v.end());
           })
      .def("__setitem__", [](embed::EmbeddingTable& t, const std::string& id,
                             const std::vector<double>& v) { t.set(id, v); })
      .def_static("read", &embed::load_word_vectors, py::arg("path"))
      .def("write", [](const embed::EmbeddingTable& t, const std::filesystem::path& p) { embed::write_embeddings(t, p); });
  m.def("cosine", [](const std::vector<double>& a, const std::vector<double>& b) { return embed::cosine(a, b); });

  m.def(
      "node2vec",
      [](const graph::SocialGraph& g, std::uint64_t seed, double p, double q, std::size_t walk_length,
         std::size_t walks_per_node, std::size_t dim, std::size_t window, std::size_t epochs) {
        embed::WalkConfig wc;
        wc.p = p;
        wc.q = q;
        wc.walk_length = walk_length;
        wc.walks_per_node = walks_per_node;
        embed::SkipgramConfig sc;
        sc.dim = dim;
        sc.window = window;
        sc.epochs = epochs;
        num::Rng rng(seed);
        py::gil_scoped_release release;
        return embed::node2vec(g, wc, sc, rng);
      },
      py::arg("graph"), py::kw_only(), py::arg("seed"), py::arg("p") = 1.0, py::arg("q") = 1.0,
      py::arg("walk_length") = 80, py::arg("walks_per_node") = 10, py::arg("dim") = 200, py::arg("window") = 10,
      py::arg("epochs") = 20);

  // Synthetic data.
  py::class_<synth::SynthSpec>(m, "SynthSpec")
      .def(py::init<>())
      .def_readwrite("n_users", &synth::SynthSpec::n_users)
      .def_readwrite("n_classes", &synth::SynthSpec::n_classes)
      .def_readwrite("task", &synth::SynthSpec::task)
      .def_readwrite("communities", &synth::SynthSpec::communities)
      .def_readwrite("homophily", &synth::SynthSpec::homophily)
      .def_readwrite("text_signal", &synth::SynthSpec::text_signal)
      .def_readwrite("author_signal", &synth::SynthSpec::author_signal)
      .def_readwrite("avg_degree", &synth::SynthSpec::avg_degree)
      .def_readwrite("tweets_per_user", &synth::SynthSpec::tweets_per_user)
      .def_readwrite("tokens_per_tweet", &synth::SynthSpec::tokens_per_tweet)
      .def_readwrite("class_vocab", &synth::SynthSpec::class_vocab)
      .def_readwrite("noise_vocab", &synth::SynthSpec::noise_vocab)
      .def_readwrite("timeline_posts", &synth::SynthSpec::timeline_posts)
      .def_readwrite("withheld_communities", &synth::SynthSpec::withheld_communities)
      .def_readwrite("word_dim", &synth::SynthSpec::word_dim)
      .def_readwrite("seed", &synth::SynthSpec::seed)
      .def("validate", &synth::SynthSpec::validate);

  py::class_<synth::EdgeRates>(m, "EdgeRates")
      .def_readonly("intra", &synth::EdgeRates::intra)
      .def_readonly("inter", &synth::EdgeRates::inter)
      .def_readonly("expected_homophily", &synth::EdgeRates::expected_homophily)
      .def_readonly("homophily_min", &synth::EdgeRates::homophily_min)
      .def_readonly("homophily_max", &synth::EdgeRates::homophily_max);
  m.def("solve_edge_rates", &synth::solve_edge_rates, py::arg("spec"));

  py::class_<synth::SynthData>(m, "SynthData")
      .def_property_readonly("task", [](const synth::SynthData& d) { return text::task_name(d.corpus.task); })
      .def_property_readonly("n_tweets", [](const synth::SynthData& d) { return d.corpus.examples.size(); })
      .def_property_readonly("n_events", [](const synth::SynthData& d) { return d.events.size(); })
      .def_property_readonly("community", [](const synth::SynthData& d) { return d.community; })
      .def_property_readonly("rates", [](const synth::SynthData& d) { return d.rates; })
      .def_property_readonly("words", [](const synth::SynthData& d) { return d.words; })
      .def_property_readonly("features", [](const synth::SynthData& d) { return d.features; })
      .def_property_readonly("informant", [](const synth::SynthData& d) { return d.informant; })
      .def("split_sizes",
           [](const synth::SynthData& d) {
             py::dict out;
             out["train"] = d.corpus.count(text::Split::kTrain);
             out["val"] = d.corpus.count(text::Split::kVal);
             out["test"] = d.corpus.count(text::Split::kTest);
             return out;
           })
      .def("graph", &synth::SynthData::graph)
      .def("write", [](const synth::SynthData& d, const std::filesystem::path& dir) {
        synth::write_synth(d, dir, "{}");
      });
  m.def("synthesize", [](const synth::SynthSpec& s) {
    py::gil_scoped_release release;
    return synth::synthesize(s);
  });

  py::class_<synth::PlantedSpec>(m, "PlantedSpec")
      .def(py::init<>())
      .def_readwrite("targets", &synth::PlantedSpec::targets)
      .def_readwrite("informants_per_class", &synth::PlantedSpec::informants_per_class)
      .def_readwrite("distractors", &synth::PlantedSpec::distractors)
      .def_readwrite("distractors_per_target", &synth::PlantedSpec::distractors_per_target)
      .def_readwrite("feature_dim", &synth::PlantedSpec::feature_dim)
      .def_readwrite("feature_noise", &synth::PlantedSpec::feature_noise)
      .def_readwrite("seed", &synth::PlantedSpec::seed);
  m.def("planted_signal", &synth::planted_signal, py::arg("spec"));

  // Models and training.
  py::class_<model::ModelConfig>(m, "ModelConfig")
      .def(py::init<>())
      .def_property(
          "variant", [](const model::ModelConfig& c) { return std::string(model::variant_name(c.variant)); },
          [](model::ModelConfig& c, const std::string& v) { c.variant = model::parse_variant(v); })
      .def_property(
          "task", [](const model::ModelConfig& c) { return std::string(text::task_name(c.task)); },
          [](model::ModelConfig& c, const std::string& t) { c.task = text::parse_task(t); })
      .def_readwrite("text_hidden", &model::ModelConfig::text_hidden)
      .def_readwrite("author_dim", &model::ModelConfig::author_dim)
      .def_readwrite("gat_hidden", &model::ModelConfig::gat_hidden)
      .def_readwrite("gat_heads", &model::ModelConfig::gat_heads)
      .def_readwrite("clf_hidden", &model::ModelConfig::clf_hidden);

  py::class_<train::TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("batch_size", &train::TrainConfig::batch_size)
      .def_readwrite("dropout", &train::TrainConfig::dropout)
      .def_readwrite("l2", &train::TrainConfig::l2)
      .def_readwrite("max_epochs", &train::TrainConfig::max_epochs)
      .def_readwrite("patience", &train::TrainConfig::patience)
      .def_readwrite("seed", &train::TrainConfig::seed)
      .def_readwrite("learning_rate", &train::TrainConfig::learning_rate);

  m.def(
      "train",
      [](const synth::SynthData& data, model::ModelConfig mc, const train::TrainConfig& tc,
         const embed::EmbeddingTable* authors, std::uint64_t init_seed) {
        mc.task = data.corpus.task;
        const graph::SocialGraph g = data.graph();
        model::AuthorResources res;
        res.table = authors;
        res.graph = &g;
        for (const auto& [user, community] : data.community) res.author_ids.push_back(user);
        train::RunResult r;
        {
          py::gil_scoped_release release;
          model::Model model(mc, data.words, res, init_seed);
          r = train::train_model(tc, model, data.corpus);
        }
        return run_result(r);
      },
      py::arg("data"), py::arg("model_config"), py::arg("train_config"), py::arg("authors") = nullptr,
      py::arg("init_seed") = 0, "Trains one model on a synthetic dataset; returns the run summary as a dict.");
}
