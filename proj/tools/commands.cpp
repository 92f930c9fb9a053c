#include "commands.hpp"

#include <algorithm>
#include <iostream>
#include <map>
#include <memory>
#include <set>

#include "json.hpp"
#include "socialgat/embed.hpp"
#include "socialgat/errors.hpp"
#include "socialgat/eval.hpp"
#include "socialgat/gat.hpp"
#include "socialgat/graph.hpp"
#include "socialgat/io.hpp"
#include "socialgat/model.hpp"
#include "socialgat/synth.hpp"
#include "socialgat/train.hpp"

namespace socialgat::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kEdges = "graph.edges";
constexpr const char* kMeta = "graph.meta.json";

OptionSpec in_file(std::string key, std::string help, bool required = false) {
  return {std::move(key), Kind::kInputFile, "", std::move(help), required};
}
OptionSpec in_dir(std::string key, std::string help, bool required = false) {
  return {std::move(key), Kind::kInputDir, "", std::move(help), required};
}
OptionSpec output(std::string help, bool required = true) { return {"out", Kind::kOutput, "", std::move(help), required}; }
OptionSpec str(std::string key, std::string fallback, std::string help, bool required = false) {
  return {std::move(key), Kind::kString, std::move(fallback), std::move(help), required};
}
OptionSpec integer(std::string key, std::string fallback, std::string help) {
  return {std::move(key), Kind::kInt, std::move(fallback), std::move(help), false};
}
OptionSpec real(std::string key, std::string fallback, std::string help) {
  return {std::move(key), Kind::kReal, std::move(fallback), std::move(help), false};
}
OptionSpec boolean(std::string key, std::string help) { return {std::move(key), Kind::kBool, "", std::move(help), false}; }
OptionSpec seed(bool required) { return {"seed", Kind::kInt, "", "random seed", required}; }

std::vector<OptionSpec> corpus_options(bool required) {
  return {in_file("corpus", "labeled corpus (JSON Lines)", required),
          str("task", "", "sentiment, stance or hate", required),
          integer("split_seed", "0", "seed for the 80/10/10 split when the corpus has none")};
}

std::vector<OptionSpec> model_input_options(bool words_required) {
  return {in_file("words", "word vectors (id v1 ... vd)", words_required),
          in_dir("graph", "graph directory written by build-graph"),
          in_file("authors", "author embedding table (PV, N2V or GAT input)")};
}

std::vector<OptionSpec> model_options() {
  return {integer("text_hidden", "50", "BiLSTM hidden size per direction"),
          integer("author_dim", "200", "random author vector size (other variants use the table's)"),
          integer("gat_hidden", "50", "GAT output size per head"),
          integer("gat_heads", "1", "GAT heads"),
          integer("clf_hidden", "50", "classifier hidden size")};
}

std::vector<OptionSpec> train_options() {
  return {integer("batch_size", "32", "mini-batch size"),
          real("dropout", "0", "dropout rate"),
          real("l2", "0", "L2 penalty"),
          integer("max_epochs", "50", "epoch limit"),
          integer("patience", "5", "early-stopping patience"),
          real("learning_rate", "0.001", "Adam learning rate")};
}

template <typename... Vs>
std::vector<OptionSpec> concat(Vs... parts) {
  std::vector<OptionSpec> out;
  (out.insert(out.end(), parts.begin(), parts.end()), ...);
  return out;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

fs::path sibling(const fs::path& p, const std::string& suffix) { return fs::path(p.string() + suffix); }

graph::SocialGraph load_graph_dir(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError(dir.string() + " is not a graph directory");
  return graph::read_graph(dir / kEdges, dir / kMeta);
}

graph::AuthorLabels author_labels(const text::LabeledCorpus& c) {
  graph::AuthorLabels out;
  for (const auto& ex : c.examples) out[ex.author].push_back(ex.label);
  for (auto& [a, labels] : out) std::sort(labels.begin(), labels.end());
  return out;
}

json report_json(const eval::MetricReport& r) {
  const auto& labels = text::task_labels(r.task);
  json per_class = json::array();
  for (std::size_t c = 0; c < r.per_class.size(); ++c) {
    per_class.push_back({{"label", labels.at(c)},
                         {"precision", r.per_class[c].precision},
                         {"recall", r.per_class[c].recall},
                         {"f1", r.per_class[c].f1},
                         {"support", r.support.at(c)}});
  }
  return {{"metric_name", eval::task_metric_name(r.task)}, {"metric", r.metric}, {"per_class", per_class}};
}

json run_json(const train::RunResult& r) {
  return {{"seed", r.seed},
          {"best_val", r.best_val},
          {"test_metric", r.test_metric},
          {"test_report", report_json(r.test_report)},
          {"epochs_trained", r.epochs_trained},
          {"best_epoch", r.best_epoch},
          {"val_history", r.val_history},
          {"train_loss", r.train_loss}};
}

// Loaded artifacts shared by the models of one command, keyed by path.
struct Workspace {
  std::map<std::string, text::LabeledCorpus> corpora;
  std::map<std::string, embed::EmbeddingTable> tables;
  std::map<std::string, graph::SocialGraph> graphs;

  const text::LabeledCorpus& corpus(const std::string& path, text::Task task, std::uint64_t split_seed) {
    const std::string key = path + "|" + text::task_name(task) + "|" + std::to_string(split_seed);
    auto it = corpora.find(key);
    if (it == corpora.end()) it = corpora.emplace(key, text::load_corpus(path, task, split_seed)).first;
    return it->second;
  }
  const embed::EmbeddingTable& table(const std::string& path) {
    auto it = tables.find(path);
    if (it == tables.end()) it = tables.emplace(path, embed::load_word_vectors(path)).first;
    return it->second;
  }
  const graph::SocialGraph& graph(const std::string& path) {
    auto it = graphs.find(path);
    if (it == graphs.end()) it = graphs.emplace(path, load_graph_dir(path)).first;
    return it->second;
  }
};

struct ModelInputs {
  std::string corpus, task, words, graph, authors;
  std::uint64_t split_seed = 0;

  json to_json() const {
    return {{"corpus", corpus}, {"task", task}, {"split_seed", split_seed},
            {"words", words},   {"graph", graph}, {"authors", authors}};
  }
};

ModelInputs inputs_from(const Settings& s) {
  ModelInputs in;
  in.corpus = s.str("corpus");
  in.task = s.str("task");
  in.split_seed = s.has("split_seed") ? s.u64("split_seed") : 0;
  in.words = s.str("words");
  in.graph = s.str("graph");
  in.authors = s.str("authors");
  return in;
}

void check_inputs(model::Variant v, const ModelInputs& in) {
  const bool wants_table = v == model::Variant::kLingPv || v == model::Variant::kLingN2v || v == model::Variant::kLingGat;
  const bool wants_graph = v == model::Variant::kLingGat;
  const std::string name = model::variant_name(v);
  if (in.words.empty()) throw ParameterError("variant " + name + " needs --words");
  if (wants_table && in.authors.empty()) throw ParameterError("variant " + name + " needs --authors");
  if (!wants_table && !in.authors.empty()) throw ParameterError("variant " + name + " does not use --authors");
  if (wants_graph && in.graph.empty()) throw ParameterError("variant " + name + " needs --graph");
  if (!wants_graph && !in.graph.empty()) throw ParameterError("variant " + name + " does not use --graph");
}

// Builds a model whose resources live in `ws`.
struct ModelBuilder {
  Workspace& ws;
  ModelInputs in;
  const text::LabeledCorpus* corpus = nullptr;
  const embed::EmbeddingTable* words = nullptr;
  model::AuthorResources res;

  ModelBuilder(Workspace& w, ModelInputs inputs, model::Variant variant) : ws(w), in(std::move(inputs)) {
    check_inputs(variant, in);
    if (in.corpus.empty() || in.task.empty()) throw ParameterError("--corpus and --task are required");
    corpus = &ws.corpus(in.corpus, text::parse_task(in.task), in.split_seed);
    words = &ws.table(in.words);
    if (!in.authors.empty()) res.table = &ws.table(in.authors);
    if (!in.graph.empty()) res.graph = &ws.graph(in.graph);
    if (variant == model::Variant::kLingRandom) {
      std::set<std::string> ids;
      for (const auto& ex : corpus->examples) ids.insert(ex.author);
      res.author_ids.assign(ids.begin(), ids.end());
    }
  }

  model::ModelConfig adjust(model::ModelConfig mc) const {
    mc.task = corpus->task;
    if (res.table) mc.author_dim = res.table->dim();
    return mc;
  }

  model::Model make(const model::ModelConfig& mc, std::uint64_t init_seed) const {
    return model::Model(mc, *words, res, init_seed);
  }
};

model::ModelConfig model_config(const Settings& s) {
  model::ModelConfig mc;
  mc.variant = model::parse_variant(s.str("variant"));
  mc.text_hidden = s.size("text_hidden");
  mc.author_dim = s.size("author_dim");
  mc.gat_hidden = s.size("gat_hidden");
  mc.gat_heads = s.size("gat_heads");
  mc.clf_hidden = s.size("clf_hidden");
  return mc;
}

train::TrainConfig train_config(const Settings& s) {
  train::TrainConfig tc;
  tc.batch_size = s.size("batch_size");
  tc.dropout = s.real("dropout");
  tc.l2 = s.real("l2");
  tc.max_epochs = s.size("max_epochs");
  tc.patience = s.size("patience");
  tc.learning_rate = s.real("learning_rate");
  tc.seed = s.u64("seed");
  tc.validate();
  return tc;
}

// --- build-graph -----------------------------------------------------------

void build_graph(const Settings& s) {
  Manifest manifest(s);
  const auto corpus = text::load_corpus(s.path("corpus"), text::parse_task(s.str("task")), s.u64("split_seed"));
  const auto parsed = graph::read_retweet_events(s.path("retweets"));
  for (const auto& e : parsed.errors) std::cerr << "warning[PARSE]: " << s.str("retweets") << " " << e << "\n";
  const auto g = graph::build_social_graph(author_labels(corpus), parsed.events, s.size("external_threshold"));
  const fs::path dir = s.path("out");
  ensure_dir(dir);
  graph::write_graph(g, dir / kEdges, dir / kMeta);
  const auto st = graph::stats(g);
  const std::string block = graph::format_stats(st);
  io::write_file_atomic(dir / "stats.txt", block);
  std::cout << block;
  manifest.add_output("edges", dir / kEdges);
  manifest.add_output("meta", dir / kMeta);
  manifest.add_output("stats", dir / "stats.txt");
  manifest.write(dir / "manifest.json");
}

// --- embed -------------------------------------------------------------------

void embed_cmd(const Settings& s) {
  Manifest manifest(s);
  const std::string method = s.str("method");
  num::Rng rng(s.u64("seed"));
  const std::size_t dim = s.size("dim");
  embed::EmbeddingTable table;
  const auto reject = [&](const char* key) {
    if (s.has(key)) throw ParameterError("method " + method + " does not use --" + std::string(key));
  };
  const auto sg = [&](std::size_t window, std::size_t epochs, std::size_t min_count) {
    embed::SkipgramConfig sc;
    sc.dim = dim;
    sc.window = s.has("window") ? s.size("window") : window;
    sc.negatives = s.size("negatives");
    sc.epochs = s.has("epochs") ? s.size("epochs") : epochs;
    sc.learning_rate = s.real("learning_rate");
    sc.min_count = s.has("min_count") ? s.size("min_count") : min_count;
    return sc;
  };
  if (method == "n2v") {
    reject("timelines");
    reject("corpus");
    if (!s.has("graph")) throw ParameterError("method n2v needs --graph");
    const auto g = load_graph_dir(s.path("graph"));
    embed::WalkConfig wc;
    wc.p = s.real("p");
    wc.q = s.real("q");
    wc.walk_length = s.size("walk_length");
    wc.walks_per_node = s.size("walks_per_node");
    table = embed::node2vec(g, wc, sg(10, 20, 0), rng);
  } else if (method == "pv") {
    reject("graph");
    reject("corpus");
    if (!s.has("timelines")) throw ParameterError("method pv needs --timelines");
    const auto d = embed::pv_defaults();
    table = embed::train_pv_dbow(text::load_timelines(s.path("timelines")), sg(d.window, d.epochs, d.min_count), rng);
  } else if (method == "random") {
    reject("timelines");
    std::vector<std::string> ids;
    if (s.has("graph") == s.has("corpus")) throw ParameterError("method random needs exactly one of --graph or --corpus");
    if (s.has("graph")) {
      ids = load_graph_dir(s.path("graph")).ids();
    } else {
      std::set<std::string> seen;
      for (const auto& ex : text::load_corpus(s.path("corpus"), text::parse_task(s.str("task")), 0).examples)
        seen.insert(ex.author);
      ids.assign(seen.begin(), seen.end());
    }
    table = embed::random_author_embeddings(ids, dim, rng);
  } else {
    throw ParameterError("unknown method '" + method + "' (expected n2v, pv or random)");
  }
  const fs::path o = s.path("out");
  embed::write_embeddings(table, o);
  manifest.add_output("embeddings", o);
  manifest.write(sibling(o, ".manifest.json"));
  std::cerr << "wrote " << table.size() << " vectors of dim " << table.dim() << " to " << o.string() << "\n";
}

// --- train -------------------------------------------------------------------

void write_run(const fs::path& dir, const model::Model& m, const train::RunResult& r, const ModelInputs& in) {
  ensure_dir(dir);
  m.write_checkpoint(dir / "model.ckpt");
  json j = run_json(r);
  j["schema_version"] = 1;
  j["variant"] = model::variant_name(m.config().variant);
  j["checkpoint"] = "model.ckpt";
  j["checkpoint_sha256"] = io::sha256_file(dir / "model.ckpt");
  j["inputs"] = in.to_json();
  io::write_file_atomic(dir / "run.json", j.dump(2) + "\n");
}

void train_cmd(const Settings& s) {
  Manifest manifest(s);
  Workspace ws;
  const model::ModelConfig base = model_config(s);
  const ModelBuilder builder(ws, inputs_from(s), base.variant);
  const model::ModelConfig mc = builder.adjust(base);
  const train::TrainConfig tc = train_config(s);
  const std::size_t runs = s.size("runs");
  if (runs == 0) throw ParameterError("runs must be positive");
  const fs::path dir = s.path("out");
  ensure_dir(dir);

  std::vector<double> metrics;
  json summary = json::array();
  for (std::size_t k = 0; k < runs; ++k) {
    train::TrainConfig run_cfg = tc;
    run_cfg.seed = tc.seed + k;
    model::Model m = builder.make(mc, num::Rng::derive(run_cfg.seed, 0));
    const auto r = train::train_model(run_cfg, m, *builder.corpus, [&](std::size_t epoch, double loss, double val) {
      std::cerr << "seed " << run_cfg.seed << " epoch " << epoch << " loss " << io::format_double(loss) << " val "
                << io::format_double(val) << "\n";
    });
    const fs::path run_dir = runs == 1 ? dir : dir / ("seed-" + std::to_string(run_cfg.seed));
    write_run(run_dir, m, r, builder.in);
    manifest.add_output("checkpoint", run_dir / "model.ckpt");
    metrics.push_back(r.test_metric);
    summary.push_back({{"seed", run_cfg.seed}, {"test_metric", r.test_metric}, {"dir", run_dir.string()}});
    std::cout << "seed " << run_cfg.seed << " " << eval::task_metric_name(mc.task) << " "
              << io::format_double(r.test_metric) << "\n";
  }
  if (runs > 1) {
    json j = {{"schema_version", 1},
              {"variant", model::variant_name(mc.variant)},
              {"runs", summary},
              {"mean", eval::mean(metrics)},
              {"std", eval::sample_std(metrics)}};
    io::write_file_atomic(dir / "summary.json", j.dump(2) + "\n");
    manifest.add_output("summary", dir / "summary.json");
    std::cout << "mean " << io::format_double(eval::mean(metrics)) << " std "
              << io::format_double(eval::sample_std(metrics)) << "\n";
  }
  manifest.write(dir / "manifest.json");
}

// --- grid-search ---------------------------------------------------------------

std::vector<double> real_list(const Settings& s, const char* key) {
  std::vector<double> out;
  for (const auto& item : s.list(key)) out.push_back(io::parse_double(item));
  return out;
}

std::vector<std::size_t> size_list(const Settings& s, const char* key) {
  std::vector<std::size_t> out;
  for (const auto& item : s.list(key)) {
    const double v = io::parse_double(item);
    if (!(v >= 0) || v != static_cast<double>(static_cast<std::size_t>(v))) {
      throw ParameterError(std::string(key) + " entries must be nonnegative integers");
    }
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

void grid_cmd(const Settings& s) {
  Manifest manifest(s);
  Workspace ws;
  const model::ModelConfig base = model_config(s);
  const ModelBuilder builder(ws, inputs_from(s), base.variant);
  const model::ModelConfig mc = builder.adjust(base);
  const train::TrainConfig tc = train_config(s);
  train::Grid grid;
  grid.batch_sizes = size_list(s, "batch_sizes");
  grid.dropouts = real_list(s, "dropouts");
  grid.l2s = real_list(s, "l2s");
  grid.gat_hidden = size_list(s, "gat_hidden_grid");
  grid.gat_heads = size_list(s, "gat_heads_grid");
  const auto factory = [&](const model::ModelConfig& c, std::uint64_t init) { return builder.make(c, init); };
  const auto result = train::grid_search(grid, mc, tc, factory, *builder.corpus);

  const fs::path dir = s.path("out");
  ensure_dir(dir / "jobs");
  const auto points = grid.points(mc.variant);
  json board = json::array();
  for (std::size_t rank = 0; rank < result.leaderboard.size(); ++rank) {
    const auto& e = result.leaderboard[rank];
    const std::size_t job = static_cast<std::size_t>(std::find(points.begin(), points.end(), e.point) - points.begin());
    std::string name = std::to_string(job);
    name.insert(0, std::to_string(points.size()).size() - name.size(), '0');
    const fs::path final_dir = dir / "jobs" / ("job-" + name);
    const fs::path tmp_dir = dir / "jobs" / (".job-" + name + ".tmp");
    fs::remove_all(tmp_dir);
    ensure_dir(tmp_dir);
    json j = run_json(e.result);
    j["schema_version"] = 1;
    j["point"] = e.point.str();
    io::write_file_atomic(tmp_dir / "run.json", j.dump(2) + "\n");
    fs::remove_all(final_dir);
    fs::rename(tmp_dir, final_dir);
    board.push_back({{"rank", rank + 1}, {"job", "job-" + name}, {"point", e.point.str()},
                     {"best_val", e.result.best_val}, {"test_metric", e.result.test_metric}});
  }
  const auto& best = result.best;
  std::string cfg = "# best grid point by validation metric\nvariant = " + std::string(model::variant_name(mc.variant)) +
                    "\nbatch_size = " + std::to_string(best.batch_size) + "\ndropout = " + io::format_double(best.dropout) +
                    "\nl2 = " + io::format_double(best.l2) + "\n";
  if (best.gat_heads) {
    cfg += "gat_hidden = " + std::to_string(best.gat_hidden) + "\ngat_heads = " + std::to_string(best.gat_heads) + "\n";
  }
  io::write_file_atomic(dir / "best.cfg", cfg);
  io::write_file_atomic(dir / "leaderboard.json",
                        json{{"schema_version", 1}, {"best", best.str()}, {"leaderboard", board}}.dump(2) + "\n");
  manifest.add_output("leaderboard", dir / "leaderboard.json");
  manifest.add_output("best_config", dir / "best.cfg");
  manifest.write(dir / "manifest.json");
  std::cout << "best " << best.str() << " val " << io::format_double(result.leaderboard.front().result.best_val) << "\n";
}

// --- evaluate / inspect-attention ---------------------------------------------

ModelInputs inputs_for_checkpoint(const Settings& s, const fs::path& ckpt) {
  ModelInputs in;
  const fs::path run = ckpt.parent_path() / "run.json";
  if (fs::exists(run)) {
    try {
      const json j = json::parse(io::read_file(run)).at("inputs");
      in.corpus = j.value("corpus", "");
      in.task = j.value("task", "");
      in.split_seed = j.value("split_seed", std::uint64_t{0});
      in.words = j.value("words", "");
      in.graph = j.value("graph", "");
      in.authors = j.value("authors", "");
    } catch (const json::exception& e) {
      throw ParseError(run.string() + ": " + e.what());
    }
  }
  for (const char* key : {"corpus", "task", "words", "graph", "authors"}) {
    if (!s.has(key)) continue;
    const std::string v = s.str(key);
    std::string& slot = std::string(key) == "corpus" ? in.corpus
                        : std::string(key) == "task" ? in.task
                        : std::string(key) == "words" ? in.words
                        : std::string(key) == "graph" ? in.graph
                                                      : in.authors;
    slot = v;
  }
  if (s.has("split_seed")) in.split_seed = s.u64("split_seed");
  return in;
}

struct LoadedModel {
  std::unique_ptr<ModelBuilder> builder;
  std::unique_ptr<model::Model> model;
};

LoadedModel load_model(Workspace& ws, const Settings& s, const fs::path& ckpt) {
  const model::ModelConfig mc = model::read_checkpoint_config(ckpt);
  LoadedModel out;
  out.builder = std::make_unique<ModelBuilder>(ws, inputs_for_checkpoint(s, ckpt), mc.variant);
  if (out.builder->corpus->task != mc.task) {
    throw ParameterError("checkpoint " + ckpt.string() + " was trained for task " + text::task_name(mc.task) +
                         ", corpus is " + text::task_name(out.builder->corpus->task));
  }
  out.model = std::make_unique<model::Model>(out.builder->make(mc, 0));
  out.model->load_checkpoint(ckpt);
  return out;
}

void evaluate_cmd(const Settings& s) {
  Manifest manifest(s);
  Workspace ws;
  std::vector<std::vector<std::string>> sets = {s.list("checkpoints")};
  if (sets[0].empty()) throw ParameterError("evaluate needs --checkpoints");
  if (s.has("compare")) sets.push_back(s.list("compare"));

  json set_json = json::array();
  std::vector<std::vector<double>> metrics(sets.size());
  std::optional<text::Task> task;
  for (std::size_t k = 0; k < sets.size(); ++k) {
    json runs = json::array();
    std::string variant;
    for (const auto& path : sets[k]) {
      auto lm = load_model(ws, s, path);
      const auto& corpus = *lm.builder->corpus;
      if (task && *task != corpus.task) throw ParameterError("checkpoints mix tasks");
      task = corpus.task;
      const auto rep = eval::report(corpus.task, train::confusion(*lm.model, corpus, text::Split::kTest));
      metrics[k].push_back(rep.metric);
      runs.push_back({{"checkpoint", path}, {"report", report_json(rep)}});
      const std::string v = model::variant_name(lm.model->config().variant);
      variant = variant.empty() || variant == v ? v : "mixed";
    }
    json entry = {{"name", k == 0 ? "checkpoints" : "compare"}, {"variant", variant}, {"runs", runs},
                  {"mean", eval::mean(metrics[k])}};
    entry["std"] = metrics[k].size() >= 2 ? json(eval::sample_std(metrics[k])) : json(nullptr);
    set_json.push_back(entry);
  }

  json matrix = json::array();
  for (std::size_t i = 0; i < sets.size(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < sets.size(); ++j) {
      if (i == j) {
        row.push_back(nullptr);
        continue;
      }
      const auto w = eval::welch_t_test(metrics[i], metrics[j]);
      const bool sig = w.p < 0.05;
      const char* marker = !sig ? "" : (w.t > 0 ? "improves" : "worse");
      row.push_back({{"t", w.t}, {"df", w.df}, {"p", w.p}, {"significant", sig}, {"marker", marker},
                     {"verdict", sig ? "significant" : "not significant"}});
    }
    matrix.push_back(row);
  }
  json j = {{"schema_version", 1},
            {"task", text::task_name(*task)},
            {"metric_name", eval::task_metric_name(*task)},
            {"sets", set_json}};
  if (sets.size() > 1) j["significance"] = matrix;
  const std::string text = j.dump(2) + "\n";
  const fs::path o = s.path("out");
  io::write_file_atomic(o, text);
  manifest.add_output("report", o);
  manifest.write(sibling(o, ".manifest.json"));
  for (std::size_t k = 0; k < sets.size(); ++k) {
    std::cout << set_json[k]["name"].get<std::string>() << " mean " << io::format_double(eval::mean(metrics[k]));
    if (metrics[k].size() >= 2) std::cout << " std " << io::format_double(eval::sample_std(metrics[k]));
    std::cout << "\n";
  }
  if (sets.size() > 1) std::cout << "welch " << matrix[0][1]["verdict"].get<std::string>() << " (p "
                                 << io::format_double(matrix[0][1]["p"].get<double>()) << ")\n";
}

void inspect_cmd(const Settings& s) {
  Manifest manifest(s);
  Workspace ws;
  auto lm = load_model(ws, s, s.path("checkpoint"));
  json records = json::array();
  for (const auto& target : s.list("target")) {
    records.push_back(json::parse(gat::attention_json(lm.model->attention(target))));
  }
  if (records.empty()) throw ParameterError("inspect-attention needs --target");
  const fs::path o = s.path("out");
  io::write_file_atomic(o, json{{"schema_version", 1}, {"records", records}}.dump(2) + "\n");
  manifest.add_output("attention", o);
  manifest.write(sibling(o, ".manifest.json"));
}

// --- export-embeddings -----------------------------------------------------------

void export_cmd(const Settings& s) {
  Manifest manifest(s);
  const auto table = embed::load_word_vectors(s.path("table"));
  const fs::path o = s.path("out");
  embed::write_embeddings(table, o);
  manifest.add_output("vectors", o);
  if (s.flag("pca2d")) {
    const auto proj = embed::pca2d(table);
    std::string tsv = "id\tpc1\tpc2\n";
    for (std::size_t i = 0; i < proj.size(); ++i) {
      tsv += table.ids()[i] + "\t" + io::format_double(proj[i][0]) + "\t" + io::format_double(proj[i][1]) + "\n";
    }
    io::write_file_atomic(sibling(o, ".pca2d.tsv"), tsv);
    manifest.add_output("pca2d", sibling(o, ".pca2d.tsv"));
  }
  manifest.write(sibling(o, ".manifest.json"));
}

// --- synthesize -------------------------------------------------------------------

void synth_cmd(const Settings& s) {
  Manifest manifest(s);
  synth::SynthData data;
  if (s.flag("planted")) {
    synth::PlantedSpec p;
    p.targets = s.size("targets");
    p.informants_per_class = s.size("informants_per_class");
    p.distractors = s.size("distractors");
    p.distractors_per_target = s.size("distractors_per_target");
    p.tokens_per_tweet = s.size("tokens_per_tweet");
    p.class_vocab = s.size("class_vocab");
    p.noise_vocab = s.size("noise_vocab");
    p.feature_dim = s.size("feature_dim");
    p.feature_noise = s.real("feature_noise");
    p.word_dim = s.size("word_dim");
    p.seed = s.u64("seed");
    data = synth::planted_signal(p);
  } else {
    synth::SynthSpec spec;
    spec.n_users = s.size("n_users");
    spec.n_classes = s.size("n_classes");
    spec.task = s.str("task");
    spec.communities = s.size("communities");
    spec.homophily = s.real("homophily");
    spec.text_signal = s.real("text_signal");
    spec.author_signal = s.real("author_signal");
    spec.avg_degree = s.real("avg_degree");
    spec.tweets_per_user = s.size("tweets_per_user");
    spec.tokens_per_tweet = s.size("tokens_per_tweet");
    spec.class_vocab = s.size("class_vocab");
    spec.noise_vocab = s.size("noise_vocab");
    spec.timeline_posts = s.size("timeline_posts");
    spec.withheld_communities = s.size("withheld_communities");
    spec.word_dim = s.size("word_dim");
    spec.seed = s.u64("seed");
    data = synth::synthesize(spec);
  }
  const fs::path dir = s.path("out");
  synth::write_synth(data, dir, json(s.values()).dump());
  for (const char* f : {"corpus.jsonl", "retweets.jsonl", "timelines.jsonl", "words.txt", "communities.tsv", "synth.json"})
    manifest.add_output(f, dir / f);
  if (data.features) manifest.add_output("features.txt", dir / "features.txt");
  manifest.write(dir / "manifest.json");
  std::cout << "wrote " << data.corpus.examples.size() << " tweets by " << data.community.size() << " users, "
            << data.events.size() << " retweet events to " << dir.string() << "\n";
  if (!data.features) {
    std::cout << "expected homophily " << io::format_double(data.rates.expected_homophily) << "\n";
  }
}

// --- stats ---------------------------------------------------------------------

void stats_cmd(const Settings& s) {
  Manifest manifest(s);
  json j = {{"schema_version", 1}};
  std::optional<graph::SocialGraph> g;
  std::optional<text::LabeledCorpus> corpus;
  if (s.has("corpus")) corpus = text::load_corpus(s.path("corpus"), text::parse_task(s.str("task")), s.u64("split_seed"));
  if (s.has("graph")) {
    if (s.has("retweets")) throw ParameterError("give either --graph or --retweets, not both");
    g = load_graph_dir(s.path("graph"));
  } else if (s.has("retweets")) {
    if (!corpus) throw ParameterError("--retweets needs --corpus and --task");
    const auto parsed = graph::read_retweet_events(s.path("retweets"));
    for (const auto& e : parsed.errors) std::cerr << "warning[PARSE]: " << s.str("retweets") << " " << e << "\n";
    g = graph::build_social_graph(author_labels(*corpus), parsed.events, s.size("external_threshold"));
  }
  if (!g && !corpus) throw ParameterError("stats needs --graph or --corpus");
  if (g) {
    const auto st = graph::stats(*g);
    std::cout << graph::format_stats(st);
    j["graph"] = {{"nodes", st.node_count}, {"edges", st.edge_count}, {"components", st.component_count}};
    j["graph"]["density"] = st.density ? json(*st.density) : json(nullptr);
    j["graph"]["homophily"] = st.homophily ? json(*st.homophily) : json(nullptr);
  }
  if (corpus) {
    const auto& labels = text::task_labels(corpus->task);
    std::set<std::string> authors;
    std::vector<std::size_t> per_label(labels.size(), 0);
    for (const auto& ex : corpus->examples) {
      authors.insert(ex.author);
      ++per_label[ex.label];
    }
    std::cout << "# tweets       " << corpus->examples.size() << "\n# authors      " << authors.size() << "\n";
    json split = json::object(), lab = json::object();
    for (auto sp : {text::Split::kTrain, text::Split::kVal, text::Split::kTest}) {
      split[text::split_name(sp)] = corpus->count(sp);
      std::cout << "split " << text::split_name(sp) << std::string(9 - std::string(text::split_name(sp)).size(), ' ')
                << corpus->count(sp) << "\n";
    }
    for (std::size_t c = 0; c < labels.size(); ++c) {
      lab[labels[c]] = per_label[c];
      std::cout << "label " << labels[c] << " " << per_label[c] << "\n";
    }
    j["corpus"] = {{"tweets", corpus->examples.size()}, {"authors", authors.size()}, {"splits", split}, {"labels", lab}};
  }
  if (s.has("out")) {
    const fs::path o = s.path("out");
    io::write_file_atomic(o, j.dump(2) + "\n");
    manifest.add_output("stats", o);
    manifest.write(sibling(o, ".manifest.json"));
  }
}

}  // namespace

std::vector<Command> commands() {
  std::vector<Command> out;
  out.push_back({"build-graph", "build the retweet graph and print its statistics",
                 concat(corpus_options(true),
                        std::vector<OptionSpec>{in_file("retweets", "retweet events (JSON Lines)", true),
                                                integer("external_threshold", "100", "retweets needed to keep an external user"),
                                                output("output directory")}),
                 build_graph});
  out.push_back({"embed", "pretrain author embeddings (n2v, pv or random)",
                 std::vector<OptionSpec>{str("method", "", "n2v, pv or random", true),
                                         in_dir("graph", "graph directory (n2v, random)"),
                                         in_file("timelines", "timeline posts (pv)"),
                                         in_file("corpus", "corpus whose authors get random vectors"),
                                         str("task", "", "corpus task (random with --corpus)"),
                                         integer("dim", "200", "vector size"),
                                         real("p", "1", "return parameter"),
                                         real("q", "1", "in-out parameter"),
                                         integer("walk_length", "80", "walk length"),
                                         integer("walks_per_node", "10", "walks per node"),
                                         integer("window", "", "context window (n2v 10, pv 5)"),
                                         integer("negatives", "5", "negative samples"),
                                         integer("epochs", "", "epochs (n2v 20, pv 30)"),
                                         real("learning_rate", "0.025", "initial learning rate"),
                                         integer("min_count", "", "minimum token count (n2v 0, pv 5)"),
                                         seed(true),
                                         output("output embedding file")},
                 embed_cmd});
  out.push_back({"train", "train one or more seeded runs of a model variant",
                 concat(corpus_options(true), model_input_options(true),
                        std::vector<OptionSpec>{str("variant", "", "FREQUENCY, LING, LING+random, LING+PV, LING+N2V or LING+GAT", true),
                                                seed(true), integer("runs", "1", "number of seeds (seed, seed+1, ...)")},
                        model_options(), train_options(), std::vector<OptionSpec>{output("output directory")}),
                 train_cmd});
  out.push_back({"grid-search", "exhaustive hyperparameter search on the validation split",
                 concat(corpus_options(true), model_input_options(true),
                        std::vector<OptionSpec>{str("variant", "", "model variant", true), seed(true),
                                                str("batch_sizes", "4,8,16,32,64", "batch-size grid"),
                                                str("dropouts", "0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9", "dropout grid"),
                                                str("l2s", "0,1e-05,0.0001", "L2 grid"),
                                                str("gat_hidden_grid", "10,15,20,25,30,50", "GAT d' grid"),
                                                str("gat_heads_grid", "1,2,3,4", "GAT head grid")},
                        model_options(), train_options(), std::vector<OptionSpec>{output("output directory")}),
                 grid_cmd});
  out.push_back({"evaluate", "score checkpoints on the test split; Welch test between two run sets",
                 concat(std::vector<OptionSpec>{{"checkpoints", Kind::kInputFile, "", "comma-separated checkpoints", true},
                                                {"compare", Kind::kInputFile, "", "second comma-separated run set", false}},
                        corpus_options(false), model_input_options(false),
                        std::vector<OptionSpec>{output("report JSON file")}),
                 evaluate_cmd});
  out.push_back({"inspect-attention", "per-head attention weights of a LING+GAT checkpoint",
                 concat(std::vector<OptionSpec>{in_file("checkpoint", "LING+GAT checkpoint", true),
                                                str("target", "", "comma-separated author ids", true)},
                        corpus_options(false), model_input_options(false),
                        std::vector<OptionSpec>{output("attention JSON file")}),
                 inspect_cmd});
  out.push_back({"export-embeddings", "copy an embedding table, optionally with a PCA-2D projection",
                 std::vector<OptionSpec>{in_file("table", "embedding table", true),
                                         boolean("pca2d", "also write <out>.pca2d.tsv"), output("output vectors file")},
                 export_cmd});
  out.push_back({"synthesize", "generate a synthetic corpus, retweet events and ground truth",
                 std::vector<OptionSpec>{integer("n_users", "2000", "users"),
                                         integer("n_classes", "2", "classes (2 or 3)"),
                                         str("task", "", "task name (default hate for 2 classes, sentiment for 3)"),
                                         integer("communities", "0", "communities (0: one per class)"),
                                         real("homophily", "0.9", "target homophily"),
                                         real("text_signal", "0.6", "share of tweets using class words"),
                                         real("author_signal", "0.9", "chance a tweet follows the community class"),
                                         real("avg_degree", "10", "mean degree"),
                                         integer("tweets_per_user", "2", "labeled tweets per user"),
                                         integer("tokens_per_tweet", "8", "tokens per tweet"),
                                         integer("class_vocab", "20", "words per class vocabulary"),
                                         integer("noise_vocab", "200", "shared noise words"),
                                         integer("timeline_posts", "10", "timeline posts per user"),
                                         integer("withheld_communities", "1", "communities whose test tweets carry no class words"),
                                         integer("word_dim", "50", "word vector size"),
                                         boolean("planted", "generate the planted-signal attention fixture instead"),
                                         integer("targets", "300", "planted: targets"),
                                         integer("informants_per_class", "20", "planted: informants per class"),
                                         integer("distractors", "200", "planted: distractor pool"),
                                         integer("distractors_per_target", "5", "planted: distractors per target"),
                                         integer("feature_dim", "16", "planted: feature size"),
                                         real("feature_noise", "0.1", "planted: feature noise"),
                                         seed(true), output("output directory")},
                 synth_cmd});
  out.push_back({"stats", "graph and corpus statistics",
                 concat(corpus_options(false),
                        std::vector<OptionSpec>{in_dir("graph", "graph directory"),
                                                in_file("retweets", "retweet events (built on the fly)"),
                                                integer("external_threshold", "100", "retweets needed to keep an external user"),
                                                output("optional JSON output", false)}),
                 stats_cmd});
  return out;
}

}  // namespace socialgat::cli
