#include "socialgat/model.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"
#include "socialgat/errors.hpp"
#include "socialgat/io.hpp"

namespace socialgat::model {

using nlohmann::json;
using num::Parameter;
using num::Shape;
using num::Tape;
using num::Tensor;
using num::Var;

namespace {

constexpr const char* kVariantNames[] = {"FREQUENCY", "LING",     "LING_RANDOM",
                                         "LING_PV",   "LING_N2V", "LING_GAT"};
constexpr const char* kCheckpointFormat = "socialgat-checkpoint";

Tensor uniform(Shape s, double bound, num::Rng& rng) {
  Tensor t(s);
  for (double& x : t.data()) x = rng.uniform(-bound, bound);
  return t;
}

}  // namespace

Variant parse_variant(std::string_view name) {
  std::string upper(name);
  for (char& c : upper) {
    if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
    if (c == '-' || c == '+') c = '_';
  }
  for (int i = 0; i < 6; ++i) {
    if (upper == kVariantNames[i]) return static_cast<Variant>(i);
  }
  throw ParameterError("unknown variant '" + std::string(name) +
                       "' (expected FREQUENCY, LING, LING_RANDOM, LING_PV, LING_N2V or LING_GAT)");
}

const char* variant_name(Variant v) { return kVariantNames[static_cast<int>(v)]; }

bool uses_author(Variant v) { return v != Variant::kFrequency && v != Variant::kLing; }

std::size_t ModelConfig::social_dim() const {
  switch (variant) {
    case Variant::kFrequency:
    case Variant::kLing: return 0;
    case Variant::kLingGat: return gat_hidden * gat_heads;
    default: return author_dim;
  }
}

void ModelConfig::validate() const {
  if (text_hidden == 0 || clf_hidden == 0 || author_dim == 0) {
    throw ParameterError("model sizes must be positive");
  }
  if (variant == Variant::kLingGat && (gat_hidden == 0 || gat_heads < 1 || gat_heads > 4)) {
    throw ParameterError("GAT needs hidden > 0 and heads in 1..4");
  }
}

Prediction make_prediction(const Tensor& probabilities) {
  Prediction p;
  p.probabilities = probabilities.values();
  p.cls = static_cast<std::size_t>(
      std::max_element(p.probabilities.begin(), p.probabilities.end()) - p.probabilities.begin());
  return p;
}

Classifier init_classifier(std::size_t in, std::size_t hidden, std::size_t out, num::Rng& rng) {
  if (in == 0 || hidden == 0 || out == 0) throw ParameterError("classifier sizes must be positive");
  Classifier c;
  c.w1 = Parameter("clf.w1", uniform(Shape::matrix(in, hidden), 1.0 / std::sqrt(double(in)), rng));
  c.w2 = Parameter("clf.w2", uniform(Shape::matrix(hidden, out), 1.0 / std::sqrt(double(hidden)), rng));
  return c;
}

Var classifier_logits(Tape& tape, Classifier& clf, Var l, std::optional<Var> s, double dropout,
                      bool training, num::Rng& rng) {
  Var x = s ? tape.concat(l, *s) : l;
  const std::size_t in = tape.value(x).size();
  if (clf.w1.value.rows() != in || tape.value(x).shape().rank() != 1) {
    throw ShapeError("classifier expects a [" + std::to_string(clf.w1.value.rows()) +
                     "] input, got " + tape.value(x).shape().str());
  }
  x = tape.dropout(x, dropout, training, rng);
  Var h = tape.relu(tape.vecmat(x, tape.param(clf.w1)));
  h = tape.dropout(h, dropout, training, rng);
  return tape.vecmat(h, tape.param(clf.w2));
}

Prediction fuse_and_classify(const Tensor& l, const Tensor* s, Classifier& clf) {
  Tape tape;
  num::Rng unused(0);
  const Var lv = tape.constant(l);
  std::optional<Var> sv;
  if (s) sv = tape.constant(*s);
  const Var logits = classifier_logits(tape, clf, lv, sv, 0.0, false, unused);
  return make_prediction(tape.value(tape.softmax(logits)));
}

FrequencySampler::FrequencySampler(std::span<const std::size_t> labels, std::size_t classes)
    : freq_(classes, 0.0) {
  if (labels.empty()) throw StatisticError("frequency baseline needs training labels");
  for (std::size_t y : labels) {
    if (y >= classes) throw IndexError("label " + std::to_string(y) + " out of range");
    freq_[y] += 1.0;
  }
  for (double& f : freq_) f /= static_cast<double>(labels.size());
}

FrequencySampler::FrequencySampler(std::vector<double> frequencies) : freq_(std::move(frequencies)) {
  double s = 0.0;
  for (double f : freq_) {
    if (!(f >= 0.0)) throw ParameterError("frequencies must be nonnegative");
    s += f;
  }
  if (freq_.empty() || std::abs(s - 1.0) > 1e-9) throw ParameterError("frequencies must sum to 1");
}

std::size_t FrequencySampler::sample(num::Rng& rng) const {
  const double u = rng.uniform();
  double acc = 0.0;
  std::size_t last = 0;
  for (std::size_t k = 0; k < freq_.size(); ++k) {
    if (freq_[k] == 0.0) continue;
    last = k;
    acc += freq_[k];
    if (u < acc) return k;
  }
  return last;
}

Model::Model(ModelConfig cfg, const embed::EmbeddingTable& words, AuthorResources resources,
             std::uint64_t init_seed)
    : cfg_(cfg), words_(words), res_(std::move(resources)), sample_rng_(num::Rng::derive(init_seed, 7)) {
  cfg_.validate();
  if (cfg_.variant == Variant::kFrequency) return;
  num::Rng rng(init_seed);
  lstm_ = text::init_bilstm(words_.dim(), cfg_.text_hidden, rng);

  switch (cfg_.variant) {
    case Variant::kLingPv:
    case Variant::kLingN2v:
    case Variant::kLingGat:
      if (!res_.table) {
        throw StateError(std::string(variant_name(cfg_.variant)) + " needs an author embedding table");
      }
      if (res_.table->empty()) throw StateError("author embedding table is empty");
      if (cfg_.variant != Variant::kLingGat && res_.table->dim() != cfg_.author_dim) {
        throw ShapeError("author table has dimension " + std::to_string(res_.table->dim()) +
                         ", model expects " + std::to_string(cfg_.author_dim));
      }
      break;
    default: break;
  }
  if (cfg_.variant == Variant::kLingGat) {
    if (!res_.graph) throw StateError("LING_GAT needs a social graph");
    gat_ = gat::init_gat(res_.table->dim(), cfg_.gat_hidden, cfg_.gat_heads, rng);
  }
  if (cfg_.variant == Variant::kLingRandom) {
    std::vector<std::string> ids = res_.author_ids;
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    if (ids.empty()) throw StateError("LING_RANDOM needs at least one author id");
    const embed::EmbeddingTable init = embed::random_author_embeddings(ids, cfg_.author_dim, rng);
    authors_.reserve(ids.size());
    for (const auto& id : ids) {
      author_index_.emplace(id, authors_.size());
      authors_.emplace_back("author." + id, init.tensor(id));
    }
  }
  clf_ = init_classifier(cfg_.classifier_input(), cfg_.clf_hidden, cfg_.classes(), rng);
}

std::vector<Parameter*> Model::parameters() {
  std::vector<Parameter*> out;
  if (cfg_.variant == Variant::kFrequency) return out;
  for (auto* p : words_.parameters()) out.push_back(p);
  for (auto* p : lstm_.parameters()) out.push_back(p);
  for (auto* p : gat_.parameters()) out.push_back(p);
  for (auto& p : authors_) out.push_back(&p);
  out.push_back(&clf_.w1);
  out.push_back(&clf_.w2);
  return out;
}

Tensor Model::author_centroid() const {
  Tensor c(Shape::vector(cfg_.author_dim));
  for (const auto& p : authors_) c.axpy(1.0, p.value);
  for (double& x : c.data()) x /= static_cast<double>(authors_.size());
  return c;
}

Var Model::social(Tape& tape, const std::string& author) {
  switch (cfg_.variant) {
    case Variant::kLingRandom: {
      const auto it = author_index_.find(author);
      if (it != author_index_.end()) return tape.param(authors_[it->second]);
      return tape.constant(author_centroid());
    }
    case Variant::kLingPv:
    case Variant::kLingN2v: return tape.constant(res_.table->lookup_or_centroid(author));
    case Variant::kLingGat: {
      auto it = neighborhoods_.find(author);
      if (it == neighborhoods_.end()) {
        it = neighborhoods_.emplace(author, gat::gather(*res_.graph, *res_.table, author)).first;
      }
      return gat::node_update(tape, gat_, tape.constant(it->second.features)).out;
    }
    default: throw StateError("variant has no author vector");
  }
}

Var Model::logits(Tape& tape, const text::LabeledExample& ex, bool training, double dropout,
                  num::Rng& rng) {
  if (cfg_.variant == Variant::kFrequency) {
    throw StateError("the FREQUENCY baseline has no differentiable forward pass");
  }
  const auto ids = words_.encode(ex.tokens);
  const Var l = text::bilstm_encode(tape, ids, lstm_, words_);
  std::optional<Var> s;
  if (uses_author(cfg_.variant)) s = social(tape, ex.author);
  return classifier_logits(tape, clf_, l, s, dropout, training, rng);
}

Prediction Model::predict(const text::LabeledExample& ex) {
  if (!trained_) throw StateError("model has not been trained or loaded");
  if (cfg_.variant == Variant::kFrequency) {
    Prediction p;
    p.cls = sampler_->sample(sample_rng_);
    p.probabilities.assign(cfg_.classes(), 0.0);
    p.probabilities[p.cls] = 1.0;
    return p;
  }
  Tape tape;
  num::Rng unused(0);
  return make_prediction(tape.value(tape.softmax(logits(tape, ex, false, 0.0, unused))));
}

void Model::fit_frequency(std::span<const std::size_t> train_labels) {
  if (cfg_.variant != Variant::kFrequency) throw StateError("fit_frequency on a neural variant");
  sampler_.emplace(train_labels, cfg_.classes());
  trained_ = true;
}

Tensor Model::social_vector(const std::string& author) {
  if (!uses_author(cfg_.variant)) return Tensor(Shape::vector(0));
  Tape tape;
  return tape.value(social(tape, author));
}

gat::AttentionRecord Model::attention(const std::string& author) {
  if (cfg_.variant != Variant::kLingGat) {
    throw ParameterError(std::string("attention needs a LING_GAT model, this one is ") +
                         variant_name(cfg_.variant));
  }
  return gat::extract_attention(gat_, *res_.graph, *res_.table, author);
}

std::string config_json(const ModelConfig& cfg) {
  return json{{"variant", variant_name(cfg.variant)},
              {"task", text::task_name(cfg.task)},
              {"text_hidden", cfg.text_hidden},
              {"author_dim", cfg.author_dim},
              {"gat_hidden", cfg.gat_hidden},
              {"gat_heads", cfg.gat_heads},
              {"clf_hidden", cfg.clf_hidden}}
      .dump();
}

ModelConfig config_from_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    ModelConfig c;
    c.variant = parse_variant(j.at("variant").get<std::string>());
    c.task = text::parse_task(j.at("task").get<std::string>());
    c.text_hidden = j.at("text_hidden").get<std::size_t>();
    c.author_dim = j.at("author_dim").get<std::size_t>();
    c.gat_hidden = j.at("gat_hidden").get<std::size_t>();
    c.gat_heads = j.at("gat_heads").get<std::size_t>();
    c.clf_hidden = j.at("clf_hidden").get<std::size_t>();
    return c;
  } catch (const json::exception& e) {
    throw ParseError(std::string("model config: ") + e.what());
  }
}

std::string Model::checkpoint() const {
  if (!trained_) throw StateError("refusing to save an untrained model");
  std::string body;
  json tensors = json::array();
  auto* self = const_cast<Model*>(this);
  for (const Parameter* p : self->parameters()) {
    if (p->name.find_first_of(" \t\n") != std::string::npos) {
      throw ParameterError("parameter name '" + p->name + "' contains whitespace");
    }
    tensors.push_back({{"name", p->name}, {"shape", p->value.shape().dims()}});
    body += p->name;
    for (double x : p->value.data()) {
      body += ' ';
      io::append_double(body, x);
    }
    body += '\n';
  }
  if (sampler_) {
    tensors.push_back({{"name", "frequency"}, {"shape", {sampler_->frequencies().size()}}});
    body += "frequency";
    for (double f : sampler_->frequencies()) {
      body += ' ';
      io::append_double(body, f);
    }
    body += '\n';
  }
  const json manifest = {{"format", kCheckpointFormat},
                         {"schema_version", 1},
                         {"config", json::parse(config_json(cfg_))},
                         {"word_dim", words_.dim()},
                         {"tensors", tensors},
                         {"content_sha256", io::sha256_hex(body)}};
  return manifest.dump() + "\n" + body;
}

void Model::write_checkpoint(const std::filesystem::path& path) const {
  io::write_file_atomic(path, checkpoint());
}

namespace {

json parse_manifest(std::string_view content, std::string_view& body) {
  const std::size_t nl = content.find('\n');
  if (nl == std::string_view::npos) throw ParseError("checkpoint has no manifest line");
  json manifest;
  try {
    manifest = json::parse(content.substr(0, nl));
  } catch (const json::exception& e) {
    throw ParseError(std::string("checkpoint manifest: ") + e.what());
  }
  if (!manifest.is_object() || manifest.value("format", "") != kCheckpointFormat) {
    throw ParseError("not a model checkpoint");
  }
  body = content.substr(nl + 1);
  return manifest;
}

}  // namespace

void Model::load_checkpoint(std::string_view content) {
  std::string_view body;
  const json manifest = parse_manifest(content, body);
  if (manifest.value("content_sha256", "") != io::sha256_hex(body)) {
    throw ParseError("checkpoint content hash mismatch (file is corrupt or was edited)");
  }
  const ModelConfig saved = config_from_json(manifest.at("config").dump());
  const std::string mine = config_json(cfg_), theirs = config_json(saved);
  if (mine != theirs) {
    throw ShapeError("checkpoint config " + theirs + " does not match model config " + mine);
  }
  const std::size_t word_dim = manifest.value("word_dim", std::size_t{0});
  if (word_dim != words_.dim()) {
    throw ShapeError("checkpoint was trained with word dimension " + std::to_string(word_dim) +
                     ", current word vectors have dimension " + std::to_string(words_.dim()));
  }

  std::unordered_map<std::string, Parameter*> by_name;
  for (Parameter* p : parameters()) by_name.emplace(p->name, p);
  std::size_t loaded = 0;
  std::size_t pos = 0, line_no = 1;
  std::vector<double> values;
  while (pos < body.size()) {
    std::size_t end = body.find('\n', pos);
    if (end == std::string_view::npos) end = body.size();
    const auto parts = io::split_whitespace(body.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (parts.empty()) continue;
    const std::string name(parts[0]);
    values.clear();
    for (std::size_t k = 1; k < parts.size(); ++k) values.push_back(io::parse_double(parts[k]));
    if (name == "frequency") {
      sampler_.emplace(values);
      continue;
    }
    const auto it = by_name.find(name);
    if (it == by_name.end()) {
      throw ShapeError("checkpoint line " + std::to_string(line_no) + ": unknown parameter '" + name + "'");
    }
    if (values.size() != it->second->value.size()) {
      throw ShapeError("checkpoint parameter '" + name + "' has " + std::to_string(values.size()) +
                       " values, model expects " + it->second->value.shape().str());
    }
    std::copy(values.begin(), values.end(), it->second->value.data().begin());
    ++loaded;
  }
  if (loaded != by_name.size()) {
    throw ShapeError("checkpoint holds " + std::to_string(loaded) + " of " +
                     std::to_string(by_name.size()) + " model parameters");
  }
  if (cfg_.variant == Variant::kFrequency && !sampler_) {
    throw ShapeError("FREQUENCY checkpoint without frequencies");
  }
  neighborhoods_.clear();
  trained_ = true;
}

void Model::load_checkpoint(const std::filesystem::path& path) {
  load_checkpoint(std::string_view(io::read_file(path)));
}

ModelConfig read_checkpoint_config(const std::filesystem::path& path) {
  const std::string content = io::read_file(path);
  std::string_view body;
  const json manifest = parse_manifest(content, body);
  return config_from_json(manifest.at("config").dump());
}

}  // namespace socialgat::model
