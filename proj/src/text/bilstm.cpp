#include <cmath>

#include "socialgat/errors.hpp"
#include "socialgat/text.hpp"

namespace socialgat::text {

using num::Parameter;
using num::Shape;
using num::Tape;
using num::Tensor;
using num::Var;

Vocab::Vocab() {
  for (const char* t : {"<pad>", "<unk>", "<url>", "<hashtag>", "<mention>"}) add(t);
}

std::size_t Vocab::add(const std::string& token) {
  const auto [it, inserted] = index_.emplace(token, tokens_.size());
  if (inserted) tokens_.push_back(token);
  return it->second;
}

std::size_t Vocab::index(std::string_view token) const {
  const auto it = index_.find(std::string(token));
  return it == index_.end() ? kUnk : it->second;
}

bool Vocab::contains(std::string_view token) const {
  return index_.find(std::string(token)) != index_.end();
}

WordInputs::WordInputs(const embed::EmbeddingTable& words) : dim_(words.dim()) {
  if (words.empty()) throw StateError("word vector table is empty");
  const Tensor mean = embed::centroid_fallback(words);
  for (const auto& id : words.ids()) vocab_.add(id);
  table_.assign(vocab_.size() * dim_, 0.0);
  for (std::size_t i = Vocab::kUnk; i <= Vocab::kMention; ++i) {
    std::copy(mean.data().begin(), mean.data().end(), table_.begin() + i * dim_);
  }
  for (const auto& id : words.ids()) {
    const std::size_t i = vocab_.index(id);
    if (i <= Vocab::kMention) continue;  // a file entry for a special token is ignored
    const auto v = words.vector(id);
    std::copy(v.begin(), v.end(), table_.begin() + i * dim_);
  }
  for (const char* name : {"words.<url>", "words.<hashtag>", "words.<mention>"}) {
    placeholders_.emplace_back(name, mean, false);
  }
}

std::vector<std::size_t> WordInputs::encode(std::span<const std::string> tokens) const {
  std::vector<std::size_t> ids;
  const std::size_t n = std::min(tokens.size(), kMaxTokens);
  ids.reserve(n);
  for (std::size_t i = 0; i < n; ++i) ids.push_back(vocab_.index(tokens[i]));
  return ids;
}

double WordInputs::oov_rate(std::span<const std::vector<std::string>> docs) const {
  std::size_t total = 0, unknown = 0;
  for (const auto& doc : docs) {
    for (const auto& t : doc) {
      ++total;
      unknown += vocab_.index(t) == Vocab::kUnk;
    }
  }
  return total ? static_cast<double>(unknown) / static_cast<double>(total) : 0.0;
}

Var WordInputs::embed(Tape& tape, std::size_t index) {
  if (index >= vocab_.size()) {
    throw IndexError("token index " + std::to_string(index) + " outside vocabulary of " +
                     std::to_string(vocab_.size()));
  }
  if (index >= Vocab::kUrl && index <= Vocab::kMention) {
    return tape.param(placeholders_[index - Vocab::kUrl]);
  }
  std::vector<double> v(table_.begin() + index * dim_, table_.begin() + (index + 1) * dim_);
  return tape.constant(Tensor::vector(std::move(v)));
}

std::vector<Parameter*> WordInputs::parameters() {
  std::vector<Parameter*> out;
  for (auto& p : placeholders_) out.push_back(&p);
  return out;
}

std::vector<Parameter*> BiLstm::parameters() {
  return {&forward.w, &forward.b, &backward.w, &backward.b};
}

BiLstm init_bilstm(std::size_t input_dim, std::size_t hidden, num::Rng& rng) {
  if (input_dim == 0 || hidden == 0) throw ParameterError("LSTM sizes must be positive");
  BiLstm lstm;
  lstm.input_dim = input_dim;
  lstm.hidden = hidden;
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
  const auto make = [&](const std::string& prefix) {
    Tensor w(Shape::matrix(4 * hidden, input_dim + hidden));
    for (double& x : w.data()) x = rng.uniform(-bound, bound);
    Tensor b(Shape::vector(4 * hidden));
    for (std::size_t i = hidden; i < 2 * hidden; ++i) b[i] = 1.0;
    return LstmDirection{Parameter(prefix + ".w", std::move(w)),
                         Parameter(prefix + ".b", std::move(b), false)};
  };
  lstm.forward = make("lstm.fwd");
  lstm.backward = make("lstm.bwd");
  return lstm;
}

namespace {

Var run_direction(Tape& tape, std::span<const Var> inputs, bool reverse, Var w, Var b,
                  std::size_t hidden) {
  Var h = tape.constant(Tensor(Shape::vector(hidden)));
  Var c = h;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    const Var x = inputs[reverse ? inputs.size() - 1 - k : k];
    const Var gates = tape.affine(w, tape.concat(x, h), b);
    const Var hc = tape.lstm_cell(gates, c);
    h = tape.slice(hc, 0, hidden);
    c = tape.slice(hc, hidden, hidden);
  }
  return h;
}

}  // namespace

Var bilstm_encode(Tape& tape, std::span<const Var> inputs, BiLstm& lstm) {
  const std::size_t h = lstm.hidden;
  if (inputs.empty()) return tape.constant(Tensor(Shape::vector(2 * h)));
  for (const Var x : inputs) {
    if (tape.value(x).shape() != Shape::vector(lstm.input_dim)) {
      throw ShapeError("LSTM input has shape " + tape.value(x).shape().str() + ", expected [" +
                       std::to_string(lstm.input_dim) + "]");
    }
  }
  const Var fw = tape.param(lstm.forward.w), fb = tape.param(lstm.forward.b);
  const Var bw = tape.param(lstm.backward.w), bb = tape.param(lstm.backward.b);
  const Var hf = run_direction(tape, inputs, false, fw, fb, h);
  const Var hb = run_direction(tape, inputs, true, bw, bb, h);
  return tape.concat(hf, hb);
}

Var bilstm_encode(Tape& tape, std::span<const std::size_t> token_ids, BiLstm& lstm,
                  WordInputs& words) {
  std::vector<Var> xs;
  xs.reserve(token_ids.size());
  for (std::size_t id : token_ids) xs.push_back(words.embed(tape, id));
  return bilstm_encode(tape, xs, lstm);
}

}  // namespace socialgat::text
