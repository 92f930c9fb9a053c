#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "socialgat/embed.hpp"
#include "socialgat/errors.hpp"

namespace socialgat::embed {

void SkipgramConfig::validate() const {
  if (dim == 0 || window == 0 || negatives == 0) {
    throw ParameterError("skip-gram dim, window and negatives must be positive");
  }
  if (!(learning_rate > 0.0)) throw ParameterError("skip-gram learning rate must be positive");
}

SkipgramConfig pv_defaults() {
  SkipgramConfig c;
  c.dim = 200;
  c.epochs = 30;
  c.min_count = 5;
  c.window = 5;
  return c;
}

namespace {

double log_sigmoid(double x) { return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x)); }
double sigmoid(double x) { return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); }

// Output-side vectors plus the unigram^0.75 noise distribution, shared by
// the skip-gram and paragraph-vector front ends.
class NegativeSampler {
 public:
  NegativeSampler(std::size_t dim, std::span<const std::size_t> counts, std::size_t negatives)
      : dim_(dim), negatives_(negatives), out_(counts.size() * dim, 0.0), cumulative_(counts.size()),
        grad_(dim) {
    double total = 0.0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
      total += std::pow(static_cast<double>(counts[i]), 0.75);
      cumulative_[i] = total;
    }
  }

  // One positive target plus `negatives` noise targets against `input`.
  // Updates both sides in place and returns the pair loss.
  double update(double* input, std::size_t target, double lr, num::Rng& rng) {
    std::fill(grad_.begin(), grad_.end(), 0.0);
    double loss = 0.0;
    for (std::size_t k = 0; k <= negatives_; ++k) {
      std::size_t t = target;
      double label = 1.0;
      if (k > 0) {
        t = sample(rng);
        if (t == target) continue;
        label = 0.0;
      }
      double* out = out_.data() + t * dim_;
      double f = 0.0;
      for (std::size_t d = 0; d < dim_; ++d) f += input[d] * out[d];
      loss -= label > 0 ? log_sigmoid(f) : log_sigmoid(-f);
      const double g = (label - sigmoid(f)) * lr;
      for (std::size_t d = 0; d < dim_; ++d) {
        grad_[d] += g * out[d];
        out[d] += g * input[d];
      }
    }
    for (std::size_t d = 0; d < dim_; ++d) input[d] += grad_[d];
    return loss;
  }

 private:
  std::size_t sample(num::Rng& rng) const {
    const double u = rng.uniform() * cumulative_.back();
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    return std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()),
                                 cumulative_.size() - 1);
  }

  std::size_t dim_;
  std::size_t negatives_;
  std::vector<double> out_;
  std::vector<double> cumulative_;
  std::vector<double> grad_;
};

struct Vocabulary {
  std::vector<std::string> tokens;  // sorted
  std::vector<std::size_t> counts;
  std::unordered_map<std::string, std::size_t> index;
};

template <typename Sequences>
Vocabulary count_tokens(const Sequences& sequences, std::size_t min_count) {
  std::map<std::string, std::size_t> counts;
  for (const auto& seq : sequences)
    for (const auto& tok : seq) ++counts[tok];
  Vocabulary v;
  for (const auto& [tok, c] : counts) {
    if (c < std::max<std::size_t>(min_count, 1)) continue;
    v.index.emplace(tok, v.tokens.size());
    v.tokens.push_back(tok);
    v.counts.push_back(c);
  }
  return v;
}

std::vector<double> flatten(const EmbeddingTable& t) {
  std::vector<double> flat;
  flat.reserve(t.size() * t.dim());
  for (const auto& id : t.ids()) {
    const auto v = t.vector(id);
    flat.insert(flat.end(), v.begin(), v.end());
  }
  return flat;
}

EmbeddingTable unflatten(const std::vector<std::string>& ids, std::size_t dim,
                         const std::vector<double>& flat) {
  EmbeddingTable t(dim);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    t.set(ids[i], std::span<const double>(flat).subspan(i * dim, dim));
  }
  return t;
}

double decayed(double lr0, std::size_t done, std::size_t total) {
  const double frac = total == 0 ? 0.0 : static_cast<double>(done) / static_cast<double>(total);
  return lr0 * std::max(1e-4, 1.0 - frac);
}

}  // namespace

EmbeddingTable train_skipgram(std::span<const std::vector<std::string>> sequences,
                              const SkipgramConfig& cfg, num::Rng& rng,
                              std::vector<double>* epoch_losses) {
  cfg.validate();
  if (sequences.empty()) throw ParameterError("skip-gram corpus is empty");
  const Vocabulary vocab = count_tokens(sequences, cfg.min_count);
  if (vocab.tokens.empty()) {
    throw ParameterError("skip-gram corpus is empty after min_count filtering");
  }
  std::vector<double> input = flatten(uniform_table(vocab.tokens, cfg.dim, rng));
  NegativeSampler sampler(cfg.dim, vocab.counts, cfg.negatives);

  std::vector<std::vector<std::size_t>> encoded;
  encoded.reserve(sequences.size());
  std::size_t n_tokens = 0;
  for (const auto& seq : sequences) {
    std::vector<std::size_t> ids;
    for (const auto& tok : seq) {
      const auto it = vocab.index.find(tok);
      if (it != vocab.index.end()) ids.push_back(it->second);
    }
    n_tokens += ids.size();
    encoded.push_back(std::move(ids));
  }

  const std::size_t total = n_tokens * cfg.epochs;
  std::size_t done = 0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    double loss = 0.0;
    std::size_t pairs = 0;
    for (const auto& seq : encoded) {
      for (std::size_t i = 0; i < seq.size(); ++i, ++done) {
        const double lr = decayed(cfg.learning_rate, done, total);
        const std::size_t reach = cfg.window - rng.below(cfg.window);
        const std::size_t lo = i >= reach ? i - reach : 0;
        const std::size_t hi = std::min(seq.size() - 1, i + reach);
        for (std::size_t j = lo; j <= hi; ++j) {
          if (j == i) continue;
          loss += sampler.update(input.data() + seq[i] * cfg.dim, seq[j], lr, rng);
          ++pairs;
        }
      }
    }
    if (epoch_losses) epoch_losses->push_back(pairs ? loss / static_cast<double>(pairs) : 0.0);
  }
  return unflatten(vocab.tokens, cfg.dim, input);
}

EmbeddingTable train_pv_dbow(const std::map<std::string, std::vector<std::string>>& author_docs,
                             const SkipgramConfig& sc, num::Rng& rng,
                             std::vector<double>* epoch_losses) {
  sc.validate();
  if (author_docs.empty()) throw ParameterError("paragraph-vector corpus is empty");
  std::vector<std::vector<std::string>> docs;
  for (const auto& [author, doc] : author_docs) docs.push_back(doc);
  const Vocabulary vocab = count_tokens(docs, sc.min_count);

  std::vector<std::string> authors;
  std::vector<std::vector<std::size_t>> encoded;
  std::size_t n_tokens = 0;
  for (const auto& [author, doc] : author_docs) {
    std::vector<std::size_t> ids;
    for (const auto& tok : doc) {
      const auto it = vocab.index.find(tok);
      if (it != vocab.index.end()) ids.push_back(it->second);
    }
    if (ids.empty()) continue;
    n_tokens += ids.size();
    authors.push_back(author);
    encoded.push_back(std::move(ids));
  }
  if (authors.empty()) {
    throw ParameterError("paragraph-vector corpus is empty after min_count filtering");
  }
  std::vector<double> docvec = flatten(uniform_table(authors, sc.dim, rng));
  NegativeSampler sampler(sc.dim, vocab.counts, sc.negatives);

  const std::size_t total = n_tokens * sc.epochs;
  std::size_t done = 0;
  for (std::size_t epoch = 0; epoch < sc.epochs; ++epoch) {
    double loss = 0.0;
    std::size_t pairs = 0;
    for (std::size_t a = 0; a < encoded.size(); ++a) {
      for (std::size_t tok : encoded[a]) {
        const double lr = decayed(sc.learning_rate, done++, total);
        loss += sampler.update(docvec.data() + a * sc.dim, tok, lr, rng);
        ++pairs;
      }
    }
    if (epoch_losses) epoch_losses->push_back(pairs ? loss / static_cast<double>(pairs) : 0.0);
  }
  return unflatten(authors, sc.dim, docvec);
}

}  // namespace socialgat::embed
