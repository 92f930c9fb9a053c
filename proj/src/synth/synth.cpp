#include "socialgat/synth.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include "json.hpp"
#include "socialgat/errors.hpp"
#include "socialgat/io.hpp"

namespace socialgat::synth {

using nlohmann::json;

namespace {

bool in_unit(double x) { return x >= 0.0 && x <= 1.0; }

std::string padded(const char* prefix, std::size_t i, std::size_t n) {
  std::string digits = std::to_string(i);
  const std::size_t width = std::to_string(n > 0 ? n - 1 : 0).size();
  if (digits.size() < width) digits.insert(0, width - digits.size(), '0');
  return prefix + digits;
}

// Per-tweet label distribution of a user whose community has class c.
std::vector<double> label_distribution(std::size_t c, std::size_t k, double author_signal) {
  std::vector<double> q(k, k > 1 ? (1.0 - author_signal) / static_cast<double>(k - 1) : 0.0);
  q[c] = author_signal;
  return q;
}

// Distribution over the set of labels seen in `tweets` draws, indexed by
// bitmask, by inclusion-exclusion over subsets.
std::vector<double> label_set_distribution(const std::vector<double>& q, std::size_t tweets) {
  const std::size_t k = q.size();
  const std::size_t sets = std::size_t{1} << k;
  std::vector<double> within(sets, 0.0);  // P(all labels inside mask)
  for (std::size_t m = 0; m < sets; ++m) {
    double mass = 0.0;
    for (std::size_t c = 0; c < k; ++c)
      if (m >> c & 1) mass += q[c];
    within[m] = std::pow(mass, static_cast<double>(tweets));
  }
  std::vector<double> exact(sets, 0.0);
  for (std::size_t m = 1; m < sets; ++m) {
    double v = 0.0;
    for (std::size_t r = m;; r = (r - 1) & m) {
      const int sign = (std::popcount(m) - std::popcount(r)) % 2 ? -1 : 1;
      v += sign * within[r];
      if (r == 0) break;
    }
    exact[m] = std::max(0.0, v);
  }
  return exact;
}

// Calls f(i) for each index in [0, count) kept with probability p, using
// geometric skips.
template <typename F>
void bernoulli_indices(std::uint64_t count, double p, num::Rng& rng, F&& f) {
  if (p <= 0.0 || count == 0) return;
  if (p >= 1.0) {
    for (std::uint64_t i = 0; i < count; ++i) f(i);
    return;
  }
  const double log_q = std::log1p(-p);
  std::uint64_t i = 0;
  while (true) {
    const double u = 1.0 - rng.uniform();  // (0, 1]
    const double skip = std::floor(std::log(u) / log_q);
    if (skip >= static_cast<double>(count - i)) return;
    i += static_cast<std::uint64_t>(skip);
    f(i);
    if (++i >= count) return;
  }
}

struct Vocabulary {
  std::size_t classes, per_class, noise;

  std::string class_word(std::size_t c, std::size_t j) const {
    return "w" + std::to_string(c * per_class + j);
  }
  std::string noise_word(std::size_t j) const {
    return "w" + std::to_string(classes * per_class + j);
  }
  std::string tweet(std::size_t tokens, bool informative, std::size_t c, num::Rng& rng) const {
    std::string out;
    for (std::size_t t = 0; t < tokens; ++t) {
      if (t) out += ' ';
      out += informative ? class_word(c, rng.below(per_class)) : noise_word(rng.below(noise));
    }
    return out;
  }
  embed::EmbeddingTable vectors(std::size_t dim, num::Rng& rng) const {
    embed::EmbeddingTable t(dim);
    std::vector<double> v(dim);
    for (std::size_t i = 0; i < classes * per_class + noise; ++i) {
      for (double& x : v) x = 0.5 * rng.normal();
      t.set("w" + std::to_string(i), v);
    }
    return t;
  }
};

std::size_t draw_label(std::size_t c, std::size_t k, double author_signal, num::Rng& rng) {
  if (k == 1 || rng.bernoulli(author_signal)) return c;
  const std::size_t other = rng.below(k - 1);
  return other < c ? other : other + 1;
}

text::LabeledExample make_example(std::string id, std::string author, std::size_t label,
                                  std::string raw) {
  text::LabeledExample ex;
  ex.id = std::move(id);
  ex.author = std::move(author);
  ex.label = label;
  ex.raw_text = std::move(raw);
  ex.tokens = text::preprocess(ex.raw_text);
  return ex;
}

}  // namespace

text::Task SynthSpec::resolved_task() const {
  if (!task.empty()) return text::parse_task(task);
  return n_classes == 2 ? text::Task::kHate : text::Task::kSentiment;
}

std::size_t SynthSpec::resolved_communities() const { return communities ? communities : n_classes; }

void SynthSpec::validate() const {
  if (n_classes != 2 && n_classes != 3) throw ParameterError("n_classes must be 2 or 3");
  if (text::class_count(resolved_task()) != n_classes) {
    throw ParameterError("task " + task + " does not have " + std::to_string(n_classes) + " classes");
  }
  const std::size_t c = resolved_communities();
  if (c < n_classes || c % n_classes != 0) {
    throw ParameterError("communities must be a positive multiple of n_classes");
  }
  if (n_users < 2 * c) throw ParameterError("n_users must be at least twice the community count");
  if (!in_unit(homophily)) throw ParameterError("homophily must be in [0, 1]");
  if (!in_unit(text_signal)) throw ParameterError("text_signal must be in [0, 1]");
  if (!in_unit(author_signal)) throw ParameterError("author_signal must be in [0, 1]");
  if (!(avg_degree > 0.0)) throw ParameterError("avg_degree must be positive");
  if (tweets_per_user == 0 || tokens_per_tweet == 0 || class_vocab == 0 || noise_vocab == 0 ||
      word_dim == 0) {
    throw ParameterError("tweets_per_user, tokens_per_tweet, vocabularies and word_dim must be positive");
  }
  if (withheld_communities > c) throw ParameterError("withheld_communities exceeds the community count");
}

double label_overlap_probability(std::size_t class_a, std::size_t class_b, const SynthSpec& spec) {
  const std::size_t k = spec.n_classes;
  const auto pa = label_set_distribution(label_distribution(class_a, k, spec.author_signal), spec.tweets_per_user);
  const auto pb = label_set_distribution(label_distribution(class_b, k, spec.author_signal), spec.tweets_per_user);
  double p = 0.0;
  for (std::size_t a = 1; a < pa.size(); ++a)
    for (std::size_t b = 1; b < pb.size(); ++b)
      if (a & b) p += pa[a] * pb[b];
  return p;
}

EdgeRates solve_edge_rates(const SynthSpec& spec) {
  spec.validate();
  const std::size_t c = spec.resolved_communities();
  const std::size_t k = spec.n_classes;
  std::vector<double> size(c);
  for (std::size_t i = 0; i < c; ++i) size[i] = static_cast<double>(spec.n_users / c + (i < spec.n_users % c));

  double intra_pairs = 0.0, inter_pairs = 0.0, intra_mass = 0.0, inter_mass = 0.0;
  for (std::size_t a = 0; a < c; ++a) {
    const double pairs = size[a] * (size[a] - 1.0) / 2.0;
    intra_pairs += pairs;
    intra_mass += pairs * label_overlap_probability(a % k, a % k, spec);
    for (std::size_t b = a + 1; b < c; ++b) {
      const double cross = size[a] * size[b];
      inter_pairs += cross;
      inter_mass += cross * label_overlap_probability(a % k, b % k, spec);
    }
  }
  const double p_same = intra_mass / intra_pairs;
  const double p_cross = inter_mass / inter_pairs;
  const double edges = spec.avg_degree * static_cast<double>(spec.n_users) / 2.0;
  if (edges > intra_pairs + inter_pairs) throw ParameterError("avg_degree exceeds a complete graph");

  // f = share of edges inside communities; expected homophily is linear in f.
  const double f_lo = std::max(0.0, 1.0 - inter_pairs / edges);
  const double f_hi = std::min(1.0, intra_pairs / edges);
  const auto h_at = [&](double f) { return f * p_same + (1.0 - f) * p_cross; };
  EdgeRates r;
  r.homophily_min = std::min(h_at(f_lo), h_at(f_hi));
  r.homophily_max = std::max(h_at(f_lo), h_at(f_hi));
  const double tol = 1e-12;
  if (spec.homophily < r.homophily_min - tol || spec.homophily > r.homophily_max + tol) {
    throw ParameterError("homophily " + io::format_double(spec.homophily) +
                         " is infeasible for this spec; feasible range is [" +
                         io::format_double(r.homophily_min) + ", " + io::format_double(r.homophily_max) + "]");
  }
  double f = p_same == p_cross ? f_hi : (spec.homophily - p_cross) / (p_same - p_cross);
  f = std::clamp(f, f_lo, f_hi);
  r.intra = std::min(1.0, f * edges / intra_pairs);
  r.inter = inter_pairs > 0.0 ? std::min(1.0, (1.0 - f) * edges / inter_pairs) : 0.0;
  r.expected_homophily = h_at(f);
  return r;
}

graph::AuthorLabels SynthData::author_labels() const {
  graph::AuthorLabels out;
  for (const auto& ex : corpus.examples) out[ex.author].push_back(ex.label);
  for (auto& [author, labels] : out) std::sort(labels.begin(), labels.end());
  return out;
}

graph::SocialGraph SynthData::graph() const {
  return graph::build_social_graph(author_labels(), events);
}

SynthData synthesize(const SynthSpec& spec) {
  SynthData d;
  d.rates = solve_edge_rates(spec);
  const std::size_t n = spec.n_users;
  const std::size_t k = spec.n_classes;
  const std::size_t c = spec.resolved_communities();
  const Vocabulary vocab{k, spec.class_vocab, spec.noise_vocab};

  num::Rng community_rng(num::Rng::derive(spec.seed, 0));
  num::Rng label_rng(num::Rng::derive(spec.seed, 1));
  num::Rng text_rng(num::Rng::derive(spec.seed, 3));
  num::Rng edge_rng(num::Rng::derive(spec.seed, 4));
  num::Rng timeline_rng(num::Rng::derive(spec.seed, 5));
  num::Rng word_rng(num::Rng::derive(spec.seed, 6));

  std::vector<std::string> users(n);
  for (std::size_t i = 0; i < n; ++i) users[i] = padded("u", i, n);
  std::vector<std::size_t> assignment(n);
  for (std::size_t i = 0; i < n; ++i) assignment[i] = i % c;
  community_rng.shuffle(std::span<std::size_t>(assignment));
  for (std::size_t i = 0; i < c; ++i) d.community_class.push_back(i % k);
  for (std::size_t i = 0; i < n; ++i) d.community[users[i]] = assignment[i];

  d.corpus.task = spec.resolved_task();
  const std::size_t n_tweets = n * spec.tweets_per_user;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t cls = d.community_class[assignment[i]];
    for (std::size_t t = 0; t < spec.tweets_per_user; ++t) {
      const std::size_t idx = i * spec.tweets_per_user + t;
      d.corpus.examples.push_back(make_example(padded("t", idx, n_tweets), users[i],
                                               draw_label(cls, k, spec.author_signal, label_rng), ""));
    }
  }
  text::assign_splits(d.corpus.examples, num::Rng::derive(spec.seed, 2));
  for (std::size_t i = 0; i < n_tweets; ++i) {
    auto& ex = d.corpus.examples[i];
    const bool withheld = ex.split == text::Split::kTest && d.community.at(ex.author) < spec.withheld_communities;
    const bool informative = text_rng.bernoulli(spec.text_signal) && !withheld;
    ex.raw_text = vocab.tweet(spec.tokens_per_tweet, informative, ex.label, text_rng);
    ex.tokens = text::preprocess(ex.raw_text);
  }

  // Users grouped by community; edges sampled block by block.
  std::vector<std::vector<std::size_t>> members(c);
  for (std::size_t i = 0; i < n; ++i) members[assignment[i]].push_back(i);
  const auto add_edge = [&](std::size_t u, std::size_t v) {
    if (edge_rng.bernoulli(0.5)) std::swap(u, v);
    d.events.push_back({users[u], users[v]});
  };
  for (std::size_t a = 0; a < c; ++a) {
    const auto& ma = members[a];
    const std::uint64_t m = ma.size();
    bernoulli_indices(m * (m - 1) / 2, d.rates.intra, edge_rng, [&](std::uint64_t idx) {
      // Row-major index over pairs (i, j), i < j.
      std::uint64_t i = 0, row = m - 1;
      while (idx >= row) {
        idx -= row;
        ++i;
        --row;
      }
      add_edge(ma[i], ma[i + 1 + idx]);
    });
    for (std::size_t b = a + 1; b < c; ++b) {
      const auto& mb = members[b];
      bernoulli_indices(static_cast<std::uint64_t>(ma.size()) * mb.size(), d.rates.inter, edge_rng,
                        [&](std::uint64_t idx) { add_edge(ma[idx / mb.size()], mb[idx % mb.size()]); });
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    auto& posts = d.timelines[users[i]];
    const std::size_t cls = d.community_class[assignment[i]];
    for (std::size_t t = 0; t < spec.timeline_posts; ++t) {
      const std::size_t label = draw_label(cls, k, spec.author_signal, timeline_rng);
      posts.push_back(vocab.tweet(spec.tokens_per_tweet, timeline_rng.bernoulli(spec.text_signal), label,
                                  timeline_rng));
    }
  }
  d.words = vocab.vectors(spec.word_dim, word_rng);
  return d;
}

void PlantedSpec::validate() const {
  if (targets < 10) throw ParameterError("planted fixture needs at least 10 targets");
  if (informants_per_class == 0) throw ParameterError("informants_per_class must be positive");
  if (distractors_per_target < 5) throw ParameterError("each target needs at least 5 distractors");
  if (distractors < distractors_per_target) throw ParameterError("distractor pool is smaller than distractors_per_target");
  if (tweets_per_target == 0 || tweets_per_helper == 0 || tokens_per_tweet == 0 || class_vocab == 0 ||
      noise_vocab == 0 || word_dim == 0) {
    throw ParameterError("counts must be positive");
  }
  if (feature_dim < 3) throw ParameterError("feature_dim must be at least 3");
  if (!(feature_noise >= 0.0)) throw ParameterError("feature_noise must be nonnegative");
}

SynthData planted_signal(const PlantedSpec& spec) {
  spec.validate();
  constexpr std::size_t k = 2;
  SynthData d;
  d.corpus.task = text::Task::kHate;
  d.community_class = {0, 1};
  const Vocabulary vocab{k, spec.class_vocab, spec.noise_vocab};
  num::Rng rng(num::Rng::derive(spec.seed, 0));
  num::Rng text_rng(num::Rng::derive(spec.seed, 3));
  num::Rng feature_rng(num::Rng::derive(spec.seed, 5));
  num::Rng word_rng(num::Rng::derive(spec.seed, 6));

  const std::size_t n_inf = k * spec.informants_per_class;
  std::vector<std::string> informants, distractors, targets;
  std::vector<std::size_t> inf_class, dis_class;
  for (std::size_t i = 0; i < n_inf; ++i) {
    informants.push_back(padded("inf", i, n_inf));
    inf_class.push_back(i % k);
  }
  for (std::size_t i = 0; i < spec.distractors; ++i) {
    distractors.push_back(padded("dis", i, spec.distractors));
    dis_class.push_back(rng.below(k));
  }
  for (std::size_t i = 0; i < spec.targets; ++i) targets.push_back(padded("tgt", i, spec.targets));

  std::vector<std::size_t> target_class(spec.targets);
  std::vector<std::size_t> pool(spec.distractors);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  for (std::size_t i = 0; i < spec.targets; ++i) {
    const std::size_t inf = rng.below(n_inf);
    target_class[i] = inf_class[inf];
    d.informant[targets[i]] = informants[inf];
    d.events.push_back({targets[i], informants[inf]});
    // Partial Fisher-Yates for distinct distractors.
    for (std::size_t j = 0; j < spec.distractors_per_target; ++j) {
      std::swap(pool[j], pool[j + rng.below(spec.distractors - j)]);
      d.events.push_back({targets[i], distractors[pool[j]]});
    }
  }

  std::size_t tweet = 0;
  const auto add = [&](const std::string& author, std::size_t label, std::size_t count) {
    for (std::size_t t = 0; t < count; ++t)
      d.corpus.examples.push_back(make_example("p" + std::to_string(tweet++), author, label, ""));
  };
  for (std::size_t i = 0; i < spec.targets; ++i) add(targets[i], target_class[i], spec.tweets_per_target);
  for (std::size_t i = 0; i < n_inf; ++i) add(informants[i], inf_class[i], spec.tweets_per_helper);
  for (std::size_t i = 0; i < spec.distractors; ++i) add(distractors[i], dis_class[i], spec.tweets_per_helper);
  const std::size_t total = tweet;
  for (std::size_t i = 0; i < total; ++i) d.corpus.examples[i].id = padded("p", i, total);
  text::assign_splits(d.corpus.examples, num::Rng::derive(spec.seed, 2));
  for (auto& ex : d.corpus.examples) {
    const bool helper = !ex.author.starts_with("tgt");
    ex.raw_text = vocab.tweet(spec.tokens_per_tweet, helper, ex.label, text_rng);
    ex.tokens = text::preprocess(ex.raw_text);
  }

  embed::EmbeddingTable features(spec.feature_dim);
  std::vector<double> v(spec.feature_dim);
  const auto put = [&](const std::string& id, bool flag, std::optional<std::size_t> cls) {
    for (double& x : v) x = spec.feature_noise * feature_rng.normal();
    if (flag) v[0] += 1.0;
    if (cls) v[1 + *cls] += 1.0;
    features.set(id, v);
  };
  for (std::size_t i = 0; i < spec.targets; ++i) {
    put(targets[i], false, std::nullopt);
    d.community[targets[i]] = target_class[i];
  }
  for (std::size_t i = 0; i < n_inf; ++i) {
    put(informants[i], true, inf_class[i]);
    d.community[informants[i]] = inf_class[i];
  }
  for (std::size_t i = 0; i < spec.distractors; ++i) {
    put(distractors[i], false, dis_class[i]);
    d.community[distractors[i]] = dis_class[i];
  }
  d.features = std::move(features);
  d.words = vocab.vectors(spec.word_dim, word_rng);
  return d;
}

void write_synth(const SynthData& data, const std::filesystem::path& dir, const std::string& spec_json) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
  text::write_corpus(data.corpus, dir / "corpus.jsonl");
  graph::write_retweet_events(dir / "retweets.jsonl", data.events);
  std::string timelines;
  for (const auto& [author, posts] : data.timelines)
    for (const auto& p : posts) timelines += json{{"author", author}, {"text", p}}.dump() + "\n";
  io::write_file_atomic(dir / "timelines.jsonl", timelines);
  embed::write_embeddings(data.words, dir / "words.txt");
  std::string communities = "user\tcommunity\tclass\n";
  for (const auto& [user, comm] : data.community) {
    communities += user + "\t" + std::to_string(comm) + "\t" +
                   text::task_labels(data.corpus.task).at(data.community_class.at(comm)) + "\n";
  }
  io::write_file_atomic(dir / "communities.tsv", communities);
  if (data.features) embed::write_embeddings(*data.features, dir / "features.txt");

  json meta = {{"schema_version", 1},
               {"spec", json::parse(spec_json)},
               {"task", text::task_name(data.corpus.task)},
               {"users", data.community.size()},
               {"tweets", data.corpus.examples.size()},
               {"events", data.events.size()}};
  if (data.features) {
    meta["informants"] = data.informant;
  } else {
    meta["edge_rates"] = {{"intra", data.rates.intra},
                          {"inter", data.rates.inter},
                          {"expected_homophily", data.rates.expected_homophily},
                          {"homophily_range", {data.rates.homophily_min, data.rates.homophily_max}}};
  }
  io::write_file_atomic(dir / "synth.json", meta.dump(2) + "\n");
}

}  // namespace socialgat::synth
