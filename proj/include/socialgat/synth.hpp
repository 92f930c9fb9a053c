#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "socialgat/embed.hpp"
#include "socialgat/graph.hpp"
#include "socialgat/text.hpp"

namespace socialgat::synth {

/// Planted-partition dataset settings. Users are spread evenly over
/// `communities`; community c carries class c mod n_classes.
struct SynthSpec {
  std::size_t n_users = 2000;
  std::size_t n_classes = 2;
  std::string task;  // empty: hate for 2 classes, sentiment for 3
  std::size_t communities = 0;  // 0: one per class
  double homophily = 0.9;
  double text_signal = 0.6;    // share of tweets written with class words
  double author_signal = 0.9;  // chance a tweet carries the community class
  double avg_degree = 10.0;    // sets intra/inter edge rates together with homophily
  std::size_t tweets_per_user = 2;
  std::size_t tokens_per_tweet = 8;
  std::size_t class_vocab = 20;
  std::size_t noise_vocab = 200;
  std::size_t timeline_posts = 10;
  std::size_t withheld_communities = 1;  // test tweets of these get noise text
  std::size_t word_dim = 50;
  std::uint64_t seed = 1;

  text::Task resolved_task() const;
  std::size_t resolved_communities() const;
  void validate() const;
};

/// Probability that two users' tweet-label sets intersect, computed exactly
/// from the per-tweet label distributions of their communities.
double label_overlap_probability(std::size_t class_a, std::size_t class_b, const SynthSpec& spec);

struct EdgeRates {
  double intra = 0.0;
  double inter = 0.0;
  double expected_homophily = 0.0;
  double homophily_min = 0.0;  // feasible range for this spec
  double homophily_max = 0.0;
};

/// Solves the intra/inter edge probabilities that give the requested mean
/// degree and expected homophily. Throws ParameterError naming the feasible
/// range when the homophily cannot be reached.
EdgeRates solve_edge_rates(const SynthSpec& spec);

struct SynthData {
  text::LabeledCorpus corpus;
  std::vector<graph::RetweetEvent> events;
  std::map<std::string, std::size_t> community;       // user -> community
  std::vector<std::size_t> community_class;           // community -> class
  std::map<std::string, std::vector<std::string>> timelines;  // user -> raw posts
  embed::EmbeddingTable words;
  EdgeRates rates;
  /// Author profile vectors; only produced by the planted-signal fixture.
  std::optional<embed::EmbeddingTable> features;
  /// Target -> its predictive neighbor (planted-signal fixture only).
  std::map<std::string, std::string> informant;

  graph::AuthorLabels author_labels() const;
  graph::SocialGraph graph() const;
};

SynthData synthesize(const SynthSpec& spec);

/// Targets with uninformative text whose label equals that of one
/// "informant" neighbor; each target also links to `distractors_per_target`
/// users of random class. Informants and distractors tweet with clear text.
/// The feature table flags informants in its first coordinate and encodes
/// every non-target user's class in the next n_classes coordinates.
struct PlantedSpec {
  std::size_t targets = 300;
  std::size_t informants_per_class = 20;
  std::size_t distractors = 200;
  std::size_t distractors_per_target = 5;
  std::size_t tweets_per_target = 2;
  std::size_t tweets_per_helper = 1;
  std::size_t tokens_per_tweet = 8;
  std::size_t class_vocab = 20;
  std::size_t noise_vocab = 200;
  std::size_t feature_dim = 16;
  double feature_noise = 0.1;
  std::size_t word_dim = 16;
  std::uint64_t seed = 1;

  void validate() const;
};

SynthData planted_signal(const PlantedSpec& spec);

/// Writes corpus.jsonl, retweets.jsonl, timelines.jsonl, words.txt,
/// communities.tsv, synth.json and, when present, features.txt.
void write_synth(const SynthData& data, const std::filesystem::path& dir,
                 const std::string& spec_json);

}  // namespace socialgat::synth
