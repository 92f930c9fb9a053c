#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "socialgat/embed.hpp"
#include "socialgat/numcore/rng.hpp"
#include "socialgat/numcore/tape.hpp"

namespace socialgat::text {

enum class Task { kSentiment, kStance, kHate };

Task parse_task(std::string_view name);
const char* task_name(Task task);
/// Label names in class-index order.
const std::vector<std::string>& task_labels(Task task);
std::size_t class_count(Task task);

enum class Split { kTrain, kVal, kTest };
const char* split_name(Split s);

struct LabeledExample {
  std::string id;
  std::string author;
  std::size_t label = 0;
  std::string raw_text;
  std::vector<std::string> tokens;
  Split split = Split::kTrain;
};

struct LabeledCorpus {
  Task task = Task::kSentiment;
  std::vector<LabeledExample> examples;

  std::vector<std::size_t> indices(Split s) const;
  std::size_t count(Split s) const;
};

inline constexpr std::size_t kMaxTokens = 64;

/// Lowercases ASCII, splits on whitespace and punctuation, and replaces URLs,
/// hashtags and mentions with <url>, <hashtag>, <mention>. Bytes >= 0x80 are
/// treated as word characters so UTF-8 words stay whole.
std::vector<std::string> preprocess(std::string_view raw);

/// Parses JSON Lines records. When no record carries a "split" field the
/// examples are shuffled with `seed` and cut 80/10/10; when every record
/// carries one it is honored; a mix is rejected. All record errors are
/// collected into one ParseError.
LabeledCorpus parse_corpus(std::string_view content, Task task, std::uint64_t seed,
                           const std::string& source = "corpus");
LabeledCorpus load_corpus(const std::filesystem::path& path, Task task, std::uint64_t seed);
std::string format_corpus(const LabeledCorpus& corpus);
void write_corpus(const LabeledCorpus& corpus, const std::filesystem::path& path);

/// Seeded shuffle into round(0.8 n) train, round(0.1 n) val, remainder test.
void assign_splits(std::vector<LabeledExample>& examples, std::uint64_t seed);

/// Author -> preprocessed tokens of every past post, concatenated in file
/// order. Records are {"author": ..., "text": ...}.
std::map<std::string, std::vector<std::string>> load_timelines(const std::filesystem::path& path);

class Vocab {
 public:
  static constexpr std::size_t kPad = 0, kUnk = 1, kUrl = 2, kHashtag = 3, kMention = 4;

  Vocab();

  std::size_t add(const std::string& token);
  /// Index of token, or kUnk.
  std::size_t index(std::string_view token) const;
  bool contains(std::string_view token) const;
  const std::string& token(std::size_t i) const { return tokens_.at(i); }
  std::size_t size() const noexcept { return tokens_.size(); }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Vocabulary and input vectors for the text encoder. Word vectors are
/// frozen; the three placeholders are trainable and start at the mean word
/// vector; <unk> is fixed at the mean.
class WordInputs {
 public:
  explicit WordInputs(const embed::EmbeddingTable& words);

  const Vocab& vocab() const noexcept { return vocab_; }
  std::size_t dim() const noexcept { return dim_; }

  /// Token indices, truncated to kMaxTokens.
  std::vector<std::size_t> encode(std::span<const std::string> tokens) const;
  /// Share of tokens that map to <unk>; 0 for no tokens.
  double oov_rate(std::span<const std::vector<std::string>> docs) const;

  num::Var embed(num::Tape& tape, std::size_t index);
  std::vector<num::Parameter*> parameters();

 private:
  Vocab vocab_;
  std::size_t dim_;
  std::vector<double> table_;  // vocab.size() x dim
  std::vector<num::Parameter> placeholders_;  // url, hashtag, mention
};

/// One LSTM direction: packed gates [i f g o] = W [x ; h] + b.
struct LstmDirection {
  num::Parameter w;  // [4H x (E + H)]
  num::Parameter b;  // [4H]
};

struct BiLstm {
  std::size_t input_dim = 0;
  std::size_t hidden = 50;
  LstmDirection forward;
  LstmDirection backward;

  std::vector<num::Parameter*> parameters();
};

/// Weights uniform in [-1/sqrt(H), 1/sqrt(H)], forget-gate bias 1, other
/// biases 0.
BiLstm init_bilstm(std::size_t input_dim, std::size_t hidden, num::Rng& rng);

/// Final forward hidden state concatenated with the final backward hidden
/// state ([2H]). An empty sequence yields zeros.
num::Var bilstm_encode(num::Tape& tape, std::span<const num::Var> inputs, BiLstm& lstm);
num::Var bilstm_encode(num::Tape& tape, std::span<const std::size_t> token_ids, BiLstm& lstm,
                       WordInputs& words);

}  // namespace socialgat::text
