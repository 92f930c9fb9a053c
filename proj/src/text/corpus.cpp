#include <cmath>
#include <numeric>
#include <unordered_set>

#include "json.hpp"
#include "socialgat/errors.hpp"
#include "socialgat/io.hpp"
#include "socialgat/text.hpp"

namespace socialgat::text {

using nlohmann::json;

namespace {

const std::vector<std::string> kSentiment = {"POSITIVE", "NEGATIVE", "NEUTRAL"};
const std::vector<std::string> kStance = {"FAVOR", "AGAINST", "NEUTRAL"};
const std::vector<std::string> kHate = {"NORMAL", "HATEFUL"};

std::string join(const std::vector<std::string>& items, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

std::string required_string(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || !it->is_string()) {
    throw ParseError(std::string("missing string field \"") + key + "\"");
  }
  return it->get<std::string>();
}

Split parse_split(const std::string& s) {
  if (s == "train") return Split::kTrain;
  if (s == "val") return Split::kVal;
  if (s == "test") return Split::kTest;
  throw ParseError("split must be train, val or test, got \"" + s + "\"");
}

}  // namespace

Task parse_task(std::string_view name) {
  if (name == "sentiment") return Task::kSentiment;
  if (name == "stance") return Task::kStance;
  if (name == "hate") return Task::kHate;
  throw ParameterError("unknown task '" + std::string(name) + "' (expected sentiment, stance or hate)");
}

const char* task_name(Task task) {
  switch (task) {
    case Task::kSentiment: return "sentiment";
    case Task::kStance: return "stance";
    case Task::kHate: return "hate";
  }
  return "?";
}

const std::vector<std::string>& task_labels(Task task) {
  switch (task) {
    case Task::kSentiment: return kSentiment;
    case Task::kStance: return kStance;
    case Task::kHate: return kHate;
  }
  return kSentiment;
}

std::size_t class_count(Task task) { return task_labels(task).size(); }

const char* split_name(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "?";
}

std::vector<std::size_t> LabeledCorpus::indices(Split s) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < examples.size(); ++i)
    if (examples[i].split == s) out.push_back(i);
  return out;
}

std::size_t LabeledCorpus::count(Split s) const { return indices(s).size(); }

void assign_splits(std::vector<LabeledExample>& examples, std::uint64_t seed) {
  const std::size_t n = examples.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  num::Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));
  const auto n_train = static_cast<std::size_t>(std::llround(0.8 * static_cast<double>(n)));
  const auto n_val = std::min(n - n_train, static_cast<std::size_t>(std::llround(0.1 * static_cast<double>(n))));
  for (std::size_t k = 0; k < n; ++k) {
    examples[order[k]].split = k < n_train ? Split::kTrain : k < n_train + n_val ? Split::kVal : Split::kTest;
  }
}

LabeledCorpus parse_corpus(std::string_view content, Task task, std::uint64_t seed,
                           const std::string& source) {
  LabeledCorpus corpus;
  corpus.task = task;
  const auto& labels = task_labels(task);
  std::vector<std::string> errors;
  std::unordered_set<std::string> seen;
  std::size_t with_split = 0;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= content.size()) {
    std::size_t end = content.find('\n', pos);
    if (end == std::string_view::npos) end = content.size();
    std::string_view line = content.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    const std::string where = source + " line " + std::to_string(line_no) + ": ";
    try {
      const json j = json::parse(line);
      LabeledExample ex;
      ex.id = required_string(j, "id");
      ex.author = required_string(j, "author");
      ex.raw_text = required_string(j, "text");
      const std::string label = required_string(j, "label");
      const auto it = std::find(labels.begin(), labels.end(), label);
      if (it == labels.end()) {
        throw ParseError("label \"" + label + "\" is not valid for task " + task_name(task) +
                         " (valid: " + join(labels, ", ") + ")");
      }
      ex.label = static_cast<std::size_t>(it - labels.begin());
      if (j.contains("split")) {
        if (!j["split"].is_string()) throw ParseError("split must be a string");
        ex.split = parse_split(j["split"].get<std::string>());
        ++with_split;
      }
      if (!seen.insert(ex.id).second) throw ParseError("duplicate id \"" + ex.id + "\"");
      ex.tokens = preprocess(ex.raw_text);
      corpus.examples.push_back(std::move(ex));
    } catch (const json::exception& e) {
      errors.push_back(where + "invalid JSON: " + e.what());
    } catch (const ParseError& e) {
      errors.push_back(where + e.what());
    }
  }
  if (errors.empty() && with_split != 0 && with_split != corpus.examples.size()) {
    errors.push_back(source + ": " + std::to_string(with_split) + " of " +
                     std::to_string(corpus.examples.size()) +
                     " records have a split field; give it on all records or none");
  }
  if (!errors.empty()) {
    std::string msg = std::to_string(errors.size()) + " invalid record(s)";
    for (std::size_t i = 0; i < errors.size() && i < 20; ++i) msg += "\n  " + errors[i];
    throw ParseError(msg);
  }
  if (with_split == 0) assign_splits(corpus.examples, seed);
  return corpus;
}

LabeledCorpus load_corpus(const std::filesystem::path& path, Task task, std::uint64_t seed) {
  return parse_corpus(io::read_file(path), task, seed, path.string());
}

std::string format_corpus(const LabeledCorpus& corpus) {
  const auto& labels = task_labels(corpus.task);
  std::string out;
  for (const auto& ex : corpus.examples) {
    const json j = {{"id", ex.id},
                    {"author", ex.author},
                    {"label", labels.at(ex.label)},
                    {"text", ex.raw_text},
                    {"split", split_name(ex.split)}};
    out += j.dump();
    out += '\n';
  }
  return out;
}

void write_corpus(const LabeledCorpus& corpus, const std::filesystem::path& path) {
  io::write_file_atomic(path, format_corpus(corpus));
}

std::map<std::string, std::vector<std::string>> load_timelines(const std::filesystem::path& path) {
  std::map<std::string, std::vector<std::string>> out;
  const auto lines = io::read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].find_first_not_of(" \t") == std::string::npos) continue;
    const std::string where = path.string() + " line " + std::to_string(i + 1) + ": ";
    try {
      const json j = json::parse(lines[i]);
      auto tokens = preprocess(required_string(j, "text"));
      auto& doc = out[required_string(j, "author")];
      doc.insert(doc.end(), tokens.begin(), tokens.end());
    } catch (const json::exception& e) {
      throw ParseError(where + "invalid JSON: " + e.what());
    } catch (const ParseError& e) {
      throw ParseError(where + e.what());
    }
  }
  return out;
}

}  // namespace socialgat::text
