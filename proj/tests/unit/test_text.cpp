#include <cmath>
#include <set>

#include "doctest.h"
#include "socialgat/errors.hpp"
#include "socialgat/io.hpp"
#include "socialgat/numcore/gradcheck.hpp"
#include "socialgat/text.hpp"

using namespace socialgat;
using namespace socialgat::text;
using num::Shape;
using num::Tape;
using num::Tensor;
using num::Var;

namespace {

using Tokens = std::vector<std::string>;

std::string join(const Tokens& t) {
  std::string s;
  for (const auto& x : t) s += x + " ";
  return s;
}

std::string records(std::size_t n, bool with_split = false) {
  std::string out;
  const char* labels[] = {"POSITIVE", "NEGATIVE", "NEUTRAL"};
  for (std::size_t i = 0; i < n; ++i) {
    out += R"({"id":"t)" + std::to_string(i) + R"(","author":"a)" + std::to_string(i % 7) +
           R"(","label":")" + labels[i % 3] + R"(","text":"tweet number )" + std::to_string(i) + "\"";
    if (with_split) out += R"(,"split":"test")";
    out += "}\n";
  }
  return out;
}

embed::EmbeddingTable tiny_words() {
  embed::EmbeddingTable t(3);
  t.set("good", std::vector<double>{1, 0, 0});
  t.set("bad", std::vector<double>{0, 1, 0});
  t.set("day", std::vector<double>{0, 0, 1});
  return t;
}

}  // namespace

TEST_CASE("preprocess tokenizes and replaces placeholders") {
  CHECK(preprocess("Check HTTP://T.co/x #MAGA @User!") ==
        Tokens{"check", "<url>", "<hashtag>", "<mention>", "!"});
  CHECK(preprocess("").empty());
  CHECK(preprocess("ABC abc") == Tokens{"abc", "abc"});
  CHECK(preprocess("see www.example.com/a?b now") == Tokens{"see", "<url>", "now"});
  CHECK(preprocess("don't stop, ok?") == Tokens{"don", "'", "t", "stop", ",", "ok", "?"});
  CHECK(preprocess("# alone @ 5") == Tokens{"#", "alone", "@", "5"});
  CHECK(preprocess("caf\xc3\xa9 ol\xc3\xa9") == Tokens{"caf\xc3\xa9", "ol\xc3\xa9"});
}

TEST_CASE("preprocess is idempotent on its own output") {
  const std::vector<std::string> inputs = {
      "Check HTTP://T.co/x #MAGA @User!", "RT @a: wow!!! https://x.y/z?q=1 #tag_1",
      "mixed <url> and <Mention> text...", "a.b,c;d:e(f)g", "   ", "x#y z@w"};
  for (const auto& s : inputs) {
    const Tokens once = preprocess(s);
    CHECK(preprocess(join(once)) == once);
  }
}

TEST_CASE("task labels") {
  CHECK(task_labels(Task::kSentiment) == Tokens{"POSITIVE", "NEGATIVE", "NEUTRAL"});
  CHECK(task_labels(Task::kStance) == Tokens{"FAVOR", "AGAINST", "NEUTRAL"});
  CHECK(task_labels(Task::kHate) == Tokens{"NORMAL", "HATEFUL"});
  CHECK(parse_task("hate") == Task::kHate);
  CHECK_THROWS_AS(parse_task("irony"), ParameterError);
}

TEST_CASE("corpus split: 10 records become 8/1/1 and are stable") {
  const LabeledCorpus a = parse_corpus(records(10), Task::kSentiment, 42);
  CHECK(a.count(Split::kTrain) == 8);
  CHECK(a.count(Split::kVal) == 1);
  CHECK(a.count(Split::kTest) == 1);
  const LabeledCorpus b = parse_corpus(records(10), Task::kSentiment, 42);
  CHECK(a.indices(Split::kTest) == b.indices(Split::kTest));
  CHECK(a.indices(Split::kVal) == b.indices(Split::kVal));
  CHECK(a.examples[3].tokens == Tokens{"tweet", "number", "3"});
  CHECK(a.examples[1].label == 1);
}

TEST_CASE("corpus split: 1000 records become 800/100/100") {
  const LabeledCorpus c = parse_corpus(records(1000), Task::kSentiment, 7);
  CHECK(c.count(Split::kTrain) == 800);
  CHECK(c.count(Split::kVal) == 100);
  CHECK(c.count(Split::kTest) == 100);
}

TEST_CASE("corpus honors explicit splits and rejects bad records") {
  const LabeledCorpus c = parse_corpus(records(5, true), Task::kSentiment, 1);
  CHECK(c.count(Split::kTest) == 5);

  const std::string bad = R"({"id":"x","author":"a","label":"POS","text":"hi"})";
  try {
    parse_corpus(bad, Task::kSentiment, 1);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("POS") != std::string::npos);
    CHECK(msg.find("POSITIVE, NEGATIVE, NEUTRAL") != std::string::npos);
    CHECK(msg.find("line 1") != std::string::npos);
  }
  const std::string dup = records(2) + R"({"id":"t0","author":"b","label":"NEUTRAL","text":"again"})";
  CHECK_THROWS_AS(parse_corpus(dup, Task::kSentiment, 1), ParseError);
  const std::string mixed = records(2) + R"({"id":"z","author":"b","label":"NEUTRAL","text":"x","split":"val"})";
  CHECK_THROWS_AS(parse_corpus(mixed, Task::kSentiment, 1), ParseError);
  CHECK_THROWS_AS(parse_corpus("{not json", Task::kSentiment, 1), ParseError);
}

TEST_CASE("corpus write and reload") {
  const LabeledCorpus c = parse_corpus(records(30), Task::kSentiment, 3);
  const auto path = std::filesystem::temp_directory_path() / "socialgat_text_corpus.jsonl";
  write_corpus(c, path);
  const LabeledCorpus d = load_corpus(path, Task::kSentiment, 99);
  REQUIRE(d.examples.size() == 30);
  for (std::size_t i = 0; i < 30; ++i) {
    CHECK(d.examples[i].id == c.examples[i].id);
    CHECK(d.examples[i].split == c.examples[i].split);
    CHECK(d.examples[i].label == c.examples[i].label);
  }
  std::filesystem::remove(path);
}

TEST_CASE("timelines concatenate posts per author") {
  const auto path = std::filesystem::temp_directory_path() / "socialgat_text_tl.jsonl";
  io::write_file_atomic(path, "{\"author\":\"a\",\"text\":\"Hello there\"}\n"
                              "{\"author\":\"b\",\"text\":\"#x\"}\n"
                              "{\"author\":\"a\",\"text\":\"again\"}\n");
  const auto tl = load_timelines(path);
  CHECK(tl.at("a") == Tokens{"hello", "there", "again"});
  CHECK(tl.at("b") == Tokens{"<hashtag>"});
  std::filesystem::remove(path);
}

TEST_CASE("vocab and word inputs") {
  Vocab v;
  CHECK(v.index("<pad>") == 0);
  CHECK(v.index("<unk>") == 1);
  CHECK(v.size() == 5);
  CHECK(v.index("nothing") == Vocab::kUnk);

  WordInputs words(tiny_words());
  CHECK(words.dim() == 3);
  const auto ids = words.encode(Tokens{"good", "zzz", "<url>"});
  CHECK(ids == std::vector<std::size_t>{words.vocab().index("good"), Vocab::kUnk, Vocab::kUrl});
  CHECK(words.oov_rate(std::vector<Tokens>{{"good", "zzz"}, {"bad", "day"}}) == 0.25);

  Tape tape;
  const Tensor mean = Tensor::vector({1.0 / 3, 1.0 / 3, 1.0 / 3});
  CHECK(tape.value(words.embed(tape, Vocab::kUnk)) == mean);
  CHECK(tape.value(words.embed(tape, Vocab::kMention)) == mean);
  CHECK(tape.kind(words.embed(tape, Vocab::kUnk)) == num::OpKind::kLeaf);
  CHECK(tape.kind(words.embed(tape, Vocab::kHashtag)) == num::OpKind::kParam);
  CHECK(words.parameters().size() == 3);

  Tokens long_doc(100, "good");
  CHECK(words.encode(long_doc).size() == kMaxTokens);
}

TEST_CASE("bilstm_encode shapes and zero fixed point") {
  num::Rng rng(1);
  BiLstm lstm = init_bilstm(3, 50, rng);
  for (std::size_t i = 50; i < 100; ++i) CHECK(lstm.forward.b.value[i] == 1.0);
  CHECK(lstm.forward.b.value[0] == 0.0);
  CHECK_FALSE(lstm.forward.b.decays);
  const double bound = 1.0 / std::sqrt(50.0);
  for (double x : lstm.backward.w.value.data()) CHECK(std::abs(x) <= bound);

  for (auto* p : lstm.parameters()) p->value.fill(0.0);
  WordInputs words(tiny_words());
  Tape tape;
  const std::vector<std::size_t> ids = words.encode(Tokens{"good", "day", "bad"});
  const Var out = bilstm_encode(tape, ids, lstm, words);
  CHECK(tape.value(out) == Tensor(Shape::vector(100)));

  BiLstm fresh = init_bilstm(3, 50, rng);
  Tape t2;
  const std::vector<std::size_t> one = {words.vocab().index("good")};
  CHECK(t2.value(bilstm_encode(t2, one, fresh, words)).shape() == Shape::vector(100));
  CHECK(t2.value(bilstm_encode(t2, std::vector<std::size_t>{}, fresh, words)) ==
        Tensor(Shape::vector(100)));
  std::vector<std::size_t> many(40, words.vocab().index("bad"));
  CHECK(t2.value(bilstm_encode(t2, many, fresh, words)).shape() == Shape::vector(100));
}

TEST_CASE("bilstm single token runs one step per direction") {
  num::Rng rng(2);
  BiLstm lstm = init_bilstm(3, 4, rng);
  lstm.backward.w.value = lstm.forward.w.value;
  lstm.backward.b.value = lstm.forward.b.value;
  WordInputs words(tiny_words());
  Tape tape;
  const std::vector<std::size_t> one = {words.vocab().index("day")};
  const Tensor out = tape.value(bilstm_encode(tape, one, lstm, words));
  for (std::size_t i = 0; i < 4; ++i) CHECK(out[i] == out[4 + i]);

  // One hand-computed cell step from zero state.
  const auto sig = [](double z) { return 1.0 / (1.0 + std::exp(-z)); };
  const Tensor& w = lstm.forward.w.value;
  const Tensor& b = lstm.forward.b.value;
  const std::vector<double> x = {0, 0, 1, 0, 0, 0, 0};
  std::vector<double> z(16);
  for (std::size_t r = 0; r < 16; ++r) {
    z[r] = b[r];
    for (std::size_t k = 0; k < 7; ++k) z[r] += w.at(r, k) * x[k];
  }
  for (std::size_t j = 0; j < 4; ++j) {
    const double c = sig(z[j]) * std::tanh(z[8 + j]);
    CHECK(std::abs(out[j] - sig(z[12 + j]) * std::tanh(c)) < 1e-14);
  }
}

TEST_CASE("bilstm directional symmetry") {
  num::Rng rng(5);
  BiLstm lstm = init_bilstm(3, 6, rng);
  BiLstm swapped = lstm;
  std::swap(swapped.forward, swapped.backward);
  WordInputs words(tiny_words());
  std::vector<std::size_t> ids = words.encode(Tokens{"good", "bad", "day", "good", "<url>"});
  std::vector<std::size_t> rev(ids.rbegin(), ids.rend());
  Tape tape;
  const Tensor a = tape.value(bilstm_encode(tape, ids, lstm, words));
  const Tensor b = tape.value(bilstm_encode(tape, rev, swapped, words));
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(std::abs(a[i] - b[6 + i]) < 1e-14);
    CHECK(std::abs(a[6 + i] - b[i]) < 1e-14);
  }
}

TEST_CASE("bilstm gradients match finite differences") {
  num::Rng rng(8);
  BiLstm lstm = init_bilstm(3, 4, rng);
  WordInputs words(tiny_words());
  num::Parameter head("head", Tensor(Shape::vector(8)));
  for (double& x : head.value.data()) x = rng.uniform(-1, 1);
  const std::vector<std::size_t> ids = words.encode(Tokens{"good", "<hashtag>", "day"});
  std::vector<num::Parameter*> params = lstm.parameters();
  for (auto* p : words.parameters()) params.push_back(p);
  params.push_back(&head);
  const double err = num::check_parameter_gradients(
      [&](Tape& t) { return t.dot(t.param(head), bilstm_encode(t, ids, lstm, words)); }, params);
  CHECK(err < 1e-4);
}
