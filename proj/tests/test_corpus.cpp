#include <doctest.h>

#include "testutil.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "xlsent/corpus.hpp"
#include "xlsent/errors.hpp"
#include "xlsent/rng.hpp"

using namespace xlsent;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

void write_lines(const std::string& path, const std::vector<std::string>& lines) {
  std::ofstream out(path, std::ios::binary);
  for (const std::string& line : lines) out << line << '\n';
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

LabeledDataset tiny_dataset(int n) {
  std::vector<Document> docs;
  for (int i = 0; i < n; ++i) {
    Document d;
    d.id = "doc-" + std::to_string(i);
    d.language = "sl";
    d.sentiment = static_cast<SentimentLabel>(i % 3);
    d.paragraphs = {"first paragraph " + std::to_string(i), "second one."};
    docs.push_back(std::move(d));
  }
  return LabeledDataset(std::move(docs));
}

}  // namespace

TEST_CASE("aggregate_annotations thresholds") {
  CHECK(aggregate_annotations({2, 2, 3}) == SentimentLabel::negative);  // mean 2.333
  CHECK(aggregate_annotations({3, 3}) == SentimentLabel::neutral);
  CHECK(aggregate_annotations({4, 4, 3}) == SentimentLabel::positive);  // mean 3.667
  CHECK(aggregate_annotations({2, 3}) == SentimentLabel::neutral);      // mean 2.5, strictly above 2.4

  // boundary means land exactly on the thresholds
  CHECK(aggregate_annotations({2, 2, 3, 2, 3}) == SentimentLabel::negative);  // mean 2.4
  CHECK(aggregate_annotations({4, 4, 3, 4, 3}) == SentimentLabel::positive);  // mean 3.6
  CHECK(aggregate_annotations({1, 2, 4, 2, 3}) == SentimentLabel::negative);  // 12/5

  CHECK_THROWS_AS(aggregate_annotations({}), DataError);
  CHECK_THROWS_AS(aggregate_annotations({0, 3}), DataError);
  CHECK_THROWS_AS(aggregate_annotations({3, 6}), DataError);
}

TEST_CASE("aggregate_annotations is permutation invariant") {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<int> scores;
    const std::size_t n = 1 + rng.next_below(8);
    for (std::size_t i = 0; i < n; ++i) scores.push_back(1 + static_cast<int>(rng.next_below(5)));
    const SentimentLabel expected = aggregate_annotations(scores);
    rng.shuffle(scores);
    CHECK(aggregate_annotations(scores) == expected);
  }
}

TEST_CASE("label parsing case-folds and rejects junk") {
  CHECK(label_from_string("POSITIVE") == SentimentLabel::positive);
  CHECK(label_from_string("Neutral") == SentimentLabel::neutral);
  CHECK_THROWS_AS(label_from_string("meh"), DataError);
}

TEST_CASE("load_corpus parses a small valid file in order") {
  const std::string path = temp_path("xlsent_corpus_ok.jsonl");
  write_lines(path, {
      R"({"id":"a","language":"sl","sentiment":"positive","paragraphs":["hello there."]})",
      R"({"id":"b","language":"sl","sentiment":"NEGATIVE","paragraphs":["p1","p2"],"raw_scores":[2,2]})",
      R"({"id":"c","language":"sl","sentiment":"neutral","paragraphs":["x"]})",
  });
  const LabeledDataset ds = load_corpus(path);
  REQUIRE(ds.size() == 3);
  CHECK(ds.at(0).id == "a");
  CHECK(ds.at(1).id == "b");
  CHECK(ds.at(1).sentiment == SentimentLabel::negative);  // case-folded
  CHECK(ds.at(2).id == "c");
  CHECK(ds.at(1).paragraphs.size() == 2);
  std::remove(path.c_str());
}

TEST_CASE("load_corpus reports schema violations with line numbers") {
  const std::string path = temp_path("xlsent_corpus_bad.jsonl");

  SUBCASE("missing paragraphs field") {
    write_lines(path, {
        R"({"id":"a","language":"sl","sentiment":"positive","paragraphs":["ok"]})",
        R"({"id":"b","language":"sl","sentiment":"positive"})",
    });
    CHECK_THROWS_WITH_AS(load_corpus(path), "line 2: missing field \"paragraphs\"", DataError);
  }
  SUBCASE("duplicate id") {
    write_lines(path, {
        R"({"id":"a","language":"sl","sentiment":"positive","paragraphs":["x"]})",
        R"({"id":"a","language":"sl","sentiment":"negative","paragraphs":["y"]})",
    });
    CHECK_THROWS_AS(load_corpus(path), DataError);
  }
  SUBCASE("unknown label") {
    write_lines(path, {R"({"id":"a","language":"sl","sentiment":"great","paragraphs":["x"]})"});
    CHECK_THROWS_AS(load_corpus(path), DataError);
  }
  SUBCASE("raw scores disagree with the label") {
    write_lines(path, {R"({"id":"a","language":"sl","sentiment":"positive","paragraphs":["x"],"raw_scores":[1,1]})"});
    CHECK_THROWS_AS(load_corpus(path), DataError);
  }
  SUBCASE("empty file") {
    write_lines(path, {});
    CHECK_THROWS_AS(load_corpus(path), DataError);
  }
  SUBCASE("wrong language") {
    write_lines(path, {R"({"id":"a","language":"hr","sentiment":"positive","paragraphs":["x"]})"});
    CHECK_THROWS_AS(load_corpus(path, std::make_optional<std::string>("sl")), DataError);
  }
  std::remove(path.c_str());
}

TEST_CASE("save -> load round-trips byte-identically") {
  const std::string p1 = temp_path("xlsent_rt1.jsonl");
  const std::string p2 = temp_path("xlsent_rt2.jsonl");
  std::vector<Document> docs;
  Document d;
  d.id = "a";
  d.language = "sl";
  d.sentiment = SentimentLabel::neutral;
  d.paragraphs = {"prvi odstavek", "drugi odstavek."};
  d.raw_scores = std::vector<int>{3, 3};
  d.paragraph_sentiments = std::vector<SentimentLabel>{SentimentLabel::neutral, SentimentLabel::positive};
  docs.push_back(d);
  save_corpus(LabeledDataset(std::move(docs)), p1);
  save_corpus(load_corpus(p1), p2);
  CHECK(read_file(p1) == read_file(p2));
  std::remove(p1.c_str());
  std::remove(p2.c_str());
}

TEST_CASE("corpus_stats basics") {
  std::vector<Document> docs;
  Document a;
  a.id = "a";
  a.language = "sl";
  a.sentiment = SentimentLabel::positive;
  a.paragraphs = {"Hi there. Bye."};
  Document b;
  b.id = "b";
  b.language = "sl";
  b.sentiment = SentimentLabel::negative;
  b.paragraphs = {"One two three"};
  docs.push_back(a);
  docs.push_back(b);
  const CorpusStats stats = corpus_stats(LabeledDataset(std::move(docs)));
  CHECK(stats.doc_count == 2);
  CHECK(stats.sentence_count == 2);  // terminal-punctuation rule, second doc has none
  CHECK(stats.class_percentages.at(SentimentLabel::positive) == TApprox(50.0));
  CHECK(stats.class_percentages.at(SentimentLabel::neutral) == TApprox(0.0));
  CHECK(stats.class_percentages.at(SentimentLabel::negative) == TApprox(50.0));
  double pct_sum = 0.0;
  for (const auto& [label, pct] : stats.class_percentages) pct_sum += pct;
  CHECK(pct_sum == TApprox(100.0).epsilon(1e-4));
  CHECK(stats_csv_header().rfind("language,", 0) == 0);
}

TEST_CASE("make_folds sizes and determinism") {
  SUBCASE("N=100 k=10") {
    const LabeledDataset ds = tiny_dataset(100);
    const auto plans = make_folds(ds, 10, 42);
    REQUIRE(plans.size() == 10);
    for (const FoldPlan& plan : plans) {
      CHECK(plan.test_ids.size() == 10);
      CHECK(plan.train_ids.size() == 72);  // floor(0.8 * 90)
      CHECK(plan.val_ids.size() == 18);
    }
  }
  SUBCASE("N=10427 k=10 block sizes") {
    // the fold rule applied to the reference corpus size
    const std::size_t n = 10427;
    std::size_t base = n / 10, extra = n % 10, total = 0;
    for (std::size_t f = 0; f < 10; ++f) {
      const std::size_t block = base + (f < extra ? 1 : 0);
      CHECK((block == 1042 || block == 1043));
      total += block;
    }
    CHECK(total == n);
  }
  SUBCASE("identical seeds give byte-equal plans") {
    const LabeledDataset ds = tiny_dataset(37);
    const auto p1 = make_folds(ds, 5, 7);
    const auto p2 = make_folds(ds, 5, 7);
    REQUIRE(p1.size() == p2.size());
    for (std::size_t i = 0; i < p1.size(); ++i) CHECK(p1[i].to_json() == p2[i].to_json());
    const auto p3 = make_folds(ds, 5, 8);
    CHECK(p1[0].to_json() != p3[0].to_json());
  }
  SUBCASE("k larger than dataset") {
    const LabeledDataset ds = tiny_dataset(5);
    CHECK_THROWS_AS(make_folds(ds, 10, 1), DataError);
  }
}

TEST_CASE("fold plans partition the ids") {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 20 + static_cast<int>(rng.next_below(300));
    const int k = 2 + static_cast<int>(rng.next_below(9));
    const LabeledDataset ds = tiny_dataset(n);
    const auto plans = make_folds(ds, k, rng.next_u64());
    std::set<std::string> all_test;
    for (const FoldPlan& plan : plans) {
      std::set<std::string> test(plan.test_ids.begin(), plan.test_ids.end());
      std::set<std::string> train(plan.train_ids.begin(), plan.train_ids.end());
      std::set<std::string> val(plan.val_ids.begin(), plan.val_ids.end());
      CHECK(test.size() + train.size() + val.size() == static_cast<std::size_t>(n));
      for (const std::string& id : train) CHECK(test.count(id) == 0);
      for (const std::string& id : val) {
        CHECK(test.count(id) == 0);
        CHECK(train.count(id) == 0);
      }
      for (const std::string& id : test) CHECK(all_test.insert(id).second);  // unique across folds
    }
    CHECK(all_test.size() == static_cast<std::size_t>(n));
  }
}

TEST_CASE("fold plan JSON round-trip") {
  const LabeledDataset ds = tiny_dataset(23);
  const auto plans = make_folds(ds, 4, 99);
  const FoldPlan restored = FoldPlan::from_json(plans[2].to_json());
  CHECK(restored.to_json() == plans[2].to_json());
  CHECK(restored.fold_index == 2);
  CHECK(restored.seed == 99);
}

TEST_CASE("paragraph_view yields only train and val paragraphs") {
  const LabeledDataset ds = tiny_dataset(10);
  const auto plans = make_folds(ds, 5, 123);
  for (const FoldPlan& plan : plans) {
    const std::set<std::string> test(plan.test_ids.begin(), plan.test_ids.end());
    const ParagraphDataset view = paragraph_view(ds, plan);
    CHECK(view.paragraphs.size() == 2 * (ds.size() - test.size()));  // two paragraphs per document
    for (const Paragraph& p : view.paragraphs) {
      CHECK(test.count(p.doc_id) == 0);
      CHECK(p.index < view.doc_lengths.at(p.doc_id));
      CHECK(p.sentiment.has_value());  // inherits the document label here
    }
  }
}

TEST_CASE("paragraph_view error paths") {
  const LabeledDataset ds = tiny_dataset(4);
  FoldPlan plan;
  plan.test_ids = {"doc-0"};
  plan.train_ids = {"doc-1", "doc-2"};
  plan.val_ids = {"doc-3"};

  SUBCASE("unknown id") {
    plan.train_ids.push_back("ghost");
    CHECK_THROWS_AS(paragraph_view(ds, plan), DataError);
  }
  SUBCASE("no pretraining data") {
    plan.train_ids.clear();
    plan.val_ids.clear();
    CHECK_THROWS_WITH_AS(paragraph_view(ds, plan),
                         "paragraph_view: no pre-training data (train and val are empty)", DataError);
  }
  SUBCASE("paragraph order and indices") {
    const ParagraphDataset view = paragraph_view(ds, plan);
    REQUIRE(view.paragraphs.size() == 6);
    CHECK(view.paragraphs[0].index == 0);
    CHECK(view.paragraphs[1].index == 1);
  }
}

TEST_CASE("explicit paragraph sentiments flow into the view") {
  std::vector<Document> docs;
  Document d;
  d.id = "a";
  d.language = "sl";
  d.sentiment = SentimentLabel::positive;
  d.paragraphs = {"good stuff", "filler text"};
  d.paragraph_sentiments = std::vector<SentimentLabel>{SentimentLabel::positive, SentimentLabel::neutral};
  docs.push_back(d);
  Document e = d;
  e.id = "b";
  e.paragraph_sentiments.reset();
  docs.push_back(e);
  const LabeledDataset ds(std::move(docs));
  FoldPlan plan;
  plan.train_ids = {"a", "b"};
  const ParagraphDataset view = paragraph_view(ds, plan);
  CHECK(view.paragraphs[1].sentiment == SentimentLabel::neutral);   // explicit
  CHECK(view.paragraphs[3].sentiment == SentimentLabel::positive);  // inherited
}
