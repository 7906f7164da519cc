#include <doctest.h>

#include "testutil.hpp"

#include <set>

#include "xlsent/corpus.hpp"
#include "xlsent/synth.hpp"
#include "xlsent/tokenizer.hpp"

using namespace xlsent;

TEST_CASE("generator emits balanced, schema-valid paired corpora") {
  SynthConfig config;
  config.train_docs = 90;
  config.target_docs = 45;
  config.seed = 3;
  const auto [a, b] = generate_synthetic_pair(config);

  CHECK(a.size() == 90);
  CHECK(b.size() == 45);
  CHECK(a.at(0).language == "aa");
  CHECK(b.at(0).language == "bb");

  int counts[3] = {0, 0, 0};
  for (const Document& d : a.documents()) {
    ++counts[static_cast<int>(d.sentiment)];
    CHECK(!d.paragraphs.empty());
    REQUIRE(d.paragraph_sentiments.has_value());
    CHECK(d.paragraph_sentiments->size() == d.paragraphs.size());
    if (d.raw_scores) CHECK(aggregate_annotations(*d.raw_scores) == d.sentiment);
    // neutral documents never carry polar paragraphs
    if (d.sentiment == SentimentLabel::neutral) {
      for (SentimentLabel p : *d.paragraph_sentiments) CHECK(p == SentimentLabel::neutral);
    }
  }
  CHECK(counts[0] == 30);
  CHECK(counts[1] == 30);
  CHECK(counts[2] == 30);
}

TEST_CASE("generator is deterministic per seed") {
  SynthConfig config;
  config.train_docs = 20;
  config.target_docs = 10;
  const auto [a1, b1] = generate_synthetic_pair(config);
  const auto [a2, b2] = generate_synthetic_pair(config);
  REQUIRE(a1.size() == a2.size());
  for (std::size_t i = 0; i < a1.size(); ++i) {
    CHECK(a1.at(i).paragraphs == a2.at(i).paragraphs);
    CHECK(a1.at(i).sentiment == a2.at(i).sentiment);
  }
  config.seed = 8;
  const auto [a3, b3] = generate_synthetic_pair(config);
  CHECK(a1.at(0).paragraphs != a3.at(0).paragraphs);
}

TEST_CASE("the two pseudo-languages share roughly the configured stem fraction") {
  SynthConfig config;
  config.train_docs = 300;
  config.target_docs = 300;
  config.shared_stems = 0.6;
  config.seed = 12;
  const auto [a, b] = generate_synthetic_pair(config);

  auto vocabulary_of = [](const LabeledDataset& corpus) {
    std::set<std::string> words;
    for (const Document& d : corpus.documents()) {
      for (const std::string& p : d.paragraphs) {
        for (const std::string& w : word_tokens(p)) words.insert(w);
      }
    }
    return words;
  };
  const std::set<std::string> va = vocabulary_of(a);
  const std::set<std::string> vb = vocabulary_of(b);
  std::size_t shared = 0;
  for (const std::string& w : va) shared += vb.count(w);
  const double share_of_a = static_cast<double>(shared) / static_cast<double>(va.size());
  // both corpora are large enough to realize almost every stem
  CHECK(share_of_a > 0.45);
  CHECK(share_of_a < 0.75);
}
