#include <doctest.h>

#include "testutil.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "xlsent/clients.hpp"
#include "xlsent/errors.hpp"
#include "xlsent/icl.hpp"
#include "xlsent/synth.hpp"

using namespace xlsent;

namespace {

// Independently transcribed copy of the instruction text the prompt builder
// must emit byte-for-byte.
const std::string kExpectedSystemPrompt =
    std::string("Welcome to your role as a Sentiment Analyst. Your job is crucial and involves ") +
    "meticulously reading and understanding the text provided to determine its overall sentiment. " +
    "It's important to approach this task with attention to detail, considering the subtleties of " +
    "language, tone, context, and the intent behind the words.\n\n" +
    "As a Sentiment Analyst, your primary task today is to analyze the following news article. " +
    "After a thorough review, classify the sentiment of the article as \"positive,\" \"negative,\" " +
    "or \"neutral.\" Remember, your analysis must be based on concrete evidence from the text. " +
    "As an output you need to only provide the sentiment, so output \"positive\" if the sentiment " +
    "is positive, \"neutral\" if the sentiment is neutral, and \"negative\" if the sentiment is negative.";

LabeledDataset make_pool(int per_label) {
  std::vector<Document> docs;
  int counter = 0;
  for (int round = 0; round < per_label; ++round) {
    for (SentimentLabel label : kAllLabels) {
      Document d;
      d.id = "pool-" + std::to_string(counter++);
      d.language = "en";
      d.sentiment = label;
      d.paragraphs = {"example text " + std::to_string(counter), "second paragraph"};
      docs.push_back(std::move(d));
    }
  }
  return LabeledDataset(std::move(docs));
}

std::size_t count_occurrences(const std::string& haystack, const std::string& needle) {
  std::size_t count = 0, pos = 0;
  while ((pos = haystack.find(needle, pos)) != std::string::npos) {
    ++count;
    pos += needle.size();
  }
  return count;
}

}  // namespace

TEST_CASE("system prompt is byte-identical to the fixed instruction text") {
  CHECK(std::string(kIclSystemPrompt) == kExpectedSystemPrompt);
  const PromptBundle bundle = build_prompt(0, make_pool(1), "article body");
  CHECK(bundle.system_prompt == kExpectedSystemPrompt);
  CHECK(bundle.rendered.rfind(kExpectedSystemPrompt, 0) == 0);
}

TEST_CASE("prompt shape per shot count") {
  const LabeledDataset pool = make_pool(4);

  SUBCASE("zero-shot") {
    const PromptBundle bundle = build_prompt(0, pool, "the query");
    CHECK(bundle.shots.empty());
    CHECK(bundle.rendered == kExpectedSystemPrompt + "\n\nArticle >> the query <<, sentiment:");
  }
  SUBCASE("one per label") {
    const PromptBundle bundle = build_prompt(1, pool, "the query");
    CHECK(bundle.shots.size() == 3);
    CHECK(bundle.shot_ids.size() == 3);
    int label_counts[3] = {0, 0, 0};
    for (const auto& [text, label] : bundle.shots) ++label_counts[static_cast<int>(label)];
    CHECK(label_counts[0] == 1);
    CHECK(label_counts[1] == 1);
    CHECK(label_counts[2] == 1);
  }
  SUBCASE("three per label") {
    const PromptBundle bundle = build_prompt(3, pool, "the query");
    CHECK(bundle.shots.size() == 9);
    // 9 complete example slots plus the one incomplete trailing slot
    CHECK(count_occurrences(bundle.rendered, "Article >> ") == 10);
    CHECK(count_occurrences(bundle.rendered, "<<, sentiment: ") == 9);
    CHECK(bundle.rendered.substr(bundle.rendered.size() - 15) == " <<, sentiment:");
  }
  SUBCASE("first-k selection follows pool order") {
    const PromptBundle bundle = build_prompt(1, pool, "q");
    CHECK(bundle.shot_ids == std::vector<std::string>{"pool-0", "pool-1", "pool-2"});
  }
  SUBCASE("insufficient pool") {
    CHECK_THROWS_AS(build_prompt(3, make_pool(2), "q"), DataError);
    CHECK_THROWS_AS(build_prompt(2, pool, "q"), DataError);  // only 0/1/3 allowed
    CHECK_THROWS_AS(build_prompt(1, pool, ""), DataError);
  }
}

TEST_CASE("parse_response normalization and first-occurrence rule") {
  CHECK(parse_response("positive") == SentimentLabel::positive);
  CHECK(parse_response(" Negative.\n") == SentimentLabel::negative);
  CHECK(parse_response("NEUTRAL!") == SentimentLabel::neutral);
  CHECK(parse_response("the tone is mixed") == std::nullopt);
  CHECK(parse_response("") == std::nullopt);
  CHECK(parse_response("negative, though arguably positive") == SentimentLabel::negative);
  CHECK(parse_response("I'd say positive rather than negative") == SentimentLabel::positive);
  // idempotence on its own canonical output
  CHECK(parse_response(to_string(*parse_response("Positive??"))) == SentimentLabel::positive);
}

TEST_CASE("icl_evaluate with a gold-echo stub scores a perfect F1") {
  SynthConfig synth;
  synth.train_docs = 60;
  synth.target_docs = 45;
  synth.seed = 21;
  const auto [pool, target] = generate_synthetic_pair(synth);

  FileBackedLlmClient gold = make_gold_echo_client(target);
  IdentityTranslationClient identity;
  IclOptions options;
  options.shots_per_label = 1;
  options.folds = 5;

  SUBCASE("without translation") {
    const IclResult result = icl_evaluate(gold, nullptr, target, pool, options);
    CHECK(result.evaluated_count == target.size());  // pool and target are disjoint
    CHECK(result.mean_f1 == TApprox(100.0));
    CHECK(result.std_f1 == TApprox(0.0));
    CHECK(result.invalid_doc_ids.empty());
  }
  SUBCASE("with identity translation") {
    options.translate = true;
    const IclResult result = icl_evaluate(gold, &identity, target, pool, options);
    CHECK(result.mean_f1 == TApprox(100.0));
  }
}

TEST_CASE("shot documents are excluded when evaluating the pool language itself") {
  SynthConfig synth;
  synth.train_docs = 60;
  synth.target_docs = 30;
  synth.seed = 33;
  const auto [corpus, _] = generate_synthetic_pair(synth);

  FileBackedLlmClient gold = make_gold_echo_client(corpus);
  IclOptions options;
  options.shots_per_label = 3;
  options.folds = 3;
  const IclResult result = icl_evaluate(gold, nullptr, corpus, corpus, options);
  CHECK(result.evaluated_count == corpus.size() - 9);
  CHECK(result.shot_ids.size() == 9);
  for (const std::string& shot_id : result.shot_ids) {
    CHECK(corpus.contains(shot_id));
  }
}

TEST_CASE("a constant-neutral stub on a balanced target scores (0 + 0.5 + 0) / 3") {
  SynthConfig synth;
  synth.train_docs = 60;
  synth.target_docs = 30;  // divisible by 3: perfectly balanced
  synth.seed = 44;
  const auto [pool, target] = generate_synthetic_pair(synth);

  FixedResponseLlmClient neutral_client("neutral");
  IclOptions options;
  options.shots_per_label = 0;
  options.folds = 1;  // a single slice keeps every class present
  const IclResult result = icl_evaluate(neutral_client, nullptr, target, pool, options);
  CHECK(result.mean_f1 == TApprox(100.0 / 6.0).margin(1e-9));
}

TEST_CASE("invalid responses count as incorrect") {
  SynthConfig synth;
  synth.train_docs = 60;
  synth.target_docs = 30;
  synth.seed = 55;
  const auto [pool, target] = generate_synthetic_pair(synth);

  FixedResponseLlmClient confused("cannot determine the tone");
  IclOptions options;
  options.shots_per_label = 0;
  options.folds = 1;
  const IclResult result = icl_evaluate(confused, nullptr, target, pool, options);
  CHECK(result.mean_f1 == TApprox(0.0));
  CHECK(result.invalid_doc_ids.size() == target.size());
}

TEST_CASE("translation clients: identity, capability, caching") {
  SUBCASE("identity returns the input") {
    IdentityTranslationClient identity;
    CHECK(translate(identity, "nekaj besedila", "sl", "en") == "nekaj besedila");
  }
  SUBCASE("undeclared pair is a capability error") {
    IdentityTranslationClient restricted(std::set<std::pair<std::string, std::string>>{{"sl", "en"}});
    CHECK(translate(restricted, "ok", "sl", "en") == "ok");
    CHECK_THROWS_AS(translate(restricted, "no", "xx", "en"), DataError);
  }
  SUBCASE("cache serves repeats without calling the backend") {
    namespace fs = std::filesystem;
    const std::string cache_path = (fs::temp_directory_path() / "xlsent_cache.jsonl").string();
    std::remove(cache_path.c_str());
    auto inner = std::make_shared<IdentityTranslationClient>();
    CachingTranslationClient cached(inner, cache_path);
    CHECK(cached.translate("hello world", "sl", "en") == "hello world");
    CHECK(cached.translate("hello world", "sl", "en") == "hello world");
    CHECK(cached.backend_calls() == 1);

    // a fresh instance reloads the persisted cache
    CachingTranslationClient reloaded(inner, cache_path);
    CHECK(reloaded.translate("hello world", "sl", "en") == "hello world");
    CHECK(reloaded.backend_calls() == 0);
    std::remove(cache_path.c_str());
  }
}

TEST_CASE("file-backed stub errors carry the document id") {
  FileBackedLlmClient stub(std::map<std::string, std::string>{{"a", "positive"}});
  CHECK(stub.complete({"a", "prompt"}) == "positive");
  CHECK_THROWS_WITH_AS(stub.complete({"ghost", "prompt"}),
                       "LLM stub has no response for document \"ghost\"", DataError);
}
